use serde::{Deserialize, Serialize};

use super::{AlignmentMode, LayerStrategy, MetricsError, CLIP_RANGE};
use crate::render::LayeredDepthMap;

pub fn clip_depth(v: f64) -> f64 {
    clip_to(v, CLIP_RANGE)
}

pub fn clip_to(v: f64, (lo, hi): (f64, f64)) -> f64 {
    v.clamp(lo, hi)
}

/// Additive accumulator for the depth metrics over any number of pixels.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DepthSums {
    pub pixels: u64,
    pub abs_rel: f64,
    pub squared: f64,
    pub inliers1: u64,
    pub inliers2: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthStats {
    pub abs_rel: f64,
    pub rms: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub pixels: u64,
}

impl DepthSums {
    /// Adds one pixel; both values are clipped to [`CLIP_RANGE`] first.
    pub fn add(&mut self, pred: f64, gt: f64) {
        self.add_in(pred, gt, CLIP_RANGE)
    }

    pub fn add_in(&mut self, pred: f64, gt: f64, clip: (f64, f64)) {
        let (p, g) = (clip_to(pred, clip), clip_to(gt, clip));
        let ratio = (p / g).max(g / p);
        self.pixels += 1;
        self.abs_rel += (p - g).abs() / g;
        self.squared += (p - g) * (p - g);
        self.inliers1 += (ratio < 1.25) as u64;
        self.inliers2 += (ratio < 1.25 * 1.25) as u64;
    }

    pub fn merge(&mut self, o: &DepthSums) {
        self.pixels += o.pixels;
        self.abs_rel += o.abs_rel;
        self.squared += o.squared;
        self.inliers1 += o.inliers1;
        self.inliers2 += o.inliers2;
    }

    pub fn finish(&self) -> Result<DepthStats, MetricsError> {
        if self.pixels == 0 {
            return Err(MetricsError::EmptyMask);
        }
        let n = self.pixels as f64;
        Ok(DepthStats {
            abs_rel: self.abs_rel / n,
            rms: (self.squared / n).sqrt(),
            delta1: self.inliers1 as f64 / n,
            delta2: self.inliers2 as f64 / n,
            pixels: self.pixels,
        })
    }
}

fn check_len(pred: &[f64], gt: &[f64], mask: &[bool]) -> Result<(), MetricsError> {
    if pred.len() != gt.len() || gt.len() != mask.len() {
        return Err(MetricsError::Dimensions(format!(
            "pred {}, gt {}, mask {}",
            pred.len(),
            gt.len(),
            mask.len()
        )));
    }
    Ok(())
}

/// Masked sums of clipped `pred` against clipped `gt`.
pub fn depth_sums(pred: &[f64], gt: &[f64], mask: &[bool]) -> Result<DepthSums, MetricsError> {
    depth_sums_in(pred, gt, mask, CLIP_RANGE)
}

pub fn depth_sums_in(pred: &[f64], gt: &[f64], mask: &[bool], clip: (f64, f64)) -> Result<DepthSums, MetricsError> {
    check_len(pred, gt, mask)?;
    let mut s = DepthSums::default();
    for i in (0..mask.len()).filter(|&i| mask[i]) {
        s.add_in(pred[i], gt[i], clip);
    }
    Ok(s)
}

/// AbsRel, RMS, δ1 and δ2 over masked pixels.
pub fn depth_metrics(pred: &[f64], gt: &[f64], mask: &[bool]) -> Result<DepthStats, MetricsError> {
    depth_sums(pred, gt, mask)?.finish()
}

/// Least-squares `(a, b)` minimising `Σ (a·x + b − y)²`.
fn fit_line(x: &[f64], y: &[f64]) -> Result<(f64, f64), MetricsError> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    if !(sxx > 1e-300) {
        return Err(MetricsError::AlignmentDegenerate("prediction is constant on the mask".into()));
    }
    let a = sxy / sxx;
    Ok((a, my - a * mx))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Aligns `pred` to `gt` and clips the result. The fit uses masked pixels
/// whose reference lies inside the clip range; every pixel is transformed. [`AlignmentMode::Metric`] returns `pred` unchanged.
pub fn align(pred: &[f64], gt: &[f64], mask: &[bool], mode: AlignmentMode) -> Result<Vec<f64>, MetricsError> {
    align_in(pred, gt, mask, mode, CLIP_RANGE)
}

/// [`align`] with an explicit clip range.
pub fn align_in(
    pred: &[f64],
    gt: &[f64],
    mask: &[bool],
    mode: AlignmentMode,
    clip: (f64, f64),
) -> Result<Vec<f64>, MetricsError> {
    check_len(pred, gt, mask)?;
    if mode == AlignmentMode::Metric {
        return Ok(pred.to_vec());
    }
    let (lo, hi) = clip;
    let idx: Vec<usize> = (0..mask.len()).filter(|&i| mask[i] && gt[i] >= lo && gt[i] <= hi).collect();
    let g0 = idx.first().map(|&i| gt[i]);
    if idx.len() < 2 || idx.iter().all(|&i| Some(gt[i]) == g0) {
        return Err(MetricsError::AlignmentDegenerate(
            "need two masked in-range pixels with distinct reference depths".into(),
        ));
    }
    if let Some(&i) = idx.iter().find(|&&i| !pred[i].is_finite()) {
        return Err(MetricsError::Domain(format!("pixel {i}: pred {} gt {}", pred[i], gt[i])));
    }
    let ps: Vec<f64> = idx.iter().map(|&i| pred[i]).collect();
    let gs: Vec<f64> = idx.iter().map(|&i| gt[i]).collect();
    let out = match mode {
        AlignmentMode::Metric => unreachable!(),
        AlignmentMode::AffineDepth => {
            let (a, b) = fit_line(&ps, &gs)?;
            pred.iter().map(|&p| clip_to(a * p + b, clip)).collect()
        }
        AlignmentMode::Disparity => {
            // A non-positive depth has unbounded disparity; it is left out of the
            // fit and lands on the near bound.
            let (inv_p, inv_g): (Vec<f64>, Vec<f64>) =
                ps.iter().zip(&gs).filter(|(&p, _)| p > 0.0).map(|(p, g)| (1.0 / p, 1.0 / g)).unzip();
            let (a, b) = fit_line(&inv_p, &inv_g)?;
            pred.iter()
                .map(|&p| {
                    if p <= 0.0 {
                        return lo;
                    }
                    let disparity = a / p + b;
                    // Non-positive disparity is infinitely far: clip to the far bound.
                    if disparity > 0.0 {
                        clip_to(1.0 / disparity, clip)
                    } else {
                        hi
                    }
                })
                .collect()
        }
        AlignmentMode::ScaleThenShift => {
            let mp = median(ps.clone());
            if !(mp.abs() > 1e-300) {
                return Err(MetricsError::AlignmentDegenerate("median prediction is zero".into()));
            }
            let a = median(gs.clone()) / mp;
            let b = median(ps.iter().zip(&gs).map(|(p, g)| g - a * p).collect());
            pred.iter().map(|&p| clip_to(a * p + b, clip)).collect()
        }
    };
    Ok(out)
}

/// Per-pixel reference depth under `strategy`; NaN on pixels without layers.
/// `pred` is consulted only by [`LayerStrategy::Adapted`], which picks the
/// layer with the smallest absolute difference (first one on ties).
pub fn select_reference(gt: &LayeredDepthMap, pred: &[f64], strategy: LayerStrategy) -> Vec<f64> {
    (0..gt.pixel_count())
        .map(|i| {
            let layers = gt.layers_at(i);
            let v = match strategy {
                LayerStrategy::First => layers.first().copied(),
                LayerStrategy::Last => layers.last().copied(),
                LayerStrategy::Adapted => {
                    let p = pred[i];
                    layers
                        .iter()
                        .copied()
                        .reduce(|best, d| {
                            if ((d as f64) - p).abs() < ((best as f64) - p).abs() {
                                d
                            } else {
                                best
                            }
                        })
                }
            };
            v.map_or(f64::NAN, f64::from)
        })
        .collect()
}

/// Densifies `gt` to exactly `target` layers: a missing layer inherits the
/// value of the layer before it. Extra layers are dropped; empty pixels stay
/// empty.
pub fn snap_layers(gt: &LayeredDepthMap, target: u32) -> LayeredDepthMap {
    assert!(target >= 1, "snap target must be at least 1");
    let mut out = LayeredDepthMap::new(gt.width(), gt.height(), target);
    let mut buf = Vec::with_capacity(target as usize);
    for i in 0..gt.pixel_count() {
        let layers = gt.layers_at(i);
        buf.clear();
        buf.extend(layers.iter().take(target as usize));
        if let Some(&fill) = buf.last() {
            buf.resize(target as usize, fill);
        }
        out.set_index(i, &buf);
    }
    out
}

/// Scale-invariant log loss `sqrt(mean(g²) − λ·mean(g)²)` with
/// `g = log pred − log gt` over masked pixels.
pub fn silog_loss(pred: &[f64], gt: &[f64], mask: &[bool], lambda: f64) -> Result<f64, MetricsError> {
    check_len(pred, gt, mask)?;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(MetricsError::Domain(format!("lambda {lambda} outside [0, 1]")));
    }
    let (mut n, mut s, mut s2) = (0usize, 0.0, 0.0);
    for i in (0..mask.len()).filter(|&i| mask[i]) {
        let (p, g) = (pred[i], gt[i]);
        if !(p > 0.0 && g > 0.0 && p.is_finite() && g.is_finite()) {
            return Err(MetricsError::Domain(format!("pixel {i}: pred {p} gt {g} must be positive")));
        }
        let d = p.ln() - g.ln();
        n += 1;
        s += d;
        s2 += d * d;
    }
    if n == 0 {
        return Err(MetricsError::EmptyMask);
    }
    let (m, m2) = (s / n as f64, s2 / n as f64);
    Ok((m2 - lambda * m * m).max(0.0).sqrt())
}
