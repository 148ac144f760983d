//! LDGT: little-endian binary container for layered depth.
//!
//! ```text
//! "LDGT" | version u32 = 1 | width u32 | height u32 | max_layers u32
//!        | flags u32 (bit 0: mask present) | reserved u32
//! counts   u8 × width·height, row-major
//! depths   f32, pixel-major then layer-major, exactly count entries per pixel
//! mask     u8 0/1 × width·height, row-major (only when flag bit 0 is set)
//! ```

use std::path::Path;

use super::{LayeredDepthMap, TransMask};
use crate::fsutil::write_atomic;

pub const LDGT_MAGIC: [u8; 4] = *b"LDGT";
pub const LDGT_VERSION: u32 = 1;
pub const LDGT_HEADER_LEN: usize = 28;
const FLAG_MASK: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum LdgtError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic {0:?}, expected \"LDGT\"")]
    BadMagic([u8; 4]),
    #[error("unsupported LDGT version {0}")]
    UnsupportedVersion(u32),
    #[error("truncated LDGT data: need {needed} bytes, have {actual}")]
    Truncated { needed: usize, actual: usize },
    #[error("invalid LDGT content: {0}")]
    Invalid(String),
}

/// Serializes a map and optional mask.
pub fn encode_ldgt(map: &LayeredDepthMap, mask: Option<&TransMask>) -> Result<Vec<u8>, LdgtError> {
    if let Some(m) = mask {
        if m.width() != map.width() || m.height() != map.height() {
            return Err(LdgtError::Invalid("mask dimensions differ from map".into()));
        }
    }
    let n = map.pixel_count();
    let total: usize = map.counts().iter().map(|&c| c as usize).sum();
    let mut out = Vec::with_capacity(LDGT_HEADER_LEN + n + 4 * total + n);
    out.extend_from_slice(&LDGT_MAGIC);
    for v in [
        LDGT_VERSION,
        map.width(),
        map.height(),
        map.max_layers(),
        if mask.is_some() { FLAG_MASK } else { 0 },
        0,
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(map.counts());
    for i in 0..n {
        for &d in map.layers_at(i) {
            if !(d.is_finite() && d > 0.0) {
                return Err(LdgtError::Invalid(format!(
                    "pixel {i}: depth {d} is not finite and positive"
                )));
            }
            out.extend_from_slice(&d.to_le_bytes());
        }
    }
    if let Some(m) = mask {
        out.extend(m.as_slice().iter().map(|&b| b as u8));
    }
    Ok(out)
}

fn need(bytes: &[u8], needed: usize) -> Result<(), LdgtError> {
    if bytes.len() < needed {
        Err(LdgtError::Truncated {
            needed,
            actual: bytes.len(),
        })
    } else {
        Ok(())
    }
}

/// Parses LDGT bytes. Nothing is returned unless the whole payload is valid.
pub fn decode_ldgt(bytes: &[u8]) -> Result<(LayeredDepthMap, Option<TransMask>), LdgtError> {
    need(bytes, 4)?;
    let magic: [u8; 4] = bytes[..4].try_into().expect("length checked");
    if magic != LDGT_MAGIC {
        return Err(LdgtError::BadMagic(magic));
    }
    need(bytes, LDGT_HEADER_LEN)?;
    let word = |k: usize| u32::from_le_bytes(bytes[4 + 4 * k..8 + 4 * k].try_into().expect("in header"));
    let (version, width, height, max_layers, flags) = (word(0), word(1), word(2), word(3), word(4));
    if version != LDGT_VERSION {
        return Err(LdgtError::UnsupportedVersion(version));
    }
    if !(1..=255).contains(&max_layers) {
        return Err(LdgtError::Invalid(format!("max_layers {max_layers} outside 1..=255")));
    }
    let n = width as usize * height as usize;
    let mut pos = LDGT_HEADER_LEN;
    need(bytes, pos + n)?;
    let counts = &bytes[pos..pos + n];
    pos += n;
    if let Some(i) = counts.iter().position(|&c| c as u32 > max_layers) {
        return Err(LdgtError::Invalid(format!(
            "pixel {i} has {} layers, max is {max_layers}",
            counts[i]
        )));
    }
    let total: usize = counts.iter().map(|&c| c as usize).sum();
    let has_mask = flags & FLAG_MASK != 0;
    let end = pos + 4 * total + if has_mask { n } else { 0 };
    need(bytes, end)?;
    if bytes.len() > end {
        return Err(LdgtError::Invalid(format!(
            "{} trailing bytes after payload",
            bytes.len() - end
        )));
    }
    let mut map = LayeredDepthMap::new(width, height, max_layers);
    let mut buf = Vec::with_capacity(max_layers as usize);
    for (i, &c) in counts.iter().enumerate() {
        buf.clear();
        for _ in 0..c {
            let d = f32::from_le_bytes(bytes[pos..pos + 4].try_into().expect("length checked"));
            if !(d.is_finite() && d > 0.0) {
                return Err(LdgtError::Invalid(format!("pixel {i}: depth {d} is not finite and positive")));
            }
            buf.push(d);
            pos += 4;
        }
        map.set_index(i, &buf);
    }
    let mask = if has_mask {
        let raw = &bytes[pos..pos + n];
        if raw.iter().any(|&b| b > 1) {
            return Err(LdgtError::Invalid("mask bytes must be 0 or 1".into()));
        }
        Some(TransMask::from_vec(width, height, raw.iter().map(|&b| b == 1).collect()))
    } else {
        None
    };
    Ok((map, mask))
}

/// Writes atomically (temporary file, then rename).
pub fn write_ldgt(map: &LayeredDepthMap, mask: Option<&TransMask>, path: &Path) -> Result<(), LdgtError> {
    let bytes = encode_ldgt(map, mask)?;
    write_atomic(path, &bytes)?;
    Ok(())
}

pub fn read_ldgt(path: &Path) -> Result<(LayeredDepthMap, Option<TransMask>), LdgtError> {
    decode_ldgt(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::DetRng;
    use proptest::prelude::*;

    #[test]
    fn one_pixel_zero_layers_size() {
        let map = LayeredDepthMap::new(1, 1, 1);
        let bytes = encode_ldgt(&map, Some(&TransMask::new(1, 1))).unwrap();
        // 4 magic + 6 u32 header words, one count byte, no depths, one mask byte.
        assert_eq!(LDGT_HEADER_LEN, 4 + 6 * 4);
        assert_eq!(bytes.len(), LDGT_HEADER_LEN + 1 + 0 + 1);
        assert_eq!(&bytes[..4], b"LDGT");
        assert_eq!(bytes[24..28], [0, 0, 0, 0]);
    }

    #[test]
    fn header_layout_is_little_endian() {
        let mut map = LayeredDepthMap::new(3, 2, 4);
        map.set(2, 1, &[1.0, 2.0]);
        let bytes = encode_ldgt(&map, None).unwrap();
        assert_eq!(&bytes[4..8], &1u32.to_le_bytes());
        assert_eq!(&bytes[8..12], &3u32.to_le_bytes());
        assert_eq!(&bytes[12..16], &2u32.to_le_bytes());
        assert_eq!(&bytes[16..20], &4u32.to_le_bytes());
        assert_eq!(&bytes[20..24], &0u32.to_le_bytes());
        assert_eq!(&bytes[28..34], &[0, 0, 0, 0, 0, 2]);
        assert_eq!(&bytes[34..38], &1.0f32.to_le_bytes());
        assert_eq!(bytes.len(), 28 + 6 + 8);
    }

    #[test]
    fn truncation_and_corruption_are_reported() {
        let mut map = LayeredDepthMap::new(4, 4, 3);
        map.set(1, 1, &[1.0, 1.5, 2.0]);
        let bytes = encode_ldgt(&map, Some(&TransMask::new(4, 4))).unwrap();
        for cut in [0, 3, 10, 30, bytes.len() - 1] {
            assert!(
                matches!(decode_ldgt(&bytes[..cut]), Err(LdgtError::Truncated { .. })),
                "cut at {cut}"
            );
        }
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode_ldgt(&bad), Err(LdgtError::BadMagic(_))));
        let mut bad = bytes.clone();
        bad[4] = 2;
        assert!(matches!(decode_ldgt(&bad), Err(LdgtError::UnsupportedVersion(2))));
        let mut bad = bytes;
        bad.push(0);
        assert!(matches!(decode_ldgt(&bad), Err(LdgtError::Invalid(_))));
    }

    fn random_map(seed: u64, w: u32, h: u32, max_layers: u32) -> (LayeredDepthMap, TransMask) {
        let mut rng = DetRng::new(seed);
        let mut map = LayeredDepthMap::new(w, h, max_layers);
        let mut mask = Vec::new();
        for i in 0..(w * h) as usize {
            let k = rng.below(max_layers as u64 + 1) as usize;
            let d: Vec<f32> = (0..k).map(|_| rng.range(0.01, 30.0) as f32).collect();
            map.set_index(i, &d);
            mask.push(rng.bernoulli(0.3));
        }
        (map, TransMask::from_vec(w, h, mask))
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(seed in any::<u64>(), w in 1u32..12, h in 1u32..12, l in 1u32..9, with_mask: bool) {
            let (map, mask) = random_map(seed, w, h, l);
            let mask = with_mask.then_some(mask);
            let bytes = encode_ldgt(&map, mask.as_ref()).unwrap();
            let (back, back_mask) = decode_ldgt(&bytes).unwrap();
            prop_assert_eq!(encode_ldgt(&back, back_mask.as_ref()).unwrap(), bytes);
            prop_assert_eq!(back_mask, mask);
            for i in 0..map.pixel_count() {
                prop_assert_eq!(back.layers_at(i), map.layers_at(i));
            }
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = std::env::temp_dir().join(format!("ldgt-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("a.ldgt");
        let (map, mask) = random_map(5, 7, 5, 4);
        write_ldgt(&map, Some(&mask), &path).unwrap();
        let (back, back_mask) = read_ldgt(&path).unwrap();
        assert_eq!(back_mask.unwrap(), mask);
        assert_eq!(encode_ldgt(&back, None).unwrap(), encode_ldgt(&map, None).unwrap());
        std::fs::remove_dir_all(dir).unwrap();
    }
}
