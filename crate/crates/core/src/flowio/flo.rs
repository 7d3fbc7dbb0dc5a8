use crate::error::{Error, Result};
use crate::flow::FlowField;
use crate::raster::BinaryMask;

/// Header tag of Middlebury `.flo` files (the bytes spell `PIEH`).
pub const FLO_MAGIC: f32 = 202021.25;

const HEADER_LEN: usize = 12;

/// Parses a Middlebury `.flo` buffer. Non-finite vectors come back invalid.
pub fn read_flo(bytes: &[u8]) -> Result<FlowField> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Length {
            expected: HEADER_LEN,
            actual: bytes.len(),
        });
    }
    let magic = f32::from_le_bytes(bytes[0..4].try_into().unwrap());
    if magic != FLO_MAGIC {
        return Err(Error::Format(format!("bad .flo magic {magic}")));
    }
    let width = i32::from_le_bytes(bytes[4..8].try_into().unwrap());
    let height = i32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if width <= 0 || height <= 0 {
        return Err(Error::Format(format!("bad .flo size {width}x{height}")));
    }
    let (width, height) = (width as usize, height as usize);
    let n = width
        .checked_mul(height)
        .ok_or_else(|| Error::Format("size overflow".into()))?;
    let expected = n
        .checked_mul(8)
        .and_then(|p| p.checked_add(HEADER_LEN))
        .ok_or_else(|| Error::Format("size overflow".into()))?;
    if bytes.len() < expected {
        return Err(Error::Length {
            expected,
            actual: bytes.len(),
        });
    }

    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    let mut valid = Vec::with_capacity(n);
    for px in bytes[HEADER_LEN..expected].chunks_exact(8) {
        let a = f32::from_le_bytes(px[0..4].try_into().unwrap());
        let b = f32::from_le_bytes(px[4..8].try_into().unwrap());
        let ok = a.is_finite() && b.is_finite();
        u.push(if ok { a as f64 } else { 0.0 });
        v.push(if ok { b as f64 } else { 0.0 });
        valid.push(ok);
    }
    FlowField::new(width, height, u, v, BinaryMask::new(width, height, valid)?)
}

/// Serializes to `.flo`. Invalid pixels are written as NaN.
pub fn write_flo(flow: &FlowField) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + flow.len() * 8);
    out.extend_from_slice(&FLO_MAGIC.to_le_bytes());
    out.extend_from_slice(&(flow.width() as i32).to_le_bytes());
    out.extend_from_slice(&(flow.height() as i32).to_le_bytes());
    let valid = flow.valid().data();
    for (i, &ok) in valid.iter().enumerate() {
        let (a, b) = if ok {
            (flow.u()[i] as f32, flow.v()[i] as f32)
        } else {
            (f32::NAN, f32::NAN)
        };
        out.extend_from_slice(&a.to_le_bytes());
        out.extend_from_slice(&b.to_le_bytes());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_assembled_single_pixel() {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&[0x50, 0x49, 0x45, 0x48]); // "PIEH"
        bytes.extend_from_slice(&1i32.to_le_bytes());
        bytes.extend_from_slice(&1i32.to_le_bytes());
        bytes.extend_from_slice(&[0x00, 0x00, 0xc0, 0x3f]); // 1.5f32
        bytes.extend_from_slice(&[0x00, 0x00, 0x00, 0xc0]); // -2.0f32
        let f = read_flo(&bytes).unwrap();
        assert_eq!((f.width(), f.height()), (1, 1));
        assert_eq!(f.at(0, 0), (1.5, -2.0));
        assert!(f.is_valid(0, 0));
        assert_eq!(write_flo(&f), bytes);
    }

    #[test]
    fn zero_field_layout() {
        let out = write_flo(&FlowField::zeros(1, 1));
        assert_eq!(out.len(), 20);
        assert!(out[12..].iter().all(|&b| b == 0));
        assert_eq!(write_flo(&FlowField::zeros(2, 1)).len(), 12 + 16);
    }

    #[test]
    fn zero_magic_is_format_error() {
        let mut bytes = write_flo(&FlowField::zeros(1, 1));
        bytes[0..4].copy_from_slice(&0f32.to_le_bytes());
        assert!(matches!(read_flo(&bytes), Err(Error::Format(_))));
    }

    #[test]
    fn truncated_payload_is_length_error() {
        let bytes = write_flo(&FlowField::zeros(3, 2));
        assert!(matches!(read_flo(&bytes[..bytes.len() - 1]), Err(Error::Length { .. })));
        assert!(matches!(read_flo(&bytes[..5]), Err(Error::Length { .. })));
    }

    #[test]
    fn nan_marks_invalid() {
        let valid = BinaryMask::new(2, 1, vec![true, false]).unwrap();
        let f = FlowField::new(2, 1, vec![1.0, 7.0], vec![2.0, 8.0], valid).unwrap();
        let bytes = write_flo(&f);
        assert!(f32::from_le_bytes(bytes[20..24].try_into().unwrap()).is_nan());
        let back = read_flo(&bytes).unwrap();
        assert_eq!(back.valid().data(), &[true, false]);
        assert_eq!(back.at(0, 0), (1.0, 2.0));
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(w in 1usize..6, h in 1usize..6, seed in any::<u64>()) {
            let vals: Vec<f32> = (0..w * h * 2)
                .map(|i| f32::from_bits(((seed.wrapping_mul(i as u64 + 1) >> 7) as u32) & 0x7f7f_ffff))
                .map(|x| if x.is_finite() { x } else { 1.0 })
                .collect();
            let u = vals.iter().step_by(2).map(|&x| x as f64).collect();
            let v = vals.iter().skip(1).step_by(2).map(|&x| x as f64).collect();
            let f = FlowField::dense(w, h, u, v).unwrap();
            let bytes = write_flo(&f);
            let back = read_flo(&bytes).unwrap();
            prop_assert_eq!(&back, &f);
            prop_assert_eq!(write_flo(&back), bytes);
        }
    }
}
