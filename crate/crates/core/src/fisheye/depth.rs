//! Depth maps and the PFM container.

use crate::error::{Error, Result};
use crate::raster::BinaryMask;

use super::camera::CameraModel;

/// How stored depth values relate to the scene point of a pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepthConvention {
    /// Distance from the optical center along the pixel ray.
    AlongRay,
    /// Coordinate along the optical axis.
    ZDepth,
}

/// Along-ray distances in meters. Non-finite or nonpositive values are
/// invalid.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
    valid: BinaryMask,
}

impl DepthMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height} depth with {} values",
                values.len()
            )));
        }
        let valid = values.iter().map(|d| d.is_finite() && *d > 0.0).collect();
        Ok(Self {
            width,
            height,
            valid: BinaryMask::new(width, height, valid)?,
            values,
        })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let values = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::new(width, height, values).expect("sizes agree")
    }

    /// Converts z-depth to along-ray distance using the camera rays.
    pub fn from_z_depth(cam: &CameraModel, width: usize, height: usize, z: &[f64]) -> Result<Self> {
        if width != cam.width() || height != cam.height() {
            return Err(Error::DimensionMismatch(format!(
                "depth {width}x{height} vs camera {}x{}",
                cam.width(),
                cam.height()
            )));
        }
        if z.len() != width * height {
            return Err(Error::DimensionMismatch("z-depth length".into()));
        }
        let mut values = Vec::with_capacity(z.len());
        for y in 0..height {
            for x in 0..width {
                let d = z[y * width + x];
                let along = match cam.unproject((x as f64, y as f64)) {
                    Ok(ray) if ray.z > 1e-12 => d / ray.z,
                    _ => f64::NAN,
                };
                values.push(along);
            }
        }
        Self::new(width, height, values)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn valid(&self) -> &BinaryMask {
        &self.valid
    }

    pub fn get(&self, x: usize, y: usize) -> Option<f64> {
        let i = y * self.width + x;
        self.valid.data()[i].then(|| self.values[i])
    }

    pub fn scaled(&self, factor: f64) -> DepthMap {
        DepthMap::new(
            self.width,
            self.height,
            self.values.iter().map(|d| d * factor).collect(),
        )
        .expect("same size")
    }

    /// Parses a grayscale PFM and converts it to along-ray depth.
    pub fn from_pfm(bytes: &[u8], convention: DepthConvention, cam: &CameraModel) -> Result<Self> {
        let (w, h, data) = read_pfm(bytes)?;
        let data: Vec<f64> = data.into_iter().map(f64::from).collect();
        match convention {
            DepthConvention::AlongRay => {
                if w != cam.width() || h != cam.height() {
                    return Err(Error::DimensionMismatch(format!(
                        "depth {w}x{h} vs camera {}x{}",
                        cam.width(),
                        cam.height()
                    )));
                }
                Self::new(w, h, data)
            }
            DepthConvention::ZDepth => Self::from_z_depth(cam, w, h, &data),
        }
    }

    /// Little-endian PFM of the along-ray values; invalid pixels become NaN.
    pub fn to_pfm(&self) -> Vec<u8> {
        let data: Vec<f32> = self
            .values
            .iter()
            .zip(self.valid.data())
            .map(|(&d, &ok)| if ok { d as f32 } else { f32::NAN })
            .collect();
        write_pfm(self.width, self.height, &data)
    }
}

/// Reads a single-channel (`Pf`) PFM, returning rows top to bottom.
pub fn read_pfm(bytes: &[u8]) -> Result<(usize, usize, Vec<f32>)> {
    let mut fields = Vec::with_capacity(4);
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Format("truncated PFM header".into()));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| Error::Format("PFM header".into()))?);
    }
    // exactly one whitespace byte separates the header from the payload
    pos += 1;
    match fields[0] {
        "Pf" => {}
        "PF" => return Err(Error::Format("color PFM is not a depth map".into())),
        other => return Err(Error::Format(format!("bad PFM tag `{other}`"))),
    }
    let parse = |s: &str| s.parse::<usize>().map_err(|_| Error::Format(format!("bad PFM size `{s}`")));
    let (w, h) = (parse(fields[1])?, parse(fields[2])?);
    let scale: f64 = fields[3]
        .parse()
        .map_err(|_| Error::Format(format!("bad PFM scale `{}`", fields[3])))?;
    if w == 0 || h == 0 || scale == 0.0 {
        return Err(Error::Format("degenerate PFM".into()));
    }
    let expected = pos + w * h * 4;
    if bytes.len() < expected {
        return Err(Error::Length {
            expected,
            actual: bytes.len(),
        });
    }
    let little = scale < 0.0;
    let mut out = vec![0.0f32; w * h];
    for (i, chunk) in bytes[pos..expected].chunks_exact(4).enumerate() {
        let raw: [u8; 4] = chunk.try_into().unwrap();
        let v = if little {
            f32::from_le_bytes(raw)
        } else {
            f32::from_be_bytes(raw)
        };
        // PFM stores rows bottom to top
        let (row, col) = (i / w, i % w);
        out[(h - 1 - row) * w + col] = v;
    }
    Ok((w, h, out))
}

pub fn write_pfm(width: usize, height: usize, data: &[f32]) -> Vec<u8> {
    let mut out = format!("Pf\n{width} {height}\n-1.0\n").into_bytes();
    for row in (0..height).rev() {
        for v in &data[row * width..(row + 1) * width] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pfm_round_trip_keeps_row_order() {
        let data: Vec<f32> = (0..6).map(|i| i as f32 + 0.5).collect();
        let bytes = write_pfm(3, 2, &data);
        assert!(bytes.starts_with(b"Pf\n3 2\n-1.0\n"));
        // first stored row is the bottom image row
        assert_eq!(f32::from_le_bytes(bytes[12..16].try_into().unwrap()), 3.5);
        assert_eq!(read_pfm(&bytes).unwrap(), (3, 2, data));
    }

    #[test]
    fn pfm_errors() {
        assert!(matches!(read_pfm(b"P6\n1 1\n-1.0\n0000"), Err(Error::Format(_))));
        assert!(matches!(read_pfm(b"Pf\n2 2\n-1.0\n0000"), Err(Error::Length { .. })));
        assert!(read_pfm(b"Pf\n2").is_err());
    }

    #[test]
    fn big_endian_pfm() {
        let mut bytes = b"Pf\n1 1\n1.0\n".to_vec();
        bytes.extend_from_slice(&2.5f32.to_be_bytes());
        assert_eq!(read_pfm(&bytes).unwrap().2, vec![2.5]);
    }

    #[test]
    fn invalid_depths_masked() {
        let d = DepthMap::new(3, 1, vec![1.0, 0.0, f64::NAN]).unwrap();
        assert_eq!(d.valid().data(), &[true, false, false]);
        assert_eq!(d.get(0, 0), Some(1.0));
        assert_eq!(d.get(1, 0), None);
    }

    #[test]
    fn z_depth_conversion() {
        let cam = CameraModel::pinhole(3, 1, 1.0, 1.0, 1.0, 0.0).unwrap();
        // pixel 0 looks along (-1, 0, 1)/√2: z = 2 means along-ray 2√2
        let d = DepthMap::from_z_depth(&cam, 3, 1, &[2.0, 2.0, 2.0]).unwrap();
        assert!((d.values()[0] - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((d.values()[1] - 2.0).abs() < 1e-12);
        let pfm = write_pfm(3, 1, &[2.0, 2.0, 2.0]);
        let e = DepthMap::from_pfm(&pfm, DepthConvention::ZDepth, &cam).unwrap();
        assert!((e.values()[2] - d.values()[2]).abs() < 1e-6);
        assert!(DepthMap::from_pfm(&pfm, DepthConvention::AlongRay, &CameraModel::pinhole(2, 1, 1.0, 1.0, 0.0, 0.0).unwrap()).is_err());
    }
}
