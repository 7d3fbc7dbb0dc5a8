//! Flow and image containers plus flow visualization.

mod color;
mod flo;
mod imageio;
mod kitti;

pub use color::{flow_to_color, wheel_color, COLOR_WHEEL_BINS};
pub use flo::{read_flo, write_flo, FLO_MAGIC};
pub use imageio::{decode_image, encode_mask_png, encode_png, encode_pnm, read_image, write_image};
pub use kitti::{read_kitti_png, write_kitti_png};

use std::path::Path;

use crate::error::Result;
use crate::flow::FlowField;

/// Reads a flow file, choosing `.flo` or KITTI PNG by extension.
pub fn read_flow(path: impl AsRef<Path>) -> Result<FlowField> {
    let path = path.as_ref();
    let bytes = std::fs::read(path)?;
    if has_extension(path, "png") {
        read_kitti_png(&bytes)
    } else {
        read_flo(&bytes)
    }
}

/// Writes a flow file, choosing `.flo` or KITTI PNG by extension.
pub fn write_flow(path: impl AsRef<Path>, flow: &FlowField) -> Result<()> {
    let path = path.as_ref();
    let bytes = if has_extension(path, "png") {
        write_kitti_png(flow)?
    } else {
        write_flo(flow)
    };
    std::fs::write(path, bytes)?;
    Ok(())
}

pub(crate) fn has_extension(path: &Path, ext: &str) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case(ext))
}
