//! Planar images, colour conversion, raster IO and quality metrics.

pub mod color;
pub mod io;
pub mod metrics;
pub mod plane;

pub use color::{luminance, rgb_to_ycbcr, ycbcr_to_rgb, ColorImage, LumaChroma};
pub use io::{
    decode_color, decode_gray, encode_gray_png, encode_png, load_color, load_gray, save_gray_png,
    save_png,
};
pub use metrics::{mse, psnr, psnr_from_mse};
pub use plane::{Dims, Plane, SignedPlane};
