pub mod codec;
pub mod crypto;
pub mod media;
pub mod metrics;
pub mod selector;
pub mod sfla;
pub mod raster;
pub mod real;

pub use raster::RasterImage;
pub use real::Real;
