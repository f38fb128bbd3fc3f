pub mod axial;
pub mod error;
pub mod exact;
pub mod geodesic;
pub mod gegenbauer;
pub mod green;
pub mod hypersurface;
pub mod mass;
pub mod quadrature;
pub mod report;
pub mod rigidity;
pub mod special;
pub mod spectrum;
pub mod surface;

pub use error::{Error, Result};
