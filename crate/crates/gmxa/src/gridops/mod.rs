mod average;
mod grid;
mod io;
mod nikodym;
mod norms;

pub use average::{dyadic_scales, maximal_average_at, maximal_subspace_average, subspace_average, BallRule};
pub use grid::GridFunction;
pub use io::MAGIC;
pub use nikodym::{kakeya_maximal, nikodym_maximal, nikodym_maximal_on, plate_average, PlateRule};
pub use norms::{norm_estimate, NormEstimate, NormKind};
