//! δ-plates: membership, intersection bounds and their Monte-Carlo oracle,
//! covering dilates, and the sheared codimension-1 plates P(I, K, v).

mod dilate;
mod mc;
mod plate;
mod sheared;

pub use dilate::{covering_dilate, covering_dilate_with, CoveringDilate, DILATE_FACTOR};
pub use mc::{append_mc_csv, intersection_volume_bound, mc_intersection_volume, McEstimate, McRecord};
pub use plate::{load_plates, plate_membership, save_plates, unit_ball_volume, Plate};
pub(crate) use plate::ball_point;
pub use sheared::{
    hat_base, hat_plate, plates_meet, precedes, sheared_height_range, sheared_slice_measure, ShearedPlate, MAX_TILT,
};
