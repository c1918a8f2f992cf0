mod cm;
mod perron;
mod radial;
mod tensor;

pub use cm::{
    cm_construction, cm_construction_with_mesh, lens_volume, CMConstruction, CMManifest, SlabCheck, CM_CLOSENESS, CM_INNER,
    CM_MIN_SCALE, CM_NET_CONSTANT, CM_OUTER, CM_SLAB,
};
pub use perron::{perron_family, perron_kakeya, perron_shifts, perron_triangle_area, Tube, TubeFamily, PERRON_ALPHAS, PERRON_HEIGHTS};
pub use radial::{radial_log_example, radial_log_example_with, radial_log_norm2, RADIAL_FACTOR};
pub use tensor::{tensor_extend, TENSOR_MAX_SAMPLES};
