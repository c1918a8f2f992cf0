mod ao2d;
mod bump;
mod ops;
mod spectral;

pub use ao2d::{ao2d_experiment, AoReport, GapTerm};
pub use bump::{big_phi, BumpProfile, BUMP_RADIUS};
pub use ops::{
    cone_cutoff, cone_cutoff_spectrum, fourier_average, fourier_average_spectrum, in_cone, low_high_split, sector_overlap_audit, split_spectra,
    switch_defect, tailed_majorant, SectorAudit, SwitchDefect, ALIAS_FRACTION, ANN_PLUS,
};
pub use spectral::SpectralField;
