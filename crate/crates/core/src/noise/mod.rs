//! Density-matrix simulation under relaxation, dephasing, residual ZZ,
//! two-qubit χ processes and readout error.

pub mod channels;
pub mod chi;
pub mod density;
pub mod device;
pub mod readout;
pub mod schedule;

pub use channels::{gammas, relax_dephase_channel, zz_channel, Gammas, ZzCoupling};
pub use chi::{apply_chi_process, synth_chi, ChiMatrix};
pub use density::DensityMatrix;
pub use device::{DeviceModel, PairParams, QubitParams};
pub use readout::{build_assignment_matrix, mitigate_readout, mitigate_tensor, preselect, PreselectionReport};
pub use schedule::{measure_setting, simulate_noisy_circuit, simulate_noisy_from, MeasBasis, ReadoutOptions};
