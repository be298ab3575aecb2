//! Exact QCNN for the cluster/Ising chain: circuit forms, the multiscale
//! string-order observable, its Pauli expansion and measurement grouping.

pub mod circuits;
pub mod classify;
pub mod msop;
pub mod settings;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use circuits::{
    build_equivalent_circuit, build_full_circuit, cz_layers, equivalence_check, random_inputs, y_distribution,
    EquivalenceReport, QcnnVariant,
};
pub use classify::{
    classify_bits, classify_pattern, qcnn_output, qcnn_output_density, qcnn_output_noisy, y_expect_from, QcnnOutcome,
};
pub use msop::{msop_expand, msop_expand_with, sop, ExpansionLimits, MsopExpansion, MsopPart, MsopTerm};
pub use settings::{measurement_settings, Setting, SettingsReport};

/// Chain length of the depth-`d` network, `2·3^{d+1} − 11`; only `d ∈ {1, 2}`.
pub fn qcnn_size(d: usize) -> Result<usize> {
    match d {
        1 | 2 => Ok(2 * 3usize.pow(d as u32 + 1) - 11),
        _ => Err(Error::Unsupported(format!("QCNN depth d = {d}; only d = 1 and d = 2 are supported"))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QcnnForm {
    pub variant: QcnnVariant,
    pub d: usize,
    pub n: usize,
}

impl QcnnForm {
    /// Circuit forms exist for `d = 1` only; `d = 2` is available as an observable.
    pub fn new(variant: QcnnVariant, d: usize) -> Result<Self> {
        let n = qcnn_size(d)?;
        if d != 1 {
            return Err(Error::Unsupported(format!("{variant:?} circuit for d = {d}; only d = 1 is built")));
        }
        Ok(QcnnForm { variant, d, n })
    }
}
