//! Grouping of Pauli strings into shared local measurement bases.

use serde::Serialize;

use crate::pauli::{Letter, PauliString};

/// Per-qubit basis of one setting; `None` where no grouped string acts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Setting {
    pub bases: Vec<Option<Letter>>,
}

impl Setting {
    /// `"X1 Z2 X3"`-style label of the measured qubits.
    pub fn label(&self) -> String {
        let parts: Vec<String> =
            self.bases.iter().enumerate().filter_map(|(i, b)| b.map(|l| format!("{}{}", l.symbol(), i + 1))).collect();
        if parts.is_empty() {
            "I".into()
        } else {
            parts.join(" ")
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SettingsReport {
    pub settings: Vec<Setting>,
    /// Setting index of each input string.
    pub assignment: Vec<usize>,
}

impl SettingsReport {
    pub fn count(&self) -> usize {
        self.settings.len()
    }
}

struct Group {
    x: Vec<u64>,
    z: Vec<u64>,
    support: Vec<u64>,
}

/// First-fit grouping: a string joins the first setting that agrees with it
/// on every qubit where both act.
pub fn measurement_settings(strings: &[PauliString]) -> SettingsReport {
    let mut groups: Vec<Group> = Vec::new();
    let mut assignment = Vec::with_capacity(strings.len());
    for p in strings {
        let (x, z) = (p.x_words(), p.z_words());
        let support: Vec<u64> = x.iter().zip(z).map(|(a, b)| a | b).collect();
        let fits = |g: &Group| {
            (0..x.len()).all(|w| ((g.x[w] ^ x[w]) | (g.z[w] ^ z[w])) & g.support[w] & support[w] == 0)
        };
        let idx = match groups.iter().position(fits) {
            Some(i) => {
                let g = &mut groups[i];
                for w in 0..x.len() {
                    g.x[w] |= x[w];
                    g.z[w] |= z[w];
                    g.support[w] |= support[w];
                }
                i
            }
            None => {
                groups.push(Group { x: x.to_vec(), z: z.to_vec(), support });
                groups.len() - 1
            }
        };
        assignment.push(idx);
    }
    let n = strings.first().map_or(0, |p| p.n_sites());
    let settings = groups
        .iter()
        .map(|g| Setting {
            bases: (0..n)
                .map(|i| {
                    let (w, b) = (i / 64, i % 64);
                    if g.support[w] >> b & 1 == 0 {
                        None
                    } else {
                        Some(match (g.x[w] >> b & 1, g.z[w] >> b & 1) {
                            (1, 0) => Letter::X,
                            (0, 1) => Letter::Z,
                            _ => Letter::Y,
                        })
                    }
                })
                .collect(),
        })
        .collect();
    SettingsReport { settings, assignment }
}
