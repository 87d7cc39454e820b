//! Dropout-probability cases 1–20.

use serde::{Deserialize, Serialize};

use super::presets::Preset;
use crate::error::{Error, Result};
use crate::model::DropoutProbs;

/// One probability assignment, tied to the preset and order it belongs to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub id: u32,
    pub preset: Preset,
    pub k: usize,
    /// Per component `j`, the probabilities of parts `(r, η, η', η'')`.
    pub parts: Vec<[f64; 4]>,
}

const STEPS: [(f64, f64); 5] = [(0.1, 0.2), (0.3, 0.4), (0.5, 0.6), (0.7, 0.8), (0.9, 1.0)];
const EXAMPLE2_T2: [(f64, f64, f64); 5] = [
    (0.1, 0.2, 0.3),
    (0.3, 0.4, 0.5),
    (0.5, 0.6, 0.7),
    (0.7, 0.8, 0.9),
    (0.9, 0.95, 1.0),
];

/// `{r, η'}` share `a` and `{η, η''}` share `b`.
fn paired(a: f64, b: f64) -> [f64; 4] {
    [a, b, a, b]
}

impl Case {
    pub fn new(id: u32) -> Result<Case> {
        let idx = ((id.max(1) - 1) % 5) as usize;
        let (p, pn) = STEPS[idx];
        let (preset, k, parts) = match id {
            1..=5 => (Preset::Example1T1, 1, vec![[p; 4]]),
            6..=10 => (Preset::Example1T2, 2, vec![paired(p, pn)]),
            11..=15 => (Preset::Example2, 1, vec![[p; 4], [pn; 4]]),
            16..=20 => {
                let (a, b, c) = EXAMPLE2_T2[idx];
                (Preset::Example2, 2, vec![paired(a, b), paired(b, c)])
            }
            _ => return Err(Error::Config(format!("unknown case {id} (expected 1..=20)"))),
        };
        Ok(Case { id, preset, k, parts })
    }

    /// Cases packaged with `preset`.
    pub fn for_preset(preset: Preset) -> Vec<Case> {
        let ids = match preset {
            Preset::Example1T1 => 1..=5,
            Preset::Example1T2 => 6..=10,
            Preset::Example2 => 11..=20,
        };
        ids.map(|id| Case::new(id).expect("packaged id")).collect()
    }

    /// Sum of the probabilities over all parts divided by their count.
    pub fn mean_probability(&self) -> f64 {
        let total: f64 = self.parts.iter().flatten().sum();
        total / (4 * self.parts.len()) as f64
    }

    pub fn dropout(&self, n: usize, sensors: usize) -> Result<DropoutProbs> {
        if n != self.parts.len() {
            return Err(Error::Config(format!(
                "case {} assigns {} components but the system has {n}",
                self.id,
                self.parts.len()
            )));
        }
        Ok(DropoutProbs::from_fn(n, sensors, |_, j, nu| self.parts[j][nu]))
    }
}
