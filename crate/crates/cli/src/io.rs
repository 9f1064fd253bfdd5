//! Channel and state files.
//!
//! Complex numbers are `[re, im]` pairs and matrices are row-major nested
//! arrays. Floats are written in shortest round-trip form, so values survive
//! a write/read cycle exactly.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use qcorr::channels::{validate_cptp, KrausChannel};
use qcorr::linalg::{ComplexMatrix, C64};
use qcorr::states::{BipartiteState, DensityMatrix};

use crate::CliError;

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct ChannelMeta {
    pub kind: String,
    #[serde(default)]
    pub params: Value,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ChannelFile {
    pub dim: usize,
    pub kraus: Vec<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<ChannelMeta>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StateFile {
    #[serde(rename = "dimA")]
    pub dim_a: usize,
    #[serde(rename = "dimB")]
    pub dim_b: usize,
    pub matrix: JsonMatrix,
}

pub fn matrix_to_json(m: &ComplexMatrix) -> JsonMatrix {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

pub fn matrix_from_json(rows: &JsonMatrix) -> Result<ComplexMatrix, CliError> {
    let rows: Vec<Vec<C64>> = rows
        .iter()
        .map(|r| r.iter().map(|&[re, im]| C64::new(re, im)).collect())
        .collect();
    Ok(ComplexMatrix::from_rows(&rows)?)
}

pub fn vector_to_json(v: &[C64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

impl ChannelFile {
    pub fn from_channel(ch: &KrausChannel, meta: Option<ChannelMeta>) -> Self {
        Self {
            dim: ch.dim(),
            kraus: ch.kraus_ops().iter().map(matrix_to_json).collect(),
            meta,
        }
    }

    pub fn to_channel(&self) -> Result<KrausChannel, CliError> {
        let ops = self.kraus.iter().map(matrix_from_json).collect::<Result<Vec<_>, _>>()?;
        if ops.iter().any(|k| k.rows() != self.dim || k.cols() != self.dim) {
            return Err(CliError::Input(format!(
                "every Kraus operator must be {0}×{0}",
                self.dim
            )));
        }
        Ok(validate_cptp(ops)?)
    }
}

impl StateFile {
    pub fn from_state(s: &BipartiteState) -> Self {
        Self {
            dim_a: s.dim_a(),
            dim_b: s.dim_b(),
            matrix: matrix_to_json(s.matrix()),
        }
    }

    pub fn to_state(&self) -> Result<BipartiteState, CliError> {
        let m = matrix_from_json(&self.matrix)?;
        Ok(BipartiteState::new(self.dim_a, self.dim_b, DensityMatrix::new(m)?)?)
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn load_channel(path: &Path) -> Result<(KrausChannel, Option<ChannelMeta>), CliError> {
    let file: ChannelFile = read_json(path)?;
    let ch = file.to_channel()?;
    Ok((ch, file.meta))
}

pub fn load_state(path: &Path) -> Result<BipartiteState, CliError> {
    read_json::<StateFile>(path)?.to_state()
}

#[cfg(test)]
mod tests {
    use super::*;
    use qcorr::channels::amplitude_damping;
    use qcorr::sampling::{random_density, rng_from_seed};

    #[test]
    fn channel_round_trip_is_exact() {
        let ch = amplitude_damping(0.3).unwrap();
        let file = ChannelFile::from_channel(&ch, None);
        let text = serde_json::to_string(&file).unwrap();
        let back: ChannelFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_channel().unwrap(), ch);
    }

    #[test]
    fn state_round_trip_is_exact() {
        let rho = random_density(6, 6, &mut rng_from_seed(1)).unwrap();
        let s = BipartiteState::new(2, 3, rho).unwrap();
        let text = serde_json::to_string(&StateFile::from_state(&s)).unwrap();
        let back: StateFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_state().unwrap().matrix(), s.matrix());
    }

    #[test]
    fn rejects_non_trace_preserving() {
        let file = ChannelFile {
            dim: 2,
            kraus: vec![vec![vec![[1.0, 0.0], [0.0, 0.0]], vec![[0.0, 0.0], [0.5, 0.0]]]],
            meta: None,
        };
        assert!(matches!(file.to_channel(), Err(CliError::Core(_))));
    }
}
