//! JSON sequence files and matrix serialization helpers.
//!
//! A sequence file looks like
//!
//! ```json
//! {
//!   "ambient_dim": 2,
//!   "rank": 1,
//!   "frames": [ [ [[1.0, 0.0], [0.0, 0.0]] ], ... ],
//!   "metadata": { "generator": "random" }
//! }
//! ```
//!
//! Each frame is a list of `K` columns, each column a list of `N` complex
//! amplitudes written as `[re, im]`.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::{Frame, SubspaceSequence};
use crate::matops::CMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceFile {
    pub ambient_dim: usize,
    pub rank: usize,
    pub frames: Vec<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl SequenceFile {
    pub fn from_sequence(seq: &SubspaceSequence) -> Self {
        let frames = seq
            .frames()
            .iter()
            .map(|f| {
                f.matrix()
                    .column_iter()
                    .map(|col| col.iter().map(|z| [z.re, z.im]).collect())
                    .collect()
            })
            .collect();
        Self {
            ambient_dim: seq.ambient_dim(),
            rank: seq.rank(),
            frames,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_metadata(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.metadata.insert(key.to_owned(), value.into());
        self
    }

    /// Validates shapes and orthonormality, naming the offending field on failure.
    pub fn to_sequence(&self) -> Result<SubspaceSequence> {
        if self.frames.is_empty() {
            return Err(Error::InvalidSequence("frames: expected at least one frame".into()));
        }
        let (n, k) = (self.ambient_dim, self.rank);
        let mut frames = Vec::with_capacity(self.frames.len());
        for (a, cols) in self.frames.iter().enumerate() {
            if cols.len() != k {
                return Err(Error::InvalidSequence(format!(
                    "frames[{a}]: expected {k} columns, found {}",
                    cols.len()
                )));
            }
            let mut m = CMatrix::zeros(n, k);
            for (j, col) in cols.iter().enumerate() {
                if col.len() != n {
                    return Err(Error::InvalidSequence(format!(
                        "frames[{a}][{j}]: expected {n} amplitudes, found {}",
                        col.len()
                    )));
                }
                for (i, z) in col.iter().enumerate() {
                    m[(i, j)] = Complex64::new(z[0], z[1]);
                }
            }
            let frame = Frame::new(m).map_err(|e| Error::InvalidSequence(format!("frames[{a}]: {e}")))?;
            frames.push(frame);
        }
        SubspaceSequence::new(frames)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::InvalidSequence(format!("line {} column {}: {e}", e.line(), e.column()))
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sequence file serializes")
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())
            .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
    }
}

/// Complex matrices as a list of rows of `[re, im]` pairs.
pub mod matrix_rows {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn to_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
        m.row_iter()
            .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
            .collect()
    }

    pub fn from_rows(rows: &[Vec<[f64; 2]>]) -> std::result::Result<CMatrix, String> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err("ragged matrix rows".into());
        }
        Ok(CMatrix::from_fn(nrows, ncols, |i, j| {
            Complex64::new(rows[i][j][0], rows[i][j][1])
        }))
    }

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMatrix, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

pub mod opt_matrix_rows {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &Option<CMatrix>, s: S) -> std::result::Result<S::Ok, S::Error> {
        m.as_ref().map(matrix_rows::to_rows).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<CMatrix>, D::Error> {
        Option::<Vec<Vec<[f64; 2]>>>::deserialize(d)?
            .map(|rows| matrix_rows::from_rows(&rows).map_err(serde::de::Error::custom))
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::random_sequence;

    #[test]
    fn sequence_round_trips_through_json() {
        let seq = random_sequence(4, 2, 3, 17).unwrap();
        let file = SequenceFile::from_sequence(&seq).with_metadata("seed", 17);
        let back = SequenceFile::from_json(&file.to_json()).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.to_sequence().unwrap(), seq);
    }

    #[test]
    fn parse_errors_carry_location() {
        let err = SequenceFile::from_json("{\n  \"ambient_dim\": 2,\n  \"rank\": x\n}").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn shape_errors_name_the_field() {
        let text = r#"{"ambient_dim": 2, "rank": 1, "frames": [[[[1,0],[0,0]]], [[[1,0]]]]}"#;
        let err = SequenceFile::from_json(text).unwrap().to_sequence().unwrap_err();
        assert!(err.to_string().contains("frames[1][0]"), "{err}");
        let text = r#"{"ambient_dim": 2, "rank": 1, "frames": [[[[1,0],[1,0]]]]}"#;
        let err = SequenceFile::from_json(text).unwrap().to_sequence().unwrap_err();
        assert!(err.to_string().contains("frames[0]"), "{err}");
    }
}
