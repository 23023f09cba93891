//! JSON file formats. Scalars are always strings (`"p/q"`) or `{re, im}`
//! objects of strings, so files stay exact.
//!
//! A state file:
//!
//! ```json
//! {"L": 2, "N": 2, "entries": [[["1", "0"], ["0", "1"]], [["1", "1"], ["0", "1"]]]}
//! ```
//!
//! A canonical-form file lists one entry per Jordan block, or one entry per
//! run of equal eigenvalues when a run has several blocks:
//!
//! ```json
//! {"n": 2, "blocks": [{"lambda": "1", "size": 2, "coeffs": ["2", "3"]}]}
//! ```

use serde::{Deserialize, Serialize};

use crate::canon::{CanonicalForm, TensorState};
use crate::error::{Error, Result};
use crate::exactmat::{Matrix, Scalar};
use crate::nilpoly::{PolyGrid, TruncPoly};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub entries: Vec<Vec<Vec<Scalar>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BlockEntry {
    Single {
        lambda: Scalar,
        size: usize,
        coeffs: Vec<Scalar>,
    },
    Run {
        lambda: Scalar,
        sizes: Vec<usize>,
        grid: Vec<Vec<Vec<Scalar>>>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CanonFile {
    pub n: usize,
    pub blocks: Vec<BlockEntry>,
}

/// Either kind of input file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InputFile {
    State(StateFile),
    Canon(CanonFile),
}

fn parse_err(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

impl StateFile {
    pub fn from_state(psi: &TensorState) -> Self {
        Self {
            l: psi.l(),
            n: psi.n(),
            entries: psi
                .gammas()
                .iter()
                .map(|g| (0..g.rows()).map(|r| g.row(r).to_vec()).collect())
                .collect(),
        }
    }

    pub fn to_state(&self) -> Result<TensorState> {
        if self.entries.len() != self.l {
            return Err(Error::Parse(format!(
                "L = {} but {} slots given",
                self.l,
                self.entries.len()
            )));
        }
        let mut gammas = Vec::with_capacity(self.l);
        for (k, slot) in self.entries.iter().enumerate() {
            if slot.len() != self.n || slot.iter().any(|r| r.len() != self.n) {
                return Err(Error::Parse(format!("slot {k} is not {0}x{0}", self.n)));
            }
            gammas.push(Matrix::from_rows(slot.clone()));
        }
        TensorState::new(gammas)
    }
}

impl CanonFile {
    pub fn from_canonical(cf: &CanonicalForm) -> Self {
        let blocks = cf
            .runs()
            .iter()
            .map(|run| {
                if run.grid.is_single() {
                    let f = run.grid.entry(0, 0);
                    BlockEntry::Single {
                        lambda: run.lambda.clone(),
                        size: f.order(),
                        coeffs: f.coeffs().to_vec(),
                    }
                } else {
                    BlockEntry::Run {
                        lambda: run.lambda.clone(),
                        sizes: run.grid.sizes().to_vec(),
                        grid: run
                            .grid
                            .entries()
                            .iter()
                            .map(|row| row.iter().map(|p| p.coeffs().to_vec()).collect())
                            .collect(),
                    }
                }
            })
            .collect();
        Self { n: cf.n(), blocks }
    }

    pub fn to_canonical(&self) -> Result<CanonicalForm> {
        let mut parts = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            match b {
                BlockEntry::Single {
                    lambda,
                    size,
                    coeffs,
                } => {
                    if coeffs.len() != *size {
                        return Err(Error::Parse(format!(
                            "block at {lambda} has size {size} but {} coefficients",
                            coeffs.len()
                        )));
                    }
                    parts.push((
                        lambda.clone(),
                        PolyGrid::single(TruncPoly::new(coeffs.clone())),
                    ));
                }
                BlockEntry::Run {
                    lambda,
                    sizes,
                    grid,
                } => {
                    let entries = grid
                        .iter()
                        .map(|row| row.iter().map(|c| TruncPoly::new(c.clone())).collect())
                        .collect();
                    parts.push((lambda.clone(), PolyGrid::new(sizes.clone(), entries)?));
                }
            }
        }
        let cf = CanonicalForm::from_parts(parts)?;
        if cf.n() != self.n {
            return Err(Error::Parse(format!(
                "n = {} but blocks sum to {}",
                self.n,
                cf.n()
            )));
        }
        Ok(cf)
    }
}

/// Pretty JSON with a trailing newline. Field order is fixed by the types
/// and rationals are in lowest terms, so equal values give equal bytes.
pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

pub fn parse_state(text: &str) -> Result<StateFile> {
    serde_json::from_str(text).map_err(parse_err)
}

pub fn parse_canon(text: &str) -> Result<CanonFile> {
    serde_json::from_str(text).map_err(parse_err)
}

/// Tells the two formats apart by their keys.
pub fn parse_input(text: &str) -> Result<InputFile> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(parse_err)?;
    let is_state = value.get("entries").is_some();
    // re-parse the text, not the value, so errors keep their line and column
    if is_state {
        parse_state(text).map(InputFile::State)
    } else if value.get("blocks").is_some() {
        parse_canon(text).map(InputFile::Canon)
    } else {
        Err(Error::Parse(
            "expected a state file (\"entries\") or a canonical-form file (\"blocks\")".into(),
        ))
    }
}

pub fn read_file(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canon_round_trip() {
        let text = r#"{"n": 5, "blocks": [
            {"lambda": "1", "size": 2, "coeffs": ["2", "3"]},
            {"lambda": "0", "sizes": [2, 1], "grid": [[["1", "0"], ["0"]], [["0", "4"], ["1/2"]]]}
        ]}"#;
        let cf = parse_canon(text).unwrap().to_canonical().unwrap();
        let out = to_json(&CanonFile::from_canonical(&cf));
        assert!(out.ends_with("}\n"));
        let again = parse_canon(&out).unwrap().to_canonical().unwrap();
        assert_eq!(cf, again);
        assert_eq!(out, to_json(&CanonFile::from_canonical(&again)));
    }

    #[test]
    fn rejects_bad_input() {
        let zero_den = r#"{"L": 1, "N": 1, "entries": [[["1/0"]]]}"#;
        let e = parse_state(zero_den).unwrap_err();
        assert!(matches!(&e, Error::Parse(m) if m.contains("line 1")), "{e}");
        assert!(parse_state(r#"{"L": 1, "N": 1, "entries": [[[0.5]]]}"#).is_err());
        let short =
            parse_canon(r#"{"n": 2, "blocks": [{"lambda": "1", "size": 2, "coeffs": ["2"]}]}"#)
                .unwrap();
        assert!(short.to_canonical().is_err());
        assert!(parse_input("{}").is_err());
    }

    #[test]
    fn state_round_trip() {
        let text = r#"{"L": 2, "N": 2, "entries": [[["1", "0"], ["0", "1"]], [["1", {"re": "0", "im": "1"}], ["0", "1"]]]}"#;
        let sf = parse_state(text).unwrap();
        let psi = sf.to_state().unwrap();
        assert_eq!(StateFile::from_state(&psi), sf);
        assert!(matches!(parse_input(text), Ok(InputFile::State(_))));
    }
}
