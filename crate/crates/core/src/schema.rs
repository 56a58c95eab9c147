//! Stable on-disk formats: a versioned JSON schema for labeled complex
//! matrices and report types, plus CSV float formatting.
//!
//! Matrix files look like
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "labels": [{"name": "in", "dim": 2}, ...],
//!   "data": [[[re, im], ...], ...]
//! }
//! ```
//!
//! with `data` in row-major order and the leftmost label most significant.

use crate::tensor::{LabeledOperator, SubsystemLabel};
use crate::{C64, CMat, Error, Result};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabelSpec {
    pub name: String,
    pub dim: usize,
}

/// JSON form of a [`LabeledOperator`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFile {
    pub schema_version: u32,
    pub labels: Vec<LabelSpec>,
    /// Row-major entries, each as a `[re, im]` pair.
    pub data: Vec<Vec<[f64; 2]>>,
}

impl MatrixFile {
    pub fn from_operator(op: &LabeledOperator) -> Self {
        let n = op.dim();
        let m = op.matrix();
        let data = (0..n)
            .map(|r| (0..n).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
            .collect();
        let labels = op
            .space()
            .iter()
            .map(|l| LabelSpec { name: l.name.clone(), dim: l.dim })
            .collect();
        Self { schema_version: SCHEMA_VERSION, labels, data }
    }

    pub fn to_operator(&self) -> Result<LabeledOperator> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "unsupported schema_version {} (expected {})",
                self.schema_version, SCHEMA_VERSION
            )));
        }
        let dim: usize = self.labels.iter().map(|l| l.dim).product();
        if self.labels.is_empty() || dim == 0 {
            return Err(Error::Schema("labels must be a nonempty list with nonzero dims".into()));
        }
        if self.data.len() != dim || self.data.iter().any(|row| row.len() != dim) {
            return Err(Error::Schema(format!(
                "data must be a {dim}x{dim} matrix matching the label dimensions"
            )));
        }
        let mat = CMat::from_fn(dim, dim, |r, c| {
            let [re, im] = self.data[r][c];
            C64::new(re, im)
        });
        let space = self
            .labels
            .iter()
            .map(|l| SubsystemLabel::new(l.name.clone(), l.dim))
            .collect();
        LabeledOperator::new(space, mat)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))
    }
}

/// JSON report of a witness optimization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessReport {
    pub schema_version: u32,
    pub restricted: bool,
    pub cns: f64,
    pub raw_value: f64,
    pub worst_case_probability: f64,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_residual: Option<f64>,
}

impl WitnessReport {
    pub fn new(res: &crate::witness::WitnessResult, restricted: bool) -> Result<Self> {
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            restricted,
            cns: res.cns,
            raw_value: res.raw_value,
            worst_case_probability: crate::witness::worst_case_probability(res.cns)?,
            iterations: res.iterations,
            primal_residual: res.primal_residual,
            dual_residual: res.dual_residual,
            alpha: res.alpha.clone(),
            alpha_residual: res.alpha_residual,
        })
    }
}

/// JSON report of an emulated run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmulationReport {
    pub schema_version: u32,
    pub value: f64,
    pub cns: f64,
    pub error: f64,
    pub noise: crate::emulator::NoiseConfig,
    pub drift: crate::emulator::DriftModel,
    pub efficiency: crate::emulator::EfficiencyModel,
}

/// A float with 17 significant digits, enough to round-trip any f64.
pub fn csv_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header plus rows of 17-significant-digit floats.
pub fn write_csv<W: std::io::Write>(
    out: &mut W,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<f64>>,
) -> Result<()> {
    let io = |e: std::io::Error| Error::Schema(e.to_string());
    writeln!(out, "{}", header.join(",")).map_err(io)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::Schema(format!(
                "row has {} fields, header has {}",
                row.len(),
                header.len()
            )));
        }
        let line: Vec<String> = row.iter().map(|&x| csv_float(x)).collect();
        writeln!(out, "{}", line.join(",")).map_err(io)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::switch_matrix;

    #[test]
    fn matrix_round_trip() {
        let w = switch_matrix();
        let file = MatrixFile::from_operator(w.operator());
        let json = file.to_json().unwrap();
        let back = MatrixFile::from_json(&json).unwrap().to_operator().unwrap();
        assert_eq!(back.space(), w.operator().space());
        assert!((back.matrix() - w.matrix()).norm() < 1e-15);
    }

    #[test]
    fn bad_schema_rejected() {
        let w = switch_matrix();
        let mut file = MatrixFile::from_operator(w.operator());
        file.schema_version = 99;
        assert!(file.to_operator().is_err());

        let mut file = MatrixFile::from_operator(w.operator());
        file.data.pop();
        assert!(file.to_operator().is_err());

        assert!(MatrixFile::from_json("{not json").is_err());
    }

    #[test]
    fn csv_float_round_trips_exactly() {
        for x in [0.1, -1.0 / 3.0, 1e-300, std::f64::consts::PI, 0.0] {
            let s = csv_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn write_csv_shape_check() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &["a", "b"], vec![vec![1.0, 2.0]]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("a,b\n"));
        let mut buf = Vec::new();
        assert!(write_csv(&mut buf, &["a", "b"], vec![vec![1.0]]).is_err());
    }
}
