//! JSON encodings for matrices, points and sample batches.
//!
//! A matrix is `{"dim", "field", "re", "im"?, "kind"?}` with row-major
//! `re`/`im` arrays; `im` is omitted for the real field. Floats are written
//! in shortest round-trip form, so decoding restores the exact bits.

use std::io::BufRead;

use pwishart_core::{
    Complex64, Field, HermMatrix, Mat, Scalar, SpdPoint, UnitDetPoint, WishartParams,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl FormatError {
    fn at(self, line: usize) -> Self {
        match self {
            FormatError::Io(e) => FormatError::Io(e),
            FormatError::Line { .. } => self,
            other => FormatError::Line {
                line,
                message: other.to_string(),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FieldTag {
    Real,
    Complex,
}

impl From<Field> for FieldTag {
    fn from(f: Field) -> Self {
        match f {
            Field::Real => FieldTag::Real,
            Field::Complex => FieldTag::Complex,
        }
    }
}

impl From<FieldTag> for Field {
    fn from(f: FieldTag) -> Self {
        match f {
            FieldTag::Real => Field::Real,
            FieldTag::Complex => Field::Complex,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    Spd,
    UnitDet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixRecord {
    pub dim: usize,
    pub field: FieldTag,
    pub re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<PointKind>,
}

impl MatrixRecord {
    pub fn from_mat<S: Scalar>(m: &Mat<S>, kind: Option<PointKind>) -> Self {
        let re = m.as_slice().iter().map(|v| v.re()).collect();
        let im = match S::FIELD {
            Field::Real => None,
            Field::Complex => Some(m.as_slice().iter().map(|v| v.im()).collect()),
        };
        Self {
            dim: m.dim(),
            field: S::FIELD.into(),
            re,
            im,
            kind,
        }
    }

    pub fn from_spd<S: Scalar>(p: &SpdPoint<S>) -> Self {
        Self::from_mat(p.mat().mat(), Some(PointKind::Spd))
    }

    pub fn from_unit_det<S: Scalar>(p: &UnitDetPoint<S>) -> Self {
        Self::from_mat(p.mat().mat(), Some(PointKind::UnitDet))
    }

    pub fn field(&self) -> Field {
        self.field.into()
    }

    pub fn to_mat<S: Scalar>(&self) -> Result<Mat<S>, FormatError> {
        if self.field() != S::FIELD {
            return Err(FormatError::Invalid(format!(
                "expected a {} matrix, found {}",
                S::FIELD,
                self.field()
            )));
        }
        let len = self.dim * self.dim;
        if self.re.len() != len {
            return Err(FormatError::Invalid(format!(
                "dim {} needs {len} entries in re, found {}",
                self.dim,
                self.re.len()
            )));
        }
        let im = match (&self.im, S::FIELD) {
            (Some(im), _) if im.len() != len => {
                return Err(FormatError::Invalid(format!(
                    "dim {} needs {len} entries in im, found {}",
                    self.dim,
                    im.len()
                )))
            }
            (Some(im), _) => im.clone(),
            (None, Field::Real) => vec![0.0; len],
            (None, Field::Complex) => {
                return Err(FormatError::Invalid("complex matrix without im".into()))
            }
        };
        let data = self
            .re
            .iter()
            .zip(&im)
            .map(|(&r, &i)| {
                S::from_parts(r, i).ok_or_else(|| {
                    FormatError::Invalid("real matrix with nonzero imaginary part".into())
                })
            })
            .collect::<Result<Vec<S>, _>>()?;
        Mat::from_vec(self.dim, data).map_err(core_err)
    }

    pub fn to_herm<S: Scalar>(&self) -> Result<HermMatrix<S>, FormatError> {
        HermMatrix::new(self.to_mat()?).map_err(core_err)
    }

    pub fn to_spd<S: Scalar>(&self) -> Result<SpdPoint<S>, FormatError> {
        SpdPoint::new(self.to_herm()?).map_err(core_err)
    }

    pub fn to_unit_det<S: Scalar>(&self) -> Result<UnitDetPoint<S>, FormatError> {
        UnitDetPoint::new(self.to_herm()?).map_err(core_err)
    }
}

pub(crate) fn core_err(e: pwishart_core::Error) -> FormatError {
    FormatError::Invalid(e.to_string())
}

/// Wishart parameters as written in batch headers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsRecord {
    pub d: usize,
    pub field: FieldTag,
    pub n: usize,
    pub sigma: MatrixRecord,
}

impl ParamsRecord {
    pub fn from_params<S: Scalar>(p: &WishartParams<S>) -> Self {
        Self {
            d: p.dim(),
            field: S::FIELD.into(),
            n: p.n(),
            sigma: MatrixRecord::from_mat(p.sigma().mat().mat(), None),
        }
    }
}

/// First line of a sample batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchHeader {
    pub params: ParamsRecord,
    pub seed: u64,
    pub stream: u64,
    pub count: usize,
    pub output: PointKind,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum BatchLine {
    Header(BatchHeader),
    Matrix(MatrixRecord),
}

/// Reads a JSON-lines batch, skipping blank lines. Errors carry 1-based
/// line numbers.
pub fn read_batch(reader: impl BufRead) -> Result<(Option<BatchHeader>, Vec<MatrixRecord>), FormatError> {
    let mut header = None;
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: BatchLine = serde_json::from_str(&line).map_err(|e| FormatError::Line {
            line: i + 1,
            message: format!("not a matrix record or batch header: {e}"),
        })?;
        match parsed {
            BatchLine::Header(h) if header.is_none() && records.is_empty() => header = Some(h),
            BatchLine::Header(_) => {
                return Err(FormatError::Line {
                    line: i + 1,
                    message: "batch header must be the first line".into(),
                })
            }
            BatchLine::Matrix(m) => records.push(m),
        }
    }
    Ok((header, records))
}

/// Decodes every record as a unit-determinant point. SPD records are
/// projected when `project_spd` is set, otherwise they must already have
/// determinant 1.
pub fn records_to_unit_det<S: Scalar>(
    records: &[MatrixRecord],
    first_line: usize,
    project_spd: bool,
) -> Result<Vec<UnitDetPoint<S>>, FormatError> {
    records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let p = if project_spd && r.kind == Some(PointKind::Spd) {
                r.to_spd::<S>()
                    .map(|x| pwishart_core::manifold::project(&x))
            } else {
                r.to_unit_det::<S>()
            };
            p.map_err(|e| e.at(first_line + i))
        })
        .collect()
}

/// Parses a matrix given inline: `"identity"` (needs `dim`), a
/// [`MatrixRecord`] object, or a nested array of real rows.
pub fn parse_matrix_literal(text: &str, dim: Option<usize>, field: Field) -> Result<MatrixRecord, FormatError> {
    let t = text.trim();
    if t == "identity" {
        let d = dim.ok_or_else(|| FormatError::Invalid("identity needs a dimension".into()))?;
        return Ok(match field {
            Field::Real => MatrixRecord::from_mat(&Mat::<f64>::identity(d), None),
            Field::Complex => MatrixRecord::from_mat(&Mat::<Complex64>::identity(d), None),
        });
    }
    let value: serde_json::Value = serde_json::from_str(t)?;
    if value.is_array() {
        let rows: Vec<Vec<f64>> = serde_json::from_value(value)?;
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(FormatError::Invalid("matrix rows must form a square".into()));
        }
        let re: Vec<f64> = rows.into_iter().flatten().collect();
        let im = (field == Field::Complex).then(|| vec![0.0; re.len()]);
        return Ok(MatrixRecord {
            dim: d,
            field: field.into(),
            re,
            im,
            kind: None,
        });
    }
    Ok(serde_json::from_value(value)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_record_omits_im() {
        let m = Mat::<f64>::from_vec(2, vec![2.0, 1.0, 1.0, 1.0]).unwrap();
        let rec = MatrixRecord::from_mat(&m, Some(PointKind::Spd));
        let json = serde_json::to_string(&rec).unwrap();
        assert_eq!(json, r#"{"dim":2,"field":"real","re":[2.0,1.0,1.0,1.0],"kind":"spd"}"#);
    }

    #[test]
    fn field_mismatch_is_rejected() {
        let m = Mat::<f64>::identity(2);
        let rec = MatrixRecord::from_mat(&m, None);
        assert!(rec.to_mat::<Complex64>().is_err());
        let bad = MatrixRecord {
            im: Some(vec![0.0, 1.0, -1.0, 0.0]),
            ..rec
        };
        assert!(bad.to_mat::<f64>().is_err());
    }

    #[test]
    fn literals() {
        let r = parse_matrix_literal("identity", Some(3), Field::Complex).unwrap();
        assert_eq!(r.dim, 3);
        assert!(r.im.is_some());
        let r = parse_matrix_literal("[[2,1],[1,1]]", None, Field::Real).unwrap();
        assert_eq!(r.re, vec![2.0, 1.0, 1.0, 1.0]);
        assert!(parse_matrix_literal("[[2,1],[1]]", None, Field::Real).is_err());
        assert!(parse_matrix_literal("identity", None, Field::Real).is_err());
    }

    #[test]
    fn batch_reader_reports_line_numbers() {
        let text = "{\"dim\":2,\"field\":\"real\",\"re\":[1,0,0,1]}\n\n{\"dim\":2}\n";
        match read_batch(text.as_bytes()) {
            Err(FormatError::Line { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
