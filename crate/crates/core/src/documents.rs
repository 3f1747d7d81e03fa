//! JSON documents for matrices and chart points, and a writer that prints
//! every float with 17 significant digits.

use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::boundary_chart::{BoundaryChartPoint, PartialFlag};
use crate::decompositions::SpecialLinearElement;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};

/// Largest `|det − 1|` accepted for documents tagged `"sl"`.
pub const SL_DET_TOL: f64 = 1e-6;

pub fn rows_of(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

fn matrix_from_rows(rows: &[Vec<f64>], n: usize, what: &str) -> Result<Mat> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidDocument(format!("{what} is not {n}x{n}")));
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidDocument(format!(
            "{what} has a non-finite entry"
        )));
    }
    Ok(Mat::from_fn(n, n, |i, j| rows[i][j]))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixDocument {
    pub n: usize,
    pub rows: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
}

impl MatrixDocument {
    pub fn from_matrix(m: &Mat) -> Self {
        Self {
            n: m.nrows(),
            rows: rows_of(m),
            kind: None,
        }
    }

    pub fn sl(g: &SpecialLinearElement) -> Self {
        Self {
            kind: Some("sl".into()),
            ..Self::from_matrix(g.matrix())
        }
    }

    pub fn to_matrix(&self) -> Result<Mat> {
        if self.n == 0 {
            return Err(Error::InvalidDocument("n must be positive".into()));
        }
        let m = matrix_from_rows(&self.rows, self.n, "rows")?;
        match self.kind.as_deref() {
            None => {}
            Some("sl") => {
                let det = linalg::determinant(&m);
                if !((det - 1.0).abs() <= SL_DET_TOL) {
                    return Err(Error::InvalidDocument(format!(
                        "tagged sl but det = {det:.17e}"
                    )));
                }
            }
            Some(other) => {
                return Err(Error::InvalidDocument(format!("unknown kind {other:?}")));
            }
        }
        Ok(m)
    }

    /// The document as a group element, rescaled to determinant one.
    pub fn to_sl(&self) -> Result<SpecialLinearElement> {
        SpecialLinearElement::new(self.to_matrix()?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlagDocument {
    pub basis: Vec<Vec<f64>>,
    pub breaks: Vec<usize>,
}

impl FlagDocument {
    pub fn from_flag(f: &PartialFlag) -> Self {
        Self {
            basis: rows_of(f.basis()),
            breaks: f.breaks().to_vec(),
        }
    }

    pub fn to_flag(&self, n: usize, what: &str) -> Result<PartialFlag> {
        let basis = matrix_from_rows(&self.basis, n, what)?;
        PartialFlag::new(basis, self.breaks.clone())
            .map_err(|e| Error::InvalidDocument(format!("{what}: {e}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartDocument {
    pub n: usize,
    pub breaks: Vec<usize>,
    pub tau: Vec<f64>,
    pub left_flag: FlagDocument,
    pub right_flag: FlagDocument,
    pub blocks: Vec<Vec<Vec<f64>>>,
    pub scale: f64,
}

impl ChartDocument {
    pub fn from_point(p: &BoundaryChartPoint) -> Self {
        Self {
            n: p.n(),
            breaks: p.breaks().to_vec(),
            tau: p.tau().to_vec(),
            left_flag: FlagDocument::from_flag(p.left_flag()),
            right_flag: FlagDocument::from_flag(p.right_flag()),
            blocks: p.blocks().iter().map(rows_of).collect(),
            scale: p.scale(),
        }
    }

    pub fn to_point(&self) -> Result<BoundaryChartPoint> {
        let n = self.n;
        if n == 0 {
            return Err(Error::InvalidDocument("n must be positive".into()));
        }
        let left = self.left_flag.to_flag(n, "left_flag")?;
        let right = self.right_flag.to_flag(n, "right_flag")?;
        if left.breaks() != self.breaks.as_slice() {
            return Err(Error::InvalidDocument(
                "left_flag breaks differ from breaks".into(),
            ));
        }
        if self.tau.iter().any(|t| !t.is_finite()) || !self.scale.is_finite() {
            return Err(Error::InvalidDocument("non-finite tau or scale".into()));
        }
        let sizes = left.partition().sizes();
        if self.blocks.len() != sizes.len() {
            return Err(Error::InvalidDocument(format!(
                "{} blocks for {} clusters",
                self.blocks.len(),
                sizes.len()
            )));
        }
        let blocks = self
            .blocks
            .iter()
            .zip(&sizes)
            .enumerate()
            .map(|(i, (b, &d))| matrix_from_rows(b, d, &format!("block {i}")))
            .collect::<Result<Vec<_>>>()?;
        BoundaryChartPoint::new(left, right, self.tau.clone(), blocks, self.scale)
    }
}

/// Compact JSON with floats written as `d.dddddddddddddddde±x`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExactFloatFormatter;

impl Formatter for ExactFloatFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, ExactFloatFormatter);
    value
        .serialize(&mut ser)
        .expect("serialising in-memory values cannot fail");
    String::from_utf8(out).expect("serde_json writes UTF-8")
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::InvalidDocument(e.to_string()))
}
