//! Operator families: diagonal operators on sequence spaces, dense complex
//! matrices and a closed-form shift on a space of bounded functions.

pub mod diagonal;
pub mod example1;
pub mod matrix;

use serde::{Deserialize, Serialize};

pub use diagonal::{DiagonalOperator, DiagonalRule, RootOfUnity};
pub use example1::{Example1Operator, GridSpec, Which};
pub use matrix::MatrixOperator;

use crate::error::{Error, Result};
use crate::seqspace::{Scalar, SeqVec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BoundProvenance {
    ExactUnimodular,
    SpectralCertificate,
    ProbeOnly,
}

/// Upper bound `M >= sup_n ||T^n||` in the induced sup-norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PowerBound {
    #[serde(rename = "M")]
    pub m: f64,
    pub provenance: BoundProvenance,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Operator {
    Diagonal(DiagonalOperator),
    Matrix(MatrixOperator),
    Example1(Example1Operator),
}

impl Operator {
    pub fn kind(&self) -> &'static str {
        match self {
            Operator::Diagonal(_) => "diagonal",
            Operator::Matrix(_) => "matrix",
            Operator::Example1(_) => "example1",
        }
    }

    fn sequence_only(&self) -> Result<()> {
        match self {
            Operator::Example1(_) => Err(Error::Unsupported(
                "the shift operator is available through its closed-form metrics only".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn apply(&self, v: &SeqVec) -> Result<SeqVec> {
        self.apply_power(1, v)
    }

    pub fn apply_power(&self, n: u64, v: &SeqVec) -> Result<SeqVec> {
        self.sequence_only()?;
        match self {
            Operator::Diagonal(t) => Ok(t.apply_power(n, v)),
            Operator::Matrix(t) => t.apply_power(n, v),
            Operator::Example1(_) => unreachable!(),
        }
    }

    /// `sum_j c_j T^{k_j} v`; exact cancellation for dyadic diagonals.
    pub fn combination(&self, terms: &[(u64, Scalar)], v: &SeqVec) -> Result<SeqVec> {
        self.sequence_only()?;
        match self {
            Operator::Diagonal(t) => Ok(t.combination(terms, v)),
            Operator::Matrix(t) => t.combination(terms, v),
            Operator::Example1(_) => unreachable!(),
        }
    }

    pub fn power_norm_bound(&self) -> Result<PowerBound> {
        match self {
            Operator::Diagonal(t) if t.is_unimodular() => {
                Ok(PowerBound { m: 1.0, provenance: BoundProvenance::ExactUnimodular })
            }
            Operator::Diagonal(_) => Err(Error::Unsupported(
                "power bounds for non-unimodular diagonals are not implemented".into(),
            )),
            Operator::Matrix(t) => crate::jdlg::matrix_power_bound(t, crate::jdlg::DEFAULT_TOL),
            // A shift is an isometry.
            Operator::Example1(_) => Ok(PowerBound { m: 1.0, provenance: BoundProvenance::ExactUnimodular }),
        }
    }
}

fn pair(z: [f64; 2]) -> Scalar {
    Scalar::new(z[0], z[1])
}

/// JSON description of an operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    Diagonal {
        rule: DiagonalRuleSpec,
        #[serde(default)]
        num: Option<i64>,
        #[serde(default)]
        sign_flip: Option<bool>,
        /// Extra root of unity `[num, den]` multiplying every entry.
        #[serde(default)]
        root: Option<[i64; 2]>,
        #[serde(default)]
        entries: Option<Vec<[f64; 2]>>,
        #[serde(default)]
        limit: Option<[f64; 2]>,
        #[serde(default)]
        tail_drift: Option<f64>,
        #[serde(default)]
        unimodular: Option<bool>,
    },
    Matrix {
        entries: Vec<Vec<[f64; 2]>>,
        #[serde(default)]
        max_power: Option<u64>,
    },
    Example1 {
        a: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalRuleSpec {
    Dyadic,
    Explicit,
}

impl OperatorSpec {
    pub fn dyadic(num: i64, sign_flip: bool) -> Self {
        OperatorSpec::Diagonal {
            rule: DiagonalRuleSpec::Dyadic,
            num: Some(num),
            sign_flip: Some(sign_flip),
            root: None,
            entries: None,
            limit: None,
            tail_drift: None,
            unimodular: None,
        }
    }

    pub fn build(&self) -> Result<Operator> {
        match self {
            OperatorSpec::Diagonal { rule: DiagonalRuleSpec::Dyadic, num, sign_flip, root, entries, limit, tail_drift, unimodular } => {
                if entries.is_some() || limit.is_some() || tail_drift.is_some() || unimodular.is_some() {
                    return Err(Error::Config("dyadic rule takes only num, sign_flip and root".into()));
                }
                let num = num.ok_or_else(|| Error::Config("dyadic rule requires num".into()))?;
                let mut r = if sign_flip.unwrap_or(false) { RootOfUnity::new(1, 2)? } else { RootOfUnity::ONE };
                if let Some([rn, rd]) = root {
                    if *rd <= 0 {
                        return Err(Error::Config("root denominator must be positive".into()));
                    }
                    let extra = RootOfUnity::new(*rn, *rd as u64)?;
                    let den = r.den * extra.den;
                    r = RootOfUnity::new(r.num * extra.den as i64 + extra.num * r.den as i64, den)?;
                }
                Ok(Operator::Diagonal(DiagonalOperator::dyadic(num, r)?))
            }
            OperatorSpec::Diagonal { rule: DiagonalRuleSpec::Explicit, num, sign_flip, root, entries, limit, tail_drift, unimodular } => {
                if num.is_some() || sign_flip.is_some() || root.is_some() {
                    return Err(Error::Config("explicit rule takes entries, limit, tail_drift, unimodular".into()));
                }
                let entries = entries.as_ref().ok_or_else(|| Error::Config("explicit rule requires entries".into()))?;
                let limit = limit.ok_or_else(|| Error::Config("explicit rule requires limit".into()))?;
                let drift = tail_drift.ok_or_else(|| Error::Config("explicit rule requires tail_drift".into()))?;
                Ok(Operator::Diagonal(DiagonalOperator::explicit(
                    entries.iter().copied().map(pair).collect(),
                    pair(limit),
                    drift,
                    unimodular.unwrap_or(true),
                )?))
            }
            OperatorSpec::Matrix { entries, max_power } => {
                let rows: Vec<Vec<Scalar>> = entries.iter().map(|r| r.iter().copied().map(pair).collect()).collect();
                let mut t = MatrixOperator::from_rows(&rows)?;
                if let Some(mp) = max_power {
                    t = t.with_max_power(*mp);
                }
                Ok(Operator::Matrix(t))
            }
            OperatorSpec::Example1 { a } => Ok(Operator::Example1(Example1Operator::new(*a)?)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_roundtrip_dyadic() {
        let spec: OperatorSpec =
            serde_json::from_str(r#"{"kind":"diagonal","rule":"dyadic","num":1,"sign_flip":false}"#).unwrap();
        let op = spec.build().unwrap();
        assert!(matches!(op, Operator::Diagonal(_)));
        assert_eq!(op.power_norm_bound().unwrap().m, 1.0);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let r: std::result::Result<OperatorSpec, _> =
            serde_json::from_str(r#"{"kind":"example1","a":1.0,"b":2}"#);
        assert!(r.is_err());
    }

    #[test]
    fn explicit_matches_matrix_embedding() {
        let entries = vec![Scalar::new(0.0, 1.0), Scalar::new(-1.0, 0.0), Scalar::from_polar(1.0, 0.3)];
        let diag = DiagonalOperator::explicit(entries.clone(), Scalar::new(1.0, 0.0), 2.0, true).unwrap();
        let m = crate::linalg::CMatrix::from_diagonal(&crate::linalg::CVector::from_vec(entries));
        let mat = MatrixOperator::new(m).unwrap();
        let v = SeqVec::finite(vec![Scalar::new(1.0, 0.5), Scalar::new(-2.0, 0.0), Scalar::new(0.25, 0.25)]).unwrap();
        let a = Operator::Diagonal(diag).apply_power(5, &v).unwrap();
        let b = Operator::Matrix(mat).apply_power(5, &v).unwrap();
        for (x, y) in a.head().iter().zip(b.head()) {
            assert!((x - y).norm() < 1e-14);
        }
    }
}
