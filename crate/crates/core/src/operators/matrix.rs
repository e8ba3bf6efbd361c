use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{identity, CMatrix, CVector};
use crate::seqspace::{Scalar, SeqVec, Tail};

/// Largest supported matrix dimension.
pub const MAX_DIM: usize = 64;
/// Default cap on the exponent of iterated powers.
pub const DEFAULT_MAX_POWER: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatrixOperator {
    #[serde(skip)]
    pub matrix: CMatrix,
    pub dim: usize,
    pub max_power: u64,
}

impl MatrixOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let dim = matrix.nrows();
        if dim == 0 || dim > MAX_DIM || matrix.ncols() != dim {
            return Err(Error::Config(format!(
                "matrix must be square with dimension 1..={MAX_DIM}, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Config("matrix entries must be finite".into()));
        }
        Ok(MatrixOperator { matrix, dim, max_power: DEFAULT_MAX_POWER })
    }

    pub fn from_rows(rows: &[Vec<Scalar>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Config("matrix rows must all have length equal to the row count".into()));
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(identity(n))
    }

    pub fn with_max_power(mut self, max_power: u64) -> Self {
        self.max_power = max_power;
        self
    }

    fn check_power(&self, n: u64) -> Result<()> {
        if n > self.max_power {
            return Err(Error::HorizonExceeded { requested: n, max: self.max_power });
        }
        Ok(())
    }

    /// `T^n` by repeated squaring.
    pub fn power(&self, n: u64) -> Result<CMatrix> {
        self.check_power(n)?;
        let mut acc = identity(self.dim);
        let mut base = self.matrix.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        Ok(acc)
    }

    pub fn apply_vec(&self, v: &CVector) -> Result<CVector> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: v.len() });
        }
        Ok(&self.matrix * v)
    }

    /// `T^n v` by direct iteration.
    pub fn apply_power_vec(&self, n: u64, v: &CVector) -> Result<CVector> {
        self.check_power(n)?;
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: v.len() });
        }
        if n > 4 * self.dim as u64 {
            return Ok(self.power(n)? * v);
        }
        let mut w = v.clone();
        for _ in 0..n {
            w = &self.matrix * w;
        }
        Ok(w)
    }

    /// `T^n v` for every `n` in the ascending list `exps`.
    pub fn orbit_vec(&self, v: &CVector, exps: &[u64]) -> Result<Vec<CVector>> {
        if let Some(&last) = exps.last() {
            self.check_power(last)?;
        }
        let mut out = Vec::with_capacity(exps.len());
        let mut cur = v.clone();
        let mut at = 0u64;
        for &n in exps {
            if n < at {
                return Err(Error::Precondition("orbit exponents must be ascending".into()));
            }
            if n - at > 64 {
                cur = self.power(n - at)? * &cur;
            } else {
                for _ in at..n {
                    cur = &self.matrix * cur;
                }
            }
            at = n;
            out.push(cur.clone());
        }
        Ok(out)
    }

    /// Coordinates of a sequence vector that lives in `C^dim`.
    pub fn to_coords(&self, v: &SeqVec) -> Result<CVector> {
        let tail = v.tail();
        if tail.bound() != 0.0 || tail.center() != Scalar::new(0.0, 0.0) {
            return Err(Error::Precondition("matrix operators act on exact finite vectors only".into()));
        }
        let head = v.head();
        if head.len() < self.dim || head[self.dim..].iter().any(|z| *z != Scalar::new(0.0, 0.0)) {
            return Err(Error::DimensionMismatch { expected: self.dim, got: head.len() });
        }
        Ok(CVector::from_iterator(self.dim, head.iter().take(self.dim).copied()))
    }

    pub fn from_coords(v: &CVector) -> SeqVec {
        SeqVec::from_parts(v.iter().copied().collect(), Tail::NullEnvelope { bound: 0.0 })
    }

    pub fn apply(&self, v: &SeqVec) -> Result<SeqVec> {
        Ok(Self::from_coords(&self.apply_vec(&self.to_coords(v)?)?))
    }

    pub fn apply_power(&self, n: u64, v: &SeqVec) -> Result<SeqVec> {
        Ok(Self::from_coords(&self.apply_power_vec(n, &self.to_coords(v)?)?))
    }

    /// `sum_j c_j T^{k_j} v`.
    pub fn combination(&self, terms: &[(u64, Scalar)], v: &SeqVec) -> Result<SeqVec> {
        let x = self.to_coords(v)?;
        let mut sorted: Vec<(u64, Scalar)> = terms.to_vec();
        sorted.sort_by_key(|t| t.0);
        let exps: Vec<u64> = sorted.iter().map(|t| t.0).collect();
        let orbit = self.orbit_vec(&x, &exps)?;
        let mut acc = CVector::zeros(self.dim);
        for ((_, c), w) in sorted.iter().zip(&orbit) {
            acc += w * *c;
        }
        Ok(Self::from_coords(&acc))
    }
}
