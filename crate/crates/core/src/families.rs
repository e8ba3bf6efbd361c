//! Point families built from an operator and a starting vector: the orbit
//! `{T^k x}` and the difference orbits `D_m = {T^k (T^m - I) x}`.

use std::sync::Arc;

use crate::compactness::{PointFamily, TailEnvelope};
use crate::error::{Error, Result};
use crate::linalg::{vec_inf_norm, CVector};
use crate::operators::{DiagonalOperator, MatrixOperator, Operator};
use crate::seqspace::{NormInterval, Scalar, SeqVec, Tail};

const ONE: Scalar = Scalar::new(1.0, 0.0);

/// Re-tag a sequence whose limit is exactly zero as a null sequence.
pub fn as_null(v: SeqVec) -> SeqVec {
    match v.tail() {
        Tail::ConvergentLimit { limit, bound } if limit == Scalar::new(0.0, 0.0) => {
            SeqVec::from_parts(v.head().to_vec(), Tail::NullEnvelope { bound })
        }
        _ => v,
    }
}

/// `(T^m - I) x`.
pub fn difference_vector(op: &Operator, x: &SeqVec, m: u64) -> Result<SeqVec> {
    Ok(as_null(op.combination(&[(m, ONE), (0, -ONE)], x)?))
}

fn zero_family(label: String, d: usize) -> PointFamily<'static> {
    let env = TailEnvelope { head: vec![0.0; d], beyond: 0.0, vanishes: true, description: "tau = 0".into() };
    PointFamily::by_lag(label, |_| NormInterval::exact(0.0))
        .with_members(move |_| SeqVec::zeros(d))
        .with_envelope(env)
}

/// Decreasing hull of `|y_n|` on the head, continued by the tail bound.
fn modulus_hull(y: &SeqVec) -> TailEnvelope {
    let beyond = y.tail().bound();
    let mut head: Vec<f64> = y.head().iter().map(|z| z.norm()).collect();
    let mut run = beyond;
    for t in head.iter_mut().rev() {
        run = run.max(*t);
        *t = run;
    }
    TailEnvelope {
        head,
        beyond,
        vanishes: true,
        description: "decreasing hull of the moduli of a null sequence; unimodular diagonals preserve moduli".into(),
    }
}

fn diagonal_family(t: &DiagonalOperator, base: SeqVec, label: String) -> PointFamily<'static> {
    let t = Arc::new(t.clone());
    let unimodular = t.is_unimodular();
    let (t1, b1) = (t.clone(), base.clone());
    let fam = if unimodular {
        // Isometry: ||T^p y - T^q y|| = ||T^|p-q| y - y||.
        PointFamily::by_lag(label, move |h| t1.combination(&[(h, ONE), (0, -ONE)], &b1).sup_norm())
    } else {
        PointFamily::by_pair(label, move |p, q| t1.combination(&[(q, ONE), (p, -ONE)], &b1).sup_norm())
    };
    let (t2, b2) = (t.clone(), base.clone());
    let mut fam = fam.with_members(move |k| t2.apply_power(k, &b2));
    if unimodular && base.tail().center() == Scalar::new(0.0, 0.0) {
        fam = fam.with_envelope(modulus_hull(&base));
    }
    fam
}

fn matrix_family(t: &MatrixOperator, base: &CVector, horizon: u64, label: String) -> Result<PointFamily<'static>> {
    let exps: Vec<u64> = (0..horizon).collect();
    let orbit = Arc::new(t.orbit_vec(base, &exps)?);
    let bound = Operator::Matrix(t.clone()).power_norm_bound()?;
    let o1 = orbit.clone();
    let o2 = orbit.clone();
    let dim = t.dim;
    let tau = bound.m * vec_inf_norm(base);
    let env = TailEnvelope {
        head: vec![tau; dim],
        beyond: 0.0,
        vanishes: true,
        description: format!("finite-dimensional orbit bounded by M ||y|| = {tau:.6e}"),
    };
    Ok(PointFamily::by_pair(label, move |p, q| {
        NormInterval::exact(vec_inf_norm(&(&o1[p as usize] - &o1[q as usize])))
    })
    .with_members(move |k| MatrixOperator::from_coords(&o2[k as usize]))
    .with_envelope(env))
}

/// `{T^k x : k >= 0}`.
pub fn orbit_family(op: &Operator, x: &SeqVec, horizon: u64) -> Result<PointFamily<'static>> {
    let label = "orbit".to_string();
    if x.is_exact_zero() {
        return Ok(zero_family(label, x.dim()));
    }
    match op {
        Operator::Diagonal(t) => Ok(diagonal_family(t, x.clone(), label)),
        Operator::Matrix(t) => matrix_family(t, &t.to_coords(x)?, horizon, label),
        Operator::Example1(e) => {
            let e = *e;
            Ok(PointFamily::by_lag(label, move |h| NormInterval::exact(e.orbit_distance(0, h))))
        }
    }
}

/// `D_m = {T^k (T^m - I) x : k >= 0}`.
pub fn diff_family(op: &Operator, x: &SeqVec, m: u64, horizon: u64, head_dim: usize) -> Result<PointFamily<'static>> {
    if m == 0 {
        return Err(Error::Config("difference step m must be >= 1".into()));
    }
    let label = format!("diff_m{m}");
    match op {
        Operator::Example1(e) => {
            let e = *e;
            let profile = e.diff_amplitude_profile(m, head_dim);
            let env = TailEnvelope {
                head: (0..head_dim).map(|n| e.diff_envelope(m, n)).collect(),
                beyond: e.diff_envelope(m, head_dim),
                vanishes: true,
                description: format!(
                    "tau(n) = 2|sin({m} a / 2^(n+1))|; each head coordinate is a translate of one periodic function"
                ),
            };
            Ok(diff_family_metric_only(e, m).with_members(move |_| profile.clone()).with_envelope(env))
        }
        _ => {
            if x.is_exact_zero() {
                return Ok(zero_family(label, x.dim()));
            }
            let y = difference_vector(op, x, m)?;
            if y.is_exact_zero() {
                return Ok(zero_family(label, y.dim()));
            }
            match op {
                Operator::Diagonal(t) => Ok(diagonal_family(t, y, label)),
                Operator::Matrix(t) => matrix_family(t, &t.to_coords(&y)?, horizon, label),
                Operator::Example1(_) => unreachable!(),
            }
        }
    }
}

/// Difference orbit of the shift known only through its closed-form metric.
pub fn diff_family_metric_only(e: crate::operators::Example1Operator, m: u64) -> PointFamily<'static> {
    PointFamily::by_lag(format!("diff_m{m}"), move |h| NormInterval::exact(e.diff_orbit_distance_m(0, h, m)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compactness::tail_uniform_certificate;

    #[test]
    fn dyadic_difference_family_is_certified() {
        let op = Operator::Diagonal(DiagonalOperator::dyadic_signed(1, false).unwrap());
        let fam = diff_family(&op, &SeqVec::ones(48), 1, 256, 48).unwrap();
        let env = fam.envelope.clone().unwrap();
        assert!(tail_uniform_certificate(&fam, &env, 256).unwrap().is_certified());
        assert_eq!(env.head[0], 2.0);
    }

    #[test]
    fn orbit_of_ones_has_no_envelope() {
        let op = Operator::Diagonal(DiagonalOperator::dyadic_signed(1, false).unwrap());
        let fam = orbit_family(&op, &SeqVec::ones(48), 256).unwrap();
        assert!(fam.envelope.is_none());
    }
}
