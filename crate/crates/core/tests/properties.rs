mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::DyadicOracle;
use orbitlab::compactness::{greedy_net, greedy_packing, PointFamily};
use orbitlab::ensembles::{gaussian_matrix, random_power_bounded};
use orbitlab::jdlg::split_for;
use orbitlab::operators::{DiagonalOperator, Example1Operator, MatrixOperator, Operator, RootOfUnity, Which};
use orbitlab::output::canonical_json;
use orbitlab::seqspace::{NormInterval, Scalar, SeqVec, Tail};
use orbitlab::witness::{multap_refine, telescope_check, Context};
use orbitlab::Error;

fn scalar() -> impl Strategy<Value = Scalar> {
    (-4.0f64..4.0, -4.0f64..4.0).prop_map(|(re, im)| Scalar::new(re, im))
}

fn null_vec(len: usize) -> impl Strategy<Value = SeqVec> {
    (prop::collection::vec(scalar(), 1..=len), 0.0f64..0.5)
        .prop_map(|(h, b)| SeqVec::new(h, Tail::NullEnvelope { bound: b }).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_enclosure_contains_head_maximum(v in null_vec(24)) {
        let n = v.sup_norm();
        let head_max = v.head().iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(n.lo <= n.hi);
        prop_assert!(n.lo >= head_max - 1e-15);
        prop_assert!(n.hi >= head_max);
    }

    #[test]
    fn distance_enclosures_obey_triangle_inequality(a in null_vec(16), b in null_vec(16), c in null_vec(16)) {
        let ac = a.dist(&c);
        let ab = a.dist(&b);
        let bc = b.dist(&c);
        prop_assert!(ac.lo <= ab.hi + bc.hi + 1e-12);
    }

    #[test]
    fn dyadic_powers_compose(num in 1i64..16, p in 0u64..1 << 40, q in 0u64..1 << 40) {
        let t = DiagonalOperator::dyadic(2 * num - 1, RootOfUnity::ONE).unwrap();
        let x = SeqVec::ones(40);
        let lhs = t.apply_power(p, &t.apply_power(q, &x));
        let rhs = t.apply_power(p + q, &x);
        let dev = lhs.head().iter().zip(rhs.head()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(dev <= 1e-14);
    }

    #[test]
    fn dyadic_telescoping_is_exact(num in 1i64..16, root in 1u64..5, n in 0u64..1 << 50, m in 1u64..=6) {
        let t = DiagonalOperator::dyadic(2 * num - 1, RootOfUnity::new(1, root).unwrap()).unwrap();
        let r = telescope_check(&Operator::Diagonal(t), &SeqVec::ones(48), n, m).unwrap();
        prop_assert_eq!(r, 0.0);
    }

    #[test]
    fn dyadic_entries_match_integer_phases(k in 0u64..1 << 62) {
        let t = DiagonalOperator::dyadic(1, RootOfUnity::ONE).unwrap();
        let o = DyadicOracle::plain();
        for n in 0..64usize {
            let lib = t.entry_power(n, k) - Scalar::new(1.0, 0.0);
            prop_assert!((lib - o.minus_one(n as u32, k)).norm() <= 1e-14);
        }
    }

    #[test]
    fn telescoping_holds_for_random_matrices(seed in any::<u64>(), n in 0u64..=16, m in 1u64..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_power_bounded(&mut rng, 8, false);
        let xv = gaussian_matrix(&mut rng, c.rv_dim + c.st_dim, 1).column(0).into_owned();
        let r = telescope_check(&Operator::Matrix(c.operator), &MatrixOperator::from_coords(&xv), n, m).unwrap();
        prop_assert!(r <= 1e-12);
    }

    #[test]
    fn canonical_json_roundtrips_floats(xs in prop::collection::vec(-1e300f64..1e300, 1..20)) {
        let text = canonical_json(&xs).unwrap();
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, xs.iter().map(|x| if *x == 0.0 { 0.0 } else { *x }).collect::<Vec<_>>());
    }

    #[test]
    fn greedy_net_covers_and_packing_separates(
        pts in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 2..120),
        eps in 0.05f64..2.0,
    ) {
        let p1 = pts.clone();
        let fam = PointFamily::by_pair("points", move |i, j| {
            let (a, b) = (p1[i as usize], p1[j as usize]);
            NormInterval::exact((a.0 - b.0).abs().max((a.1 - b.1).abs()))
        });
        let h = pts.len() as u64;
        let d = |i: u64, j: u64| {
            let (a, b) = (pts[i as usize], pts[j as usize]);
            (a.0 - b.0).abs().max((a.1 - b.1).abs())
        };
        let net = greedy_net(&fam, eps, h).unwrap();
        for i in 0..h {
            prop_assert!(net.centers.iter().any(|&c| d(i, c) <= eps));
        }
        let pack = greedy_packing(&fam, eps, h, usize::MAX).unwrap();
        for (a, &i) in pack.witnesses.iter().enumerate() {
            for &j in &pack.witnesses[a + 1..] {
                prop_assert!(d(i, j) >= eps);
            }
        }
        // An uncapped greedy packing is maximal, hence also an eps-net.
        for i in 0..h {
            prop_assert!(pack.witnesses.iter().any(|&w| d(i, w) < eps || i == w));
        }
    }

    #[test]
    fn shift_grid_never_exceeds_closed_form(p in 0u64..5000, q in 0u64..5000, a in 0.1f64..3.0, m in 1u64..4) {
        let e = Example1Operator::new(a).unwrap();
        for w in [Which::Orbit, Which::DiffOrbit { m }] {
            let grid = e.grid_oracle(p, q, w, Default::default());
            prop_assert!(grid <= e.distance(w, p, q) + 1e-12);
        }
    }
}

/// `max_k ||T^q v_k - T^p v_k||` for `v_k = T^k 1 - 1` with entries
/// `exp(2 pi i num / 2^(n+1))`, computed from integer phases.
fn oracle_alignment(num: u64, ks: &[u64], p: u64, q: u64) -> f64 {
    let o = DyadicOracle::plain();
    ks.iter()
        .map(|&k| {
            (0..=common::N_MAX)
                .map(|n| o.chord(n, q.wrapping_mul(num), p.wrapping_mul(num)) * o.chord(n, k.wrapping_mul(num), 0))
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Alignment search against an exhaustive scan of all candidate pairs.
    #[test]
    fn alignment_search_agrees_with_exhaustive_scan(
        num in 0u64..4,
        ks in prop::collection::vec(1u64..64, 1..4),
        mut n_seq in prop::collection::btree_set(0u64..1 << 20, 4..40),
        tol_exp in 1i32..8,
        gap_min in 1u64..16,
    ) {
        let num = 2 * num + 1;
        let op = Operator::Diagonal(DiagonalOperator::dyadic(num as i64, RootOfUnity::ONE).unwrap());
        let split = split_for(&op).unwrap();
        let ctx = Context::new(&op, &split, &SeqVec::ones(48), 1 << 21);
        let vectors: Vec<SeqVec> = ks.iter().map(|&k| ctx.vector(k).unwrap()).collect();
        let seq: Vec<u64> = std::mem::take(&mut n_seq).into_iter().collect();
        let tol = 0.5f64.powi(tol_exp);

        let mut exhaustive = f64::INFINITY;
        for (a, &p) in seq.iter().enumerate() {
            for &q in &seq[a + 1..] {
                if q - p >= gap_min {
                    exhaustive = exhaustive.min(oracle_alignment(num, &ks, p, q));
                }
            }
        }

        match multap_refine(&ctx, &vectors, &seq, tol, gap_min) {
            Ok(r) => {
                let (p, q) = (r.indices[0], r.indices[1]);
                prop_assert!(seq.contains(&p) && seq.contains(&q) && q - p >= gap_min);
                prop_assert!(r.indices.windows(2).all(|w| w[1] - w[0] >= gap_min));
                let truth = oracle_alignment(num, &ks, p, q);
                prop_assert!(truth <= tol + 1e-12, "pair ({p}, {q}) has alignment {truth} > {tol}");
                prop_assert!((truth - r.achieved).abs() <= 1e-9);
                prop_assert!(exhaustive <= tol + 1e-12);
            }
            Err(Error::Exhausted { best_tol, .. }) => {
                // The reported value is an upper bound for the best pair.
                prop_assert!(best_tol + 1e-12 >= exhaustive, "best_tol {best_tol} below exhaustive minimum {exhaustive}");
            }
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }
}
