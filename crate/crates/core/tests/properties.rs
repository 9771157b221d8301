mod common;

use std::sync::Arc;

use num_bigint::BigUint;
use proptest::prelude::*;

use ztlab::bounds::{binom_bounds_check, rational, Family, Schedule};
use ztlab::exec;
use ztlab::gibbs::{Geometry, Potential, Transfer, DEFAULT_MATRIX_CAP};
use ztlab::recoding::{recode_backward, recode_forward, BlockCode, DEFAULT_BLOCK_CAP};
use ztlab::subshift::{count_p, weighted_g_count, Base};
use ztlab::symbolic::{count_admissible_brute, count_admissible_dp, Alphabet, ForbiddenSet, Pattern, Window};
use ztlab::wang::{count_by_transfer, count_tilings, Region, TileSet};

fn alphabet(n: usize) -> Arc<Alphabet> {
    Arc::new(Alphabet::new((0..n).map(|i| i.to_string())).unwrap())
}

fn words(q: usize) -> impl Strategy<Value = Vec<Vec<usize>>> {
    prop::collection::vec(prop::collection::vec(0..q, 1..=3), 0..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dp_matches_brute(ws in words(3), len in 0usize..8) {
        let a = alphabet(3);
        let f = ForbiddenSet::new(a.clone(), ws.iter().map(|w| Pattern::word(a.clone(), w).unwrap())).unwrap();
        let dp = count_admissible_dp(&f, len, 1 << 20).unwrap();
        let brute = if len == 0 {
            BigUint::from(1u32)
        } else {
            count_admissible_brute(&f, &Window::segment(len).unwrap(), 1 << 20).unwrap()
        };
        prop_assert_eq!(dp, brute);
    }

    #[test]
    fn sandwich_holds(n in 1u64..300, j in 1i64..=50) {
        let b = binom_bounds_check(n, &rational(j, 100), 4096).unwrap();
        prop_assert!(b.holds, "{}", b);
    }

    #[test]
    fn recoding_round_trip(m in 1usize..=3, k in 1usize..=4, seed in any::<u64>()) {
        let a = alphabet(2);
        let code = BlockCode::new(a.clone(), 1, m, DEFAULT_BLOCK_CAP).unwrap();
        let x: Vec<usize> = (0..k * m).map(|i| ((seed >> (i % 64)) & 1) as usize).collect();
        let p = Pattern::word(a.clone(), &x).unwrap();
        let y = recode_forward(&p, &code).unwrap();
        prop_assert_eq!(y.len(), k);
        prop_assert_eq!(recode_backward(&y, &code).unwrap(), p);
    }

    #[test]
    fn finite_volume_oracle(table in prop::collection::vec(-2.0f64..0.0, 8), beta in 0.0f64..5.0) {
        let a = alphabet(2);
        let p = Potential::from_table(a, Window::segment(3).unwrap(), table).unwrap();
        let t = Transfer::new(&p, Geometry::Chain, DEFAULT_MATRIX_CAP).unwrap();
        let eq = t.solve(beta).unwrap();
        let rep = eq.report();
        prop_assert!(rep.variational_gap < 1e-8);
        prop_assert!(rep.entropy >= -1e-12 && rep.entropy <= 2f64.ln() + 1e-12);
        prop_assert!(common::eigen_residual(&eq, &p, beta, rep.pressure) < 1e-9);
        let fam = vec![vec![1, 0, 1], vec![0, 0, 0]];
        let pats: Vec<Pattern> = fam.iter().map(|w| Pattern::word(p.alphabet().clone(), w).unwrap()).collect();
        let engine = eq.mass(&pats).unwrap();
        let brute = common::finite_volume_mass(&eq, &p, beta, 10, 4, &fam);
        prop_assert!((engine - brute).abs() < 1e-9, "engine {} brute {}", engine, brute);
    }

    #[test]
    fn pressure_nonincreasing_for_nonpositive_potentials(table in prop::collection::vec(-3.0f64..0.0, 9), b in 0.0f64..4.0, db in 0.01f64..4.0) {
        let p = Potential::from_table(alphabet(3), Window::segment(2).unwrap(), table).unwrap();
        let t = Transfer::new(&p, Geometry::Chain, DEFAULT_MATRIX_CAP).unwrap();
        let lo = t.solve(b).unwrap().report().pressure;
        let hi = t.solve(b + db).unwrap().report().pressure;
        prop_assert!(hi <= lo + 1e-10);
    }

    #[test]
    fn tiling_counts_agree(seed in any::<u64>(), w in 1usize..4, h in 1usize..4) {
        // Six random tiles over two colours.
        let tiles: Vec<(String, [String; 4])> = (0..6)
            .map(|i| {
                let bits = seed >> (4 * i);
                (format!("t{i}"), [0, 1, 2, 3].map(|k| ((bits >> k) & 1).to_string()))
            })
            .collect();
        let ts = TileSet::new(tiles).unwrap();
        let r = Region::free(w, h).unwrap();
        let a = count_tilings(&ts, &r, 1 << 24).unwrap();
        let b = count_by_transfer(&ts, &r, 1 << 20).unwrap();
        prop_assert_eq!(BigUint::from(a), b);
    }
}

#[test]
fn unit_weights_give_plain_counts() {
    let s = Schedule::toy(&[(3, rational(2, 5)), (4, rational(1, 3))]).unwrap();
    for (k, f) in [(1, Family::Plus), (2, Family::Minus)] {
        let c = count_p(k, f, &s, 1 << 20).unwrap();
        let w = weighted_g_count(k, f, &s, Base::Int(1), &BigUint::from(1u32), 1 << 20, 64).unwrap();
        let ln = (u64::try_from(c).unwrap() as f64).ln();
        assert!(w.log_value.lo_f64() <= ln + 1e-12 && ln <= w.log_value.hi_f64() + 1e-12);
    }
}

#[test]
fn threads_do_not_change_results() {
    let p = Potential::from_table(alphabet(3), Window::segment(3).unwrap(), (0..27).map(|i| -(i as f64) / 13.0).collect()).unwrap();
    let run = || {
        let t = Transfer::new(&p, Geometry::Chain, DEFAULT_MATRIX_CAP).unwrap();
        let r = t.solve(1.7).unwrap().report().clone();
        (r.pressure.to_bits(), r.entropy.to_bits(), r.energy.to_bits())
    };
    assert_eq!(exec::with_threads(1, run), exec::with_threads(4, run));
}
