mod common;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use selfsim::riemann::{moving_edge_flux, solve_exact, vacuum_bound};

#[test]
fn sod_star_pressure_matches_oracle() {
    let g = models()[0];
    let l = g.state_from_pressure(1.0, [0.0, 0.0], 1.0).unwrap();
    let r = g.state_from_pressure(0.125, [0.0, 0.0], 0.1).unwrap();
    let oracle = bisection_star_pressure(&g, &l, &r);
    assert!((oracle - 0.30313).abs() < 5e-6, "oracle {oracle}");
    let fan = solve_exact(&l, &r, &g, [1.0, 0.0]).unwrap();
    assert!((fan.star_p - oracle).abs() <= 1e-10 * oracle);
    assert!((fan.star_v - 0.92745).abs() < 5e-5);
}

#[test]
fn random_pairs_match_bisection_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    for g in models() {
        while checked < 100 * (1 + g.is_isentropic() as usize) {
            let l = random_state(&g, &mut rng);
            let r = random_state(&g, &mut rng);
            if r.v[0] - l.v[0] >= 0.9 * vacuum_bound(&g, &l, &r) {
                continue;
            }
            let oracle = bisection_star_pressure(&g, &l, &r);
            let fan = solve_exact(&l, &r, &g, [1.0, 0.0]).unwrap();
            assert!(
                (fan.star_p - oracle).abs() <= 1e-10 * oracle,
                "{:?} {:?}: {} vs {}",
                l,
                r,
                fan.star_p,
                oracle
            );
            checked += 1;
        }
    }
    assert_eq!(checked, 200);
}

#[test]
fn reversed_problem_is_mirrored() {
    let g = models()[0];
    let l = g.state_from_pressure(1.0, [0.0, 0.0], 1.0).unwrap();
    let r = g.state_from_pressure(0.125, [0.0, 0.0], 0.1).unwrap();
    let fan = solve_exact(&l, &r, &g, [1.0, 0.0]).unwrap();
    let rev = solve_exact(&r, &l, &g, [1.0, 0.0]).unwrap();
    for k in 0..=40 {
        let xi = -2.0 + 0.1 * k as f64;
        let a = fan.sample(xi);
        let b = rev.sample(-xi);
        if (xi.abs() - fan.contact_speed.abs()).abs() < 1e-9 {
            continue;
        }
        assert!((a.rho - b.rho).abs() < 1e-12);
        assert!((a.v[0] + b.v[0]).abs() < 1e-12);
    }
}

#[test]
fn moving_edge_flux_is_galilean_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 100 {
        let g = models()[checked % 2];
        let l = random_state(&g, &mut rng);
        let r = random_state(&g, &mut rng);
        if vacuum_bound(&g, &l, &r) < 4.0 * 1.5 {
            continue;
        }
        let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let n = [th.cos(), th.sin()];
        let w = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
        let a = moving_edge_flux(&l, &r, &g, n, w).unwrap();
        let b = boosted_flux(&g, &l, &r, n, w);
        let scale = a.max_abs().max(1.0);
        for k in 0..4 {
            assert!((a.0[k] - b[k]).abs() <= 1e-11 * scale, "{k}: {} vs {}", a.0[k], b[k]);
        }
        checked += 1;
    }
}

#[test]
fn vacuum_is_reported() {
    let g = models()[0];
    let l = g.state_from_pressure(1.0, [-20.0, 0.0], 1.0).unwrap();
    let r = g.state_from_pressure(1.0, [20.0, 0.0], 1.0).unwrap();
    assert!(solve_exact(&l, &r, &g, [1.0, 0.0]).is_err());
}
