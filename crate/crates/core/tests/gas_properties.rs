use proptest::prelude::*;
use selfsim::gas::{ConservativeState, GasKind, GasModel, PrimitiveState};

fn models() -> [GasModel; 2] {
    [
        GasModel::air(),
        GasModel::isentropic(1.4, 78_494.778_567_552_65).unwrap(),
    ]
}

fn state(g: &GasModel, rho: f64, vx: f64, vy: f64, p: f64) -> PrimitiveState {
    g.state_from_pressure(rho, [vx, vy], p).unwrap()
}

/// Entropy and normal flux components as functions of the conserved vector.
fn eta_of(g: &GasModel, u: &ConservativeState) -> f64 {
    g.entropy_of(u).unwrap()
}

fn psi_of(g: &GasModel, u: &ConservativeState, n: [f64; 2]) -> f64 {
    g.entropy_flux(&g.to_primitive(u).unwrap(), n)
}

fn flux_of(g: &GasModel, u: &ConservativeState, n: [f64; 2]) -> ConservativeState {
    g.physical_flux(&g.to_primitive(u).unwrap(), n)
}

fn perturbed(u: &ConservativeState, k: usize, h: f64) -> ConservativeState {
    let mut v = *u;
    v.0[k] += h;
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn conservative_round_trip(rho in 0.01f64..20.0, vx in -2000f64..2000.0, vy in -2000f64..2000.0,
                               p in 1e2f64..1e7, iso in any::<bool>()) {
        let g = models()[iso as usize];
        let s = state(&g, rho, vx, vy, p);
        let back = g.to_primitive(&g.to_conservative(&s)).unwrap();
        prop_assert!((back.rho - s.rho).abs() <= 1e-14 * s.rho);
        prop_assert!((back.v[0] - s.v[0]).abs() <= 1e-12 * (1.0 + s.speed()));
        prop_assert!((back.v[1] - s.v[1]).abs() <= 1e-12 * (1.0 + s.speed()));
        let scale = s.q + 0.5 * s.speed() * s.speed();
        prop_assert!((back.q - s.q).abs() <= 1e-12 * scale);
    }

    /// `d psi = eta'(U) d f` along every conserved direction.
    #[test]
    fn entropy_flux_is_compatible(rho in 0.2f64..5.0, vx in -500f64..500.0, vy in -500f64..500.0,
                                  p in 5e4f64..5e5, theta in 0.0f64..6.28, iso in any::<bool>()) {
        let g = models()[iso as usize];
        let n = [theta.cos(), theta.sin()];
        let u = g.to_conservative(&state(&g, rho, vx, vy, p));
        let comps = g.components();
        let step = |k: usize| 1e-6 * u.0[..comps].iter().map(|x| x.abs()).fold(0.0, f64::max).max(1.0)
            * if k == 0 { 1e-3 } else { 1.0 };
        let mut grad = [0.0; 4];
        for k in 0..comps {
            let h = step(k);
            grad[k] = (eta_of(&g, &perturbed(&u, k, h)) - eta_of(&g, &perturbed(&u, k, -h))) / (2.0 * h);
        }
        for j in 0..comps {
            let h = step(j);
            let dpsi = (psi_of(&g, &perturbed(&u, j, h), n) - psi_of(&g, &perturbed(&u, j, -h), n)) / (2.0 * h);
            let df = (flux_of(&g, &perturbed(&u, j, h), n) - flux_of(&g, &perturbed(&u, j, -h), n)) * (0.5 / h);
            let rhs: f64 = (0..comps).map(|k| grad[k] * df.0[k]).sum();
            let scale: f64 = (0..comps).map(|k| (grad[k] * df.0[k]).abs()).sum::<f64>() + dpsi.abs();
            prop_assert!((dpsi - rhs).abs() <= 1e-5 * scale, "j={j} dpsi={dpsi} rhs={rhs}");
        }
    }

    #[test]
    fn entropy_is_convex(rho in 0.2f64..5.0, vx in -500f64..500.0, vy in -500f64..500.0,
                         p in 5e4f64..5e5, d in prop::array::uniform4(-1.0f64..1.0), iso in any::<bool>()) {
        let g = models()[iso as usize];
        let s = state(&g, rho, vx, vy, p);
        let u = g.to_conservative(&s);
        let comps = g.components();
        let scale = [rho, rho * 300.0, rho * 300.0, u.0[3].abs().max(1.0)];
        let mut dir = ConservativeState::ZERO;
        for k in 0..comps {
            dir.0[k] = 1e-3 * d[k] * scale[k];
        }
        prop_assume!(dir.max_abs() > 0.0);
        let second = eta_of(&g, &(u + dir)) + eta_of(&g, &(u - dir)) - 2.0 * eta_of(&g, &u);
        prop_assert!(second > 0.0, "second difference {second}");
    }

    #[test]
    fn flux_is_linear_in_direction(rho in 0.1f64..5.0, vx in -900f64..900.0, vy in -900f64..900.0,
                                   p in 1e4f64..1e6, a in -2.0f64..2.0, b in -2.0f64..2.0, iso in any::<bool>()) {
        let g = models()[iso as usize];
        let s = state(&g, rho, vx, vy, p);
        let (n1, n2) = ([0.6, 0.8], [-0.28, 0.96]);
        let combined = g.physical_flux(&s, [a * n1[0] + b * n2[0], a * n1[1] + b * n2[1]]);
        let split = g.physical_flux(&s, n1) * a + g.physical_flux(&s, n2) * b;
        let scale = g.physical_flux(&s, n1).max_abs() + g.physical_flux(&s, n2).max_abs();
        prop_assert!((combined - split).max_abs() <= 1e-12 * scale);
    }
}

#[test]
fn isentropic_energy_slot_stays_zero() {
    let g = models()[1];
    assert_eq!(g.kind, GasKind::Isentropic);
    let s = state(&g, 1.19, [1000.0, 0.0][0], 0.0, 0.0);
    assert_eq!(g.to_conservative(&s).0[3], 0.0);
    assert_eq!(g.physical_flux(&s, [1.0, 0.0]).0[3], 0.0);
    assert_eq!(g.components(), 3);
}

#[test]
fn inadmissible_states_are_rejected() {
    let g = GasModel::air();
    assert!(g.state(0.0, [0.0, 0.0], 1.0).is_err());
    assert!(g.state(1.0, [0.0, 0.0], -1.0).is_err());
    assert!(g.to_primitive(&ConservativeState([1.0, 10.0, 0.0, 1.0])).is_err());
    assert!(GasModel::nonisentropic(1.0).is_err());
    assert!(GasModel::nonisentropic(1.7).is_err());
}
