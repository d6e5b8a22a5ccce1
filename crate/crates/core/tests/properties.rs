//! Invariants of the elliptic solve and the explicit step on random data.

use ksch::elliptic::{compute_mu, solve_w, EllipticConfig};
use ksch::stepper::{stable_dt, FaceMobility, FormulationRegistry, StepConfig, Stepper};
use ksch::{Field, Grid, ModelParams};
use proptest::prelude::*;

fn density(max: f64) -> impl Strategy<Value = Vec<f64>> {
    (8usize..40).prop_flat_map(move |n| prop::collection::vec(0.0..max, n))
}

fn params() -> impl Strategy<Value = ModelParams> {
    (0.05f64..2.0, 0.2f64..3.0, 1.5f64..12.0).prop_map(|(s, d, g)| ModelParams::new(s, d, g).unwrap())
}

fn field(values: Vec<f64>) -> Field {
    Field::from_values(Grid::new_1d(1.0, values.len()).unwrap(), values)
}

fn stepper(params: &ModelParams, formulation: &str, faces: FaceMobility) -> Stepper {
    let cfg = StepConfig { formulation: formulation.into(), face_mobility: faces, ..Default::default() };
    Stepper::from_config(params.clone(), cfg, EllipticConfig::default()).unwrap()
}

/// Largest dt in (0, hi] for which one step keeps n >= 0, by bisection.
fn positivity_limit(s: &mut Stepper, state: &ksch::StateBundle, hi: f64) -> f64 {
    let ok = |s: &mut Stepper, dt: f64| s.step(state, dt).map(|x| x.n.min() >= 0.0).unwrap_or(false);
    if ok(s, hi) {
        return hi;
    }
    let (mut lo, mut hi) = (0.0, hi);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if ok(s, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn comparison_principle(base in density(1.2), bump in prop::collection::vec(0.0f64..0.5, 40), p in params()) {
        let n1 = field(base.clone());
        let n2 = field(base.iter().zip(&bump).map(|(a, b)| a + b).collect());
        let cfg = EllipticConfig::default();
        let w1 = solve_w(&n1, &p, &cfg).unwrap().w;
        let w2 = solve_w(&n2, &p, &cfg).unwrap().w;
        for (a, b) in w1.values().iter().zip(w2.values()) {
            prop_assert!(*a <= *b + 1e-9, "{a} > {b}");
        }
    }

    #[test]
    fn bound_transfer_and_mu_bound(values in density(1.5), p in params()) {
        let n = field(values);
        let w = solve_w(&n, &p, &EllipticConfig::default()).unwrap().w;
        let wmax = w.max().max(0.0);
        prop_assert!(wmax.powf(p.gamma) <= n.max() + 1e-8);
        prop_assert!(w.min() >= -1e-10);
        let mu = compute_mu(&n, &w, &p);
        for (m, v) in mu.values().iter().zip(n.values()) {
            prop_assert!(*m <= p.delta / p.sigma * v + 1e-8);
        }
    }

    #[test]
    fn one_step_conserves_mass(values in density(1.0), p in params(), ks in any::<bool>()) {
        let n = field(values.iter().map(|v| v + 0.05).collect());
        let form = if ks { "ks" } else { "ch" };
        let mut s = stepper(&p, form, FaceMobility::Upwind);
        let state = s.initial_state(n, 0.0).unwrap();
        let dt = s.stable_dt(&state);
        let next = s.step(&state, dt).unwrap();
        let (m0, m1) = (state.n.integral(), next.n.integral());
        prop_assert!((m1 - m0).abs() <= 1e-13 * m0.abs().max(1.0));
        prop_assert!(next.n.min() >= 0.0);
    }
}

#[test]
fn stable_dt_is_below_the_positivity_limit() {
    let registry = FormulationRegistry::with_builtin();
    let cases = [
        (vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0], 1.0),
        ((0..32).map(|i| if i % 3 == 0 { 0.9 } else { 0.01 }).collect(), 0.1),
        ((0..24).map(|i| (i as f64 * 0.7).sin().abs()).collect(), 0.5),
    ];
    for (values, sigma) in cases {
        let p = ModelParams::new(sigma, 1.0, 4.0).unwrap();
        for form in ["ch", "ks"] {
            let mut s = stepper(&p, form, FaceMobility::Upwind);
            let state = s.initial_state(field(values.clone()), 0.0).unwrap();
            let dt = stable_dt(&state, &p, s.step_config(), registry.create(form).unwrap().as_ref());
            assert!(dt > 0.0 && dt.is_finite());
            let limit = positivity_limit(&mut s, &state, 1.0);
            assert!(dt <= limit, "{form}: stable_dt {dt:e} exceeds positivity limit {limit:e}");
        }
    }
}
