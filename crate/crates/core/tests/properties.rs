use baryiter_core::analysis::{theoretical_order, Family, OrderQuery};
use baryiter_core::function::FnFunction;
use baryiter_core::interpolants::{eval_plain, InterpolantSpec, Orientation};
use baryiter_core::optimise::{opt_step_d1, opt_step_df};
use baryiter_core::root_search::{
    baseline_step, exact_d1_weights, plain_weights, step_exact_d1, step_exact_df, RootMethod,
    WeightScheme,
};
use baryiter_core::weights::{hermite_product, omega_product, NodeSet};
use baryiter_core::{BigReal, Precision, Real, Sample};
use proptest::prelude::*;

fn prec() -> Precision {
    Precision::new(256).unwrap()
}

fn big(v: f64) -> BigReal {
    BigReal::from_f64(v, prec())
}

fn tol() -> BigReal {
    BigReal::pow10(-20, prec())
}

fn rel(a: &BigReal, b: &BigReal) -> BigReal {
    let scale = a.abs().max_of(b.abs()).max_of(a.one_like());
    (a.clone() - b.clone()).abs() / scale
}

fn separated(v: &[f64], gap: f64) -> bool {
    v.iter()
        .enumerate()
        .all(|(i, a)| v[..i].iter().all(|b| (a - b).abs() >= gap))
}

fn distinct(len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-4.0f64..4.0, len).prop_filter("separated", |v| separated(v, 0.05))
}

fn slope() -> impl Strategy<Value = f64> {
    prop_oneof![-3.0f64..-0.3, 0.3f64..3.0]
}

/// Window with distinct x and distinct f values.
fn window(len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<Sample<BigReal>>> {
    distinct(len)
        .prop_flat_map(|xs| {
            let n = xs.len();
            (Just(xs), distinct(n..=n), prop::collection::vec(slope(), n))
        })
        .prop_map(|(xs, fs, ds)| {
            xs.iter()
                .zip(&fs)
                .zip(&ds)
                .map(|((x, f), d)| Sample::with_slope(big(*x), big(*f), big(*d)))
                .collect()
        })
}

fn no_problem() -> FnFunction<impl Fn(&BigReal, usize) -> BigReal> {
    FnFunction::new(1, |x: &BigReal, _| x.zero_like())
}

fn schemes() -> [WeightScheme<BigReal>; 2] {
    [WeightScheme::XBased, WeightScheme::FBased]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_weights_annihilate_low_powers(v in distinct(2..=9)) {
        let nodes: Vec<BigReal> = v.iter().map(|x| big(*x)).collect();
        let w = omega_product(&NodeSet::new(nodes.clone()).unwrap());
        let n = nodes.len() - 1;
        for k in 0..=n {
            let mut moment = big(0.0);
            let mut scale = big(0.0);
            for (o, x) in w.omega().iter().zip(&nodes) {
                let term = o.clone() * x.powi(k as i32);
                scale = scale.max_of(term.abs());
                moment = moment + term;
            }
            let target = if k == n { big(1.0) } else { big(0.0) };
            prop_assert!((moment - target).abs() <= scale * tol());
        }
    }

    #[test]
    fn product_weights_translate_and_scale(v in distinct(2..=6), shift in -3.0f64..3.0, s in 0.2f64..5.0) {
        let nodes: Vec<BigReal> = v.iter().map(|x| big(*x)).collect();
        let n = nodes.len() as i32 - 1;
        let w = omega_product(&NodeSet::new(nodes.clone()).unwrap());
        let moved = nodes.iter().map(|x| x.clone() + big(shift)).collect();
        let wm = omega_product(&NodeSet::new(moved).unwrap());
        let scaled = nodes.iter().map(|x| x.clone() * big(s)).collect();
        let ws = omega_product(&NodeSet::new(scaled).unwrap());
        for i in 0..w.len() {
            prop_assert!(rel(&w.omega()[i], &wm.omega()[i]) < tol());
            prop_assert!(rel(&(w.omega()[i].clone() * big(s).powi(-n)), &ws.omega()[i]) < tol());
        }
    }

    #[test]
    fn hermite_weights_are_squared_partial_fractions(v in distinct(1..=6), t in -5.0f64..5.0) {
        prop_assume!(v.iter().all(|x| (x - t).abs() > 0.05));
        let nodes: Vec<BigReal> = v.iter().map(|x| big(*x)).collect();
        let h = hermite_product(&NodeSet::new(nodes.clone()).unwrap());
        let t = big(t);
        let mut sum = big(0.0);
        let mut product = big(1.0);
        for (i, x) in nodes.iter().enumerate() {
            let d = t.clone() - x.clone();
            sum = sum + h.lambda()[i].clone() / (d.clone() * d.clone()) + h.gamma()[i].clone() / d.clone();
            product = product * d.clone() * d;
        }
        prop_assert!(rel(&sum, &(big(1.0) / product)) < tol());
    }

    #[test]
    fn exact_df_on_two_points_is_the_secant_step(w in window(2..=2)) {
        let secant = baseline_step(RootMethod::Secant, &no_problem(), &w).unwrap();
        for scheme in schemes() {
            let step = step_exact_df(&w, &plain_weights(&w, &scheme).unwrap()).unwrap();
            prop_assert!(rel(&step, &secant) < tol());
        }
    }

    #[test]
    fn exact_d1_on_one_point_is_the_newton_step(w in window(1..=1)) {
        let newton = baseline_step(RootMethod::Newton, &no_problem(), &w).unwrap();
        for scheme in schemes() {
            let step = step_exact_d1(&w, &exact_d1_weights(&w, &scheme).unwrap()).unwrap();
            prop_assert!(rel(&step, &newton) < tol());
        }
    }

    #[test]
    fn exact_steps_are_affine_equivariant(w in window(2..=5), a in prop_oneof![-4.0f64..-0.25, 0.25f64..4.0], b in -3.0f64..3.0) {
        let (a, b) = (big(a), big(b));
        let moved: Vec<_> = w
            .iter()
            .map(|s| Sample::with_slope(a.clone() * s.x.clone() + b.clone(), s.f.clone(), s.f_prime.clone().unwrap() / a.clone()))
            .collect();
        for scheme in schemes() {
            let s0 = step_exact_df(&w, &plain_weights(&w, &scheme).unwrap()).unwrap();
            let s1 = step_exact_df(&moved, &plain_weights(&moved, &scheme).unwrap()).unwrap();
            prop_assert!(rel(&(a.clone() * s0 + b.clone()), &s1) < tol());
            let s0 = step_exact_d1(&w, &exact_d1_weights(&w, &scheme).unwrap()).unwrap();
            let s1 = step_exact_d1(&moved, &exact_d1_weights(&moved, &scheme).unwrap()).unwrap();
            prop_assert!(rel(&(a.clone() * s0 + b.clone()), &s1) < tol());
        }
    }

    #[test]
    fn exact_steps_ignore_residual_scale(w in window(2..=5), c in prop_oneof![-10.0f64..-0.1, 0.1f64..10.0]) {
        let c = big(c);
        let scaled: Vec<_> = w
            .iter()
            .map(|s| Sample::with_slope(s.x.clone(), c.clone() * s.f.clone(), c.clone() * s.f_prime.clone().unwrap()))
            .collect();
        for scheme in schemes() {
            let s0 = step_exact_df(&w, &plain_weights(&w, &scheme).unwrap()).unwrap();
            let s1 = step_exact_df(&scaled, &plain_weights(&scaled, &scheme).unwrap()).unwrap();
            prop_assert!(rel(&s0, &s1) < tol());
            let s0 = step_exact_d1(&w, &exact_d1_weights(&w, &scheme).unwrap()).unwrap();
            let s1 = step_exact_d1(&scaled, &exact_d1_weights(&scaled, &scheme).unwrap()).unwrap();
            prop_assert!(rel(&s0, &s1) < tol());
        }
    }

    #[test]
    fn exact_steps_ignore_memory_order(w in window(2..=5), seed in any::<u64>()) {
        let mut shuffled = w.clone();
        let len = shuffled.len();
        let mut state = seed;
        for i in (1..len).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (state >> 33) as usize % (i + 1));
        }
        for scheme in schemes() {
            let s0 = step_exact_df(&w, &plain_weights(&w, &scheme).unwrap()).unwrap();
            let s1 = step_exact_df(&shuffled, &plain_weights(&shuffled, &scheme).unwrap()).unwrap();
            prop_assert!(rel(&s0, &s1) < tol());
            let s0 = step_exact_d1(&w, &exact_d1_weights(&w, &scheme).unwrap()).unwrap();
            let s1 = step_exact_d1(&shuffled, &exact_d1_weights(&shuffled, &scheme).unwrap()).unwrap();
            prop_assert!(rel(&s0, &s1) < tol());
        }
    }

    #[test]
    fn optimisation_steps_ignore_objective_affine_maps(w in window(3..=5), a in prop_oneof![-10.0f64..-0.1, 0.1f64..10.0], b in -10.0f64..10.0) {
        let (a, b) = (big(a), big(b));
        let mapped: Vec<_> = w
            .iter()
            .map(|s| Sample::with_slope(s.x.clone(), a.clone() * s.f.clone() + b.clone(), a.clone() * s.f_prime.clone().unwrap()))
            .collect();
        let weights = |w: &[Sample<BigReal>]| NodeSet::new(w.iter().map(|s| s.x.clone()).collect()).unwrap();
        let s0 = opt_step_df(&w, &omega_product(&weights(&w)));
        let s1 = opt_step_df(&mapped, &omega_product(&weights(&mapped)));
        if let (Ok(s0), Ok(s1)) = (s0, s1) {
            prop_assert!(rel(&s0, &s1) < tol());
        }
        let beta = big(1.0);
        let s0 = opt_step_d1(&w, &hermite_product(&weights(&w)), &beta);
        let s1 = opt_step_d1(&mapped, &hermite_product(&weights(&mapped)), &beta);
        if let (Ok(s0), Ok(s1)) = (s0, s1) {
            prop_assert!(rel(&s0, &s1) < tol());
        }
    }

    #[test]
    fn plain_interpolant_reproduces_polynomials(v in distinct(1..=7), coeffs in prop::collection::vec(-2.0f64..2.0, 7), t in -5.0f64..5.0) {
        // Degree at most n through n + 1 nodes.
        let n = v.len() - 1;
        let poly = |x: &BigReal| coeffs[..=n].iter().rev().fold(big(0.0), |acc, c| acc * x.clone() + big(*c));
        let xs: Vec<BigReal> = v.iter().map(|x| big(*x)).collect();
        let samples: Vec<_> = xs.iter().map(|x| Sample::new(x.clone(), poly(x))).collect();
        let w = omega_product(&NodeSet::new(xs).unwrap());
        let spec = InterpolantSpec::plain(samples, w, Orientation::Direct).unwrap();
        let t = big(t);
        if let Ok(value) = eval_plain(&spec, &t) {
            prop_assert!(rel(&value, &poly(&t)) < BigReal::pow10(-15, prec()));
        }
    }
}

proptest! {
    #[test]
    fn theoretical_order_is_monotone_and_bounded(m in 1u32..5, n in 0u32..12, opt in any::<bool>()) {
        let family = if opt { Family::Opt } else { Family::Root };
        let q = OrderQuery::new(family, m, Some(n));
        let l = theoretical_order(q);
        let next = theoretical_order(OrderQuery::new(family, m, Some(n + 1)));
        prop_assert!(next >= l - 1e-12);
        prop_assert!(l <= q.limit() + 1e-12);
        prop_assert!(q.residual(l).abs() <= 1e-12 * l.powi(n as i32 + 1).max(1.0));
    }
}
