use chaosdeg::estimator::{generate_orbit, Orbit};
use chaosdeg::lyapunov::spectrum_along;
use chaosdeg::mapdsl::parse_map_spec;
use chaosdeg::{builtin, lyapunov_1d, lyapunov_spectrum, MapSystem, OrbitConfig};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn linear_map(m: &DMatrix<f64>) -> MapSystem {
    let dim = m.nrows();
    let mut text = format!("dimension = {dim}\ndomain = {}\n", vec!["[-1, 1]"; dim].join(" x "));
    for r in 0..dim {
        let terms: Vec<String> = (0..dim).map(|c| format!("({:?})*x{}", m[(r, c)], c + 1)).collect();
        text.push_str(&format!("f{} = {}\n", r + 1, terms.join(" + ")));
    }
    parse_map_spec(&text).unwrap()
}

fn still_orbit(dim: usize, n: usize) -> Orbit {
    Orbit::from_states(dim, 1, vec![0.0; dim * (n + 1)]).unwrap()
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn square(dim: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-2.0f64..2.0, dim * dim).prop_map(move |v| DMatrix::from_row_slice(dim, dim, &v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn symmetric_linear_map_gives_log_singular_values(a in square(3)) {
        let m = &a + a.transpose();
        let sv = m.clone().svd(false, false).singular_values;
        prop_assume!(sv.iter().all(|s| *s > 1e-3));
        let mut logs: Vec<f64> = sv.iter().map(|s| s.ln()).collect();
        logs = sorted_desc(logs);
        prop_assume!(logs.windows(2).all(|w| w[0] - w[1] > 0.05));
        let n = 4000;
        let s = spectrum_along(&linear_map(&m), &[], &still_orbit(3, n), n, 1).unwrap();
        for (got, want) in s.exponents.iter().zip(&logs) {
            prop_assert!((got - want).abs() < 1e-2, "{:?} vs {:?}", s.exponents, logs);
        }
    }

    #[test]
    fn general_linear_map_gives_log_eigenvalue_moduli(m in square(2)) {
        let eig = m.complex_eigenvalues();
        let mut logs: Vec<f64> = eig.iter().map(|z| z.norm().ln()).collect();
        prop_assume!(logs.iter().all(|l| l.is_finite() && *l > -5.0));
        logs = sorted_desc(logs);
        // a complex pair shares one modulus; otherwise ask for a clear gap
        let complex = eig.iter().any(|z| z.im.abs() > 1e-9);
        prop_assume!(complex || logs[0] - logs[1] > 0.1);
        let n = 20_000;
        let s = spectrum_along(&linear_map(&m), &[], &still_orbit(2, n), n, 1).unwrap();
        for (got, want) in s.exponents.iter().zip(&logs) {
            prop_assert!((got - want).abs() < 2e-2, "{:?} vs {:?} for {}", s.exponents, logs, m);
        }
    }

    #[test]
    fn baker_spectrum_is_log_two_a_and_log_half_a(a in 0.01f64..=1.0) {
        let map = builtin("baker").unwrap();
        let cfg = OrbitConfig::new(vec![0.3, 0.3], 100, 2_000);
        let s = lyapunov_spectrum(&map, &[a], &cfg, 1).unwrap().bounded().unwrap();
        prop_assert!((s.exponents[0] - (2.0 * a).ln()).abs() <= 1e-9);
        prop_assert!((s.exponents[1] - (0.5 * a).ln()).abs() <= 1e-9);
    }

    #[test]
    fn one_dimensional_spectrum_matches_derivative_mean(r in 3.6f64..4.0) {
        let map = builtin("logistic").unwrap();
        let cfg = OrbitConfig::new(vec![0.3], 1000, 10_000);
        let direct = lyapunov_1d(&map, &[r], &cfg).unwrap().bounded().unwrap();
        let qr = lyapunov_spectrum(&map, &[r], &cfg, 1).unwrap().bounded().unwrap();
        prop_assert!((direct - qr.exponents[0]).abs() <= 1e-12);
    }
}

#[test]
fn finite_window_matches_literal_jacobian_product() {
    let map = builtin("tinkerbell_a").unwrap();
    // short enough that the explicit product stays well conditioned
    let n = 12;
    let cfg = OrbitConfig::new(vec![0.1, 0.1], 1000, n);
    let orbit = generate_orbit(&map, &[0.9], &cfg).unwrap().bounded().unwrap();
    let mut product = DMatrix::<f64>::identity(2, 2);
    for x in orbit.iter().take(n) {
        let (j, _) = map.jacobian_matrix(x, &[0.9]).unwrap();
        product = DMatrix::from_row_slice(2, 2, &j) * product;
    }
    let r = product.clone().qr().r();
    let want = sorted_desc((0..2).map(|k| r[(k, k)].abs().ln() / n as f64).collect());
    let got = spectrum_along(&map, &[0.9], &orbit, n, 1).unwrap();
    for (g, w) in got.exponents.iter().zip(&want) {
        assert!((g - w).abs() < 1e-10, "{:?} vs {want:?}", got.exponents);
    }
    // sqrt of eigenvalues of J_n J_n^T, the textbook form, agrees as n grows
    let gram = &product * product.transpose();
    let eig = gram.symmetric_eigenvalues();
    let top = eig.iter().cloned().fold(f64::MIN, f64::max).sqrt().ln() / n as f64;
    assert!((top - got.exponents[0]).abs() < 0.2);
}

#[test]
fn exponent_sum_is_mean_log_determinant() {
    let map = builtin("tinkerbell_a").unwrap();
    let n = 20_000;
    let cfg = OrbitConfig::new(vec![0.1, 0.1], 1000, n);
    let orbit = generate_orbit(&map, &[0.9], &cfg).unwrap().bounded().unwrap();
    let mut logdet = 0.0;
    for x in orbit.iter().take(n) {
        let (j, _) = map.jacobian_matrix(x, &[0.9]).unwrap();
        logdet += (j[0] * j[3] - j[1] * j[2]).abs().ln();
    }
    let s = spectrum_along(&map, &[0.9], &orbit, n, 1).unwrap();
    assert!((s.exponents.iter().sum::<f64>() - logdet / n as f64).abs() < 1e-10);
}

#[test]
fn sparse_renormalization_agrees_with_every_step() {
    let map = builtin("tinkerbell_a").unwrap();
    let cfg = OrbitConfig::new(vec![0.1, 0.1], 1000, 20_000);
    let every = lyapunov_spectrum(&map, &[0.9], &cfg, 1).unwrap().bounded().unwrap();
    for k in [2, 5, 10] {
        let sparse = lyapunov_spectrum(&map, &[0.9], &cfg, k).unwrap().bounded().unwrap();
        for (a, b) in every.exponents.iter().zip(&sparse.exponents) {
            assert!(
                (a - b).abs() < 1e-9,
                "renorm every {k}: {:?} vs {:?}",
                every.exponents,
                sparse.exponents
            );
        }
    }
}

#[test]
fn estimates_settle_as_window_doubles() {
    for (name, p) in [
        ("logistic", 4.0),
        ("tinkerbell_a", 0.9),
        ("baker", 1.0),
        ("bernoulli", 1.0),
    ] {
        let map = builtin(name).unwrap();
        let run = |n| {
            let cfg = OrbitConfig::new(map.default_x0().to_vec(), 1000, n);
            lyapunov_spectrum(&map, &[p], &cfg, 1)
                .unwrap()
                .bounded()
                .unwrap()
                .exponents
        };
        let (a, b) = (run(100_000), run(200_000));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-2, "{name}: {a:?} vs {b:?}");
        }
    }
}

#[test]
fn logistic_full_chaos_is_log_two() {
    let map = builtin("logistic").unwrap();
    let lam = lyapunov_1d(&map, &[4.0], &OrbitConfig::for_map(&map))
        .unwrap()
        .bounded()
        .unwrap();
    assert!((lam - std::f64::consts::LN_2).abs() < 0.01, "{lam}");
}

#[test]
fn superstable_point_gives_minus_infinity() {
    // x = 0.5 is a fixed point of r = 2 and f'(0.5) = 0
    let map = builtin("logistic").unwrap();
    let lam = lyapunov_1d(&map, &[2.0], &OrbitConfig::new(vec![0.5], 0, 10))
        .unwrap()
        .bounded()
        .unwrap();
    assert_eq!(lam, f64::NEG_INFINITY);
}
