mod common;

use common::*;
use num_bigint::BigInt;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use vqc_spectrum::circuit::Gate;
use vqc_spectrum::scalar::{gaussian_from_i, gaussian_to_complex};
use vqc_spectrum::spectrum::{
    coefficient_covariance, coefficient_mean, coefficient_moments, combinatorial_weight,
    combinatorial_weight_1d, combinatorial_weight_closed_form, combinatorial_weight_closed_form_1d,
    evaluate_coefficient, evaluate_fourier_sum, naive_spectrum, trig_moment, trig_moment_normalized,
    SpectrumRecord,
};
use vqc_spectrum::{analyze, Circuit, Frequency, Model, Observable, ParamRef, SpectrumReport, TreeOptions};

fn report(m: &Model) -> SpectrumReport {
    analyze(m, &TreeOptions::default()).unwrap()
}

/// Coefficients on the naive grid by sampling the dense simulator on
/// `2N_j + 1` points per feature.
fn dft_oracle(m: &Model, theta: &[f64]) -> Vec<(Frequency, C64)> {
    let counts = m.circuit.encoding_counts();
    let axes: Vec<Vec<f64>> = counts
        .iter()
        .map(|&n| {
            let p = 2 * n + 1;
            (0..p).map(|k| 2.0 * PI * k as f64 / p as f64).collect()
        })
        .collect();
    let mut points: Vec<Vec<f64>> = vec![vec![]];
    for axis in &axes {
        points = points
            .into_iter()
            .flat_map(|p| axis.iter().map(move |&v| [p.clone(), vec![v]].concat()))
            .collect();
    }
    let samples: Vec<(Vec<f64>, C64)> = points
        .into_iter()
        .map(|x| {
            let y = dense_expectation(&m.circuit, &m.observable, &x, theta);
            (x, C64::new(y, 0.0))
        })
        .collect();
    naive_spectrum(&counts)
        .into_iter()
        .map(|w| {
            let c = direct_dft(&samples, &w.0);
            (w, c)
        })
        .collect()
}

fn model_with_features<R: Rng>(rng: &mut R) -> Model {
    loop {
        let m = random_model(rng, 3, 7, 5);
        if m.circuit.d > 0 {
            return m;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectrum_is_symmetric_and_inside_naive_grid(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = report(&model_with_features(&mut rng));
        let naive = r.naive_grid();
        for c in &r.coefficients {
            prop_assert!(naive.binary_search(&c.frequency).is_ok());
            prop_assert!(r.contains(&c.frequency.neg()));
        }
        let th: Vec<f64> = (0..r.w).map(|_| rng.gen_range(-PI..PI)).collect();
        for c in &r.coefficients {
            let a = evaluate_coefficient(c, &th).unwrap();
            let b = evaluate_coefficient(r.coefficient(&c.frequency.neg()).unwrap(), &th).unwrap();
            prop_assert!((a - b.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn coefficients_match_dft_oracle(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = model_with_features(&mut rng);
        let r = report(&m);
        let th: Vec<f64> = (0..r.w).map(|_| rng.gen_range(-PI..PI)).collect();
        for (w, oracle) in dft_oracle(&m, &th) {
            let got = match r.coefficient(&w) {
                Some(c) => evaluate_coefficient(c, &th).unwrap(),
                None => C64::new(0.0, 0.0),
            };
            prop_assert!((got - oracle).norm() < 1e-10, "{} {} vs {}", w, got, oracle);
        }
    }

    #[test]
    fn fourier_sum_matches_dense_simulation(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_model(&mut rng, 3, 8, 6);
        let r = report(&m);
        let (x, th) = random_point(&mut rng, r.d, r.w);
        let got = evaluate_fourier_sum(&r.coefficients, &x, &th).unwrap();
        let want = dense_expectation(&m.circuit, &m.observable, &x, &th);
        prop_assert!((got.re - want).abs() < 1e-10 && got.im.abs() < 1e-10);
    }

    #[test]
    fn weight_matches_laurent_expansion(s in 0u32..=12, c in 0u32..=12, omega in -26i64..=26) {
        let want = laurent_weight(s, c, omega);
        prop_assert_eq!(combinatorial_weight_1d(s, c, omega), BigInt::from(want));
        let closed = combinatorial_weight_closed_form_1d(s, c, omega);
        prop_assert_eq!(closed, gaussian_from_i(want as i64, 0));
    }

    #[test]
    fn multi_dimensional_weight_factorizes(
        sc in proptest::collection::vec((0u32..=5, 0u32..=5, -10i64..=10), 1..=3)
    ) {
        let s: Vec<u32> = sc.iter().map(|t| t.0).collect();
        let c: Vec<u32> = sc.iter().map(|t| t.1).collect();
        let w: Vec<i64> = sc.iter().map(|t| t.2).collect();
        let want: i128 = sc.iter().map(|&(s, c, w)| laurent_weight(s, c, w)).product();
        prop_assert_eq!(combinatorial_weight(&s, &c, &w), BigInt::from(want));
        prop_assert_eq!(combinatorial_weight_closed_form(&s, &c, &w), gaussian_from_i(want as i64, 0));
    }

    #[test]
    fn report_record_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut r = report(&random_model(&mut rng, 2, 6, 4));
        r.elapsed_ms = None;
        let text = serde_json::to_string(&SpectrumRecord::from(&r)).unwrap();
        let back: SpectrumRecord = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(SpectrumReport::try_from(&back).unwrap(), r);
    }
}

#[test]
fn trig_moments_match_quadrature() {
    assert_eq!(trig_moment(0, 0), 2.0 * PI);
    for s in 0..=8u32 {
        for c in 0..=8u32 {
            let q = integrate(&|t: f64| C64::new(t.sin().powi(s as i32) * t.cos().powi(c as i32), 0.0), -PI, PI, 1e-13);
            assert!((trig_moment(s, c) - q.re).abs() < 1e-11, "s={s} c={c}");
        }
    }
    assert_eq!(trig_moment_normalized(2, 2), vqc_spectrum::Rational::new(1.into(), 8.into()));
}

#[test]
fn coefficient_moments_match_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    while checked < 12 {
        let m = model_with_features(&mut rng);
        if m.circuit.w == 0 || m.circuit.w > 2 {
            continue;
        }
        let r = report(&m);
        let w = r.w;
        let vol = (2.0 * PI).powi(w as i32);
        let polys: Vec<_> = r.coefficients.iter().take(4).collect();
        let (means, cov) = coefficient_moments(&polys);
        for (a, pa) in polys.iter().enumerate() {
            let mean = integrate_cube(&|t: &[f64]| evaluate_coefficient(pa, t).unwrap(), w, 1e-12) / vol;
            assert!((mean - coefficient_mean(pa)).norm() < 1e-9);
            assert!((mean - means[a]).norm() < 1e-9);
            for (b, pb) in polys.iter().enumerate() {
                let mb = coefficient_mean(pb);
                let integrand = |t: &[f64]| {
                    (evaluate_coefficient(pa, t).unwrap() - mean) * (evaluate_coefficient(pb, t).unwrap() - mb).conj()
                };
                let q = integrate_cube(&integrand, w, 1e-12) / vol;
                let exact = coefficient_covariance(pa, pb).unwrap();
                assert!((q - exact).norm() < 1e-9, "{q} vs {exact}");
                assert!((q - cov[a * polys.len() + b]).norm() < 1e-9);
            }
        }
        checked += 1;
    }
}

#[test]
fn duplicated_encoding_cancels_the_middle_frequency() {
    let f = ParamRef::feature;
    let c = Circuit::new(2, 2, 0)
        .with(Gate::rx(0, f(0)))
        .with(Gate::rx(0, f(0)))
        .with(Gate::rx(1, f(1)));
    let r = report(&Model::new(c, Observable::parse_single("ZI").unwrap()));
    assert_eq!(r.spectrum(), vec![Frequency(vec![-2, 0]), Frequency(vec![2, 0])]);
    assert_eq!(r.naive_grid().len(), 15);
    for poly in &r.coefficients {
        assert_eq!(poly.terms.len(), 1);
        assert_eq!(gaussian_to_complex::<f64>(&poly.terms[0].amplitude), C64::new(0.5, 0.0));
    }
}
