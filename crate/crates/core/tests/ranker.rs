mod common;

use common::*;
use proptest::prelude::*;
use vqc_spectrum::ranker::{r_corr_breakdown, score_and_rank, shared_grid, CorrOptions, Normalization, RawTerms};
use vqc_spectrum::{analyze, rank_architectures, RankOptions, SpectrumReport, TreeOptions};

fn reports() -> Vec<SpectrumReport> {
    [truth_model(), superset_model(), disjoint_model(), minimal_model()]
        .iter()
        .map(|m| analyze(m, &TreeOptions::default()).unwrap())
        .collect()
}

fn terms_strategy() -> impl Strategy<Value = Vec<RawTerms>> {
    proptest::collection::vec((0.0f64..10.0, 0.0f64..10.0, 0.0f64..1.0), 2..8).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (a, b, c))| RawTerms {
                id: format!("c{i}"),
                r_omega: a,
                r_corr: b,
                r_punish: c,
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn ranking_ignores_a_common_scale(terms in terms_strategy(), k in 0.01f64..100.0) {
        for norm in [Normalization::Max, Normalization::MinMax] {
            let base = score_and_rank(&terms, norm).unwrap();
            let mut scaled = terms.clone();
            for t in &mut scaled {
                t.r_omega *= k;
                t.r_corr *= k;
            }
            let again = score_and_rank(&scaled, norm).unwrap();
            for (a, b) in base.iter().zip(&again) {
                prop_assert!((a.3 - b.3).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn worse_terms_never_improve_the_rank(terms in terms_strategy(), which in 0usize..8, bump in 0.0f64..5.0) {
        let which = which % terms.len();
        let rank_of = |ts: &[RawTerms]| {
            score_and_rank(ts, Normalization::Max).unwrap().iter().position(|r| r.0 == which).unwrap()
        };
        let mut worse = terms.clone();
        worse[which].r_omega += bump;
        worse[which].r_punish += bump / 10.0;
        prop_assert!(rank_of(&worse) >= rank_of(&terms));
    }

    #[test]
    fn scores_come_out_sorted(terms in terms_strategy()) {
        let rows = score_and_rank(&terms, Normalization::Max).unwrap();
        prop_assert!(rows.windows(2).all(|w| w[0].3 <= w[1].3));
        for r in &rows {
            prop_assert!((0.0..=1.0).contains(&r.1) && (0.0..=1.0).contains(&r.2));
        }
    }
}

#[test]
fn ties_keep_input_order() {
    let t = |id: &str| RawTerms { id: id.into(), r_omega: 1.0, r_corr: 1.0, r_punish: 0.5 };
    let rows = score_and_rank(&[t("a"), t("b"), t("c")], Normalization::Max).unwrap();
    assert_eq!(rows.iter().map(|r| r.0).collect::<Vec<_>>(), vec![0, 1, 2]);
    assert!(score_and_rank(&[], Normalization::Max).is_err());
}

#[test]
fn mahalanobis_against_diagonal_oracle() {
    let c = |re: f64, im: f64| C64::new(re, im);
    let f = [c(1.0, 1.0), c(-2.0, 0.0), c(0.5, 0.0)];
    let mu = [c(0.0, 0.0), c(0.0, 1.0), c(0.5, 0.0)];
    let lambdas = [2.0, 0.5, 1.0];
    let mut cov = vec![c(0.0, 0.0); 9];
    for i in 0..3 {
        cov[i * 3 + i] = c(lambdas[i], 0.0);
    }
    let want: f64 = (0..3).map(|i| (f[i] - mu[i]).norm_sqr() / lambdas[i]).sum();
    let got = r_corr_breakdown(&f, &mu, &cov, &CorrOptions::default()).unwrap();
    assert!((got.mahalanobis_sq - want).abs() < 1e-12);
    assert!(got.null_norm_sq < 1e-20);
    assert!((got.value - want.sqrt()).abs() < 1e-12);
}

#[test]
fn null_space_deviation_is_penalized() {
    let c = |re: f64| C64::new(re, 0.0);
    // rank-one covariance along (1, 1)
    let cov = vec![c(1.0), c(1.0), c(1.0), c(1.0)];
    let zero = [c(0.0), c(0.0)];
    let along = r_corr_breakdown(&[c(1.0), c(1.0)], &zero, &cov, &CorrOptions::default()).unwrap();
    assert!((along.mahalanobis_sq - 1.0).abs() < 1e-12);
    assert!(along.null_norm_sq < 1e-20);
    let across = r_corr_breakdown(&[c(1.0), c(-1.0)], &zero, &cov, &CorrOptions::default()).unwrap();
    assert!((across.null_norm_sq - 2.0).abs() < 1e-12);
    assert!((across.value - (2.0f64 * 1e6).sqrt()).abs() < 1e-6);
}

#[test]
fn shared_grid_uses_largest_counts() {
    let r = reports();
    assert_eq!(shared_grid(&r).unwrap().sizes(), &[8, 6]);
}

#[test]
fn superset_beats_disjoint_and_runs_are_reproducible() {
    let r = reports();
    let data = synthesize(&truth_model(), 300, 0.01, 7);
    let opts = RankOptions { seed: 7, ..Default::default() };
    let rep = rank_architectures(&r, &data, &opts).unwrap();
    let pos = |id: &str| rep.architectures.iter().position(|a| a.id == id).unwrap();
    assert!(pos("superset") < pos("disjoint"));
    assert!(pos("truth") < pos("disjoint"));
    let again = rank_architectures(&r, &data, &opts).unwrap();
    assert_eq!(rep, again);
    assert_eq!(rep.to_csv(), again.to_csv());
    assert_eq!(rep.architectures.iter().map(|a| a.rank).collect::<Vec<_>>(), vec![1, 2, 3, 4]);
}

#[test]
fn candidate_dimension_must_match_data() {
    let data = synthesize(&truth_model(), 20, 0.0, 1);
    let one_d = vqc_spectrum::Model::new(
        vqc_spectrum::Circuit::new(1, 1, 0).with(vqc_spectrum::Gate::rx(0, vqc_spectrum::ParamRef::feature(0))),
        vqc_spectrum::Observable::parse_single("Z").unwrap(),
    );
    let r = vec![analyze(&one_d, &TreeOptions::default()).unwrap()];
    assert!(rank_architectures(&r, &data, &RankOptions::default()).is_err());
    assert!(rank_architectures(&[], &data, &RankOptions::default()).is_err());
}
