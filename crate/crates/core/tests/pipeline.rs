use proptest::prelude::*;

use linforms::algebra::lcm_upto;
use linforms::cache::{decompose_integral_cached, FormCache};
use linforms::corpus::nested_sum_corpus;
use linforms::elementary::{decompose, height_bound, Decomposer};
use linforms::linear_form::{
    decompose_integral, vasilyev_form, vasilyev_params, IntegralParams, ParamsFile, ShiftVector,
};
use linforms::normal_reduction::{reduce, to_elementary};
use linforms::oracle::{
    coupled_sum_series, elementary_sum_series, linear_form_series, nested_sum_series, series_equal,
    SeriesWindow,
};
use linforms::{ElementarySum, Error, LinearForm, Rational};

#[test]
fn golden_odd_zeta_l1_n0() {
    let text = include_str!("fixtures/odd_zeta_l1_n0.json");
    let golden: SeriesWindow = serde_json::from_str(text).unwrap();
    let form = vasilyev_form(1, 0).unwrap();
    assert_eq!(linear_form_series(&form, 9).unwrap(), golden);
    let (params, _) = vasilyev_params(1, 0).unwrap();
    assert_eq!(coupled_sum_series(&params, 9), golden);
}

#[test]
fn form_json_round_trip() {
    let form = vasilyev_form(2, 1).unwrap();
    let text = form.to_json().unwrap();
    assert_eq!(LinearForm::from_json(&text).unwrap(), form);
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(value["terms"].is_array() && value["free"].is_array());
    assert_eq!(value["meta"]["m"], 5);
    assert_eq!(value["meta"]["P"], 1);
}

#[test]
fn params_file_drives_pipeline() {
    let text = r#"{"m":3,"group_ends":[2,3],"a":[2,2,2],"b":[4,4,4],"c":[2,2],"d":[0,1]}"#;
    let file = ParamsFile::from_json(text).unwrap();
    let form = decompose_integral(&file.params, &file.shift()).unwrap();
    assert_eq!(
        linear_form_series(&form, 30).unwrap(),
        coupled_sum_series(&file.params, 30)
    );
    assert!(ParamsFile::from_json(r#"{"m":2,"group_ends":[2],"a":[1],"b":[2],"c":[1]}"#).is_err());
}

#[test]
fn hypothesis_failures_are_reported() {
    // c_1 = 3 exceeds Delta + 1 = 2
    let params = IntegralParams {
        m: 1,
        group_ends: vec![1],
        a: vec![1],
        b: vec![3],
        c: vec![3],
    };
    let err = decompose_integral(&params, &ShiftVector::zero(1)).unwrap_err();
    assert!(matches!(err, Error::Validation(_)), "{err}");
}

#[test]
fn cache_hit_is_series_equal() {
    let dir = tempfile::tempdir().unwrap();
    let cache = FormCache::new(dir.path());
    let (params, d) = vasilyev_params(2, 1).unwrap();
    let mut engine = Decomposer::new();
    let (fresh, hit) = decompose_integral_cached(Some(&cache), &params, &d, &mut engine).unwrap();
    assert!(!hit);
    let (cached, hit) = decompose_integral_cached(Some(&cache), &params, &d, &mut engine).unwrap();
    assert!(hit);
    assert_eq!(
        linear_form_series(&cached, 20).unwrap(),
        linear_form_series(&fresh, 20).unwrap()
    );
}

#[test]
fn reduction_then_elementary_matches() {
    for s in nested_sum_corpus(5, 30) {
        let direct = nested_sum_series(&s, 25).unwrap();
        let mut total = SeriesWindow::zero(25);
        for term in reduce(&s).unwrap() {
            for (c, e) in to_elementary(&term).unwrap() {
                total.add_scaled(&elementary_sum_series(&e, 25), &(&term.lambda * c));
            }
        }
        assert_eq!(series_equal(&total, &direct).unwrap(), None);
    }
}

fn elementary_strategy() -> impl Strategy<Value = ElementarySum> {
    (1usize..=3)
        .prop_flat_map(|l| {
            (
                prop::collection::vec(1u32..=3, l),
                prop::collection::vec(0u32..=4, l),
            )
        })
        .prop_map(|(u, p)| ElementarySum::new(u, p).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn decomposition_is_exact(e in elementary_strategy()) {
        let form = decompose(&e);
        let series = linear_form_series(&form, 30).unwrap();
        prop_assert_eq!(series_equal(&series, &elementary_sum_series(&e, 30)).unwrap(), None);
        prop_assert!(form.check_graded_clearing(&lcm_upto(e.max_shift())).is_ok());
        prop_assert!(form.max_height() <= height_bound(&e));
        prop_assert!(form.terms().keys().all(|s| s.weight() <= e.weight()));
    }

    #[test]
    fn decomposition_is_linear_in_scaling(e in elementary_strategy(), k in 1i64..5) {
        let form = decompose(&e);
        let mut scaled = LinearForm::new(form.meta());
        scaled.add_scaled(&form, &Rational::from_integer(k.into()), 0);
        let lhs = linear_form_series(&scaled, 12).unwrap();
        let mut rhs = SeriesWindow::zero(12);
        rhs.add_scaled(&linear_form_series(&form, 12).unwrap(), &Rational::from_integer(k.into()));
        prop_assert_eq!(lhs, rhs);
    }
}
