use orlicz::matuszewska::{build_profile, check_m_young, check_sandwich, default_t_grid, mo_function, profile, SGrid};
use orlicz::young::a_infinity;
use orlicz::{GrowthIndices, YoungFunction};
use proptest::prelude::*;

fn family() -> Vec<YoungFunction> {
    let mut v = Vec::new();
    for p in [1.5, 2.0, 2.5] {
        v.push(YoungFunction::power(p).unwrap());
        v.push(YoungFunction::power_log(p, 1.0).unwrap());
    }
    v
}

#[test]
fn power_profile() {
    let y = YoungFunction::power(2.0).unwrap();
    let s = SGrid::default_for(&y, 1e6).unwrap();
    assert!((mo_function(&y, 3.0, &s).unwrap() - 9.0).abs() < 1e-12 * 9.0);
    assert_eq!(mo_function(&y, 1.0, &s).unwrap(), 1.0);
    let p = profile(&y).unwrap();
    for (&t, &m) in p.t_grid().iter().zip(p.m_values()) {
        assert!((m / (t * t) - 1.0).abs() < 1e-12);
    }
    let (ok, t0) = check_sandwich(&p, 0.1);
    assert!(ok && t0 == 1.0);
}

#[test]
fn power_log_m_at_two() {
    let y = YoungFunction::power_log(2.0, 1.0).unwrap();
    let s = SGrid::default_for(&y, 1e6).unwrap();
    let m = mo_function(&y, 2.0, &s).unwrap();
    // oracle: 4·ln(1+2s)/ln(1+s) at the window's top end s = 10^1000, i.e.
    // 4·(1 + ln 2/ln s) to first order
    let ln_s = 1000.0 * std::f64::consts::LN_10;
    let oracle = 4.0 * (1.0 + std::f64::consts::LN_2 / ln_s);
    assert!((m / oracle - 1.0).abs() < 1e-6, "{m} vs {oracle}");
    assert!((m / 4.0 - 1.0).abs() < 1e-3);
}

#[test]
fn indices_of_family() {
    for y in family() {
        let p = profile(&y).unwrap();
        let g = y.growth_indices().unwrap();
        assert!(g.p_minus <= p.p_infinity() + 1e-12 && p.p_infinity() <= g.p_plus + 1e-12, "{}", y.describe());
        let (ok, t0) = check_sandwich(&p, 0.2);
        assert!(ok && t0 <= 1e3, "{}: t0 = {t0}", y.describe());
        assert!(check_m_young(&p, &g).unwrap(), "{}", y.describe());
    }
    let t3 = profile(&YoungFunction::power(3.0).unwrap()).unwrap();
    assert!((t3.p_infinity() - 3.0).abs() < 1e-12);
    let pl = profile(&YoungFunction::power_log(2.0, 1.0).unwrap()).unwrap();
    assert!((pl.p_infinity() - 2.0).abs() < 0.05);
}

#[test]
fn a_infinity_index_is_upper_branch() {
    let g = GrowthIndices { p_minus: 2.0, p_plus: 4.0, delta2_constant: 16.0, sample_range: (0.0, 0.0) };
    let p = profile(&a_infinity(&g).unwrap()).unwrap();
    assert!((p.p_infinity() - 4.0).abs() < 0.05);
    // M(t, A_∞) = t⁴ for t ≥ 1
    let i = p.t_grid().iter().position(|&t| t >= 10.0).unwrap();
    assert!((p.m_values()[i] / p.t_grid()[i].powi(4) - 1.0).abs() < 1e-9);
}

#[test]
fn sandwich_with_zero_eps_fails_for_log_family() {
    let p = profile(&YoungFunction::power_log(2.0, 1.0).unwrap()).unwrap();
    let (ok, _) = check_sandwich(&p, 0.0);
    assert!(!ok);
}

#[test]
fn m_bounds_around_one() {
    let y = YoungFunction::power_log(2.0, 1.0).unwrap();
    let p = profile(&y).unwrap();
    let m_half = p.eval(0.5).unwrap();
    assert!(m_half <= 0.25 * (1.0 + 1e-9));
    // growth side: M(10) ≥ 10^{p⁻}
    assert!(p.eval(10.0).unwrap() >= 100.0 * (1.0 - 1e-9));
}

#[test]
fn index_stable_under_s_grid_doubling() {
    for y in family() {
        let t = default_t_grid();
        let s1 = SGrid::default_for(&y, 1e6).unwrap();
        let s2 = SGrid { per_decade: 2 * s1.per_decade, ..s1 };
        let a = build_profile(&y, &t, &s1).unwrap().p_infinity();
        let b = build_profile(&y, &t, &s2).unwrap().p_infinity();
        assert!((a - b).abs() < 0.01);
    }
}

#[test]
fn invalid_profile_rejected() {
    let y = YoungFunction::power(2.0).unwrap();
    let s = SGrid::default_for(&y, 1e6).unwrap();
    assert!(build_profile(&y, &[0.5, 0.7, 0.8, 0.9], &s).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn m_inherits_scaling(p in 1.3f64..3.0, q in 0.0f64..1.5, s in 0.05f64..20.0, t in 0.05f64..20.0) {
        let y = YoungFunction::power_log(p, q).unwrap();
        let g = y.growth_indices().unwrap();
        let sg = SGrid::default_for(&y, 1e6).unwrap();
        let m_t = mo_function(&y, t, &sg).unwrap();
        let m_st = mo_function(&y, s * t, &sg).unwrap();
        let (a, b) = (s.powf(g.p_minus), s.powf(g.p_plus));
        prop_assert!(m_st >= a.min(b) * m_t * (1.0 - 1e-2));
        prop_assert!(m_st <= a.max(b) * m_t * (1.0 + 1e-2));
    }

    #[test]
    fn m_nondecreasing(p in 1.3f64..3.0, q in 0.0f64..1.5, t in 0.01f64..100.0, f in 1.0f64..3.0) {
        let y = YoungFunction::power_log(p, q).unwrap();
        let sg = SGrid::default_for(&y, 1e6).unwrap();
        prop_assert!(mo_function(&y, t * f, &sg).unwrap() >= mo_function(&y, t, &sg).unwrap() * (1.0 - 1e-12));
    }
}
