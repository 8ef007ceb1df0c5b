use orlicz::ccp::{
    brezis_lieb_residual, brezis_lieb_scale, detect_atoms, make_bubbles, measure_pair, verify_atom_relation,
    verify_reverse_holder, Atom, AtomReport, BubbleSpec, Normalization,
};
use orlicz::grid::{bump, gradient_norm, luxemburg_norm, modular, Domain, GridFunction, GridMeasure};
use orlicz::matuszewska::{profile, MatuszewskaProfile};
use orlicz::sobolev::{build_an, SobolevConjugate};
use orlicz::{GrowthIndices, OrliczError, YoungFunction};
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::OnceLock;

struct Setup {
    y: YoungFunction,
    s: SobolevConjugate,
    mn: MatuszewskaProfile,
    idx: GrowthIndices,
}

fn setup() -> &'static Setup {
    static S: OnceLock<Setup> = OnceLock::new();
    S.get_or_init(|| {
        let y = YoungFunction::power(1.5).unwrap();
        let s = build_an(&y, 2).unwrap();
        let mn = profile(s.an()).unwrap();
        let idx = y.growth_indices().unwrap();
        Setup { y, s, mn, idx }
    })
}

fn single(scales: Vec<f64>, n: Normalization) -> BubbleSpec {
    BubbleSpec::single([0.5, 0.5], scales, n)
}

#[test]
fn gradient_bounded_normalization() {
    let st = setup();
    let d = Domain::unit_square(128).unwrap();
    let bs = make_bubbles(&st.y, &st.s, &d, &single(BubbleSpec::dyadic_scales(5), Normalization::GradientBounded))
        .unwrap();
    for u in &bs {
        assert!((gradient_norm(&st.y, u).unwrap() - 1.0).abs() < 1e-6);
        assert!(u.vanishes_on_boundary());
    }
}

#[test]
fn an_mass_one_normalization() {
    let st = setup();
    let d = Domain::unit_square(128).unwrap();
    let bs = make_bubbles(&st.y, &st.s, &d, &single(BubbleSpec::dyadic_scales(5), Normalization::AnMassOne)).unwrap();
    for u in &bs {
        let (nu, _) = measure_pair(&st.y, &st.s, u).unwrap();
        assert!((nu.total() - 1.0).abs() < 1e-6, "{}", nu.total());
    }
}

#[test]
fn constant_scale_gives_identical_members() {
    let st = setup();
    let d = Domain::unit_square(64).unwrap();
    let bs = make_bubbles(&st.y, &st.s, &d, &single(vec![0.25; 3], Normalization::GradientBounded)).unwrap();
    assert!(bs[0] == bs[1] && bs[1] == bs[2]);
}

#[test]
fn under_resolved_scale_is_rejected() {
    let st = setup();
    let d = Domain::unit_square(64).unwrap();
    let e = make_bubbles(&st.y, &st.s, &d, &single(vec![0.25, 1.0 / 32.0], Normalization::GradientBounded))
        .unwrap_err();
    assert!(matches!(e, OrliczError::UnderResolved(_)));
}

#[test]
fn two_bubbles_two_atoms() {
    let st = setup();
    let d = Domain::unit_square(128).unwrap();
    let spec = BubbleSpec {
        centers: vec![[0.3, 0.5], [0.7, 0.5]],
        scales: vec![0.08, 1.0 / 32.0],
        exponent: 3.0,
        normalization: Normalization::GradientBounded,
        bound: 1.0,
    };
    let bs = make_bubbles(&st.y, &st.s, &d, &spec).unwrap();
    let u = bs.last().unwrap();
    // supports are disjoint once ε < separation/4
    for k in 0..d.n_nodes() {
        let [x, _] = d.node_coords(k);
        if (x - 0.5).abs() < 0.1 {
            assert_eq!(u.values()[k], 0.0);
        }
    }
    let (nu, mu) = measure_pair(&st.y, &st.s, u).unwrap();
    let rep = detect_atoms(&nu, &mu, 0.25 * nu.total()).unwrap();
    assert_eq!(rep.atoms.len(), 2);
    let (a, b) = (rep.atoms[0].nu, rep.atoms[1].nu);
    assert!((a / b - 1.0).abs() < 0.05);
    let mut xs: Vec<f64> = rep.atoms.iter().map(|a| a.x[0]).collect();
    xs.sort_by(f64::total_cmp);
    assert!((xs[0] - 0.3).abs() < d.h(0) && (xs[1] - 0.7).abs() < d.h(0));
}

#[test]
fn measure_pair_consistency() {
    let st = setup();
    let d = Domain::unit_square(64).unwrap();
    let (nu, mu) = measure_pair(&st.y, &st.s, &GridFunction::zeros(&d)).unwrap();
    assert_eq!(nu.total(), 0.0);
    assert_eq!(mu.total(), 0.0);
    let u = GridFunction::from_fn(&d, |x, z| 3.0 * (PI * x).sin() * (PI * z).sin()).unwrap();
    let (nu, mu) = measure_pair(&st.y, &st.s, &u).unwrap();
    let m = modular(st.s.an(), &u).unwrap();
    assert!((nu.total() / m - 1.0).abs() < 1e-13);
    let g = orlicz::grid::gradient_modular(&st.y, &u).unwrap();
    assert!((mu.total() / g - 1.0).abs() < 1e-13);
}

#[test]
fn diffuse_measure_has_no_atoms() {
    let st = setup();
    let d = Domain::unit_square(64).unwrap();
    let u = GridFunction::from_fn(&d, |x, z| (PI * x).sin() * (PI * z).sin()).unwrap();
    let (nu, mu) = measure_pair(&st.y, &st.s, &u).unwrap();
    let rep = detect_atoms(&nu, &mu, 0.5 * nu.total()).unwrap();
    assert!(rep.atoms.is_empty());
    assert_eq!(rep.residual_mass, rep.total_mass);
    assert!(detect_atoms(&nu, &mu, 0.0).is_err());
}

#[test]
fn single_bubble_concentrates_at_center() {
    let st = setup();
    let d = Domain::unit_square(128).unwrap();
    let bs = make_bubbles(&st.y, &st.s, &d, &single(BubbleSpec::dyadic_scales(5), Normalization::GradientBounded))
        .unwrap();
    let (nu, mu) = measure_pair(&st.y, &st.s, bs.last().unwrap()).unwrap();
    let rep = detect_atoms(&nu, &mu, 0.25 * nu.total()).unwrap();
    assert_eq!(rep.atoms.len(), 1);
    let a = &rep.atoms[0];
    assert!((a.x[0] - 0.5).abs() <= d.h(0) && (a.x[1] - 0.5).abs() <= d.h(1));
    assert!(rep.bookkeeping_exact(&nu));
    assert!((rep.bookkeeping_sum() - rep.total_mass).abs() <= f64::EPSILON * rep.total_mass);
    assert!(a.nu > 0.95 * rep.total_mass);
}

#[test]
fn atom_count_stable_under_refinement() {
    // bubbles resolved by 8 to 16 cells, default threshold a quarter of ν
    let st = setup();
    for (eps, coarse) in [(1.0 / 16.0, 128), (1.0 / 32.0, 256)] {
        let counts: Vec<usize> = [coarse, 2 * coarse]
            .iter()
            .map(|&n| {
                let d = Domain::unit_square(n).unwrap();
                let bs = make_bubbles(&st.y, &st.s, &d, &single(vec![eps], Normalization::GradientBounded)).unwrap();
                let (nu, mu) = measure_pair(&st.y, &st.s, &bs[0]).unwrap();
                detect_atoms(&nu, &mu, 0.25 * nu.total()).unwrap().atoms.len()
            })
            .collect();
        assert_eq!(counts, vec![1, 1], "ε = {eps}");
    }
}

#[test]
fn reverse_holder_zero_test_function() {
    let st = setup();
    let d = Domain::unit_square(64).unwrap();
    let bs = make_bubbles(&st.y, &st.s, &d, &single(vec![0.125], Normalization::GradientBounded)).unwrap();
    let (nu, mu) = measure_pair(&st.y, &st.s, &bs[0]).unwrap();
    let rh = verify_reverse_holder(4.0, &st.mn, &st.idx, &GridFunction::zeros(&d), &nu, &mu, 0.9).unwrap();
    assert!(rh.holds && rh.lhs == 0.0 && rh.rhs == 0.0 && !rh.vacuous);
    let zero = GridMeasure::new(d.clone(), vec![0.0; d.n_cells()]).unwrap();
    let rh = verify_reverse_holder(4.0, &st.mn, &st.idx, &bs[0], &zero, &zero, 0.9).unwrap();
    assert!(rh.holds && rh.vacuous);
    assert!(verify_reverse_holder(4.0, &st.mn, &st.idx, &bs[0], &nu, &mu, 1.5).is_err());
}

#[test]
fn constant_test_function_reduces_to_atom_relation() {
    // with ν and μ carried by one atom's cells, φ ≡ 1 turns both norms into
    // the indicator formula, so RH and the atom relation agree
    let st = setup();
    let d = Domain::unit_square(128).unwrap();
    let bs = make_bubbles(&st.y, &st.s, &d, &single(vec![1.0 / 16.0], Normalization::GradientBounded)).unwrap();
    let (nu, mu) = measure_pair(&st.y, &st.s, &bs[0]).unwrap();
    let rep = detect_atoms(&nu, &mu, 0.25 * nu.total()).unwrap();
    let one = GridFunction::from_fn(&d, |_, _| 1.0).unwrap();
    let rh = verify_reverse_holder(4.0, &st.mn, &st.idx, &one, &nu, &mu, 0.9).unwrap();
    let whole = AtomReport {
        atoms: vec![Atom { x: [0.5, 0.5], nu: nu.total(), mu: mu.total(), seed_cell: 0, cells: vec![] }],
        delta_threshold: rep.delta_threshold,
        residual_mass: 0.0,
        total_mass: nu.total(),
    };
    let rel = verify_atom_relation(4.0, &st.mn, &st.idx, &whole, 0.9).unwrap();
    assert!((rh.lhs / rel[0].lhs - 1.0).abs() < 1e-9, "{} vs {}", rh.lhs, rel[0].lhs);
    assert!((rh.rhs / rel[0].rhs - 1.0).abs() < 1e-9);
    assert_eq!(rh.holds, rel[0].holds);
}

#[test]
fn power_case_relation_is_a_power_bound() {
    // A = t^{3/2} in the plane: M_n(t) = t⁶ and A_∞ = A, so the relation reads
    // safety·S·ν^{1/6} ≤ μ^{2/3}
    let st = setup();
    let s_est = 4.0;
    for (nu, mu) in [(1e-4, 0.9), (0.3, 2.0), (5.0, 1e-2)] {
        let rep = AtomReport {
            atoms: vec![Atom { x: [0.5, 0.5], nu, mu, seed_cell: 0, cells: vec![] }],
            delta_threshold: nu,
            residual_mass: 0.0,
            total_mass: nu,
        };
        let r = verify_atom_relation(s_est, &st.mn, &st.idx, &rep, 0.9).unwrap();
        let lhs = 0.9 * s_est * nu.powf(1.0 / 6.0);
        let rhs = mu.powf(2.0 / 3.0);
        assert!((r[0].lhs / lhs - 1.0).abs() < 1e-6 && (r[0].rhs / rhs - 1.0).abs() < 1e-12);
        assert_eq!(r[0].holds, lhs <= rhs);
    }
}

#[test]
fn relation_slack_grows_as_nu_vanishes() {
    let st = setup();
    let mut prev = f64::INFINITY;
    for nu in [1.0, 1e-2, 1e-4, 1e-6] {
        let rep = AtomReport {
            atoms: vec![Atom { x: [0.5, 0.5], nu, mu: 0.5, seed_cell: 0, cells: vec![] }],
            delta_threshold: nu,
            residual_mass: 0.0,
            total_mass: nu,
        };
        let r = verify_atom_relation(4.0, &st.mn, &st.idx, &rep, 0.9).unwrap();
        let ratio = r[0].lhs / r[0].rhs;
        assert!(ratio < prev);
        prev = ratio;
    }
    let empty = AtomReport { atoms: vec![], delta_threshold: 1.0, residual_mass: 0.0, total_mass: 0.0 };
    assert!(verify_atom_relation(4.0, &st.mn, &st.idx, &empty, 0.9).is_err());
    let zero = AtomReport {
        atoms: vec![Atom { x: [0.5, 0.5], nu: 0.0, mu: 1.0, seed_cell: 0, cells: vec![] }],
        ..empty
    };
    assert!(verify_atom_relation(4.0, &st.mn, &st.idx, &zero, 0.9).unwrap()[0].excluded);
}

#[test]
fn reverse_holder_on_bubble_tail() {
    let st = setup();
    let d = Domain::unit_square(512).unwrap();
    let bs = make_bubbles(&st.y, &st.s, &d, &single(BubbleSpec::dyadic_scales(7), Normalization::GradientBounded))
        .unwrap();
    let phi = bump(&d, [0.5, 0.5], 0.25, 2.0).unwrap();
    // below every discrete Rayleigh ratio of the bump family
    let s_est = 4.0;
    let checks: Vec<_> = bs
        .iter()
        .map(|u| {
            let (nu, mu) = measure_pair(&st.y, &st.s, u).unwrap();
            verify_reverse_holder(s_est, &st.mn, &st.idx, &phi, &nu, &mu, 0.9).unwrap()
        })
        .collect();
    for rh in &checks[2..] {
        assert!(rh.holds, "{rh:?}");
    }
    // the widest member is not concentrated and violates the inequality
    assert!(!checks[0].holds);
    let ratios: Vec<f64> = checks.iter().map(|c| c.lhs / c.rhs).collect();
    assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
}

#[test]
fn brezis_lieb_trivial_cases() {
    let b = YoungFunction::power(1.5).unwrap();
    let d = Domain::unit_square(32).unwrap();
    let f = GridFunction::from_fn(&d, |x, z| (PI * x).sin() * (PI * z).sin()).unwrap();
    let phi = GridFunction::from_fn(&d, |x, _| 1.0 + x).unwrap();
    let r = brezis_lieb_residual(&b, &[f.clone(), f.clone()], &f, &phi).unwrap();
    assert!(r.iter().all(|v| *v == 0.0));
    let g = GridFunction::from_fn(&d, |x, z| x * z * (1.0 - x)).unwrap();
    let r = brezis_lieb_residual(&b, &[g], &GridFunction::zeros(&d), &phi).unwrap();
    assert_eq!(r[0], 0.0);
}

#[test]
fn brezis_lieb_residual_decays_along_bubbles() {
    let st = setup();
    let d = Domain::unit_square(256).unwrap();
    let bs = make_bubbles(&st.y, &st.s, &d, &single(BubbleSpec::dyadic_scales(5), Normalization::GradientBounded))
        .unwrap();
    let f = GridFunction::from_fn(&d, |x, z| (PI * x).sin() * (PI * z).sin()).unwrap();
    let one = GridFunction::from_fn(&d, |_, _| 1.0).unwrap();
    let fk: Vec<GridFunction> = bs.iter().map(|b| f.combine(1.0, b, 1.0)).collect();
    let r = brezis_lieb_residual(&st.y, &fk, &f, &one).unwrap();
    for w in r.windows(2) {
        assert!(w[1] <= 1.05 * w[0]);
    }
    assert!(r.last().unwrap() < &(0.25 * r[0]));
    let scale = brezis_lieb_scale(&st.y, &f, &one).unwrap();
    // ∫|sin πx sin πy|^{3/2} = (Γ(5/4)/(√π Γ(7/4)))²
    let one_d = 0.906_402_477_055_477 / (PI.sqrt() * 0.919_062_526_848_883);
    assert!((scale / (one_d * one_d) - 1.0).abs() < 1e-4, "{scale}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bookkeeping_is_exact(seed in 0u64..10_000, frac in 0.001f64..0.5) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let d = Domain::unit_square(24).unwrap();
        let nu: Vec<f64> = (0..d.n_cells()).map(|_| rng.gen::<f64>().powi(8) * 10f64.powf(rng.gen_range(-6.0..0.0))).collect();
        let mu: Vec<f64> = (0..d.n_cells()).map(|_| rng.gen::<f64>()).collect();
        let nu = GridMeasure::new(d.clone(), nu).unwrap();
        let mu = GridMeasure::new(d.clone(), mu).unwrap();
        let rep = detect_atoms(&nu, &mu, frac * nu.total()).unwrap();
        prop_assert!(rep.bookkeeping_exact(&nu));
        prop_assert!((rep.bookkeeping_sum() - rep.total_mass).abs() <= f64::EPSILON * rep.total_mass);
        prop_assert!(rep.atoms.iter().all(|a| a.nu >= rep.delta_threshold));
        let norm = luxemburg_norm(&YoungFunction::power(2.0).unwrap(), &GridFunction::zeros(&d), Some(&nu)).unwrap();
        prop_assert_eq!(norm, 0.0);
    }
}
