use orlicz::suite::{builtin_family, run_suite, SuiteOptions};
use orlicz::YoungFunction;

#[test]
fn builtin_family_passes_every_check() {
    let opts = SuiteOptions::default();
    for y in builtin_family() {
        let checks = run_suite(&y, &opts).unwrap();
        assert_eq!(checks.len(), 13);
        for c in &checks {
            assert!(c.holds, "{} {} {}", c.function, c.check, c.value);
        }
    }
}

#[test]
fn suite_is_seeded() {
    let y = YoungFunction::power_log(2.0, 1.0).unwrap();
    let a = run_suite(&y, &SuiteOptions::default()).unwrap();
    let b = run_suite(&y, &SuiteOptions::default()).unwrap();
    for (x, z) in a.iter().zip(&b) {
        assert_eq!(x.holds, z.holds);
        assert!(x.value.to_bits() == z.value.to_bits() || (x.value.is_nan() && z.value.is_nan()));
    }
}

#[test]
fn unsupported_dimension_fails_the_sobolev_checks_only() {
    let y = YoungFunction::power(2.0).unwrap();
    let checks = run_suite(&y, &SuiteOptions { n: 2, ..SuiteOptions::default() }).unwrap();
    for c in &checks {
        let sobolev = ["h-power-bounds", "an-power-bounds", "h-doubling", "an-delta2"].contains(&c.check.as_str());
        assert_eq!(c.holds, !sobolev, "{}", c.check);
    }
}
