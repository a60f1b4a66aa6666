use std::fs::File;
use std::path::PathBuf;

use nmqem::channel::Gate;
use nmqem::expdata::{
    compare_published, estimate_re_k, fit_coupling, load_counts, load_table, normalize, Role,
};
use nmqem::kernel::re_k_approx;

fn fixture(name: &str) -> File {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
    File::open(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-12
}

#[test]
fn ionq_swap_table() {
    let ct = load_counts(fixture("ionq_swap.json")).unwrap();
    assert_eq!(ct.gate, Gate::Swap);
    assert_eq!(ct.shots, 1000);
    let pt = normalize(&ct).unwrap();
    let est = estimate_re_k(&pt);
    let alpha_cells: Vec<f64> = est
        .per_cell
        .iter()
        .filter(|c| c.role == Role::Alpha)
        .map(|c| c.estimate)
        .collect();
    assert_eq!(alpha_cells.len(), 8);
    assert!(close(est.min, 0.006));
    assert!(close(est.max, 0.023));
    let cmp = compare_published(&pt, &est).unwrap();
    assert!(cmp.min_matches);
    assert!(!cmp.max_matches);
    assert!(cmp.diverges());
}

#[test]
fn ibm_swap_table() {
    let pt = load_table(fixture("ibm_guadalupe_swap.json")).unwrap();
    let est = estimate_re_k(&pt);
    assert!(close(est.max, 0.056));
    assert!(close(est.min, 0.016));
    // The m4 run holds 998 counts, so its cells are rescaled slightly.
    let m4_11 = est.per_cell.iter().find(|c| c.input == "m4" && c.output == "11").unwrap();
    assert!(close(m4_11.estimate, 16.0 / 998.0));
    let cmp = compare_published(&pt, &est).unwrap();
    assert!(cmp.max_matches);
    assert!(!cmp.min_matches);
}

#[test]
fn ionq_identity_table() {
    let pt = load_table(fixture("ionq_identity.json")).unwrap();
    let est = estimate_re_k(&pt);
    assert!(close(est.min, 0.001));
    assert!(close(est.max, 0.024));
    let cmp = compare_published(&pt, &est).unwrap();
    assert!(cmp.max_matches && !cmp.min_matches);
}

#[test]
fn ibm_identity_table() {
    let pt = load_table(fixture("ibm_guadalupe_identity.json")).unwrap();
    let est = estimate_re_k(&pt);
    assert!(close(est.min, 0.004));
    assert!(close(est.max, 0.028));
    let cmp = compare_published(&pt, &est).unwrap();
    assert!(cmp.max_matches && !cmp.min_matches);
}

#[test]
fn synthetic_tables_recover_alpha() {
    for name in ["synthetic_swap_0p02.json", "synthetic_identity_0p02.json"] {
        let pt = load_table(fixture(name)).unwrap();
        let est = estimate_re_k(&pt);
        assert!(close(est.min, 0.02), "{name}");
        assert!(close(est.max, 0.02), "{name}");
        assert!(close(est.lsq, 0.02), "{name}");
        assert!(compare_published(&pt, &est).is_none());
    }
}

#[test]
fn fitted_coupling_from_estimates() {
    let c = fit_coupling(re_k_approx(7e-4, 1.0), 1.0).unwrap();
    assert!((c - 7e-4).abs() < 1e-15);
    // Rounded inputs land on the same coupling to three significant digits.
    assert!((fit_coupling(9.2275e-3, 1.0).unwrap() - 7.0e-3).abs() < 1e-6);
    assert!((fit_coupling(9.2275e-4, 1.0).unwrap() - 7.0e-4).abs() < 1e-7);
}
