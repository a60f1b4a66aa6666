//! Acceptance gate: one PASS/FAIL line per criterion.
//!
//! Every check runs and is reported. The test fails on any unexpected FAIL.
//! A criterion listed in `KNOWN_UNATTAINABLE` is still evaluated and
//! printed as FAIL. The test asserts that it really does fail, so a stale
//! entry is caught.

use std::f64::consts::PI;
use std::path::PathBuf;

use nmqem::channel::{m_tensor, population_channel, predict_table, Basis4, Gate, Mat4};
use nmqem::expdata::{compare_published, estimate_re_k, fit_coupling, load_table, ProbTable};
use nmqem::gamma::{anticommutator, build_gamma_basis, decompose, metric_identity, reconstruct};
use nmqem::kernel::{
    evaluate, k_quadrature, re_k_approx, re_k_small_time, si_shifted, KernelMode, KernelParams,
};
use nmqem::numerics::{det, mat_mul, rank, CMat, SINGULAR_RTOL};
use nmqem::recovery::{
    closed_form_id, closed_form_swap, cost_from_decomposition, cost_id, cost_swap,
    recovery_numeric, RecoveryOp,
};
use nmqem_cli::run;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};

/// Criteria that cannot pass as written, with the reason.
const KNOWN_UNATTAINABLE: &[(u32, &str)] = &[(
    7,
    "re_k_approx(7e-3, 1) = 7e-3 (1 + 1/pi) = 9.228169e-3, which is 6.7e-7 from the stated 9.2275e-3 (tolerance 1e-7)",
)];

struct Report {
    lines: Vec<(u32, String, bool, Vec<String>)>,
}

impl Report {
    fn criterion(&mut self, id: u32, name: &str, checks: Vec<(String, bool)>) {
        let failures: Vec<String> = checks.iter().filter(|c| !c.1).map(|c| c.0.clone()).collect();
        self.lines.push((id, name.to_string(), failures.is_empty(), failures));
    }
}

fn check(name: impl Into<String>, ok: bool) -> (String, bool) {
    (name.into(), ok)
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn alpha_grid() -> impl Iterator<Item = f64> {
    (0..=24).map(|i| f64::from(i) / 100.0)
}

fn max_diff(a: &Mat4, b: &Mat4) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn criterion_1() -> Vec<(String, bool)> {
    let basis = build_gamma_basis();
    let mut out = Vec::new();
    for mu in 0..4 {
        for nu in 0..4 {
            let exact = anticommutator(&basis, mu, nu) == metric_identity(mu, nu);
            out.push(check(format!("{{g{mu},g{nu}}}"), exact));
        }
    }
    out.push(check("rank 16", rank(basis.flattened(), SINGULAR_RTOL) == 16));
    let mut p = basis.gamma(0).clone();
    for mu in 1..4 {
        p = mat_mul(&p, basis.gamma(mu)).unwrap();
    }
    out.push(check("g0 g1 g2 g3 == g5", &p == basis.gamma5()));
    out
}

fn criterion_2() -> Vec<(String, bool)> {
    let mut out = Vec::new();
    let mt = m_tensor(&Basis4::multiplet_swap()).unwrap();
    out.push(check("M_2112 = 1/2", mt.get(1, 0, 0, 1) == 0.5));
    for (name, basis) in [("multiplet", Basis4::multiplet_swap()), ("computational", Basis4::computational())] {
        let mt = m_tensor(&basis).unwrap();
        let mut worst: f64 = 0.0;
        for a in 0..4 {
            for c in 0..4 {
                let want = if a == c { 1.5 } else { 0.0 };
                worst = worst.max((mt.trace_sum(a, c) - want).abs());
            }
        }
        out.push(check(format!("sum rule ({name}) dev {worst:e}"), worst <= 1e-12));
    }
    out
}

fn printed_swap(a: f64) -> Mat4 {
    [
        [1.0 - 2.0 * a, a, 0.0, a],
        [a, 1.0 - 3.0 * a, a, a],
        [0.0, a, 1.0 - 2.0 * a, a],
        [a, a, a, 1.0 - 3.0 * a],
    ]
}

fn printed_id(a: f64) -> Mat4 {
    [
        [1.0 - 2.0 * a, a, a, 0.0],
        [a, 1.0 - 2.0 * a, 0.0, a],
        [a, 0.0, 1.0 - 2.0 * a, a],
        [0.0, a, a, 1.0 - 2.0 * a],
    ]
}

fn criterion_3() -> Vec<(String, bool)> {
    let mut out = Vec::new();
    for a in [0.01, 0.05, 0.1] {
        let s = population_channel(Gate::Swap, a).unwrap();
        let i = population_channel(Gate::Identity, a).unwrap();
        out.push(check(format!("swap matrix at {a}"), max_diff(&s.matrix, &printed_swap(a)) <= 1e-14));
        out.push(check(format!("identity matrix at {a}"), max_diff(&i.matrix, &printed_id(a)) <= 1e-14));
    }
    for k in 0..=300 {
        let a = f64::from(k) / 1000.0;
        for gate in [Gate::Swap, Gate::Identity] {
            let ch = population_channel(gate, a).unwrap();
            let sums_ok = ch.column_sums().iter().all(|s| (s - 1.0).abs() <= 1e-12);
            let d = det(&ch.to_cmat());
            let want = match gate {
                Gate::Swap => (1.0 - 2.0 * a) * (1.0 - 4.0 * a).powi(2),
                Gate::Identity => (1.0 - 2.0 * a).powi(2) * (1.0 - 4.0 * a),
            };
            if !sums_ok {
                out.push(check(format!("{gate} column sums at {a}"), false));
            }
            if !((d.re - want).abs() <= 1e-12 && d.im.abs() <= 1e-12) {
                out.push(check(format!("{gate} determinant at {a}"), false));
            }
        }
    }
    out.push(check("column sums and determinants on [0, 0.3]", true));
    out
}

#[derive(Clone, Copy)]
enum Sym {
    OneMinus2,
    Half,
    A,
    Zero,
}

impl Sym {
    fn at(self, a: f64) -> f64 {
        match self {
            Sym::OneMinus2 => 1.0 - 2.0 * a,
            Sym::Half => (1.0 - 2.0 * a) / 2.0,
            Sym::A => a,
            Sym::Zero => 0.0,
        }
    }
}

fn criterion_4() -> Vec<(String, bool)> {
    use Sym::*;
    // [output][input], as printed.
    let table1 = [
        [OneMinus2, A, Zero, A],
        [A, Half, A, Half],
        [A, Half, A, Half],
        [Zero, A, OneMinus2, A],
    ];
    // The |10> -> |10> cell is printed as Re k; the channel algebra and the
    // column sum both require 1 - 2 Re k there.
    let table4 = [
        [OneMinus2, A, A, Zero],
        [A, OneMinus2, Zero, A],
        [A, Zero, OneMinus2, A],
        [Zero, A, A, OneMinus2],
    ];
    let mut out = Vec::new();
    for (gate, sym) in [(Gate::Swap, table1), (Gate::Identity, table4)] {
        for a in [0.0, 0.01, 0.05, 0.1, 0.2, 1.0 / 3.0] {
            let t = predict_table(gate, a).unwrap();
            let mut ok = true;
            for i in 0..4 {
                for j in 0..4 {
                    ok &= (t[i][j] - sym[i][j].at(a)).abs() <= 1e-14;
                }
            }
            for j in 0..4 {
                ok &= ((0..4).map(|i| t[i][j]).sum::<f64>() - 1.0).abs() <= 1e-12;
            }
            out.push(check(format!("{gate} table at {a}"), ok));
        }
    }
    out
}

fn criterion_5() -> Vec<(String, bool)> {
    let id4 = CMat::identity(4).unwrap();
    let mut out = Vec::new();
    for a in alpha_grid() {
        for gate in [Gate::Swap, Gate::Identity] {
            let ch = population_channel(gate, a).unwrap();
            let r = recovery_numeric(&ch).unwrap();
            let closed = match gate {
                Gate::Swap => closed_form_swap(a).unwrap().matrix(),
                Gate::Identity => closed_form_id(a).unwrap().matrix(),
            };
            let dev = CMat::from_real_rows(&closed).unwrap().max_abs_diff(&r);
            let rv = mat_mul(&r, &ch.to_cmat()).unwrap().max_abs_diff(&id4);
            out.push(check(format!("{gate} at {a}: closed vs numeric {dev:e}, R V - I {rv:e}"), dev <= 1e-10 && rv <= 1e-10));
        }
    }
    out
}

fn criterion_6() -> Vec<(String, bool)> {
    let mut out = Vec::new();
    let worst = alpha_grid()
        .map(|a| (cost_id(a).unwrap() - 1.0 / (1.0 - 4.0 * a)).abs())
        .fold(0.0, f64::max);
    out.push(check(format!("cost_id = 1/(1-4a), dev {worst:e}"), worst <= 1e-12));
    out.push(check("cost_swap(0) = 1", cost_swap(0.0).unwrap() == 1.0));
    out.push(check("cost_id(0) = 1", cost_id(0.0).unwrap() == 1.0));
    for (name, f) in [("swap", cost_swap as fn(f64) -> _), ("identity", cost_id)] {
        let mut prev = f(0.0).unwrap();
        let mut increasing = true;
        for k in 1..=2000 {
            let c = f(f64::from(k) * 1e-4).unwrap();
            increasing &= c > prev;
            prev = c;
        }
        out.push(check(format!("{name} cost strictly increasing on (0, 0.2]"), increasing));
    }
    let c = cost_swap(0.05).unwrap();
    out.push(check(format!("cost_swap(0.05) = {c}"), (c - 1.381944).abs() <= 1e-6));
    for k in 0..=20 {
        let a = f64::from(k) / 100.0;
        let op = RecoveryOp::new(Gate::Identity, a).unwrap();
        let d = (cost_from_decomposition(&op) - cost_id(a).unwrap()).abs();
        if d > 1e-10 {
            out.push(check(format!("identity decomposition cost at {a}"), false));
        }
    }
    out.push(check("identity decomposition cost on [0, 0.2]", true));
    out
}

fn criterion_7() -> Vec<(String, bool)> {
    let mut out = Vec::new();
    let s = si_shifted(1.0);
    out.push(check(format!("si_shifted(1) = {s}"), (s + 0.6247132564).abs() <= 1e-9));
    let p = KernelParams::new(0.8, 0.3, 10.0).unwrap();
    for mode in [KernelMode::Approx, KernelMode::Printed, KernelMode::Quadrature] {
        let k0 = evaluate(mode, &p, 0.0).unwrap();
        out.push(check(format!("{mode} k(0) = 0"), k0 == Complex64::new(0.0, 0.0)));
        let one = evaluate(mode, &p, 0.7).unwrap().re;
        let two = evaluate(mode, &KernelParams::new(1.6, 0.3, 10.0).unwrap(), 0.7).unwrap().re;
        out.push(check(format!("{mode} linear in gamma0"), (two - 2.0 * one).abs() <= 1e-12 * two.abs()));
    }
    for (w, u) in [(10.0, 0.01), (10.0, 0.005), (1.0, 0.1), (50.0, 0.002)] {
        let p = KernelParams::new(1.0, 0.0, w).unwrap();
        let q = k_quadrature(&p, u).unwrap().re;
        let c = re_k_small_time(&p, u);
        out.push(check(format!("quadrature small-time w={w} u={u}"), ((q - c) / c).abs() <= 0.01));
    }
    let r = re_k_approx(7e-3, 1.0);
    out.push(check(format!("re_k_approx(7e-3, 1) = {r:.7e} vs 9.2275e-3 +- 1e-7"), (r - 9.2275e-3).abs() <= 1e-7));
    let oracle = 7e-3 * (1.0 + 1.0 / PI);
    out.push(check("re_k_approx(7e-3, 1) = 7e-3 (1 + 1/pi)", (r - oracle).abs() <= 1e-15));
    out
}

fn criterion_8() -> Vec<(String, bool)> {
    let mut out = Vec::new();
    let load = |name: &str| -> ProbTable { load_table(std::fs::File::open(fixture(name)).unwrap()).unwrap() };
    let est = |name: &str| estimate_re_k(&load(name));
    let eq = |a: f64, b: f64| (a - b).abs() <= 1e-12;
    out.push(check("table 3 max = 0.056", eq(est("ibm_guadalupe_swap.json").max, 0.056)));
    out.push(check("table 5 max = 0.024", eq(est("ionq_identity.json").max, 0.024)));
    out.push(check("table 6 max = 0.028", eq(est("ibm_guadalupe_identity.json").max, 0.028)));
    out.push(check("table 2 min = 0.006", eq(est("ionq_swap.json").min, 0.006)));
    // Every published bound either matches or is reported as diverging,
    // in the library comparison and in the CLI report.
    for name in ["ionq_swap.json", "ibm_guadalupe_swap.json", "ionq_identity.json", "ibm_guadalupe_identity.json"] {
        let pt = load(name);
        let e = estimate_re_k(&pt);
        let cmp = compare_published(&pt, &e).unwrap();
        let report = run(["nmqem".to_string(), "estimate".into(), "--counts".into(), fixture(name).to_string_lossy().into_owned()]);
        for (which, matches, published, estimated) in [
            ("min", cmp.min_matches, cmp.published_min, e.min),
            ("max", cmp.max_matches, cmp.published_max, e.max),
        ] {
            let truly = (published - estimated).abs() <= 5e-4;
            let word = if matches { "matches" } else { "DIVERGES" };
            let flagged = report.stdout.contains(&format!("{which} {word}"));
            out.push(check(
                format!("{name} {which}: published {published}, estimated {estimated:.4}, reported {word}"),
                matches == truly && flagged,
            ));
        }
    }
    out
}

fn criterion_9() -> Vec<(String, bool)> {
    let mut out = Vec::new();
    for gate in [Gate::Swap, Gate::Identity] {
        for a in [0.005, 0.01, 0.02, 0.05] {
            let pt = ProbTable { gate, device: "model".into(), p: predict_table(gate, a).unwrap() };
            let e = estimate_re_k(&pt);
            let ok = [e.min, e.max, e.lsq].iter().all(|v| (v - a).abs() <= 1e-12);
            out.push(check(format!("{gate} estimate round trip at {a}"), ok));
        }
    }
    for c in [0.0, 7e-4, 3e-3, 7e-3, 0.1] {
        for u in [0.1, 0.5, 1.0, 2.0] {
            let back = fit_coupling(re_k_approx(c, u), u).unwrap();
            out.push(check(format!("fit_coupling round trip c={c} u={u}"), (back - c).abs() <= 1e-12));
        }
    }
    let basis = build_gamma_basis();
    let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let data = (0..16)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let m = CMat::new(4, 4, data).unwrap();
        let c = decompose(&basis, &m).unwrap();
        worst = worst.max(reconstruct(&basis, &c).max_abs_diff(&m));
    }
    out.push(check(format!("gamma round trip on 100 matrices, dev {worst:e}"), worst <= 1e-12));
    out
}

fn criterion_10() -> Vec<(String, bool)> {
    let mut out = Vec::new();
    for gate in ["swap", "identity"] {
        let res = run(["nmqem", "cost", "--gate", gate, "--coupling", "7e-4,7e-3", "--u-max", "1", "--steps", "101"]);
        out.push(check(format!("{gate} cost command succeeds"), res.code == 0));
        let mut curves: Vec<Vec<(f64, f64)>> = vec![Vec::new(), Vec::new()];
        for line in res.stdout.lines().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            let c: f64 = f[0].parse().unwrap();
            let idx = usize::from(c > 1e-3);
            curves[idx].push((f[1].parse().unwrap(), f[3].parse().unwrap()));
        }
        for (k, curve) in curves.iter().enumerate() {
            out.push(check(format!("{gate} curve {k} starts at cost 1"), curve.first() == Some(&(0.0, 1.0))));
            let mono = curve.windows(2).all(|w| w[1].1 >= w[0].1);
            out.push(check(format!("{gate} curve {k} monotone in u"), mono && curve.len() == 101));
        }
        let ordered = curves[0].iter().zip(&curves[1]).all(|(lo, hi)| lo.0 == hi.0 && hi.1 >= lo.1);
        out.push(check(format!("{gate} stronger coupling costs more at every u"), ordered));
    }
    out
}

#[test]
fn acceptance() {
    let mut report = Report { lines: Vec::new() };
    report.criterion(1, "Clifford algebra", criterion_1());
    report.criterion(2, "M-tensor", criterion_2());
    report.criterion(3, "channel fidelity", criterion_3());
    report.criterion(4, "prediction tables", criterion_4());
    report.criterion(5, "recovery", criterion_5());
    report.criterion(6, "cost identities", criterion_6());
    report.criterion(7, "kernel", criterion_7());
    report.criterion(8, "estimation vs published ranges", criterion_8());
    report.criterion(9, "round trips", criterion_9());
    report.criterion(10, "figure data", criterion_10());

    let mut unexpected = Vec::new();
    let mut stale = Vec::new();
    for (id, name, pass, failures) in &report.lines {
        let known = KNOWN_UNATTAINABLE.iter().find(|k| k.0 == *id);
        println!("{} criterion {id:>2}: {name}", if *pass { "PASS" } else { "FAIL" });
        for f in failures {
            println!("       failed check: {f}");
        }
        match (pass, known) {
            (false, Some((_, why))) => println!("       known unattainable: {why}"),
            (false, None) => unexpected.push(*id),
            (true, Some(_)) => stale.push(*id),
            (true, None) => {}
        }
    }
    assert!(unexpected.is_empty(), "criteria failed: {unexpected:?}");
    assert!(stale.is_empty(), "criteria listed as unattainable now pass: {stale:?}");
}
