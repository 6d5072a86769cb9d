mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::oracle::{self, Channel};
use common::{random_models, rel, Draw};
use turbox::linalg::stationary_state;
use turbox::optimize::{carnot_criterion, minimize_q, quadratic_profile, Bound, SearchOptions};
use turbox::zoo::{global_to_local, reference};
use turbox::{
    classical_counterpart, cumulants_exact, cumulants_numeric, decoherence_rate, derive_photon_counts, evaluate,
    params, steady_report, tilted_liouvillian, Constraint, Family, ModelSpec, Params, Reservoir,
};

const SEED: u64 = 20_240_601;

#[derive(Default)]
struct Verdict {
    failures: Vec<String>,
    notes: Vec<String>,
    findings: Vec<String>,
}

impl Verdict {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }
}

fn pool() -> Vec<Draw> {
    random_models(SEED, 25)
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let flo = f(lo);
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let k = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (b - k * (b - a), a + k * (b - a));
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - k * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + k * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

fn build(family: Family, pairs: &[(&str, f64)]) -> ModelSpec {
    family.build(&params(pairs.iter().copied())).expect("model builds")
}

fn nonzero_reservoirs(m: &ModelSpec) -> Vec<String> {
    let counts = derive_photon_counts(m).expect("photon counts");
    m.reservoirs.iter().zip(counts).filter(|(_, n)| *n != 0).map(|(r, _)| r.label.clone()).collect()
}

fn oracle_equivalence() -> Verdict {
    let mut v = Verdict::default();
    let (mut worst_j, mut worst_var) = (0.0f64, 0.0f64);
    let models = pool();
    for (k, d) in models.iter().enumerate() {
        let rep = evaluate(&d.model).expect("closed form");
        for label in nonzero_reservoirs(&d.model) {
            let fcs = cumulants_numeric(&d.model, &label).expect("oracle");
            let j = rep.J[&label];
            let var = rep.var_d[&label] + rep.var_c[&label];
            let (ej, ev) = (rel(fcs.J_num, j), rel(fcs.Var_num, var));
            worst_j = worst_j.max(ej);
            worst_var = worst_var.max(ev);
            v.check(ej <= 1e-6, || format!("model {k} ({}) `{label}`: J {j} vs {}", d.family, fcs.J_num));
            v.check(ev <= 1e-5, || format!("model {k} ({}) `{label}`: Var {var} vs {}", d.family, fcs.Var_num));
        }
    }
    v.note(format!("{} models, worst rel J {worst_j:.1e}, Var {worst_var:.1e}", models.len()));
    v
}

fn counterpart_equivalence() -> Verdict {
    let mut v = Verdict::default();
    let (mut worst_rho, mut worst_q) = (0.0f64, 0.0f64);
    for (k, d) in pool().iter().enumerate() {
        let m = &d.model;
        let ss = steady_report(m).expect("steady state");
        let rep = evaluate(m).expect("closed form");
        let cp = classical_counterpart(m).expect("counterpart");
        let rho = stationary_state(&tilted_liouvillian(&cp, &cp.reservoirs[0].label, 0.0).unwrap()).unwrap();
        let mut dev = 0.0f64;
        for i in 0..m.dim {
            for j in 0..m.dim {
                let want = if i == j { ss.rho_d[i] } else { 0.0 };
                dev = dev.max((rho.matrix()[(i, j)] - Complex64::new(want, 0.0)).norm());
            }
        }
        worst_rho = worst_rho.max(dev);
        v.check(dev <= 1e-10, || format!("model {k}: counterpart state off by {dev:.2e}"));

        let sigma: f64 = m
            .reservoirs
            .iter()
            .map(|r| cumulants_exact(&cp, &r.label).unwrap().mean * (r.complement() / r.occupation).ln())
            .sum();
        let label = &rep.reservoir;
        let cum = cumulants_exact(&cp, label).unwrap();
        let q = sigma * cum.variance / (cum.mean * cum.mean);
        let e = rel(q, rep.Q_d);
        worst_q = worst_q.max(e);
        v.check(e <= 1e-8, || format!("model {k}: counterpart Q {q} vs Q_d {}", rep.Q_d));
        v.check(rel(cum.mean, rep.J[label]) <= 1e-8, || format!("model {k}: counterpart current differs"));
        v.check(rel(sigma, rep.sigma) <= 1e-8, || format!("model {k}: counterpart σ {sigma} vs {}", rep.sigma));
    }
    v.note(format!("worst state dev {worst_rho:.1e}, worst rel Q {worst_q:.1e}"));
    v
}

fn qubit_q(r0: f64, ratio: f64) -> f64 {
    let m = Family::Qubit.build(&params([("p", 1.0), ("delta", 0.0), ("r0", r0), ("r_ratio", ratio)])).unwrap();
    evaluate(&m).unwrap().Q
}

fn driven_qubit_criterion() -> Verdict {
    let mut v = Verdict::default();
    let free = [
        Bound { name: "r0".into(), min: 0.05, max: 0.999 },
        Bound { name: "r_ratio".into(), min: 0.05, max: 0.95 },
    ];
    let opt = minimize_q(Family::Qubit, &params([("p", 1.0), ("delta", 0.0)]), &free, &[], &SearchOptions::default())
        .expect("search");
    let (r0, x) = (opt.free["r0"], opt.free["r_ratio"]);
    v.check((r0 - 0.947).abs() <= 0.002, || format!("optimal r0 = {r0}"));
    v.check((x - 0.5).abs() <= 1e-3, || format!("optimal r/r0 = {x}"));
    v.check(opt.report.Q < 2.0, || format!("optimal Q = {}", opt.report.Q));
    v.note(format!("search: r0 = {r0:.5}, r/r0 = {x:.5}, Q = {:.6}", opt.report.Q));

    let small = 0.01;
    let f = |x: f64| qubit_q(small, x) - 2.0;
    let lo = bisect(f, 0.01, 0.5, 60);
    let hi = bisect(f, 0.5, 0.99, 60);
    let (want_lo, want_hi) = ((3.0 - 5f64.sqrt()) / 6.0, (3.0 + 5f64.sqrt()) / 6.0);
    v.check(rel(lo, want_lo) <= 1e-2, || format!("lower window edge {lo} vs {want_lo}"));
    v.check(rel(hi, want_hi) <= 1e-2, || format!("upper window edge {hi} vs {want_hi}"));
    v.note(format!("window at r0 = {small}: ({lo:.5}, {hi:.5}) r0"));

    let est = carnot_criterion(|r0| Family::Qubit.build(&params([("p", 1.0), ("delta", 0.0), ("r0", r0)])))
        .expect("carnot");
    v.check((est.delta + 5.0 / 6.0).abs() <= 1e-3, || format!("near-reversible δ = {}", est.delta));
    v.note(format!("δ = {:.6}", est.delta));
    v
}

fn two_qubit_criterion() -> Verdict {
    let mut v = Verdict::default();
    let r0 = 0.835;
    let q1 = evaluate(&build(Family::TwoQubit, &[("r0", r0), ("r_ratio", 3.0 / 8.0)])).unwrap().Q;
    v.check((q1 - 1.76).abs() <= 0.01, || format!("symmetric bias: Q = {q1}"));

    let base = build(Family::TwoQubit, &[("r0_pos", 0.259)]);
    let prof = quadratic_profile(&base).unwrap();
    let q2 = evaluate(&build(Family::TwoQubit, &[("r0_pos", 0.259), ("r_ratio", prof.r_star / prof.r0)])).unwrap().Q;
    v.check((q2 - 1.98).abs() <= 0.01, || format!("one-sided bias: Q = {q2}"));
    v.check(rel(q2, prof.q_min) <= 1e-8, || format!("profile minimum {} vs evaluated {q2}", prof.q_min));

    let est = carnot_criterion(|r0| Family::TwoQubit.build(&params([("r0", r0)]))).unwrap();
    v.check((est.delta + 11.0 / 24.0).abs() <= 1e-3, || format!("near-reversible δ = {}", est.delta));
    v.note(format!("Q = {q1:.5} (r0 = 0.835), {q2:.5} (r0 = 0.259), δ = {:.6}", est.delta));
    v
}

fn qutrit_delta(r: f64) -> f64 {
    carnot_criterion(|r0| Family::Qutrit.build(&params([("p_ratio", 1.0), ("R1", r), ("delta", 0.0), ("r0", r0)])))
        .unwrap()
        .delta
}

fn qutrit_criterion() -> Verdict {
    let mut v = Verdict::default();
    let quoted = params([("p_ratio", 0.83), ("R0", 0.946), ("R1", 0.129), ("r_ratio", 0.421), ("delta", 0.0)]);
    let q = evaluate(&Family::Qutrit.build(&quoted).unwrap()).unwrap().Q;
    v.check((q - 1.549).abs() <= 0.002, || format!("Q at the quoted point = {q}"));

    let free = [
        Bound { name: "p_ratio".into(), min: 0.05, max: 5.0 },
        Bound { name: "R0".into(), min: 0.01, max: 0.99 },
        Bound { name: "R1".into(), min: 0.01, max: 0.99 },
        Bound { name: "r_ratio".into(), min: 0.02, max: 0.98 },
    ];
    let fixed = params([("delta", 0.0)]);
    let opts = SearchOptions { seed: SEED, ..SearchOptions::default() };
    let open = minimize_q(Family::Qutrit, &fixed, &free, &[], &opts).unwrap();
    v.check(open.report.Q >= q - 1e-3, || format!("search found Q = {} at {:?}", open.report.Q, open.free));

    let ordered = minimize_q(Family::Qutrit, &fixed, &free, &[Constraint::EngineOrdering], &opts).unwrap();
    let qc = ordered.report.Q;
    v.check((qc - 1.618).abs() <= 0.002, || format!("constrained optimum {qc} at {:?}", ordered.free));

    let threshold = bisect(qutrit_delta, 0.1, 0.4, 40);
    v.check((threshold - 0.244).abs() <= 0.002, || format!("violation threshold R = {threshold}"));
    let closed = reference::qutrit::violation_threshold();
    v.check((threshold - closed).abs() <= 1e-4, || format!("threshold {threshold} vs closed form {closed}"));
    v.note(format!(
        "Q = {q:.5}; search min {:.5}; constrained {qc:.5} at {}; threshold R = {threshold:.5}",
        open.report.Q,
        fmt_params(&ordered.free)
    ));
    v
}

fn fmt_params(p: &Params) -> String {
    p.iter().map(|(k, x)| format!("{k}={x:.3}")).collect::<Vec<_>>().join(" ")
}

fn fridge_delta(k: f64) -> f64 {
    carnot_criterion(|r0| Family::Fridge.build(&params([("R", 0.5), ("p_ratio", k), ("r0", r0)]))).unwrap().delta
}

fn fridge_criterion() -> Verdict {
    let mut v = Verdict::default();
    let ratios = [0.25, 0.5, 1.0, 2.0, 4.0];
    let occ = [0.15, 0.35, 0.65, 0.85];
    let fracs = [0.1, 0.3, 0.5, 0.7, 0.9];
    let mut points = Vec::new();
    for &a in &ratios {
        for &b in &ratios {
            for &r1 in &occ {
                for &r2 in &occ {
                    for &r3 in &occ {
                        for &x in &fracs {
                            points.push(params([
                                ("p2", a),
                                ("p3", b),
                                ("R1", r1),
                                ("R2", r2),
                                ("R3", r3),
                                ("r_ratio", x),
                            ]));
                        }
                    }
                }
            }
        }
    }
    use rayon::prelude::*;
    let qs: Vec<Option<f64>> = points
        .par_iter()
        .map(|p| {
            let m = Family::Fridge.build(p).ok()?;
            let rep = evaluate(&m).ok()?;
            (rep.r0.abs() > 1e-6).then_some(rep.Q)
        })
        .collect();
    let evaluated = qs.iter().flatten().count();
    let min = qs.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    v.check(evaluated > points.len() / 2, || format!("only {evaluated} of {} grid points evaluated", points.len()));
    v.check(min >= 2.0 - 1e-3, || format!("grid minimum Q = {min}"));

    let (k, delta) = golden_min(fridge_delta, 0.05, 1.0, 40);
    v.check((delta - 1.21).abs() <= 0.02, || format!("δ_min = {delta}"));
    v.check((k - 0.26).abs() <= 0.01, || format!("δ_min at p2/p1 = {k}"));
    v.note(format!("{evaluated} grid points, min Q = {min:.5}; δ_min = {delta:.5} at p2 = p3 = {k:.4} p1"));
    v
}

/// Qutrit with a fourth level hanging off `|2⟩`; its reservoir lies on no cycle.
fn dangling_model(seed: u64) -> ModelSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = build(
        Family::Qutrit,
        &[
            ("R0", rng.gen_range(0.6..0.95)),
            ("R1", rng.gen_range(0.05..0.4)),
            ("g", rng.gen_range(0.05..0.4)),
            ("delta", rng.gen_range(-0.3..0.3)),
        ],
    );
    let w = rng.gen_range(0.2..0.8);
    let mut energies = m.energies.clone();
    energies.push(energies[2] - w);
    let mut reservoirs: Vec<Reservoir> = m
        .reservoirs
        .iter()
        .map(|r| {
            let pairs = r.transitions();
            Reservoir::from_transitions(r.label.clone(), r.p, r.occupation, 4, &pairs).unwrap().with_omega(r.omega.unwrap())
        })
        .collect();
    reservoirs.push(Reservoir::from_transitions("x", rng.gen_range(0.3..1.5), rng.gen_range(0.1..0.9), 4, &[(3, 2)]).unwrap().with_omega(w));
    ModelSpec { dim: 4, energies, vq: m.vq, g: m.g, omega_d: m.omega_d, reservoirs }
}

fn invariant_suite() -> Verdict {
    let mut v = Verdict::default();
    let models = pool();
    let mut shape_checked = 0;
    for (k, d) in models.iter().enumerate() {
        let m = &d.model;
        let rep = evaluate(m).unwrap();
        v.check(rep.sigma >= 0.0, || format!("model {k}: σ = {}", rep.sigma));
        v.check(rep.Q_d >= 2.0 - 1e-8, || format!("model {k}: Q_d = {}", rep.Q_d));
        let gamma = decoherence_rate(m).unwrap();
        let delta = m.detuning();
        let margin = (gamma * gamma - delta * delta).abs() / (gamma * gamma + delta * delta);
        if rep.J_c.abs() > 1e-12 && margin > 1e-9 {
            shape_checked += 1;
            v.check((rep.Q_c < 0.0) == (delta * delta < gamma * gamma), || {
                format!("model {k}: Q_c = {} with Δ = {delta}, γ = {gamma}", rep.Q_c)
            });
        }
        for label in nonzero_reservoirs(m) {
            let j = rep.J[&label];
            let q = rep.sigma * (rep.var_d[&label] + rep.var_c[&label]) / (j * j);
            v.check(rel(q, rep.Q) <= 1e-8, || format!("model {k}: Q from `{label}` = {q} vs {}", rep.Q));
        }
    }

    let mut worst_zero = 0.0f64;
    for s in 0..10 {
        let m = dangling_model(SEED + s);
        let counts = derive_photon_counts(&m).unwrap();
        v.check(counts[2] == 0, || format!("dangling reservoir counted {}", counts[2]));
        let rep = evaluate(&m).unwrap();
        v.check(rep.J["x"].abs() <= 1e-10, || format!("dangling current {}", rep.J["x"]));
        let cum = cumulants_exact(&m, "x").unwrap();
        worst_zero = worst_zero.max(cum.mean.abs()).max(cum.variance.abs());
        v.check(cum.mean.abs() <= 1e-10 && cum.variance.abs() <= 1e-10, || {
            format!("dangling cumulants ({:.2e}, {:.2e})", cum.mean, cum.variance)
        });
    }

    let (mut weak, mut strong, mut minima, mut total) = (0, 0, 0, 0);
    for d in &models {
        let mut m = d.model.clone();
        m.omega_d = m.energies[m.vq.0] - m.energies[m.vq.1];
        let Ok(prof) = quadratic_profile(&m) else { continue };
        total += 1;
        weak += prof.optimum_in_weak_drive() as usize;
        strong += prof.optimum_in_strong_drive() as usize;
        minima += prof.is_minimum() as usize;
    }
    if weak < total {
        v.findings.push(format!(
            "optimum has 0 < p_c ≤ p_I in {weak}/{total} resonant models; 0 < r* ≤ r0/2 in {strong}/{total}; \
             stationary point is a minimum in {minima}/{total}"
        ));
    }
    v.note(format!(
        "{} models, sign rule on {shape_checked}; zero-photon cumulants ≤ {worst_zero:.1e}",
        models.len()
    ));
    v
}

fn global_mapping_criterion() -> Verdict {
    let mut v = Verdict::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (p0, p1, r0, r1) = (1.0, 1.0, 0.8, 0.2);
    let mut worst = 0.0f64;
    for k in 0..50 {
        let e = [rng.gen_range(0.8..1.2), rng.gen_range(0.3..0.6), 0.0];
        let g = rng.gen_range(0.01..0.15);
        let omega_d = e[0] - e[1] + rng.gen_range(-0.2..0.2);
        let q_lib = evaluate(
            &Family::QutritGlobal
                .build(&params([("E0", e[0]), ("E1", e[1]), ("E2", e[2]), ("g", g), ("omega_d", omega_d)]))
                .unwrap(),
        )
        .unwrap()
        .Q;

        let map = global_to_local(e, g, omega_d).unwrap();
        let c = (2.0 * map.theta).cos();
        let z = |x: f64| Complex64::new(x, 0.0);
        let mut h = oracle::M::zeros(3, 3);
        h[(0, 0)] = z(map.eps[0] - 0.5 * omega_d * c);
        h[(1, 1)] = z(map.eps[1] + 0.5 * omega_d * c);
        h[(2, 2)] = z(map.eps[2]);
        h[(0, 1)] = z(map.g_tilde);
        h[(1, 0)] = z(map.g_tilde);
        let ch = |i: usize, p: f64, r: f64| Channel { jump: oracle::ket_bra(3, 2, i), down: p * (1.0 - r), up: p * r };
        let chans = [ch(0, p0, r0), ch(1, p1, r1)];
        let sigma: f64 = [r0, r1]
            .iter()
            .enumerate()
            .map(|(i, &r)| oracle::flux(&h, &chans, i) * ((1.0 - r) / r).ln())
            .sum();
        let (j, var) = oracle::cumulants(&h, &chans, 0);
        let q_direct = sigma * var / (j * j);
        let e_rel = rel(q_lib, q_direct);
        worst = worst.max(e_rel);
        v.check(e_rel <= 1e-8, || format!("triple {k}: mapped Q {q_lib} vs direct {q_direct}"));
    }
    v.note(format!("50 triples, worst rel {worst:.1e}"));
    v
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("1 oracle equivalence", oracle_equivalence),
        ("2 classical counterpart", counterpart_equivalence),
        ("3 driven qubit", driven_qubit_criterion),
        ("4 two-qubit transport", two_qubit_criterion),
        ("5 driven qutrit", qutrit_criterion),
        ("6 three-qubit refrigerator", fridge_criterion),
        ("7 invariant suite", invariant_suite),
        ("8 global mapping", global_mapping_criterion),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|s| name.contains(s.as_str())) {
            continue;
        }
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Verdict { failures: vec![format!("panicked: {msg}")], ..Verdict::default() }
        });
        let secs = start.elapsed().as_secs_f64();
        let pass = verdict.failures.is_empty();
        failed += !pass as usize;
        println!("{} criterion {name} [{secs:.1}s] {}", if pass { "PASS" } else { "FAIL" }, verdict.notes.join("; "));
        for f in verdict.failures.iter().take(10) {
            println!("    failure: {f}");
        }
        for f in &verdict.findings {
            println!("    finding: {f}");
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
