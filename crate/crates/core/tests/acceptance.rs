//! End-to-end acceptance checks, one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p qvir-core --test acceptance -- --nocapture` to see
//! the lines on success.

use std::collections::BTreeMap;
use std::time::Instant;

use qvir_core::classical::{ForcedStatus, XiFunction};
use qvir_core::modes::BracketConfig;
use qvir_core::quantum::{
    cocycle_residual_q, f0_only_counterexample, s2_convergence, theorem_residual, tolerance, Triplet,
};
use qvir_core::structfun::default_float;
use qvir_core::suite;
use qvir_core::{build_structure_constants, Mode, ParamSet, Scalar, StructureConstants};
use rand::{rngs::StdRng, Rng, SeedableRng};

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    note: String,
}

fn reference_float() -> StructureConstants {
    let ps = ParamSet::parse("3/10", "3/5", default_float(), 48).unwrap();
    build_structure_constants(&ps).unwrap()
}

fn failing_rows(rep: &qvir_core::VerificationReport) -> String {
    rep.failing()
        .take(3)
        .map(|r| format!("{}/{} {:?} {}", r.suite, r.check, r.index, r.residual_approx))
        .collect::<Vec<_>>()
        .join("; ")
}

fn c1_classical_k0() -> (bool, String) {
    let m = Mode::Exact;
    let mut notes = Vec::new();
    let mut ok = true;
    for (a, b) in [(3, 10), (1, 2), (7, 9)] {
        let rep = suite::classical_verify(&m.ratio(a, b), &[], 12).unwrap();
        ok &= rep.all_pass();
        notes.push(format!("q={a}/{b}: {}", rep.rows[0].detail.clone().unwrap_or_default()));
    }
    (ok, notes.join(", "))
}

fn random_xi(rng: &mut StdRng) -> XiFunction {
    let m = Mode::Exact;
    let mut xi = BTreeMap::new();
    for n in (-12..=12).step_by(2) {
        if rng.gen_bool(0.7) {
            xi.insert(n, m.ratio(rng.gen_range(-50..=50), rng.gen_range(1..=30)));
        }
    }
    XiFunction::new(xi)
}

fn c2_classical_solution() -> (bool, String) {
    let m = Mode::Exact;
    let mut rng = StdRng::seed_from_u64(2024);
    let mut xis: Vec<XiFunction> = (0..3).map(|_| random_xi(&mut rng)).collect();
    xis.push(XiFunction::delta(m.ratio(5, 3)));
    let rep = suite::classical_verify(&m.ratio(3, 10), &xis, 8).unwrap();
    let ok = rep.rows.iter().skip(1).all(|r| r.pass) && rep.rows.len() == 5;
    (ok, format!("{} xi functions on {} quadruples, residuals exactly 0", xis.len(), 9i64.pow(4)))
}

fn c3_forced_zeros() -> (bool, String) {
    let rep = qvir_core::classical::scan_forced_zeros(1, &Mode::Exact.ratio(3, 10), -4, 4, 8).unwrap();
    let e0 = rep.entry(0).unwrap();
    let ok = e0.status == ForcedStatus::ForcedZero && !e0.counterexample.is_empty();
    let others: Vec<String> = [-4, -2, 2, 4]
        .iter()
        .map(|&mt| format!("M={mt}:{:?}", rep.status(mt).unwrap()))
        .collect();
    (
        ok,
        format!("M=0 {:?} via {:?} witness {:?}; {}", e0.status, e0.method, e0.counterexample, others.join(" ")),
    )
}

fn c4_ecal_identity() -> (bool, String) {
    let mode = default_float();
    let tol = mode.pow10(-25);
    let mut rng = StdRng::seed_from_u64(7);
    let mut pairs = vec![("0.3".to_string(), "0.6".to_string())];
    while pairs.len() < 6 {
        let q: f64 = rng.gen_range(0.05..0.85);
        let p: f64 = rng.gen_range(q + 0.02..0.97);
        pairs.push((format!("{q:.6}"), format!("{p:.6}")));
    }
    let mut worst = 0.0f64;
    let mut ok = true;
    for (q, p) in &pairs {
        let ps = ParamSet::parse(q, p, mode, 8).unwrap();
        ok &= ps.product_cutoff() < mode.pow10(-40);
        let d = build_structure_constants(&ps).unwrap().ecal_defect().unwrap();
        ok &= d.within(&tol);
        worst = worst.max(d.abs().to_f64());
    }
    (ok, format!("{} pairs, max defect {worst:e}", pairs.len()))
}

fn c5_theorem(sc: &StructureConstants) -> (bool, String) {
    let plain = suite::quantum_verify(sc, 0, 8).unwrap();
    let shifted = suite::quantum_shifted(sc, &[-4, -2, 2, 4], 5).unwrap();
    let xi = XiFunction::new(BTreeMap::from([
        (-6, sc.mode().ratio(2, 3)),
        (-2, sc.mode().int(-1)),
        (4, sc.mode().ratio(7, 5)),
        (6, sc.mode().int(3)),
    ]));
    // residuals carry the factor ξ_s, |ξ_s| <= 3
    let tol = tolerance(sc) * sc.mode().int(3);
    let mut mixed = 0;
    let mut mixed_ok = true;
    for s in [-6, -4, -2, 2, 4, 6] {
        for t in Triplet::all_even(6) {
            mixed_ok &= theorem_residual(&xi, &t, s, sc).unwrap().within(&tol);
            mixed += 1;
        }
    }
    let rows_plain = plain.rows.iter().filter(|r| r.check == "cocycle").count();
    let ok = plain.rows.iter().filter(|r| r.check == "cocycle").all(|r| r.pass) && shifted.all_pass() && mixed_ok;
    let worst = plain
        .rows
        .iter()
        .chain(shifted.rows.iter())
        .map(|r| r.residual_approx.abs())
        .fold(0.0, f64::max);
    let mut note = format!(
        "{rows_plain} triplets, {} shifted, {mixed} mixed-s; max |residual| {worst:e}",
        shifted.rows.len()
    );
    if !ok {
        note.push_str(&format!("; {}{}", failing_rows(&plain), failing_rows(&shifted)));
    }
    (ok, note)
}

fn c6_residues(sc: &StructureConstants) -> (bool, String) {
    let ts: Vec<Triplet> = suite::RESIDUE_TRIPLETS.iter().map(|&(n, m, r)| Triplet::new(n, m, r)).collect();
    let rep = suite::quantum_residues(sc, &ts).unwrap();
    let worst = rep.rows.iter().map(|r| r.residual_approx.abs()).fold(0.0, f64::max);
    (rep.all_pass(), format!("{} triplets, max gap {worst:e}", ts.len()))
}

fn c7_nullspace(sc: &StructureConstants) -> (bool, String) {
    let rep = suite::quantum_nullspace(sc, &[4, 6, 8]).unwrap();
    let dims: Vec<String> = rep
        .rows
        .iter()
        .filter(|r| r.check == "dimension_one")
        .map(|r| r.detail.clone().unwrap_or_default())
        .collect();
    let dev = rep
        .rows
        .iter()
        .filter(|r| r.check == "matches_q_k")
        .map(|r| r.residual_approx)
        .fold(0.0, f64::max);
    (rep.all_pass(), format!("{}; max deviation {dev:e}", dims.join(" | ")))
}

fn c8_negative(sc: &StructureConstants) -> (bool, String) {
    let floor = sc.mode().pow10(-6);
    let vals: Vec<Scalar> = suite::NEGATIVE_CONTROLS
        .iter()
        .map(|&(n, m, r)| f0_only_counterexample(&Triplet::new(n, m, r), sc).unwrap())
        .collect();
    let ok = vals.iter().all(|v| v.abs() > floor);
    let shown: Vec<String> = vals.iter().map(|v| v.approx_string(10)).collect();
    (ok, shown.join(", "))
}

fn c9_modes() -> (bool, String) {
    let cfg = BracketConfig::new(8, 20, 8).unwrap();
    let rep = suite::modes_verify(&Mode::Exact.ratio(3, 10), &cfg, 4, &[-2, 0, 2], 6).unwrap();
    let ok = rep.all_pass();
    (ok, format!("{} windowed checks", rep.rows.len()))
}

fn c10_degenerate() -> (bool, String) {
    let m = Mode::Exact;
    let q = m.ratio(3, 10);
    let ps = ParamSet::new(q.clone(), q.square(), 6, 48).unwrap();
    let sc = build_structure_constants(&ps).unwrap();
    let mut ok = sc.f.numer.is_empty() && sc.f.denom.is_empty();
    ok &= sc.f0(0).unwrap() == m.one() && (2..=48).step_by(2).all(|l| sc.f0(l).unwrap().is_zero());
    ok &= sc.eval_f(&m.ratio(2, 3)).unwrap() == m.one();
    ok &= sc.alpha.is_zero() && sc.ecal.is_zero();
    let tol = tolerance(&sc);
    ok &= tol.is_zero();
    let ts: Vec<Triplet> = suite::RESIDUE_TRIPLETS.iter().map(|&(n, m, r)| Triplet::new(n, m, r)).collect();
    let reps = [
        suite::quantum_verify(&sc, 0, 8).unwrap(),
        suite::quantum_residues(&sc, &ts).unwrap(),
        suite::quantum_shifted(&sc, &[-4, -2, 2, 4], 5).unwrap(),
    ];
    let rows: usize = reps.iter().map(|r| r.rows.len()).sum();
    ok &= reps.iter().all(|r| r.all_pass());
    ok &= Triplet::all_even(8).iter().all(|t| cocycle_residual_q(t, &sc).unwrap().is_zero());
    (ok, format!("f = 1, alpha = 0, E = 0; {rows} residual rows exactly 0"))
}

fn c11_convergence(sc: &StructureConstants) -> (bool, String) {
    let mut ok = true;
    let mut ratios = Vec::new();
    for (n, m, r) in [(4, 2, 0), (-4, -2, 0), (2, 0, 4), (2, 4, -4), (0, 2, -4)] {
        let e = s2_convergence(&Triplet::new(n, m, r), &[8, 24], sc).unwrap();
        let ratio = e[0].to_f64() / e[1].to_f64();
        ok &= e[0] >= e[1].clone() * sc.mode().int(10);
        ratios.push(format!("{ratio:.3e}"));
    }
    (ok, format!("error ratios K=8/K=24: {}", ratios.join(", ")))
}

#[test]
fn acceptance() {
    let sc = reference_float();
    let mut out: Vec<Outcome> = Vec::new();
    let mut run = |id: u32, name: &'static str, f: &dyn Fn() -> (bool, String)| {
        let t0 = Instant::now();
        let (pass, note) = f();
        let note = format!("{note} [{:.1}s]", t0.elapsed().as_secs_f64());
        println!("{} criterion {id:>2} {name}: {note}", if pass { "PASS" } else { "FAIL" });
        out.push(Outcome { id, name, pass, note });
    };
    run(1, "classical k=0 bracket factor", &c1_classical_k0);
    run(2, "classical xi-ansatz solutions", &c2_classical_solution);
    run(3, "classical k=1 forced zeros", &c3_forced_zeros);
    run(4, "E identity", &c4_ecal_identity);
    run(5, "quantum cocycle theorem", &|| c5_theorem(&sc));
    run(6, "residue breakdown", &|| c6_residues(&sc));
    run(7, "lambda nullspace M=4,6,8", &|| c7_nullspace(&sc));
    run(8, "f0-only negative control", &|| c8_negative(&sc));
    run(9, "mode-algebra centrality", &c9_modes);
    run(10, "degenerate point p = q^2", &c10_degenerate);
    run(11, "S2 partial sum convergence", &|| c11_convergence(&sc));
    let failed: Vec<String> = out
        .iter()
        .filter(|o| !o.pass)
        .map(|o| format!("{} {} ({})", o.id, o.name, o.note))
        .collect();
    assert!(failed.is_empty(), "failing criteria: {}", failed.join("; "));
}
