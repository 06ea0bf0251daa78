//! Verification suites shared by the command line and the benches.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::classical::{
    c_factor, cocycle_residual, scan_forced_zeros, CocycleTable, ForcedStatus, XiFunction,
};
use crate::error::Result;
use crate::modes::{verify_centrality, verify_s_bracket, BracketConfig, Kind};
use crate::quantum::{
    check_label, cocycle_residual_q, f0_only_counterexample, lambda_nullspace, residue_breakdown,
    s1, s2_closed, shifted_residual, tolerance, Triplet,
};
use crate::report::{idx, CheckRow, TruncationMeta, VerificationReport};
use crate::scalar::{Mode, Scalar};
use crate::structfun::{c_hat, StructureConstants};

/// Triplets sampled for residue breakdowns.
pub const RESIDUE_TRIPLETS: [(i64, i64, i64); 10] = [
    (2, 0, -2),
    (6, 2, -4),
    (4, 2, 0),
    (8, -8, 2),
    (0, 4, -6),
    (2, 4, 6),
    (-2, 6, 4),
    (0, 0, 2),
    (8, 6, -8),
    (-4, -6, 2),
];

/// Generic triplets used as `f^(0)`-only negative controls.
pub const NEGATIVE_CONTROLS: [(i64, i64, i64); 3] = [(6, 2, -4), (4, 2, 0), (0, 4, -6)];

fn meta(sc: &StructureConstants, window: Option<i64>) -> TruncationMeta {
    TruncationMeta {
        n_prod: Some(sc.params.n_prod),
        l_max: Some(sc.params.l_max),
        window,
    }
}

fn echo(rep: &mut VerificationReport, sc: &StructureConstants) {
    rep.param("q", &sc.params.q);
    rep.param("p", &sc.params.p);
    rep.param("mode", if sc.mode().is_exact() { "exact".to_string() } else { format!("float{}", sc.mode().bits().unwrap_or(0)) });
    rep.param("n_prod", sc.params.n_prod);
    rep.param("l_max", sc.params.l_max);
}

#[derive(Serialize)]
struct CoeffTable {
    k: u32,
    c_hat: BTreeMap<i64, Scalar>,
}

/// Tables of `ĉ^(k)`, `f^(0)`, `f^(1)`, `f` and the constants, with the
/// `ℰ` identity and the decay condition as checks.
pub fn coeffs(sc: &StructureConstants, k: u32) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new();
    echo(&mut rep, sc);
    let half = sc.params.l_max / 2;
    let c_hat: BTreeMap<i64, Scalar> = (-half..=half)
        .map(|l| Ok((l, c_hat(k, l, sc.q())?)))
        .collect::<Result<_>>()?;
    rep.block("c_hat", CoeffTable { k, c_hat });
    rep.block("structure_constants", sc.to_json());
    let tol = tolerance(sc);
    let m = meta(sc, None);
    rep.push(CheckRow::measured("coeffs", "decay", [None; 4], &sc.decay_defect(), &sc.mode().zero(), m.clone()));
    rep.push(CheckRow::measured("coeffs", "ecal_identity", [None; 4], &sc.ecal_defect()?, &tol, m));
    Ok(rep)
}

/// Forced-zero scan of `h_{0,M}` for label `k`.
pub fn classical_scan(k: u32, q: &Scalar, m_lo: i64, m_hi: i64, depth: i64) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new();
    rep.param("q", q);
    let scan = scan_forced_zeros(k, q, m_lo, m_hi, depth)?;
    let m = TruncationMeta { window: Some(depth), ..Default::default() };
    for e in &scan.entries {
        // k = 0 must leave every sector free; other labels are reported as found
        let ok = k != 0 || e.status == ForcedStatus::Unconstrained;
        let status = serde_json::to_value(e.status).unwrap_or_default();
        rep.push(
            CheckRow::flag("classical_scan", "sector_status", [None, None, None, Some(e.m_total)], ok, m.clone())
                .with_detail(status.as_str().unwrap_or_default().to_string()),
        );
    }
    rep.block(&format!("forced_zero_scan_k{k}"), &scan);
    Ok(rep)
}

/// `c_factor(0, ..) = 0` on nonsingular quadruples and the `ξ`-ansatz
/// residuals for each supplied `ξ`, over quadruples with `|·| <= window`.
pub fn classical_verify(q: &Scalar, xis: &[XiFunction], window: i64) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new();
    rep.param("q", q);
    rep.param("window", window);
    let w = window - window.rem_euclid(2);
    let axis: Vec<i64> = (-w..=w).step_by(2).collect();
    let mut quads = Vec::new();
    for &n in &axis {
        for &mm in &axis {
            for &r in &axis {
                for &l in &axis {
                    quads.push([n, mm, r, l]);
                }
            }
        }
    }
    let m = TruncationMeta { window: Some(w), ..Default::default() };
    let zero = q.zero_like();

    let (worst, singular) = quads
        .par_iter()
        .map(|&[n, mm, r, l]| -> Result<(Scalar, usize)> {
            Ok(match c_factor(0, q, n, mm, r, l)?.value() {
                Some(v) => (v.abs(), 0),
                None => (q.zero_like(), 1),
            })
        })
        .try_reduce(|| (q.zero_like(), 0), |a, b| Ok((if b.0 > a.0 { b.0 } else { a.0 }, a.1 + b.1)))?;
    rep.push(
        CheckRow::measured("classical", "c_factor_k0", [None; 4], &worst, &zero, m.clone())
            .with_detail(format!("{} quadruples, {singular} singular", quads.len())),
    );

    let table_window = 3 * w;
    for (i, xi) in xis.iter().enumerate() {
        let h = CocycleTable::from_xi(xi, q, table_window)?;
        let worst = quads
            .par_iter()
            .map(|&[n, mm, r, l]| cocycle_residual(&h, 0, q, n, mm, r, l).map(|v| v.abs()))
            .try_reduce(|| q.zero_like(), |a, b| Ok(if b > a { b } else { a }))?;
        rep.push(CheckRow::measured("classical", &format!("xi_ansatz_{i}"), [None; 4], &worst, &zero, m.clone()));
    }
    Ok(rep)
}

/// Mode-algebra checks: centrality of the central candidate and the
/// simplified `s`-bracket.
pub fn modes_verify(
    q: &Scalar,
    cfg: &BracketConfig,
    r_bound: i64,
    m_totals: &[i64],
    nm_bound: i64,
) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new();
    rep.param("q", q);
    rep.param("bracket_config", cfg);
    let m = TruncationMeta { window: Some(cfg.window), ..Default::default() };
    let mut jobs = Vec::new();
    for kind in [Kind::T, Kind::H] {
        for r in (-r_bound..=r_bound).step_by(2) {
            for &mt in m_totals {
                jobs.push((kind, r, mt));
            }
        }
    }
    let cent: Vec<_> = jobs
        .par_iter()
        .map(|&(kind, r, mt)| verify_centrality(kind, r, mt, cfg, q).map(|w| (kind, r, mt, w)))
        .collect::<Result<_>>()?;
    for (kind, r, mt, w) in cent {
        let name = match kind {
            Kind::T => "centrality_t",
            Kind::H => "centrality_h",
        };
        let mut row = CheckRow::flag("modes", name, [Some(r), None, None, Some(mt)], w.pass, m.clone());
        if !w.pass {
            row = row.with_detail(w.offending.join("; "));
        }
        rep.push(row);
    }
    let pairs: Vec<(i64, i64)> = (-nm_bound..=nm_bound)
        .step_by(2)
        .flat_map(|n| (-nm_bound..=nm_bound).step_by(2).map(move |mm| (n, mm)))
        .collect();
    let sb: Vec<_> = pairs
        .par_iter()
        .map(|&(n, mm)| verify_s_bracket(n, mm, cfg, q).map(|w| (n, mm, w)))
        .collect::<Result<_>>()?;
    for (n, mm, w) in sb {
        let mut row = CheckRow::flag("modes", "s_bracket", [Some(n), Some(mm), None, None], w.pass, m.clone());
        if !w.pass {
            row = row.with_detail(w.offending.join("; "));
        }
        rep.push(row);
    }
    Ok(rep)
}

/// `S1 + S2` on every even triplet with `|·| <= bound`, plus the `f^(0)`-only
/// negative controls.
pub fn quantum_verify(sc: &StructureConstants, k: u32, bound: i64) -> Result<VerificationReport> {
    check_label(k)?;
    let mut rep = VerificationReport::new();
    echo(&mut rep, sc);
    let tol = tolerance(sc);
    let m = meta(sc, Some(bound));
    let trips = Triplet::all_even(bound);
    let rows: Vec<CheckRow> = trips
        .par_iter()
        .map(|t| -> Result<CheckRow> {
            let a = s1(t, sc)?;
            let b = s2_closed(t, sc);
            let res = &a + &b;
            Ok(CheckRow::measured("quantum", "cocycle", idx(t.n, t.m, t.r, Some(0)), &res, &tol, m.clone())
                .with_detail(format!("S1={} S2={}", a.approx_string(20), b.approx_string(20))))
        })
        .collect::<Result<_>>()?;
    rep.rows.extend(rows);
    if !sc.params.is_degenerate() {
        let floor = sc.mode().pow10(-6);
        for (n, mm, r) in NEGATIVE_CONTROLS {
            let v = f0_only_counterexample(&Triplet::new(n, mm, r), sc)?;
            rep.push(
                CheckRow::flag("quantum", "f0_only_nonzero", idx(n, mm, r, Some(0)), v.abs() > floor, m.clone())
                    .with_detail(format!("value={}", v.approx_string(20))),
            );
        }
    }
    Ok(rep)
}

/// Residue breakdowns for `triplets`.
pub fn quantum_residues(sc: &StructureConstants, triplets: &[Triplet]) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new();
    echo(&mut rep, sc);
    let tol = tolerance(sc);
    let m = meta(sc, None);
    let bs: Vec<_> = triplets
        .par_iter()
        .map(|t| residue_breakdown(t, sc))
        .collect::<Result<_>>()?;
    for b in &bs {
        let t = b.triplet;
        let ix = idx(t.n, t.m, t.r, Some(0));
        rep.push(CheckRow::measured("residues", "total", ix, &b.total, &tol, m.clone()));
        rep.push(CheckRow::measured("residues", "closed_forms", ix, &b.route_gap(), &tol, m.clone()));
        rep.push(CheckRow::measured("residues", "origin_infinity", ix, &(&b.origin_plus_infinity - &b.two_s1), &tol, m.clone()));
    }
    rep.block("residue_breakdowns", &bs);
    Ok(rep)
}

/// `λ` recovery for each `M`.
pub fn quantum_nullspace(sc: &StructureConstants, ms: &[i64]) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new();
    echo(&mut rep, sc);
    let fm = Mode::Float { bits: crate::scalar::DEFAULT_FLOAT_BITS };
    let tol = fm.pow10(crate::quantum::FLOAT_TOL_EXP);
    let mut reports = Vec::new();
    for &mb in ms {
        let r = lambda_nullspace(mb, sc)?;
        let m = meta(sc, Some(mb));
        let ix = [None, None, None, Some(mb)];
        rep.push(
            CheckRow::flag("nullspace", "dimension_one", ix, r.nullspace_dim == 1, m.clone())
                .with_detail(format!("dim={} tail_rank={} combinations={}", r.nullspace_dim, r.tail_rank, r.combinations)),
        );
        match &r.max_deviation {
            Some(d) => rep.push(CheckRow::measured("nullspace", "matches_q_k", ix, d, &tol, m.clone())),
            None => rep.push(CheckRow::flag("nullspace", "matches_q_k", ix, false, m.clone())),
        }
        rep.push(CheckRow::measured("nullspace", "tail_residual", ix, &r.tail_residual, &tol, m));
        reports.push(r);
    }
    rep.block("lambda_nullspace", &reports);
    Ok(rep)
}

/// Shifted sectors: for each `s`, every shifted triplet of the right parity
/// with `|·| <= bound`.
pub fn quantum_shifted(sc: &StructureConstants, ss: &[i64], bound: i64) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new();
    echo(&mut rep, sc);
    let tol = tolerance(sc);
    let m = meta(sc, Some(bound));
    for &s in ss {
        let par = (s / 2).rem_euclid(2);
        let axis: Vec<i64> = (-bound..=bound).filter(|x| x.rem_euclid(2) == par).collect();
        let mut trips = Vec::new();
        for &n in &axis {
            for &mm in &axis {
                for &r in &axis {
                    trips.push(Triplet::new(n, mm, r));
                }
            }
        }
        let rows: Vec<CheckRow> = trips
            .par_iter()
            .map(|t| {
                shifted_residual(s, t, sc)
                    .map(|v| CheckRow::measured("shifted", "cocycle", idx(t.n, t.m, t.r, Some(s)), &v, &tol, m.clone()))
            })
            .collect::<Result<_>>()?;
        rep.rows.extend(rows);
    }
    Ok(rep)
}

/// `S1 + S2` without the negative controls, for a single triplet.
pub fn triplet_residual(sc: &StructureConstants, t: &Triplet) -> Result<Scalar> {
    cocycle_residual_q(t, sc)
}
