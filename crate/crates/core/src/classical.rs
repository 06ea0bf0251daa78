//! Classical cocycle equations for the quadratic Poisson algebras with
//! coefficients `ĉ^(k)`.
//!
//! All `c` values are the normalized `ĉ^(k)`; every equation here is
//! homogeneous in `κ_k`, so the factor never enters.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{forces_zero, rref};
use crate::scalar::Scalar;
use crate::structfun::c_hat;

/// `ĉ^(k)_l` for `|l| <= bound`.
#[derive(Clone, Debug)]
pub struct CoefficientTable {
    pub k: u32,
    pub bound: i64,
    entries: BTreeMap<i64, Scalar>,
}

impl CoefficientTable {
    pub fn new(k: u32, q: &Scalar, bound: i64) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for l in -bound..=bound {
            entries.insert(l, c_hat(k, l, q)?);
        }
        Ok(CoefficientTable { k, bound, entries })
    }

    /// Table from explicit values (used to probe non-antisymmetric input).
    pub fn from_entries(k: u32, entries: BTreeMap<i64, Scalar>) -> Self {
        let bound = entries
            .keys()
            .map(|l| l.abs())
            .max()
            .unwrap_or(0);
        CoefficientTable { k, bound, entries }
    }

    pub fn get(&self, l: i64) -> Result<Scalar> {
        self.entries
            .get(&l)
            .cloned()
            .ok_or_else(|| Error::Range(vec![format!("c[{l}]")]))
    }
}

/// `c_l c_j + c_{l-j} c_j + c_{-j} c_{l-j} + c_{-l} c_{l-j} + c_{j-l} c_{-l} + c_j c_{-l}`.
pub fn jacobi_coeff_combination(c: &CoefficientTable, l: i64, j: i64) -> Result<Scalar> {
    let mut missing = Vec::new();
    let mut get = |i: i64| match c.get(i) {
        Ok(v) => Some(v),
        Err(_) => {
            missing.push(format!("c[{i}]"));
            None
        }
    };
    let (cl, cj, clj, cmj, cml, cjl) = (get(l), get(j), get(l - j), get(-j), get(-l), get(j - l));
    if !missing.is_empty() {
        missing.sort();
        missing.dedup();
        return Err(Error::Range(missing));
    }
    let (cl, cj, clj, cmj, cml, cjl) = (
        cl.unwrap(),
        cj.unwrap(),
        clj.unwrap(),
        cmj.unwrap(),
        cml.unwrap(),
        cjl.unwrap(),
    );
    Ok(&cl * &cj + &clj * &cj + &cmj * &clj + &cml * &clj + &cjl * &cml + &cj * &cml)
}

/// Arbitrary function `ξ_n` on even integers (zero off its support).
#[derive(Clone, Debug, Default, Serialize)]
pub struct XiFunction {
    pub xi: BTreeMap<i64, Scalar>,
}

impl XiFunction {
    pub fn new(xi: BTreeMap<i64, Scalar>) -> Self {
        XiFunction { xi }
    }

    /// `ξ_n = value · δ_{n,0}`.
    pub fn delta(value: Scalar) -> Self {
        XiFunction {
            xi: BTreeMap::from([(0, value)]),
        }
    }

    pub fn get(&self, n: i64, like: &Scalar) -> Scalar {
        self.xi.get(&n).cloned().unwrap_or_else(|| like.zero_like())
    }
}

/// `h_{n,m} = ξ_{n+m} (q^{(m-n)/2} - q^{(n-m)/2})`.
pub fn xi_ansatz(xi: &XiFunction, q: &Scalar, n: i64, m: i64) -> Scalar {
    let d = (m - n) / 2;
    xi.get(n + m, q) * (q.powi(d) - q.powi(-d))
}

/// How a [`CocycleTable`] was produced.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    Explicit,
    XiAnsatz { support: Vec<i64> },
}

/// `h_{n,m}` on even indices with `|n|, |m| <= window`.
#[derive(Clone, Debug)]
pub struct CocycleTable {
    pub window: i64,
    pub generator: Generator,
    h: BTreeMap<(i64, i64), Scalar>,
}

impl CocycleTable {
    /// Fills the window from `f(n, m)`, which must be antisymmetric.
    pub fn from_fn(window: i64, mut f: impl FnMut(i64, i64) -> Scalar) -> Result<Self> {
        if window < 0 || window % 2 != 0 {
            return Err(Error::Parity(format!("window must be even and >= 0, got {window}")));
        }
        let mut h = BTreeMap::new();
        for n in (-window..=window).step_by(2) {
            for m in (-window..=window).step_by(2) {
                h.insert((n, m), f(n, m));
            }
        }
        let t = CocycleTable {
            window,
            generator: Generator::Explicit,
            h,
        };
        if let Some((n, m)) = t.antisymmetry_violation() {
            return Err(Error::Parameter(format!("h[{n},{m}] != -h[{m},{n}]")));
        }
        Ok(t)
    }

    pub fn from_xi(xi: &XiFunction, q: &Scalar, window: i64) -> Result<Self> {
        let mut t = Self::from_fn(window, |n, m| xi_ansatz(xi, q, n, m))?;
        t.generator = Generator::XiAnsatz {
            support: xi.xi.keys().copied().collect(),
        };
        Ok(t)
    }

    pub fn get(&self, n: i64, m: i64) -> Option<&Scalar> {
        self.h.get(&(n, m))
    }

    /// First stored pair breaking `h_{n,m} = -h_{m,n}`, if any.
    pub fn antisymmetry_violation(&self) -> Option<(i64, i64)> {
        self.h.iter().find_map(|(&(n, m), v)| match self.h.get(&(m, n)) {
            Some(w) if (v + w).is_zero() => None,
            _ => Some((n, m)),
        })
    }

    pub fn entries(&self) -> impl Iterator<Item = ((i64, i64), &Scalar)> {
        self.h.iter().map(|(k, v)| (*k, v))
    }
}

fn check_even(idx: &[i64]) -> Result<()> {
    if let Some(i) = idx.iter().find(|i| *i % 2 != 0) {
        return Err(Error::Parity(format!("index {i} is odd")));
    }
    Ok(())
}

/// Left-hand side of the cocycle equation at `(n, m, r, l)`.
pub fn cocycle_residual(
    h: &CocycleTable,
    k: u32,
    q: &Scalar,
    n: i64,
    m: i64,
    r: i64,
    l: i64,
) -> Result<Scalar> {
    check_even(&[n, m, r, l])?;
    let mut missing = Vec::new();
    let mut get = |a: i64, b: i64| match h.get(a, b) {
        Some(v) => v.clone(),
        None => {
            missing.push(format!("h[{a},{b}]"));
            q.zero_like()
        }
    };
    let t1 = get(n, m - l + r) - get(m, n - l + r);
    let t2 = get(r, n - l + m) - get(n, r - l + m);
    let t3 = get(m, r - l + n) - get(r, m - l + n);
    if !missing.is_empty() {
        return Err(Error::Range(missing));
    }
    let c = |i: i64| c_hat(k, i, q);
    Ok(c((l - r) / 2)? * t1 + c((l - m) / 2)? * t2 + c((l - n) / 2)? * t3)
}

/// Value of the bracket multiplying `h_{0, n+m+r-l}`, or the singular case.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CFactor {
    Value { value: Scalar },
    /// Some `c_{a/2} + c_{b/2}` vanishes; the reduced equation does not apply.
    Singular { a: i64, b: i64 },
}

impl CFactor {
    pub fn value(&self) -> Option<&Scalar> {
        match self {
            CFactor::Value { value } => Some(value),
            CFactor::Singular { .. } => None,
        }
    }
}

pub fn c_factor(k: u32, q: &Scalar, n: i64, m: i64, r: i64, l: i64) -> Result<CFactor> {
    check_even(&[n, m, r, l])?;
    let c = |i: i64| c_hat(k, i, q);
    // (c_{a/2} - c_{b/2}) / (c_{a/2} + c_{b/2})
    let ratio = |a: i64, b: i64| -> Result<std::result::Result<Scalar, (i64, i64)>> {
        let (ca, cb) = (c(a / 2)?, c(b / 2)?);
        let den = &ca + &cb;
        if den.is_zero() {
            return Ok(Err((a, b)));
        }
        Ok(Ok((ca - cb) / den))
    };
    let pairs = [
        ((l - r) / 2, (m - l + r, n), (n - l + r, m)),
        ((l - m) / 2, (n - l + m, r), (r - l + m, n)),
        ((l - n) / 2, (r - l + n, m), (m - l + n, r)),
    ];
    let mut total = q.zero_like();
    for (ci, (a1, b1), (a2, b2)) in pairs {
        let x = match ratio(a1, b1)? {
            Ok(v) => v,
            Err((a, b)) => return Ok(CFactor::Singular { a, b }),
        };
        let y = match ratio(a2, b2)? {
            Ok(v) => v,
            Err((a, b)) => return Ok(CFactor::Singular { a, b }),
        };
        total = total + c(ci)? * (x - y);
    }
    Ok(CFactor::Value { value: total })
}

/// Whether `h_{0,M}` is forced to vanish.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ForcedStatus {
    ForcedZero,
    /// Not forced within the searched depth.
    Unconstrained,
}

/// How a sector was decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMethod {
    /// A single quadruple with a nonzero c-factor.
    CFactor,
    /// `M = 0`: every c-factor is singular (one ratio is always
    /// `R(-n, n)`), so the undivided equations are solved for the diagonal
    /// `d_x = h_{x,-x}` and the sector counts as forced when `d_2 = 0`.
    DiagonalSystem,
}

#[derive(Clone, Debug, Serialize)]
pub struct ForcedZeroEntry {
    pub m_total: i64,
    pub status: ForcedStatus,
    pub method: ScanMethod,
    /// Quadruples `(n, m, r, l)` witnessing the forced zero: one for the
    /// c-factor method, a minimal prefix of independent equations otherwise.
    pub counterexample: Vec<[i64; 4]>,
    pub counterexample_value: Option<Scalar>,
    pub evaluated: usize,
    pub singular: usize,
    pub nonzero: usize,
    /// Rank and unknown count of the diagonal system (`M = 0` only).
    pub diagonal_rank: Option<usize>,
    pub diagonal_unknowns: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ForcedZeroReport {
    pub k: u32,
    pub q: Scalar,
    pub search_depth: i64,
    pub entries: Vec<ForcedZeroEntry>,
}

impl ForcedZeroReport {
    pub fn entry(&self, m_total: i64) -> Option<&ForcedZeroEntry> {
        self.entries.iter().find(|e| e.m_total == m_total)
    }

    pub fn status(&self, m_total: i64) -> Option<ForcedStatus> {
        self.entry(m_total).map(|e| e.status)
    }

    pub fn forced(&self) -> Vec<i64> {
        self.entries
            .iter()
            .filter(|e| e.status == ForcedStatus::ForcedZero)
            .map(|e| e.m_total)
            .collect()
    }
}

fn quadruples(d: i64, mt: i64) -> Vec<[i64; 4]> {
    let axis: Vec<i64> = (-d..=d).step_by(2).collect();
    let mut out = Vec::new();
    for &n in &axis {
        for &m in &axis {
            for &r in &axis {
                let l = n + m + r - mt;
                if l.abs() <= d {
                    out.push([n, m, r, l]);
                }
            }
        }
    }
    out
}

/// Scans even quadruples with `|n|, |m|, |r|, |l| <= search_depth` and
/// classifies every even `M` in `m_lo..=m_hi`.
pub fn scan_forced_zeros(
    k: u32,
    q: &Scalar,
    m_lo: i64,
    m_hi: i64,
    search_depth: i64,
) -> Result<ForcedZeroReport> {
    let d = search_depth - search_depth.rem_euclid(2);
    let targets: Vec<i64> = (m_lo..=m_hi).filter(|m| m % 2 == 0).collect();
    let entries: Result<Vec<ForcedZeroEntry>> = targets
        .par_iter()
        .map(|&mt| scan_sector(k, q, d, mt))
        .collect();
    Ok(ForcedZeroReport {
        k,
        q: q.clone(),
        search_depth: d,
        entries: entries?,
    })
}

fn scan_sector(k: u32, q: &Scalar, d: i64, mt: i64) -> Result<ForcedZeroEntry> {
    let mut e = ForcedZeroEntry {
        m_total: mt,
        status: ForcedStatus::Unconstrained,
        method: if mt == 0 {
            ScanMethod::DiagonalSystem
        } else {
            ScanMethod::CFactor
        },
        counterexample: Vec::new(),
        counterexample_value: None,
        evaluated: 0,
        singular: 0,
        nonzero: 0,
        diagonal_rank: None,
        diagonal_unknowns: None,
    };
    let quads = quadruples(d, mt);
    for &[n, m, r, l] in &quads {
        e.evaluated += 1;
        match c_factor(k, q, n, m, r, l)? {
            CFactor::Singular { .. } => e.singular += 1,
            CFactor::Value { value } => {
                if !value.is_zero() {
                    e.nonzero += 1;
                    if e.counterexample.is_empty() {
                        e.counterexample = vec![[n, m, r, l]];
                        e.counterexample_value = Some(value);
                    }
                }
            }
        }
    }
    if mt != 0 {
        if e.nonzero > 0 {
            e.status = ForcedStatus::ForcedZero;
        }
        return Ok(e);
    }
    if d < 2 {
        return Ok(e);
    }
    let nvar = (d / 2) as usize;
    let col = |x: i64| -> Option<(usize, i64)> {
        match x {
            0 => None,
            x if x > 0 => Some(((x / 2 - 1) as usize, 1)),
            x => Some(((-x / 2 - 1) as usize, -1)),
        }
    };
    let mut basis: Vec<Vec<Scalar>> = Vec::new();
    let mut witness = Vec::new();
    let mut rank = 0;
    for &[n, m, r, l] in &quads {
        let mut row = vec![q.zero_like(); nvar];
        for (ci, a, b) in [((l - r) / 2, n, m), ((l - m) / 2, r, n), ((l - n) / 2, m, r)] {
            let c = c_hat(k, ci, q)?;
            if let Some((j, s)) = col(a) {
                row[j] = &row[j] + &(&c * &q.mode().int(s));
            }
            if let Some((j, s)) = col(b) {
                row[j] = &row[j] - &(&c * &q.mode().int(s));
            }
        }
        if row.iter().all(|x| x.is_zero()) {
            continue;
        }
        let mut trial = basis.clone();
        trial.push(row.clone());
        let red = rref(trial, nvar, None);
        if red.rank() > rank {
            rank = red.rank();
            basis.push(row);
            if e.status == ForcedStatus::Unconstrained {
                witness.push([n, m, r, l]);
                if forces_zero(&red, 0) {
                    e.status = ForcedStatus::ForcedZero;
                }
            }
        }
    }
    e.diagonal_rank = Some(rank);
    e.diagonal_unknowns = Some(nvar);
    if e.status == ForcedStatus::ForcedZero {
        e.counterexample = witness;
    }
    Ok(e)
}

/// `h_{n,r}` from `h_{0,M}`; the diagonal `n + r = 0` uses `ξ_0 (q^{-n} - q^n)`.
pub fn h_reconstruct(
    h0: &BTreeMap<i64, Scalar>,
    xi0: &Scalar,
    k: u32,
    q: &Scalar,
    n: i64,
    r: i64,
) -> Result<Scalar> {
    check_even(&[n, r])?;
    if n + r == 0 {
        return Ok(xi0 * &(q.powi(-n) - q.powi(n)));
    }
    let base = h0
        .get(&(n + r))
        .ok_or_else(|| Error::Range(vec![format!("h0[{}]", n + r)]))?;
    let (cr, cn) = (c_hat(k, r / 2, q)?, c_hat(k, n / 2, q)?);
    let den = &cr + &cn;
    if den.is_zero() {
        return Err(Error::DivisionByZero);
    }
    Ok(base * &((cr - cn) / den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Mode;

    fn q3() -> Scalar {
        Mode::Exact.ratio(3, 10)
    }

    #[test]
    fn jacobi_combination_vanishes() {
        let t = CoefficientTable::new(0, &q3(), 20).unwrap();
        assert!(jacobi_coeff_combination(&t, 2, 5).unwrap().is_zero());
        assert!(jacobi_coeff_combination(&t, 0, 0).unwrap().is_zero());
        let t2 = CoefficientTable::new(2, &Mode::Exact.ratio(1, 2), 20).unwrap();
        for l in -8..=8 {
            for j in -8..=8 {
                assert!(jacobi_coeff_combination(&t2, l, j).unwrap().is_zero());
            }
        }
        assert!(matches!(jacobi_coeff_combination(&t, 15, -10), Err(Error::Range(_))));
    }

    #[test]
    fn xi_ansatz_values() {
        let m = Mode::Exact;
        let q = q3();
        let xi = XiFunction::delta(m.one());
        assert_eq!(xi_ansatz(&xi, &q, 2, -2), m.ratio(100, 9) - m.ratio(9, 100));
        assert!(xi_ansatz(&xi, &q, 4, 4).is_zero());
    }

    #[test]
    fn c_factor_cases() {
        let q = q3();
        let v = c_factor(0, &q, 2, 4, -2, 0).unwrap();
        assert!(v.value().unwrap().is_zero());
        let v = c_factor(1, &q, -6, -2, 6, -6).unwrap();
        assert!(!v.value().unwrap().is_zero());
        // M = 0 always meets R(-n, n)
        assert!(matches!(c_factor(1, &q, 2, 4, 6, 12).unwrap(), CFactor::Singular { .. }));
        assert!(matches!(c_factor(0, &q, 2, 2, 2, 6).unwrap(), CFactor::Singular { .. }));
    }

    #[test]
    fn c_factor_reduced_form() {
        // with l = n the first cyclic term has c_{(l-n)/2} = 0
        let q = q3();
        let (n, m, r) = (4, 2, 2);
        let l = n;
        let c = |i: i64| c_hat(1, i, &q).unwrap();
        let ratio = |a: i64, b: i64| (c(a / 2) - c(b / 2)) / (c(a / 2) + c(b / 2));
        let reduced = c((l - r) / 2) * (ratio(m - l + r, n) - ratio(n - l + r, m))
            + c((l - m) / 2) * (ratio(n - l + m, r) - ratio(r - l + m, n));
        assert_eq!(c_factor(1, &q, n, m, r, l).unwrap().value().unwrap(), &reduced);
    }

    #[test]
    fn residual_and_reconstruction() {
        let m = Mode::Exact;
        let q = q3();
        let xi = XiFunction::new(BTreeMap::from([(0, m.ratio(2, 3)), (6, m.ratio(-5, 7))]));
        let h = CocycleTable::from_xi(&xi, &q, 24).unwrap();
        assert!(cocycle_residual(&h, 0, &q, 2, 4, -2, 0).unwrap().is_zero());
        assert!(cocycle_residual(&h, 0, &q, 4, 4, 4, 2).unwrap().is_zero());
        let mut h0 = BTreeMap::new();
        for mt in (-12..=12).step_by(2) {
            h0.insert(mt, xi_ansatz(&xi, &q, 0, mt));
        }
        let x0 = xi.get(0, &q);
        assert_eq!(h_reconstruct(&h0, &x0, 0, &q, 2, 4).unwrap(), xi_ansatz(&xi, &q, 2, 4));
        assert_eq!(
            h_reconstruct(&h0, &x0, 0, &q, 2, -2).unwrap(),
            &x0 * &(q.powi(-2) - q.powi(2))
        );
        assert!(h_reconstruct(&h0, &x0, 0, &q, 4, 4).unwrap().is_zero());
        let small = CocycleTable::from_xi(&xi, &q, 4).unwrap();
        assert!(matches!(cocycle_residual(&small, 0, &q, 4, 4, -4, -4), Err(Error::Range(_))));
    }

    #[test]
    fn noise_is_not_a_cocycle() {
        let m = Mode::Exact;
        let q = q3();
        let h = CocycleTable::from_fn(16, |a, b| {
            let v = (a * 7 + b * 3).rem_euclid(11) - (b * 7 + a * 3).rem_euclid(11);
            m.int(v)
        })
        .unwrap();
        assert!(h.antisymmetry_violation().is_none());
        assert!(!cocycle_residual(&h, 0, &q, 2, 4, -2, 0).unwrap().is_zero());
    }

    #[test]
    fn scan_small() {
        let q = q3();
        let rep = scan_forced_zeros(0, &q, -4, 4, 6).unwrap();
        assert!(rep.forced().is_empty());
        assert!(rep.entry(0).unwrap().diagonal_rank.unwrap() < 3);
        let rep = scan_forced_zeros(1, &q, 0, 0, 6).unwrap();
        let e = rep.entry(0).unwrap();
        assert_eq!(e.status, ForcedStatus::ForcedZero);
        assert!(!e.counterexample.is_empty());
    }
}
