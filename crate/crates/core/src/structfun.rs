//! Structure constants: `ĉ_l^(k)`, the function `f(z)` with its disk and
//! annulus coefficients, the symmetrized `f_l`, `g_±`, `Y(x)` and the
//! constants `α, β, ℰ, ℰ', ℰ''`.
//!
//! Every function of `z` is handled in `w = z²`; a coefficient `f_l` with even
//! `l` is the coefficient of `w^{l/2}`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{pole_parts, residue_at, Factor, RationalFunctionSpec};
use crate::scalar::{Mode, Scalar, DEFAULT_FLOAT_BITS};
use crate::series::{product_expansion, SeriesWindow};

/// Accuracy target for the omitted part of the infinite product in float mode.
pub const FLOAT_PRODUCT_TARGET_EXP: i32 = -40;

/// Deformation parameters and truncation orders.
#[derive(Clone, Debug, Serialize)]
pub struct ParamSet {
    pub q: Scalar,
    pub p: Scalar,
    /// Product factors `(1 - a w)` with `|a| <= |q|^{4 n_prod}` are omitted.
    pub n_prod: u32,
    /// Largest even index `l` of the stored coefficient tables.
    pub l_max: i64,
}

impl ParamSet {
    /// Validates the regime `0 < q < p < 1` (or the degenerate point
    /// `p = q²`) and, in float mode, that `n_prod` meets the accuracy target.
    pub fn new(q: Scalar, p: Scalar, n_prod: u32, l_max: i64) -> Result<Self> {
        if q.mode() != p.mode() {
            return Err(Error::Parameter("q and p must share one arithmetic mode".into()));
        }
        let mode = q.mode();
        let one = mode.one();
        if !q.is_positive() || q >= one {
            return Err(Error::Parameter(format!("need 0 < q < 1, got q = {q}")));
        }
        if !p.is_positive() || p >= one {
            return Err(Error::Parameter(format!("need 0 < p < 1, got p = {p}")));
        }
        if q >= p && !is_degenerate(&q, &p) {
            return Err(Error::Parameter(format!(
                "need q < p (or p = q²), got q = {q}, p = {p}"
            )));
        }
        if l_max < 0 || l_max % 2 != 0 {
            return Err(Error::Parameter(format!("l_max must be even and >= 0, got {l_max}")));
        }
        if n_prod == 0 {
            return Err(Error::Parameter("n_prod must be >= 1".into()));
        }
        let ps = ParamSet {
            q,
            p,
            n_prod,
            l_max,
        };
        if !mode.is_exact() {
            let target = mode.pow10(FLOAT_PRODUCT_TARGET_EXP);
            if ps.truncation_bound() > target {
                return Err(Error::Truncation(format!(
                    "n_prod = {n_prod} leaves an omitted-factor bound of {} above 1e{FLOAT_PRODUCT_TARGET_EXP} for l_max = {l_max}",
                    ps.truncation_bound().to_string_digits(6)
                )));
            }
        }
        Ok(ps)
    }

    /// Smallest `n_prod` meeting the float accuracy target (in exact mode the
    /// same order is used as a default).
    pub fn auto(q: Scalar, p: Scalar, l_max: i64) -> Result<Self> {
        let n = auto_n_prod(&q, &p, l_max)?;
        Self::new(q, p, n, l_max)
    }

    /// Parses `q`, `p` in `mode` and picks `n_prod` automatically.
    pub fn parse(q: &str, p: &str, mode: Mode, l_max: i64) -> Result<Self> {
        Self::auto(mode.parse(q)?, mode.parse(p)?, l_max)
    }

    pub fn mode(&self) -> Mode {
        self.q.mode()
    }

    /// `|q|^{4 n_prod}`: no omitted factor has `|a|` above this.
    pub fn product_cutoff(&self) -> Scalar {
        self.q.abs().powi(4 * self.n_prod as i64)
    }

    /// Cutoff times the largest weight it meets: evaluation at `w = q^{-2}`
    /// and coefficients up to `w^{l_max/2}`.
    pub fn truncation_bound(&self) -> Scalar {
        let mode = self.mode();
        let e = mode.int(self.l_max / 2 + 1);
        let radius = self.q.powi(-2);
        let weight = if radius > e.square() { radius } else { e.square() };
        self.product_cutoff() * weight
    }

    pub fn is_degenerate(&self) -> bool {
        is_degenerate(&self.q, &self.p)
    }
}

fn is_degenerate(q: &Scalar, p: &Scalar) -> bool {
    let d = p - &q.square();
    match d.mode() {
        Mode::Exact => d.is_zero(),
        m => d.within(&m.pow10(-60)),
    }
}

fn auto_n_prod(q: &Scalar, p: &Scalar, l_max: i64) -> Result<u32> {
    let mode = q.mode();
    for n in 1..=10_000u32 {
        let ps = ParamSet {
            q: q.clone(),
            p: p.clone(),
            n_prod: n,
            l_max,
        };
        if !q.is_positive() || q.abs() >= mode.one() {
            return Err(Error::Parameter(format!("need 0 < q < 1, got q = {q}")));
        }
        if ps.truncation_bound() <= mode.pow10(FLOAT_PRODUCT_TARGET_EXP) {
            return Ok(n);
        }
    }
    Err(Error::Truncation("no product order below 10000 meets the target".into()))
}

/// `ĉ_l^(k) = (q^{(2k+1)l} - q^{-(2k+1)l}) / (q^l + q^{-l})`.
pub fn c_hat(k: u32, l: i64, q: &Scalar) -> Result<Scalar> {
    check_q(q)?;
    let e = (2 * k as i64 + 1) * l;
    let num = q.powi(e) - q.powi(-e);
    let den = q.powi(l) + q.powi(-l);
    num.checked_div(&den)
}

fn check_q(q: &Scalar) -> Result<()> {
    let one = q.one_like();
    if q.is_zero() || *q == one || *q == -&one {
        return Err(Error::Parameter(format!("q must not be 0 or ±1, got {q}")));
    }
    Ok(())
}

/// The factor `κ_k = (-1)^{k+1} · 2 ln q` kept out of exact computations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Kappa {
    pub k: u32,
}

impl Kappa {
    pub fn sign(&self) -> i64 {
        if self.k.is_multiple_of(2) {
            -1
        } else {
            1
        }
    }

    pub fn value(&self, q: &Scalar, bits: usize) -> Result<Scalar> {
        let ln = q.ln(bits)?;
        Ok(ln * Mode::Float { bits }.int(2 * self.sign()))
    }

    pub fn describe(&self) -> String {
        let s = if self.sign() < 0 { "-" } else { "" };
        format!("kappa_{} = {s}2 ln q", self.k)
    }
}

/// `(a, multiplicity)` of every factor of the truncated product part of `f`
/// (without the `(1 - w)^{-2}` prefactor). Multiplicities are `±2`; factors
/// common to numerator and denominator are cancelled.
pub fn product_factors(ps: &ParamSet) -> Vec<(Scalar, i32)> {
    let q = &ps.q;
    let p = &ps.p;
    let cutoff = ps.product_cutoff();
    let keep = |a: &Scalar| a.abs() > cutoff;
    let mut numer: Vec<Scalar> = Vec::new();
    let mut denom: Vec<Scalar> = Vec::new();
    let mut n = 0i64;
    loop {
        let cands = [
            (p * &q.powi(4 * n), true),
            (&q.powi(4 * n + 2) / p, true),
            (p * &q.powi(4 * n + 2), false),
            (&q.powi(4 * n + 4) / p, false),
        ];
        let mut any = false;
        for (a, up) in cands {
            if keep(&a) {
                any = true;
                if up {
                    numer.push(a);
                } else {
                    denom.push(a);
                }
            }
        }
        if !any {
            break;
        }
        n += 1;
    }
    let mut out = Vec::new();
    for a in numer {
        if let Some(i) = denom.iter().position(|d| *d == a) {
            denom.remove(i);
        } else {
            out.push((a, 2));
        }
    }
    out.extend(denom.into_iter().map(|a| (a, -2)));
    out
}

/// `f` as a rational function of `w` (product truncated per [`ParamSet`]).
pub fn f_spec(ps: &ParamSet) -> RationalFunctionSpec {
    let mode = ps.mode();
    let mut numer = Vec::new();
    let mut denom = vec![Factor::new(mode.one(), 2)];
    for (a, m) in product_factors(ps) {
        if m > 0 {
            numer.push(Factor::new(a, m as u32));
        } else {
            denom.push(Factor::new(a, (-m) as u32));
        }
    }
    cancel(RationalFunctionSpec {
        prefactor: mode.one(),
        offset: 0,
        numer,
        denom,
    })
}

/// Removes numerator/denominator pairs with equal constants.
fn cancel(mut spec: RationalFunctionSpec) -> RationalFunctionSpec {
    let mut i = 0;
    while i < spec.numer.len() {
        if let Some(j) = spec.denom.iter().position(|d| d.a == spec.numer[i].a) {
            let k = spec.numer[i].multiplicity.min(spec.denom[j].multiplicity);
            spec.numer[i].multiplicity -= k;
            spec.denom[j].multiplicity -= k;
            if spec.denom[j].multiplicity == 0 {
                spec.denom.remove(j);
            }
            if spec.numer[i].multiplicity == 0 {
                spec.numer.remove(i);
                continue;
            }
        }
        i += 1;
    }
    spec
}

/// `+` or `-` branch of `g_±`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

/// `g_±(w) = (1 - p^{±1} w)² (1 - p^{∓1} q^{±2} w)² / ((1 - w)² (1 - q^{±2} w)²)`.
pub fn g_spec(sign: Sign, ps: &ParamSet) -> RationalFunctionSpec {
    let mode = ps.mode();
    let (p, q2) = match sign {
        Sign::Plus => (ps.p.clone(), ps.q.square()),
        Sign::Minus => (ps.p.powi(-1), ps.q.powi(-2)),
    };
    let numer = vec![Factor::new(p.clone(), 2), Factor::new(&q2 / &p, 2)];
    let denom = vec![Factor::new(mode.one(), 2), Factor::new(q2, 2)];
    cancel(RationalFunctionSpec {
        prefactor: mode.one(),
        offset: 0,
        numer,
        denom,
    })
}

pub fn eval_g(sign: Sign, w: &Scalar, ps: &ParamSet) -> Result<Scalar> {
    g_spec(sign, ps).eval(w)
}

/// Structure function value. In float mode `full` includes `-2 ln q`.
#[derive(Clone, Debug, Serialize)]
pub struct YValue {
    pub normalized: Scalar,
    pub full: Option<Scalar>,
}

/// `Y(x)` with both sums truncated at `n_terms` terms.
pub fn eval_y(x: &Scalar, ps: &ParamSet, n_terms: u32) -> Result<YValue> {
    let mode = ps.mode();
    let q = &ps.q;
    let one = mode.one();
    let two = mode.int(2);
    let x2 = x.square();
    let xm2 = x2.recip()?;
    let thr = crate::rational::pole_threshold(mode);
    let frac = |u: &Scalar| -> Result<Scalar> {
        let d = &one - u;
        if d.within(&thr) {
            return Err(Error::PoleProximity(x.to_string()));
        }
        u.checked_div(&d)
    };
    let mut s = frac(&xm2)? - frac(&x2)?;
    for n in 0..n_terms as i64 {
        let a = q.powi(4 * n + 2);
        s = s + &two * (frac(&(&x2 * &a))? - frac(&(&xm2 * &a))?);
        if n > 0 {
            let b = q.powi(4 * n);
            s = s + &two * (frac(&(&xm2 * &b))? - frac(&(&x2 * &b))?);
        }
    }
    let full = match mode {
        Mode::Exact => None,
        Mode::Float { bits } => Some(q.ln(bits)? * mode.int(-2) * &s),
    };
    Ok(YValue {
        normalized: s,
        full,
    })
}

/// Truncation bookkeeping carried by every table.
#[derive(Clone, Debug, Serialize)]
pub struct TruncationInfo {
    pub n_prod: u32,
    pub l_max: i64,
    pub product_cutoff: String,
    pub truncation_bound: String,
    pub factors: usize,
}

/// Cached tables for one parameter set.
#[derive(Clone, Debug, Serialize)]
pub struct StructureConstants {
    pub params: ParamSet,
    /// Disk coefficients `f_l^(0)` as a series in `w` (exponent `l/2`).
    pub fdisk: SeriesWindow,
    /// Annulus coefficients `f_l^(1)`, even `l` in `[-l_max, l_max]`.
    pub fann: BTreeMap<i64, Scalar>,
    /// Symmetrized `f_l`, same window.
    pub fsym: BTreeMap<i64, Scalar>,
    pub alpha: Scalar,
    pub beta: Scalar,
    /// Double-pole data of `f` at `w = 1`.
    pub pole_a: Scalar,
    pub pole_b: Scalar,
    pub ecal: Scalar,
    pub eprime: Scalar,
    pub edoubleprime: Scalar,
    pub kappa_note: String,
    pub truncation: TruncationInfo,
    #[serde(skip)]
    pub f: RationalFunctionSpec,
}

pub fn build_structure_constants(ps: &ParamSet) -> Result<StructureConstants> {
    let mode = ps.mode();
    let q = &ps.q;
    let p = &ps.p;
    let f = f_spec(ps);
    let emax = ps.l_max / 2;

    let mut factors = product_factors(ps);
    factors.push((mode.one(), -2));
    let fdisk = product_expansion(&factors, emax, mode)?;

    let (pole_a, pole_b) = pole_parts(&f, &mode.one())?;
    let alpha = -(&pole_a / mode.int(4));
    let beta = -(&pole_a + &pole_b);

    let mut fann = BTreeMap::new();
    let mut fsym = BTreeMap::new();
    for l in (-ps.l_max..=ps.l_max).step_by(2) {
        let f0 = disk_coeff(&fdisk, l)?;
        let lin = &alpha * mode.int(l);
        let f1 = &f0 + &lin * mode.int(2) + &beta;
        let fs = (&f0 + &f1) / mode.int(2);
        fann.insert(l, f1);
        fsym.insert(l, fs);
    }

    let (ecal, eprime, edoubleprime) = ecal_family(q, p)?;
    let truncation = TruncationInfo {
        n_prod: ps.n_prod,
        l_max: ps.l_max,
        product_cutoff: ps.product_cutoff().to_string_digits(12),
        truncation_bound: ps.truncation_bound().to_string_digits(12),
        factors: f.numer.len() + f.denom.len(),
    };
    Ok(StructureConstants {
        params: ps.clone(),
        fdisk,
        fann,
        fsym,
        alpha,
        beta,
        pole_a,
        pole_b,
        ecal,
        eprime,
        edoubleprime,
        kappa_note: Kappa { k: 0 }.describe(),
        truncation,
        f,
    })
}

fn disk_coeff(fdisk: &SeriesWindow, l: i64) -> Result<Scalar> {
    if l < 0 || l % 2 != 0 {
        return Ok(fdisk.mode().zero());
    }
    fdisk.coeff(l / 2)
}

/// `(ℰ, ℰ', ℰ'')`.
///
/// The terms with `p/q² - 1` and `q²/p - 1` in the denominator are simplified
/// against the `(p - q²)²` factor of `ℰ`, so `p = q²` gives three zeros.
pub fn ecal_family(q: &Scalar, p: &Scalar) -> Result<(Scalar, Scalar, Scalar)> {
    let one = q.one_like();
    let two = &one + &one;
    let q2 = q.square();
    let e0 = (p - &one).square() * (p - &q2) / (p.square() * (&one - &q2).square());
    let e = &e0 * (p - &q2);
    let over = |x: Scalar| e.checked_div(&(x - &one));
    let e1 = -(&two * (over(p.recip()?)? + &e0 * &q2 - over(q2.recip()?)?));
    let e2 = &two * (over(p.clone())? - &e0 * p - over(q2.clone())?);
    Ok((e, e1, e2))
}

impl StructureConstants {
    pub fn mode(&self) -> Mode {
        self.params.mode()
    }

    pub fn q(&self) -> &Scalar {
        &self.params.q
    }

    fn check_index(&self, l: i64) -> Result<()> {
        if l % 2 != 0 {
            return Err(Error::Parity(format!("odd coefficient index {l}")));
        }
        if l > self.params.l_max {
            return Err(Error::Range(vec![format!("f[{l}] (l_max = {})", self.params.l_max)]));
        }
        Ok(())
    }

    /// `f_l^(0)`; zero for negative `l`.
    pub fn f0(&self, l: i64) -> Result<Scalar> {
        self.check_index(l)?;
        disk_coeff(&self.fdisk, l)
    }

    /// `f_l^(1)`; below the stored window it is `2αl + β`.
    pub fn f1(&self, l: i64) -> Result<Scalar> {
        self.check_index(l)?;
        match self.fann.get(&l) {
            Some(v) => Ok(v.clone()),
            None => Ok(&self.alpha * self.mode().int(2 * l) + &self.beta),
        }
    }

    /// Symmetrized `f_l = (f_l^(0) + f_l^(1)) / 2`.
    pub fn fsym(&self, l: i64) -> Result<Scalar> {
        self.check_index(l)?;
        match self.fsym.get(&l) {
            Some(v) => Ok(v.clone()),
            None => Ok(&self.alpha * self.mode().int(l) + &self.beta / self.mode().int(2)),
        }
    }

    /// `f_l^(1)` by the second route: `f_l^(0)` plus the residue at `w = 1`
    /// of `f(w) w^{-l/2 - 1}`.
    pub fn annulus_coeff_by_residue(&self, l: i64) -> Result<Scalar> {
        self.check_index(l)?;
        let shifted = self.f.scaled(&self.mode().one(), -(l / 2));
        Ok(self.f0(l)? + residue_at(&shifted, &self.mode().one())?)
    }

    /// Value of the truncated product formula at `z`.
    pub fn eval_f(&self, z: &Scalar) -> Result<Scalar> {
        self.f.eval(&z.square())
    }

    /// `A + B + β`, zero by construction of `β`.
    pub fn decay_defect(&self) -> Scalar {
        &self.pole_a + &self.pole_b + &self.beta
    }

    /// `-α (f(q) + f(q^{-1})) - ℰ/2`.
    pub fn ecal_defect(&self) -> Result<Scalar> {
        let q = self.q();
        let s = self.eval_f(q)? + self.eval_f(&q.recip()?)?;
        Ok(-(&self.alpha * &s) - &self.ecal / self.mode().int(2))
    }

    /// Serialized tables as canonical JSON.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("structure constants serialize")
    }
}

/// Default float mode at the default precision.
pub fn default_float() -> Mode {
    Mode::Float {
        bits: DEFAULT_FLOAT_BITS,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ref_exact(n: u32, l_max: i64) -> ParamSet {
        let m = Mode::Exact;
        ParamSet::new(m.ratio(3, 10), m.ratio(3, 5), n, l_max).unwrap()
    }

    fn ref_float() -> ParamSet {
        ParamSet::parse("0.3", "0.6", default_float(), 24).unwrap()
    }

    #[test]
    fn c_hat_values() {
        let m = Mode::Exact;
        let q = m.ratio(1, 2);
        assert_eq!(c_hat(0, 1, &q).unwrap(), m.ratio(-3, 5));
        assert!(c_hat(3, 0, &q).unwrap().is_zero());
        for k in 0..=4 {
            for l in -20..=20 {
                assert_eq!(c_hat(k, -l, &q).unwrap(), -c_hat(k, l, &q).unwrap());
            }
        }
        assert!(c_hat(0, 1, &m.one()).is_err());
        assert!(c_hat(0, 1, &m.zero()).is_err());
    }

    #[test]
    fn regime_checks() {
        let m = Mode::Exact;
        assert!(ParamSet::new(m.one(), m.ratio(1, 2), 3, 8).is_err());
        assert!(ParamSet::new(m.ratio(1, 2), m.ratio(1, 3), 3, 8).is_err());
        assert!(ParamSet::new(m.ratio(1, 2), m.ratio(1, 4), 3, 8).is_ok());
        assert!(ParamSet::new(m.ratio(1, 2), m.ratio(3, 4), 3, 7).is_err());
        let f = default_float();
        assert!(matches!(
            ParamSet::new(f.parse("0.3").unwrap(), f.parse("0.6").unwrap(), 2, 8),
            Err(Error::Truncation(_))
        ));
    }

    #[test]
    fn degenerate_point_telescopes() {
        let m = Mode::Exact;
        let q = m.ratio(2, 7);
        let ps = ParamSet::new(q.clone(), q.square(), 5, 12).unwrap();
        let sc = build_structure_constants(&ps).unwrap();
        assert!(sc.f.numer.is_empty() && sc.f.denom.is_empty());
        assert_eq!(sc.f0(0).unwrap(), m.one());
        for l in (2..=12).step_by(2) {
            assert!(sc.f0(l).unwrap().is_zero());
        }
        assert!(sc.alpha.is_zero());
        assert!(sc.ecal.is_zero());
        assert_eq!(sc.eval_f(&m.ratio(1, 3)).unwrap(), m.one());
    }

    #[test]
    fn first_coefficients() {
        let ps = ref_exact(4, 8);
        let sc = build_structure_constants(&ps).unwrap();
        let m = Mode::Exact;
        assert_eq!(sc.f0(0).unwrap(), m.one());
        let (q, p) = (&ps.q, &ps.p);
        let expect = m.int(2) - m.int(2) * (p + &(q.square() / p)) / (m.one() + q.square());
        // the closed form belongs to the untruncated product
        let diff = sc.f0(2).unwrap() - expect;
        assert!(!diff.is_zero() && diff.within(&ps.truncation_bound()));
        assert!(sc.f0(-4).unwrap().is_zero());
        assert!(sc.decay_defect().is_zero());
    }

    #[test]
    fn annulus_routes_agree() {
        let ps = ref_exact(3, 10);
        let sc = build_structure_constants(&ps).unwrap();
        for l in (-10..=10).step_by(2) {
            assert_eq!(sc.annulus_coeff_by_residue(l).unwrap(), sc.f1(l).unwrap(), "l = {l}");
        }
    }

    #[test]
    fn ecal_identity_float() {
        let sc = build_structure_constants(&ref_float()).unwrap();
        let tol = sc.mode().pow10(-25);
        assert!(sc.ecal_defect().unwrap().within(&tol));
    }

    #[test]
    fn g_factorization() {
        let ps = ref_float();
        let sc = build_structure_constants(&ps).unwrap();
        let m = ps.mode();
        let tol = m.pow10(-30);
        for z in [m.ratio(1, 5), m.ratio(7, 10), m.ratio(-2, 5)] {
            let lhs = sc.eval_f(&z).unwrap() * sc.eval_f(&(&z * &ps.q)).unwrap();
            assert!(lhs.approx_eq(&eval_g(Sign::Plus, &z.square(), &ps).unwrap(), &tol));
            let lhs = sc.eval_f(&z).unwrap() * sc.eval_f(&(&z / &ps.q)).unwrap();
            assert!(lhs.approx_eq(&eval_g(Sign::Minus, &z.square(), &ps).unwrap(), &tol));
        }
        assert_eq!(eval_g(Sign::Plus, &m.zero(), &ps).unwrap(), m.one());
    }

    #[test]
    fn y_antiperiodic() {
        let ps = ref_float();
        let m = ps.mode();
        let tol = m.pow10(-30);
        let x = m.ratio(7, 10);
        let y = eval_y(&x, &ps, 40).unwrap();
        let yq = eval_y(&(&x * &ps.q), &ps, 40).unwrap();
        let yi = eval_y(&x.recip().unwrap(), &ps, 40).unwrap();
        assert!((&y.normalized + &yq.normalized).within(&tol));
        assert!((&y.normalized + &yi.normalized).within(&tol));
        assert!(y.full.is_some());
        assert!(matches!(eval_y(&m.one(), &ps, 5), Err(Error::PoleProximity(_))));
    }
}
