//! Free commutative Poisson algebra on the generators `t_n`, `h_n` (`n` even)
//! with the truncated quadratic brackets of family `k = 0`.
//!
//! Brackets are normalized: the factor `κ_0 = -2 ln q` is left out.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::structfun::c_hat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    H,
    T,
}

/// A generator `t_n` or `h_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Gen {
    pub kind: Kind,
    pub index: i64,
}

impl Gen {
    pub fn t(index: i64) -> Gen {
        Gen {
            kind: Kind::T,
            index,
        }
    }

    pub fn h(index: i64) -> Gen {
        Gen {
            kind: Kind::H,
            index,
        }
    }
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            Kind::H => 'h',
            Kind::T => 't',
        };
        write!(f, "{k}[{}]", self.index)
    }
}

/// Sorted multiset of generators; empty is the unit.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(Vec<Gen>);

impl Monomial {
    pub fn new(mut gens: Vec<Gen>) -> Self {
        gens.sort();
        Monomial(gens)
    }

    pub fn gens(&self) -> &[Gen] {
        &self.0
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut g = self.0.clone();
        g.extend_from_slice(&other.0);
        Monomial::new(g)
    }

    fn without(&self, i: usize) -> Monomial {
        let mut g = self.0.clone();
        g.remove(i);
        Monomial(g)
    }

    pub fn max_index(&self) -> i64 {
        self.0.iter().map(|g| g.index.abs()).max().unwrap_or(0)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self.0.iter().map(|g| g.to_string()).collect();
        f.write_str(&parts.join("*"))
    }
}

/// Finite linear combination of monomials; zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PoissonElement {
    terms: BTreeMap<Monomial, Scalar>,
}

impl PoissonElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn gen(g: Gen, coeff: Scalar) -> Self {
        let mut e = Self::zero();
        e.add_term(Monomial::new(vec![g]), coeff);
        e
    }

    pub fn monomial(gens: Vec<Gen>, coeff: Scalar) -> Self {
        let mut e = Self::zero();
        e.add_term(Monomial::new(gens), coeff);
        e
    }

    pub fn add_term(&mut self, m: Monomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                let s = &*v + &c;
                if s.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Option<&Scalar> {
        self.terms.get(m)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let mut out = Self::zero();
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v * c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                out.add_term(a.mul(b), x * y);
            }
        }
        out
    }

    /// Sorted lines `"<coefficient> <monomial>"`, e.g. `"3/7 h[-2]*t[4]"`.
    pub fn dump(&self) -> Vec<String> {
        self.terms.iter().map(|(m, c)| format!("{c} {m}")).collect()
    }
}

/// Truncation settings of the mode algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BracketConfig {
    /// Family label; only 0 is supported.
    pub k: u32,
    /// Structure sums run over `|l| <= l_cut`.
    pub l_cut: i64,
    /// The central candidate sums over `|l| <= central_cut`.
    pub central_cut: i64,
    /// Equalities are asserted on monomials with all `|index| <= window`.
    pub window: i64,
}

impl BracketConfig {
    pub fn new(l_cut: i64, central_cut: i64, window: i64) -> Result<Self> {
        let cfg = BracketConfig {
            k: 0,
            l_cut,
            central_cut,
            window,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.k != 0 {
            return Err(Error::UnsupportedFamily(self.k));
        }
        if self.l_cut < 1 || self.central_cut < 1 {
            return Err(Error::Config("cutoffs must be >= 1".into()));
        }
        if self.window < 0 {
            return Err(Error::Config("window must be >= 0".into()));
        }
        Ok(())
    }

    /// Largest window on which `{s_n, s_m}` equals its simplified form.
    pub fn s_bracket_safe_window(&self, n: i64, m: i64) -> i64 {
        (2 * self.l_cut - n.abs().max(m.abs())).min(2 * self.central_cut) - 2
    }

    /// Largest window on which `{x_r, C_M}` vanishes.
    pub fn centrality_safe_window(&self, r: i64) -> i64 {
        2 * (self.central_cut - self.l_cut) - r.abs()
    }
}

/// `ĉ^(0)_l` for `|l| <= l_cut`, indexed by `l + l_cut`.
fn c_row(cfg: &BracketConfig, q: &Scalar) -> Result<Vec<Scalar>> {
    (-cfg.l_cut..=cfg.l_cut).map(|l| c_hat(cfg.k, l, q)).collect()
}

fn gen_bracket(a: Gen, b: Gen, cfg: &BracketConfig, c: &[Scalar], out: &mut Vec<(Gen, Gen, Scalar)>) {
    let (n, m) = (a.index, b.index);
    for (i, cl) in c.iter().enumerate() {
        if cl.is_zero() {
            continue;
        }
        let l = i as i64 - cfg.l_cut;
        match (a.kind, b.kind) {
            (Kind::T, Kind::T) => out.push((Gen::t(n - 2 * l), Gen::t(m + 2 * l), cl.clone())),
            (Kind::H, Kind::H) => out.push((Gen::h(n - 2 * l), Gen::h(m + 2 * l), cl.clone())),
            (Kind::H, Kind::T) => out.push((Gen::h(n - 2 * l), Gen::t(m + 2 * l), -cl)),
            (Kind::T, Kind::H) => out.push((Gen::h(m - 2 * l), Gen::t(n + 2 * l), cl.clone())),
        }
    }
}

/// Normalized bracket, extended to products by the Leibniz rule.
pub fn bracket(
    a: &PoissonElement,
    b: &PoissonElement,
    cfg: &BracketConfig,
    q: &Scalar,
) -> Result<PoissonElement> {
    cfg.validate()?;
    let c = c_row(cfg, q)?;
    let mut out = PoissonElement::zero();
    let mut pairs = Vec::new();
    for (ma, ca) in &a.terms {
        for (mb, cb) in &b.terms {
            let coeff = ca * cb;
            for (i, &ga) in ma.0.iter().enumerate() {
                let rest_a = ma.without(i);
                for (j, &gb) in mb.0.iter().enumerate() {
                    let rest = rest_a.mul(&mb.without(j));
                    pairs.clear();
                    gen_bracket(ga, gb, cfg, &c, &mut pairs);
                    for (x, y, cl) in pairs.drain(..) {
                        let mut g = rest.0.clone();
                        g.push(x);
                        g.push(y);
                        out.add_term(Monomial::new(g), &coeff * &cl);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `s_n = q^{-n/2} t_n + q^{n/2} h_n`.
pub fn s_element(n: i64, q: &Scalar) -> Result<PoissonElement> {
    if n % 2 != 0 {
        return Err(Error::Parity(format!("s_n needs even n, got {n}")));
    }
    let mut e = PoissonElement::gen(Gen::t(n), q.powi(-n / 2));
    e.add_term(Monomial::new(vec![Gen::h(n)]), q.powi(n / 2));
    Ok(e)
}

/// `C_M = Σ_{|l| <= central_cut} h_{M-2l} t_{2l}`.
pub fn central_candidate(m_total: i64, central_cut: i64, like: &Scalar) -> PoissonElement {
    let mut e = PoissonElement::zero();
    for l in -central_cut..=central_cut {
        e.add_term(
            Monomial::new(vec![Gen::h(m_total - 2 * l), Gen::t(2 * l)]),
            like.one_like(),
        );
    }
    e
}

/// Outcome of a windowed equality assertion.
#[derive(Clone, Debug, Serialize)]
pub struct WindowReport {
    pub pass: bool,
    pub window: i64,
    /// Monomials inside the window.
    pub checked: usize,
    /// Monomials outside the window (truncation boundary).
    pub ignored: usize,
    /// Offending `"<coefficient> <monomial>"` lines.
    pub offending: Vec<String>,
}

pub fn windowed_zero_check(e: &PoissonElement, window: i64) -> WindowReport {
    let mut rep = WindowReport {
        pass: true,
        window,
        checked: 0,
        ignored: 0,
        offending: Vec::new(),
    };
    for (m, c) in e.terms() {
        if m.max_index() <= window {
            rep.checked += 1;
            rep.offending.push(format!("{c} {m}"));
        } else {
            rep.ignored += 1;
        }
    }
    rep.pass = rep.offending.is_empty();
    rep
}

/// `{s_n, s_m} - Σ ĉ_l s_{n-2l} s_{m+2l} - (q^{(m-n)/2} - q^{(n-m)/2}) C_{n+m}`
/// checked on `cfg.window`.
pub fn verify_s_bracket(n: i64, m: i64, cfg: &BracketConfig, q: &Scalar) -> Result<WindowReport> {
    cfg.validate()?;
    let safe = cfg.s_bracket_safe_window(n, m);
    if cfg.window > safe {
        return Err(Error::Config(format!(
            "window {} exceeds the safe window {safe} for (n, m) = ({n}, {m})",
            cfg.window
        )));
    }
    let lhs = bracket(&s_element(n, q)?, &s_element(m, q)?, cfg, q)?;
    let mut rhs = PoissonElement::zero();
    for l in -cfg.l_cut..=cfg.l_cut {
        let c = c_hat(cfg.k, l, q)?;
        if c.is_zero() {
            continue;
        }
        let prod = s_element(n - 2 * l, q)?.mul(&s_element(m + 2 * l, q)?);
        rhs = rhs.add(&prod.scale(&c));
    }
    let d = (m - n) / 2;
    let central = central_candidate(n + m, cfg.central_cut, q).scale(&(q.powi(d) - q.powi(-d)));
    rhs = rhs.add(&central);
    Ok(windowed_zero_check(&lhs.sub(&rhs), cfg.window))
}

/// `{x_r, C_M}` on the window, for `x` one of `t`, `h`.
pub fn verify_centrality(
    kind: Kind,
    r: i64,
    m_total: i64,
    cfg: &BracketConfig,
    q: &Scalar,
) -> Result<WindowReport> {
    cfg.validate()?;
    let safe = cfg.centrality_safe_window(r);
    if cfg.window > safe {
        return Err(Error::Config(format!(
            "window {} exceeds the safe window {safe} for r = {r}",
            cfg.window
        )));
    }
    let g = Gen { kind, index: r };
    let x = PoissonElement::gen(g, q.one_like());
    let c = central_candidate(m_total, cfg.central_cut, q);
    Ok(windowed_zero_check(&bracket(&x, &c, cfg, q)?, cfg.window))
}
