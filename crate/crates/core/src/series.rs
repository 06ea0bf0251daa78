//! Truncated power/Laurent series in `w = z²`.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{Mode, Scalar};

/// Where an expansion is valid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    /// Taylor expansion inside the unit disk.
    Disk,
    /// Laurent expansion in an annulus.
    Annulus,
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Disk => f.write_str("disk"),
            Domain::Annulus => f.write_str("annulus"),
        }
    }
}

/// Finite window `lo..=hi` of coefficients of a series in `w`.
///
/// `exact_to` records the largest exponent up to which the stored
/// coefficients are those of the underlying function; `None` means the window
/// holds a polynomial (every coefficient above `hi` is zero).
#[derive(Clone, Debug, Serialize)]
pub struct SeriesWindow {
    lo: i64,
    coeffs: Vec<Scalar>,
    domain: Domain,
    exact_to: Option<i64>,
    #[serde(skip)]
    mode: Mode,
}

impl SeriesWindow {
    /// Polynomial with coefficients starting at exponent `lo`.
    pub fn polynomial(domain: Domain, lo: i64, coeffs: Vec<Scalar>, mode: Mode) -> Result<Self> {
        Self::build(domain, lo, coeffs, None, mode)
    }

    /// Truncated series, valid up to its last stored exponent.
    pub fn truncated(domain: Domain, lo: i64, coeffs: Vec<Scalar>, mode: Mode) -> Result<Self> {
        let hi = lo + coeffs.len() as i64 - 1;
        Self::build(domain, lo, coeffs, Some(hi), mode)
    }

    fn build(
        domain: Domain,
        lo: i64,
        coeffs: Vec<Scalar>,
        exact_to: Option<i64>,
        mode: Mode,
    ) -> Result<Self> {
        if domain == Domain::Disk && lo < 0 {
            return Err(Error::Parameter(format!(
                "disk series cannot start at negative exponent {lo}"
            )));
        }
        if coeffs.is_empty() {
            return Err(Error::Parameter("empty coefficient window".into()));
        }
        Ok(SeriesWindow {
            lo,
            coeffs,
            domain,
            exact_to,
            mode,
        })
    }

    pub fn one(mode: Mode) -> Self {
        SeriesWindow {
            lo: 0,
            coeffs: vec![mode.one()],
            domain: Domain::Disk,
            exact_to: None,
            mode,
        }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.coeffs.len() as i64 - 1
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn exact_to(&self) -> Option<i64> {
        self.exact_to
    }

    /// Coefficient of `w^e`. Zero below `lo` and, for polynomials, above `hi`;
    /// a truncation error for truncated series above `hi`.
    pub fn coeff(&self, e: i64) -> Result<Scalar> {
        if e < self.lo {
            return Ok(self.mode.zero());
        }
        if e > self.hi() {
            return match self.exact_to {
                None => Ok(self.mode.zero()),
                Some(t) => Err(Error::Truncation(format!(
                    "coefficient w^{e} requested but series is only known to w^{t}"
                ))),
            };
        }
        Ok(self.coeffs[(e - self.lo) as usize].clone())
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    /// `(exponent, coefficient)` pairs of the stored window.
    pub fn iter(&self) -> impl Iterator<Item = (i64, &Scalar)> {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, c)| (self.lo + i as i64, c))
    }

    /// Highest exponent whose coefficient is trustworthy.
    fn valid_to(&self) -> i64 {
        self.exact_to.unwrap_or(i64::MAX)
    }
}

/// Convolution of `a` and `b`, truncated to exponents `<= hi`.
pub fn series_mul(a: &SeriesWindow, b: &SeriesWindow, hi: i64) -> Result<SeriesWindow> {
    if a.domain != b.domain {
        return Err(Error::DomainMismatch {
            left: a.domain.to_string(),
            right: b.domain.to_string(),
        });
    }
    let lo = a.lo + b.lo;
    if hi < lo {
        return Err(Error::Parameter(format!(
            "truncation exponent {hi} below product start {lo}"
        )));
    }
    let valid = a
        .valid_to()
        .saturating_add(b.lo)
        .min(b.valid_to().saturating_add(a.lo));
    if hi > valid {
        return Err(Error::Truncation(format!(
            "product requested to w^{hi} but inputs only determine it to w^{valid}"
        )));
    }
    let mode = a.mode;
    let len = (hi - lo + 1) as usize;
    let mut out = vec![mode.zero(); len];
    for (i, x) in a.coeffs.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.coeffs.iter().enumerate() {
            let k = i + j;
            if k >= len {
                break;
            }
            out[k] = &out[k] + &(x * y);
        }
    }
    let poly_degree = a.hi() + b.hi();
    let exact_to = if a.exact_to.is_none() && b.exact_to.is_none() && hi >= poly_degree {
        None
    } else {
        Some(hi)
    };
    Ok(SeriesWindow {
        lo,
        coeffs: out,
        domain: a.domain,
        exact_to,
        mode,
    })
}

/// Multiplicative inverse of a disk series with nonzero constant term, to `w^hi`.
pub fn series_inv(a: &SeriesWindow, hi: i64) -> Result<SeriesWindow> {
    if a.domain != Domain::Disk {
        return Err(Error::DomainMismatch {
            left: a.domain.to_string(),
            right: Domain::Disk.to_string(),
        });
    }
    if a.lo != 0 {
        return Err(Error::Parameter(format!(
            "series inversion needs lo = 0, got {}",
            a.lo
        )));
    }
    if hi < 0 {
        return Err(Error::Parameter(format!("negative truncation exponent {hi}")));
    }
    if hi > a.valid_to() {
        return Err(Error::Truncation(format!(
            "inverse requested to w^{hi} but input is only known to w^{}",
            a.valid_to()
        )));
    }
    let a0 = &a.coeffs[0];
    if a0.is_zero() {
        return Err(Error::SingularInversion);
    }
    let inv0 = a0.recip()?;
    let mut out: Vec<Scalar> = Vec::with_capacity(hi as usize + 1);
    out.push(inv0.clone());
    for e in 1..=hi {
        let mut acc = a.mode.zero();
        let top = e.min(a.hi());
        for j in 1..=top {
            let aj = &a.coeffs[j as usize];
            if aj.is_zero() {
                continue;
            }
            acc = acc + aj * &out[(e - j) as usize];
        }
        out.push(-(acc * &inv0));
    }
    SeriesWindow::truncated(Domain::Disk, 0, out, a.mode)
}

/// `(1 - a w)^m` as a polynomial (`m >= 0`).
pub fn binomial_poly(a: &Scalar, m: u32, mode: Mode) -> SeriesWindow {
    let mut coeffs = Vec::with_capacity(m as usize + 1);
    let mut binom = mode.one();
    let neg_a = -a;
    let mut pow = mode.one();
    for j in 0..=m {
        coeffs.push(&binom * &pow);
        pow = &pow * &neg_a;
        binom = binom * mode.int((m - j) as i64) / mode.int(j as i64 + 1);
    }
    SeriesWindow {
        lo: 0,
        coeffs,
        domain: Domain::Disk,
        exact_to: None,
        mode,
    }
}

/// Taylor coefficients to `w^hi` of `∏ (1 - a_i w)^{m_i}`.
///
/// A factor with negative multiplicity must have `|a| < 1`, except `a = 1`
/// itself (the double pole on the unit circle), which is inverted formally.
pub fn product_expansion(factors: &[(Scalar, i32)], hi: i64, mode: Mode) -> Result<SeriesWindow> {
    for (index, (a, m)) in factors.iter().enumerate() {
        if a.is_zero() {
            return Err(Error::InadmissibleFactor {
                index,
                a: a.to_string(),
                multiplicity: *m,
            });
        }
        if *m < 0 && a.abs() >= mode.one() && *a != mode.one() {
            return Err(Error::InadmissibleFactor {
                index,
                a: a.to_string(),
                multiplicity: *m,
            });
        }
    }
    formal_product(factors, hi, mode)
}

/// Same as [`product_expansion`] without the disk-admissibility check; used
/// for Taylor expansions at the origin of arbitrary rational functions.
pub(crate) fn formal_product(
    factors: &[(Scalar, i32)],
    hi: i64,
    mode: Mode,
) -> Result<SeriesWindow> {
    if hi < 0 {
        return Err(Error::Parameter(format!("negative truncation exponent {hi}")));
    }
    let mut numer = SeriesWindow::one(mode);
    let mut denom = SeriesWindow::one(mode);
    for (a, m) in factors {
        let poly = binomial_poly(a, m.unsigned_abs(), mode);
        if *m >= 0 {
            let top = hi.min(numer.hi() + poly.hi());
            numer = series_mul(&numer, &poly, top)?;
        } else {
            let top = hi.min(denom.hi() + poly.hi());
            denom = series_mul(&denom, &poly, top)?;
        }
    }
    let inv = series_inv(&extend_poly(&denom, hi), hi)?;
    let num = extend_poly(&numer, hi);
    let mut out = series_mul(&num, &inv, hi)?;
    out.exact_to = Some(hi);
    Ok(out)
}

/// Pads a polynomial window with zeros up to `hi` (or trims it).
fn extend_poly(p: &SeriesWindow, hi: i64) -> SeriesWindow {
    let mut coeffs: Vec<Scalar> = p.coeffs.iter().take((hi + 1) as usize).cloned().collect();
    while (coeffs.len() as i64) < hi + 1 {
        coeffs.push(p.mode.zero());
    }
    SeriesWindow {
        lo: 0,
        coeffs,
        domain: Domain::Disk,
        exact_to: if p.exact_to.is_none() { None } else { Some(hi) },
        mode: p.mode,
    }
}
