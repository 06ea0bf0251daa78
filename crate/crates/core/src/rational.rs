//! Rational functions of `w` kept in factored form, with residues computed
//! from factor data (logarithmic derivatives), never by numeric limits.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{Mode, Scalar};
use crate::series::formal_product;

/// `(1 - a w)^multiplicity`.
#[derive(Clone, Debug, Serialize)]
pub struct Factor {
    pub a: Scalar,
    pub multiplicity: u32,
}

impl Factor {
    pub fn new(a: Scalar, multiplicity: u32) -> Self {
        Factor { a, multiplicity }
    }
}

/// `prefactor · w^offset · ∏ numer / ∏ denom`, every factor `(1 - a w)^m`.
#[derive(Clone, Debug, Serialize)]
pub struct RationalFunctionSpec {
    pub prefactor: Scalar,
    pub offset: i64,
    pub numer: Vec<Factor>,
    pub denom: Vec<Factor>,
}

/// Absolute threshold below which a float factor `1 - a w` counts as zero.
pub fn pole_threshold(mode: Mode) -> Scalar {
    match mode {
        Mode::Exact => mode.zero(),
        Mode::Float { .. } => mode.pow10(-20),
    }
}

fn vanishes(x: &Scalar) -> bool {
    match x.mode() {
        Mode::Exact => x.is_zero(),
        m => x.within(&pole_threshold(m)),
    }
}

impl RationalFunctionSpec {
    pub fn new(
        prefactor: Scalar,
        offset: i64,
        numer: Vec<Factor>,
        denom: Vec<Factor>,
    ) -> Result<Self> {
        for f in numer.iter().chain(denom.iter()) {
            if f.multiplicity == 0 {
                return Err(Error::Parameter("factor multiplicity must be >= 1".into()));
            }
            if f.a.is_zero() {
                return Err(Error::Parameter("factor constant a must be nonzero".into()));
            }
        }
        Ok(RationalFunctionSpec {
            prefactor,
            offset,
            numer,
            denom,
        })
    }

    /// The constant function `c`.
    pub fn constant(c: Scalar) -> Self {
        RationalFunctionSpec {
            prefactor: c,
            offset: 0,
            numer: vec![],
            denom: vec![],
        }
    }

    pub fn mode(&self) -> Mode {
        self.prefactor.mode()
    }

    /// Same function multiplied by `c · w^shift`.
    pub fn scaled(&self, c: &Scalar, shift: i64) -> Self {
        let mut out = self.clone();
        out.prefactor = &out.prefactor * c;
        out.offset += shift;
        out
    }

    pub fn eval(&self, w: &Scalar) -> Result<Scalar> {
        let mode = self.mode();
        let mut num = self.prefactor.clone();
        let mut den = mode.one();
        for f in &self.numer {
            num = num * (mode.one() - &f.a * w).powi(f.multiplicity as i64);
        }
        for f in &self.denom {
            let v = mode.one() - &f.a * w;
            if vanishes(&v) {
                return Err(Error::PoleProximity(w.to_string()));
            }
            den = den * v.powi(f.multiplicity as i64);
        }
        if self.offset != 0 {
            if w.is_zero() {
                if self.offset < 0 {
                    return Err(Error::PoleProximity(w.to_string()));
                }
                return Ok(mode.zero());
            }
            num = num * w.powi(self.offset);
        }
        num.checked_div(&den)
    }

    /// Net order of the pole at `w0 != 0` (negative for a zero).
    pub fn pole_order_at(&self, w0: &Scalar) -> i64 {
        let mode = self.mode();
        let hits = |fs: &[Factor]| -> i64 {
            fs.iter()
                .filter(|f| vanishes(&(mode.one() - &f.a * w0)))
                .map(|f| f.multiplicity as i64)
                .sum()
        };
        hits(&self.denom) - hits(&self.numer)
    }

    /// Value and derivative at `w0` of `G(w) = (1 - w/w0)^k F(w)`, where `k`
    /// is the pole order there. Factors vanishing at `w0` are dropped, which
    /// is exact since each equals `(1 - w/w0)` up to rounding of `a`.
    fn regular_part(&self, w0: &Scalar) -> Result<(Scalar, Scalar)> {
        let mode = self.mode();
        let mut value = self.prefactor.clone();
        let mut logd = mode.zero();
        for (fs, sign) in [(&self.numer, 1i64), (&self.denom, -1i64)] {
            for f in fs.iter() {
                let base = mode.one() - &f.a * w0;
                if vanishes(&base) {
                    continue;
                }
                let m = mode.int(f.multiplicity as i64);
                if sign > 0 {
                    value = value * base.powi(f.multiplicity as i64);
                } else {
                    value = value.checked_div(&base.powi(f.multiplicity as i64))?;
                }
                // d/dw log (1 - a w)^{±m} = ∓ m a / (1 - a w)
                let term = (&m * &f.a).checked_div(&base)?;
                logd = if sign > 0 { logd - term } else { logd + term };
            }
        }
        if self.offset != 0 {
            value = value * w0.powi(self.offset);
            logd = logd + mode.int(self.offset).checked_div(w0)?;
        }
        let deriv = &value * &logd;
        Ok((value, deriv))
    }

    /// Taylor coefficients at `w = 0` of the factor product (no prefactor,
    /// no offset) up to `w^hi`.
    fn factor_series(&self, hi: i64) -> Result<Vec<Scalar>> {
        let mut fs: Vec<(Scalar, i32)> = Vec::new();
        for f in &self.numer {
            fs.push((f.a.clone(), f.multiplicity as i32));
        }
        for f in &self.denom {
            fs.push((f.a.clone(), -(f.multiplicity as i32)));
        }
        Ok(formal_product(&fs, hi, self.mode())?.coeffs().to_vec())
    }

    /// `F(1/u)` as a spec in `u`.
    pub fn reciprocal(&self) -> Result<Self> {
        let mut pre = self.prefactor.clone();
        let mut offset = -self.offset;
        let mut flip = |fs: &[Factor], up: bool| -> Result<Vec<Factor>> {
            // 1 - a/u = (-a/u)(1 - u/a)
            let mut out = Vec::with_capacity(fs.len());
            for f in fs {
                let m = f.multiplicity as i64;
                let c = (-&f.a).powi(m);
                if up {
                    pre = &pre * &c;
                    offset -= m;
                } else {
                    pre = pre.checked_div(&c)?;
                    offset += m;
                }
                out.push(Factor::new(f.a.recip()?, f.multiplicity));
            }
            Ok(out)
        };
        let numer = flip(&self.numer, true)?;
        let denom = flip(&self.denom, false)?;
        Ok(RationalFunctionSpec {
            prefactor: pre,
            offset,
            numer,
            denom,
        })
    }

    /// Distinct finite nonzero poles as `(w0, order)`.
    pub fn finite_poles(&self) -> Vec<(Scalar, i64)> {
        let mut out: Vec<(Scalar, i64)> = Vec::new();
        for f in &self.denom {
            let w0 = match f.a.recip() {
                Ok(v) => v,
                Err(_) => continue,
            };
            let seen = out.iter().any(|(p, _)| {
                vanishes(&(self.mode().one() - &f.a * p))
            });
            if seen {
                continue;
            }
            let order = self.pole_order_at(&w0);
            if order > 0 {
                out.push((w0, order));
            }
        }
        out
    }
}

/// `(A, B)` with `F(w) - A/(1 - w/w0)² - B/(1 - w/w0)` analytic at `w0`.
pub fn double_pole_data(f: &RationalFunctionSpec, w0: &Scalar) -> Result<(Scalar, Scalar)> {
    if w0.is_zero() {
        return Err(Error::Parameter("double_pole_data needs w0 != 0".into()));
    }
    let order = f.pole_order_at(w0);
    if order != 2 {
        return Err(Error::PoleOrderMismatch {
            at: w0.to_string(),
            expected: 2,
            found: order,
        });
    }
    let (g, dg) = f.regular_part(w0)?;
    // G(w) = A + B (1 - w/w0) + ..., so G'(w0) = -B / w0.
    let b = -(w0 * &dg);
    Ok((g, b))
}

/// Like [`double_pole_data`] but accepting poles of order 0 or 1 too
/// (with `A = 0`, and `B = 0` when there is no pole).
pub fn pole_parts(f: &RationalFunctionSpec, w0: &Scalar) -> Result<(Scalar, Scalar)> {
    let zero = f.mode().zero();
    match f.pole_order_at(w0) {
        2 => double_pole_data(f, w0),
        1 => Ok((zero, f.regular_part(w0)?.0)),
        o if o <= 0 => Ok((zero.clone(), zero)),
        o => Err(Error::PoleOrderMismatch {
            at: w0.to_string(),
            expected: 2,
            found: o,
        }),
    }
}

/// Residue of `F(w)/w` at `w0 != 0` (poles of order at most 2).
pub fn residue_at(f: &RationalFunctionSpec, w0: &Scalar) -> Result<Scalar> {
    if w0.is_zero() {
        return Err(Error::Parameter(
            "residue_at needs w0 != 0; use residue_at_zero".into(),
        ));
    }
    let order = f.pole_order_at(w0);
    match order {
        o if o <= 0 => Ok(f.mode().zero()),
        1 => {
            // F/w = -w0 G / ((w - w0) w)
            let (g, _) = f.regular_part(w0)?;
            Ok(-g)
        }
        2 => {
            // F/w = w0² G / ((w - w0)² w); residue = w0² (G/w)'(w0)
            let (g, dg) = f.regular_part(w0)?;
            Ok(w0 * &dg - g)
        }
        o => Err(Error::UnsupportedPoleOrder {
            at: w0.to_string(),
            order: o,
        }),
    }
}

/// Residue of `F(w)/w` at `w = 0`: the `w^0` Laurent coefficient of `F`.
pub fn residue_at_zero(f: &RationalFunctionSpec) -> Result<Scalar> {
    let need = -f.offset;
    if need < 0 {
        return Ok(f.mode().zero());
    }
    let series = f.factor_series(need)?;
    Ok(&f.prefactor * &series[need as usize])
}

/// Residue of `F(w)/w` at `w = ∞`, via `w -> 1/u`.
pub fn residue_at_infinity(f: &RationalFunctionSpec) -> Result<Scalar> {
    Ok(-residue_at_zero(&f.reciprocal()?)?)
}
