//! Exact polynomials in `(x, y, t)` over the Gaussian rationals `ℚ(i)`.

pub mod appendix;
pub mod ledger;
pub mod linalg;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::expr::{Expr, Node, Var};
use crate::group::Point;
use crate::horizontal::Op;

pub use appendix::{appendix_identities, reference_v0_basis, vzerosol_nullspace, AppendixReport};
pub use ledger::{ledger_run, LedgerEntry, Verdict};
pub use linalg::{nullspace, rref};

/// `a + bi` with `a, b ∈ ℚ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        GaussRat {
            re,
            im: BigRational::zero(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::real(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::real(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn i() -> Self {
        GaussRat {
            re: BigRational::zero(),
            im: BigRational::one(),
        }
    }

    /// The exact binary value of a finite float.
    pub fn from_f64(v: f64) -> Result<Self> {
        BigRational::from_float(v)
            .map(Self::real)
            .ok_or_else(|| Error::Shape(format!("non-finite constant {v}")))
    }

    pub fn from_complex(c: Complex64) -> Result<Self> {
        Ok(GaussRat {
            re: Self::from_f64(c.re)?.re,
            im: Self::from_f64(c.im)?.re,
        })
    }

    pub fn zero() -> Self {
        GaussRat::default()
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRat {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(GaussRat {
            re: &self.re / &n,
            im: -(&self.im / &n),
        })
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }
}

pub(crate) fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

impl Add for &GaussRat {
    type Output = GaussRat;
    fn add(self, o: &GaussRat) -> GaussRat {
        GaussRat {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }
}

impl Sub for &GaussRat {
    type Output = GaussRat;
    fn sub(self, o: &GaussRat) -> GaussRat {
        GaussRat {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }
}

impl Mul for &GaussRat {
    type Output = GaussRat;
    fn mul(self, o: &GaussRat) -> GaussRat {
        GaussRat {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl Neg for &GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}i", self.im),
            (false, false) => {
                let sign = if self.im.is_negative() { "-" } else { "+" };
                write!(f, "({}{}{}i)", self.re, sign, self.im.abs())
            }
        }
    }
}

/// Exponents of `(x, y, t)`.
pub type Monomial = [u32; 3];

/// Weighted degree with `x, y ↦ 1` and `t ↦ 2`.
pub fn weighted_degree(m: Monomial) -> u32 {
    m[0] + m[1] + 2 * m[2]
}

/// Monomials of weighted degree `≤ dmax` and `t`-degree `≤ tmax`, in a fixed order.
pub fn monomials(dmax: u32, tmax: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    for d in 0..=dmax {
        for k in 0..=tmax.min(d / 2) {
            let rest = d - 2 * k;
            for i in (0..=rest).rev() {
                out.push([i, rest - i, k]);
            }
        }
    }
    out
}

/// Canonical exact polynomial: no zero coefficients are stored.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RatPoly {
    terms: BTreeMap<Monomial, GaussRat>,
}

impl RatPoly {
    pub fn zero() -> Self {
        RatPoly::default()
    }

    pub fn constant(c: GaussRat) -> Self {
        Self::monomial([0, 0, 0], c)
    }

    pub fn monomial(m: Monomial, c: GaussRat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        RatPoly { terms }
    }

    /// The coordinate polynomial (0 = x, 1 = y, 2 = t).
    pub fn var(v: usize) -> Self {
        let mut m = [0; 3];
        m[v] = 1;
        Self::monomial(m, GaussRat::one())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &GaussRat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: Monomial) -> GaussRat {
        self.terms.get(&m).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_real(&self) -> bool {
        self.terms.values().all(GaussRat::is_real)
    }

    fn add_term(&mut self, m: Monomial, c: GaussRat) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(m).or_default();
        *e = &*e + &c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn scale(&self, k: &GaussRat) -> Self {
        let mut out = RatPoly::zero();
        for (m, c) in &self.terms {
            out.add_term(*m, c * k);
        }
        out
    }

    pub fn conj(&self) -> Self {
        RatPoly {
            terms: self.terms.iter().map(|(m, c)| (*m, c.conj())).collect(),
        }
    }

    /// Coefficient-wise real part (the variables are real).
    pub fn re(&self) -> Self {
        let mut out = RatPoly::zero();
        for (m, c) in &self.terms {
            out.add_term(*m, GaussRat::real(c.re.clone()));
        }
        out
    }

    pub fn im(&self) -> Self {
        let mut out = RatPoly::zero();
        for (m, c) in &self.terms {
            out.add_term(*m, GaussRat::real(c.im.clone()));
        }
        out
    }

    pub fn degree_in(&self, v: usize) -> u32 {
        self.terms.keys().map(|m| m[v]).max().unwrap_or(0)
    }

    pub fn weighted_degree(&self) -> u32 {
        self.terms.keys().map(|&m| weighted_degree(m)).max().unwrap_or(0)
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(RatPoly::constant(GaussRat::one()), |acc, _| &acc * self)
    }

    pub fn partial(&self, v: usize) -> Self {
        let mut out = RatPoly::zero();
        for (m, c) in &self.terms {
            if m[v] > 0 {
                let mut d = *m;
                d[v] -= 1;
                out.add_term(d, c * &GaussRat::from_int(m[v] as i64));
            }
        }
        out
    }

    /// Antiderivative in `v` vanishing at `v = 0`.
    pub fn integrate_from_zero(&self, v: usize) -> Self {
        let mut out = RatPoly::zero();
        for (m, c) in &self.terms {
            let mut d = *m;
            d[v] += 1;
            out.add_term(d, c * &GaussRat::ratio(1, d[v] as i64));
        }
        out
    }

    /// Restriction to `v = 0`.
    pub fn at_zero(&self, v: usize) -> Self {
        let mut out = RatPoly::zero();
        for (m, c) in &self.terms {
            if m[v] == 0 {
                out.add_term(*m, c.clone());
            }
        }
        out
    }

    /// Exact left-invariant derivation.
    pub fn derive(&self, op: Op) -> Self {
        let two = GaussRat::from_int(2);
        let x_op = |p: &RatPoly| &p.partial(0) + &(&RatPoly::var(1) * &p.partial(2)).scale(&two);
        let y_op = |p: &RatPoly| &p.partial(1) - &(&RatPoly::var(0) * &p.partial(2)).scale(&two);
        let half = GaussRat::ratio(1, 2);
        match op {
            Op::X => x_op(self),
            Op::Y => y_op(self),
            Op::T => self.partial(2),
            Op::Z => (&x_op(self) - &y_op(self).scale(&GaussRat::i())).scale(&half),
            Op::Zbar => (&x_op(self) + &y_op(self).scale(&GaussRat::i())).scale(&half),
        }
    }

    /// Apply letters in order (the first letter acts first).
    pub fn derive_word(&self, ops: &[Op]) -> Self {
        ops.iter().fold(self.clone(), |acc, &op| acc.derive(op))
    }

    /// `X² + Y²`.
    pub fn sublaplacian(&self) -> Self {
        &self.derive_word(&[Op::X, Op::X]) + &self.derive_word(&[Op::Y, Op::Y])
    }

    pub fn eval(&self, p: Point) -> Complex64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                c.to_complex()
                    * p.x.powi(m[0] as i32)
                    * p.y.powi(m[1] as i32)
                    * p.t.powi(m[2] as i32)
            })
            .sum()
    }

    /// Convert a polynomial expression exactly; constants keep their binary value.
    pub fn from_expr(e: &Expr) -> Result<Self> {
        Ok(match e.node() {
            Node::Var(v) => RatPoly::var(v.index()),
            Node::Const(c) => RatPoly::constant(GaussRat::from_complex(*c)?),
            Node::Add(a, b) => &Self::from_expr(a)? + &Self::from_expr(b)?,
            Node::Sub(a, b) => &Self::from_expr(a)? - &Self::from_expr(b)?,
            Node::Mul(a, b) => &Self::from_expr(a)? * &Self::from_expr(b)?,
            Node::Neg(a) => -&Self::from_expr(a)?,
            Node::Div(a, b) => {
                let den = Self::from_expr(b)?;
                let c = match den.terms.iter().next() {
                    Some((m, c)) if den.terms.len() == 1 && *m == [0, 0, 0] => c.clone(),
                    _ => return Err(Error::Shape(format!("`{e}` is not a polynomial"))),
                };
                let inv = c.inv().expect("canonical coefficient is nonzero");
                Self::from_expr(a)?.scale(&inv)
            }
            Node::Pow(a, n) if *n >= 0 => Self::from_expr(a)?.pow(*n as u32),
            Node::Pow(..) | Node::Func(..) => {
                return Err(Error::Shape(format!("`{e}` is not a polynomial")))
            }
        })
    }

    /// Expression with rational constants written as `num/den`.
    pub fn to_expr(&self) -> Expr {
        let mut acc = Expr::real(0.0);
        let i = Expr::complex(Complex64::new(0.0, 1.0));
        for (m, c) in &self.terms {
            let mut mono = Expr::real(1.0);
            for (v, var) in [Var::X, Var::Y, Var::T].into_iter().enumerate() {
                if m[v] > 0 {
                    mono = mono * Expr::var(var).powi(m[v] as i32);
                }
            }
            let mut coeff = Expr::real(0.0);
            if !c.re.is_zero() {
                coeff = rat_expr(&c.re);
            }
            if !c.im.is_zero() {
                coeff = coeff + i.clone() * rat_expr(&c.im);
            }
            acc = acc + coeff * mono;
        }
        acc
    }
}

fn rat_expr(r: &BigRational) -> Expr {
    let n = Expr::real(r.numer().to_f64().unwrap_or(f64::NAN));
    if r.denom().is_one() {
        n
    } else {
        n / Expr::real(r.denom().to_f64().unwrap_or(f64::NAN))
    }
}

impl Add for &RatPoly {
    type Output = RatPoly;
    fn add(self, o: &RatPoly) -> RatPoly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl Sub for &RatPoly {
    type Output = RatPoly;
    fn sub(self, o: &RatPoly) -> RatPoly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(*m, -c);
        }
        out
    }
}

impl Mul for &RatPoly {
    type Output = RatPoly;
    fn mul(self, o: &RatPoly) -> RatPoly {
        let mut out = RatPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                out.add_term([ma[0] + mb[0], ma[1] + mb[1], ma[2] + mb[2]], ca * cb);
            }
        }
        out
    }
}

impl Neg for &RatPoly {
    type Output = RatPoly;
    fn neg(self) -> RatPoly {
        self.scale(&GaussRat::from_int(-1))
    }
}

macro_rules! owned_ops {
    ($($tr:ident $f:ident),*) => {$(
        impl $tr for RatPoly {
            type Output = RatPoly;
            fn $f(self, o: RatPoly) -> RatPoly {
                (&self).$f(&o)
            }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

impl fmt::Display for RatPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (v, name) in ["x", "y", "t"].iter().enumerate() {
                match m[v] {
                    0 => {}
                    1 => write!(f, "*{name}")?,
                    k => write!(f, "*{name}^{k}")?,
                }
            }
        }
        Ok(())
    }
}
