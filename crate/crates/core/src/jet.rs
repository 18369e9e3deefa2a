//! Truncated Taylor jets in the three coordinates (x, y, t).
//!
//! A [`Jet`] of order `K` stores the Taylor coefficients `∂^α f(p) / α!` for
//! every multi-index with `|α| ≤ K`, densely, in graded lexicographic order.
//! Because the order is graded, the coefficients of an order `K − 1` jet are a
//! prefix of the order `K` coefficients, so truncation is a slice.
//!
//! Elementary functions are applied by composing the function's univariate
//! Taylor series at the jet's value with the nilpotent non-constant part.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{DomainReason, Error, Result};
use crate::group::Point;

/// Largest jet order with a precomputed index table.
pub const MAX_ORDER: usize = 12;

/// Default working order: enough for the bi-Laplacian of a gradient field plus one spare.
pub const DEFAULT_ORDER: usize = 6;

/// A multi-index `(α_x, α_y, α_t)`.
pub type MultiIndex = [usize; 3];

/// Coefficient type of a jet: `f64` or `Complex64`.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
{
    const IS_COMPLEX: bool;
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(v: f64) -> Self;
    /// `None` when the value has a nonzero imaginary part and `Self` is real.
    fn from_complex(v: Complex64) -> Option<Self>;
    fn to_complex(self) -> Complex64;
    fn modulus(self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn powf(self, p: f64) -> Self;
    fn powi(self, n: i32) -> Self;
    fn conj(self) -> Self;
    fn re(self) -> Self;
    fn im(self) -> Self;
    fn is_zero(self) -> bool {
        self.modulus() == 0.0
    }
    /// True for real values `≤ 0` (complex values with a nonzero imaginary part are never flagged).
    fn is_nonpositive_real(self) -> bool {
        let c = self.to_complex();
        c.im == 0.0 && c.re <= 0.0
    }
}

impl Scalar for f64 {
    const IS_COMPLEX: bool = false;
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn from_complex(v: Complex64) -> Option<Self> {
        (v.im == 0.0).then_some(v.re)
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn conj(self) -> Self {
        self
    }
    fn re(self) -> Self {
        self
    }
    fn im(self) -> Self {
        0.0
    }
}

impl Scalar for Complex64 {
    const IS_COMPLEX: bool = true;
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_f64(v: f64) -> Self {
        Complex64::new(v, 0.0)
    }
    fn from_complex(v: Complex64) -> Option<Self> {
        Some(v)
    }
    fn to_complex(self) -> Complex64 {
        self
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn exp(self) -> Self {
        Complex64::exp(self)
    }
    fn ln(self) -> Self {
        Complex64::ln(self)
    }
    fn sin(self) -> Self {
        Complex64::sin(self)
    }
    fn cos(self) -> Self {
        Complex64::cos(self)
    }
    fn powf(self, p: f64) -> Self {
        Complex64::powf(self, p)
    }
    fn powi(self, n: i32) -> Self {
        Complex64::powi(&self, n)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn re(self) -> Self {
        Complex64::new(self.re, 0.0)
    }
    fn im(self) -> Self {
        Complex64::new(self.im, 0.0)
    }
}

/// Index bookkeeping for one jet order.
#[derive(Debug)]
pub(crate) struct IndexTable {
    order: usize,
    indices: Vec<MultiIndex>,
    /// `lookup[(a*(K+1) + b)*(K+1) + c]` is the rank of `(a,b,c)` or `usize::MAX`.
    lookup: Vec<usize>,
    /// `(i, j, k)` with `indices[i] + indices[j] == indices[k]`.
    products: Vec<(u16, u16, u16)>,
}

impl IndexTable {
    fn build(order: usize) -> Self {
        let mut indices = Vec::new();
        for d in 0..=order {
            for a in (0..=d).rev() {
                for b in (0..=d - a).rev() {
                    indices.push([a, b, d - a - b]);
                }
            }
        }
        let side = order + 1;
        let mut lookup = vec![usize::MAX; side * side * side];
        for (r, ix) in indices.iter().enumerate() {
            lookup[(ix[0] * side + ix[1]) * side + ix[2]] = r;
        }
        let mut products = Vec::new();
        for (i, a) in indices.iter().enumerate() {
            for (j, b) in indices.iter().enumerate() {
                let s = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
                if s[0] + s[1] + s[2] <= order {
                    let k = lookup[(s[0] * side + s[1]) * side + s[2]];
                    products.push((i as u16, j as u16, k as u16));
                }
            }
        }
        IndexTable {
            order,
            indices,
            lookup,
            products,
        }
    }

    fn rank(&self, ix: MultiIndex) -> Option<usize> {
        if ix.iter().sum::<usize>() > self.order {
            return None;
        }
        let side = self.order + 1;
        Some(self.lookup[(ix[0] * side + ix[1]) * side + ix[2]])
    }
}

pub(crate) fn table(order: usize) -> &'static IndexTable {
    static TABLES: [OnceLock<IndexTable>; MAX_ORDER + 1] = [const { OnceLock::new() }; MAX_ORDER + 1];
    assert!(order <= MAX_ORDER, "jet order {order} exceeds MAX_ORDER");
    TABLES[order].get_or_init(|| IndexTable::build(order))
}

/// Number of multi-indices with `|α| ≤ order` in three variables.
pub fn coeff_count(order: usize) -> usize {
    (order + 1) * (order + 2) * (order + 3) / 6
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Truncated Taylor expansion of a scalar field at a base point.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet<S: Scalar> {
    base: Point,
    order: usize,
    coeffs: Vec<S>,
}

impl<S: Scalar> Jet<S> {
    pub fn constant(base: Point, order: usize, value: S) -> Self {
        let mut coeffs = vec![S::zero(); coeff_count(order)];
        coeffs[0] = value;
        Jet {
            base,
            order,
            coeffs,
        }
    }

    /// Jet of the coordinate function `var` (0 = x, 1 = y, 2 = t).
    pub fn coordinate(base: Point, order: usize, var: usize) -> Self {
        let mut j = Self::constant(base, order, S::from_f64(base.coord(var)));
        if order >= 1 {
            // ranks 1, 2, 3 are (1,0,0), (0,1,0), (0,0,1)
            j.coeffs[1 + var] = S::one();
        }
        j
    }

    pub fn from_coeffs(base: Point, order: usize, coeffs: Vec<S>) -> Result<Self> {
        if coeffs.len() != coeff_count(order) {
            return Err(Error::Shape(format!(
                "order {order} jet needs {} coefficients, got {}",
                coeff_count(order),
                coeffs.len()
            )));
        }
        Ok(Jet {
            base,
            order,
            coeffs,
        })
    }

    pub fn base(&self) -> Point {
        self.base
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> S {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    /// Taylor coefficient `∂^α f / α!` (zero beyond the order).
    pub fn coeff(&self, ix: MultiIndex) -> S {
        table(self.order)
            .rank(ix)
            .map_or(S::zero(), |r| self.coeffs[r])
    }

    /// Multi-indices in storage order.
    pub fn indices(&self) -> &'static [MultiIndex] {
        &table(self.order).indices
    }

    /// The raw derivative `∂^α f(base)`.
    pub fn partial(&self, ix: MultiIndex) -> Result<S> {
        let total: usize = ix.iter().sum();
        if total > self.order {
            return Err(Error::Order {
                needed: total,
                available: self.order,
            });
        }
        let scale = factorial(ix[0]) * factorial(ix[1]) * factorial(ix[2]);
        Ok(self.coeff(ix) * S::from_f64(scale))
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        Jet {
            base: self.base,
            order,
            coeffs: self.coeffs[..coeff_count(order)].to_vec(),
        }
    }

    /// The jet of `∂f/∂var`, one order lower.
    pub fn differentiate(&self, var: usize) -> Result<Self> {
        if self.order == 0 {
            return Err(Error::Order {
                needed: 1,
                available: 0,
            });
        }
        let src = table(self.order);
        let dst = table(self.order - 1);
        let coeffs = dst
            .indices
            .iter()
            .map(|ix| {
                let mut up = *ix;
                up[var] += 1;
                let r = src.rank(up).expect("raised index within order");
                self.coeffs[r] * S::from_f64(up[var] as f64)
            })
            .collect();
        Ok(Jet {
            base: self.base,
            order: self.order - 1,
            coeffs,
        })
    }

    pub fn map_coeffs<T: Scalar>(&self, f: impl Fn(S) -> T) -> Jet<T> {
        Jet {
            base: self.base,
            order: self.order,
            coeffs: self.coeffs.iter().map(|&c| f(c)).collect(),
        }
    }

    pub fn scale(&self, k: S) -> Self {
        self.map_coeffs(|c| c * k)
    }

    pub fn conj(&self) -> Self {
        self.map_coeffs(S::conj)
    }

    pub fn re(&self) -> Self {
        self.map_coeffs(S::re)
    }

    pub fn im(&self) -> Self {
        self.map_coeffs(S::im)
    }

    fn aligned<'a>(&'a self, other: &'a Self) -> (usize, &'a [S], &'a [S]) {
        debug_assert!(
            self.base == other.base,
            "jets expanded at different base points"
        );
        let order = self.order.min(other.order);
        let n = coeff_count(order);
        (order, &self.coeffs[..n], &other.coeffs[..n])
    }

    pub fn add_jet(&self, other: &Self) -> Self {
        let (order, a, b) = self.aligned(other);
        Jet {
            base: self.base,
            order,
            coeffs: a.iter().zip(b).map(|(&x, &y)| x + y).collect(),
        }
    }

    pub fn sub_jet(&self, other: &Self) -> Self {
        let (order, a, b) = self.aligned(other);
        Jet {
            base: self.base,
            order,
            coeffs: a.iter().zip(b).map(|(&x, &y)| x - y).collect(),
        }
    }

    pub fn mul_jet(&self, other: &Self) -> Self {
        let (order, a, b) = self.aligned(other);
        let t = table(order);
        let mut coeffs = vec![S::zero(); a.len()];
        for &(i, j, k) in &t.products {
            coeffs[k as usize] += a[i as usize] * b[j as usize];
        }
        Jet {
            base: self.base,
            order,
            coeffs,
        }
    }

    pub fn add_scalar(&self, k: S) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += k;
        out
    }

    /// `Σ_k series[k] · h^k` where `h` is this jet minus its value.
    fn compose_series(&self, series: &[S]) -> Self {
        let mut h = self.clone();
        h.coeffs[0] = S::zero();
        let mut acc = Jet::constant(self.base, self.order, series[self.order]);
        for k in (0..self.order).rev() {
            acc = acc.mul_jet(&h).add_scalar(series[k]);
        }
        acc
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        let series: Vec<S> = (0..=self.order)
            .map(|k| e * S::from_f64(1.0 / factorial(k)))
            .collect();
        self.compose_series(&series)
    }

    pub fn ln(&self) -> Result<Self> {
        let a = self.value();
        if a.is_nonpositive_real() || a.is_zero() {
            return Err(Error::domain(DomainReason::LogNonPositive, "log"));
        }
        let mut series = vec![a.ln()];
        let inv = S::one() / a;
        let mut p = S::one();
        for k in 1..=self.order {
            p = p * inv;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            series.push(p * S::from_f64(sign / k as f64));
        }
        Ok(self.compose_series(&series))
    }

    pub fn sin(&self) -> Self {
        let (s, c) = (self.value().sin(), self.value().cos());
        let cycle = [s, c, -s, -c];
        let series: Vec<S> = (0..=self.order)
            .map(|k| cycle[k % 4] * S::from_f64(1.0 / factorial(k)))
            .collect();
        self.compose_series(&series)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = (self.value().sin(), self.value().cos());
        let cycle = [c, -s, -c, s];
        let series: Vec<S> = (0..=self.order)
            .map(|k| cycle[k % 4] * S::from_f64(1.0 / factorial(k)))
            .collect();
        self.compose_series(&series)
    }

    /// Generalized binomial series `(a + h)^p`; requires `a ≠ 0`.
    fn pow_series(&self, p: f64) -> Self {
        let a = self.value();
        let mut series = Vec::with_capacity(self.order + 1);
        let mut binom = 1.0;
        for k in 0..=self.order {
            series.push(a.powf(p - k as f64) * S::from_f64(binom));
            binom *= (p - k as f64) / (k as f64 + 1.0);
        }
        self.compose_series(&series)
    }

    pub fn sqrt(&self) -> Result<Self> {
        let a = self.value();
        if a.is_nonpositive_real() && !(a.is_zero() && self.order == 0) {
            return Err(Error::domain(DomainReason::SqrtNonPositive, "sqrt"));
        }
        if self.order == 0 {
            return Ok(Jet::constant(self.base, 0, a.powf(0.5)));
        }
        Ok(self.pow_series(0.5))
    }

    pub fn recip(&self) -> Result<Self> {
        if self.value().is_zero() {
            return Err(Error::domain(DomainReason::DivisionByZero, "division"));
        }
        Ok(self.pow_series(-1.0))
    }

    pub fn div_jet(&self, other: &Self) -> Result<Self> {
        Ok(self.mul_jet(&other.recip()?))
    }

    pub fn powi(&self, n: i32) -> Result<Self> {
        if n >= 0 {
            // square-and-multiply keeps a zero base legal
            let mut result = Jet::constant(self.base, self.order, S::one());
            let mut base = self.clone();
            let mut e = n as u32;
            while e > 0 {
                if e & 1 == 1 {
                    result = result.mul_jet(&base);
                }
                base = base.mul_jet(&base);
                e >>= 1;
            }
            Ok(result)
        } else {
            self.recip()?.powi(-n)
        }
    }
}

impl Jet<f64> {
    /// Combine real and imaginary jets into a complex jet.
    pub fn complexify(re: &Jet<f64>, im: &Jet<f64>) -> Jet<Complex64> {
        let order = re.order.min(im.order);
        let n = coeff_count(order);
        Jet {
            base: re.base,
            order,
            coeffs: re.coeffs[..n]
                .iter()
                .zip(&im.coeffs[..n])
                .map(|(&a, &b)| Complex64::new(a, b))
                .collect(),
        }
    }

    pub fn to_complex(&self) -> Jet<Complex64> {
        self.map_coeffs(|c| Complex64::new(c, 0.0))
    }
}

impl Jet<Complex64> {
    pub fn real_part(&self) -> Jet<f64> {
        self.map_coeffs(|c| c.re)
    }

    pub fn imag_part(&self) -> Jet<f64> {
        self.map_coeffs(|c| c.im)
    }
}

/// Coordinate jets for x, y and t at `p`.
pub fn jet_seed<S: Scalar>(p: Point, order: usize) -> [Jet<S>; 3] {
    [
        Jet::coordinate(p, order, 0),
        Jet::coordinate(p, order, 1),
        Jet::coordinate(p, order, 2),
    ]
}

/// Central finite-difference estimate of `∂^α f(p)` for `|α| ≤ 3`.
///
/// The stencil is the tensor product of one-dimensional central stencils, so
/// mixed partials use the product of per-axis weights.
pub fn fd_oracle(
    f: impl Fn(Point) -> Result<f64>,
    p: Point,
    alpha: MultiIndex,
    h: f64,
) -> Result<f64> {
    let total: usize = alpha.iter().sum();
    if total > 3 {
        return Err(Error::Order {
            needed: total,
            available: 3,
        });
    }
    if h <= 0.0 {
        return Err(Error::Shape(format!("finite-difference step must be positive, got {h}")));
    }
    // (offset multiples, weights) for derivative orders 0..=3, all O(h²)
    fn stencil(k: usize) -> (&'static [f64], &'static [f64]) {
        match k {
            0 => (&[0.0], &[1.0]),
            1 => (&[-1.0, 1.0], &[-0.5, 0.5]),
            2 => (&[-1.0, 0.0, 1.0], &[1.0, -2.0, 1.0]),
            _ => (&[-2.0, -1.0, 1.0, 2.0], &[-0.5, 1.0, -1.0, 0.5]),
        }
    }
    let (ox, wx) = stencil(alpha[0]);
    let (oy, wy) = stencil(alpha[1]);
    let (ot, wt) = stencil(alpha[2]);
    let mut acc = 0.0;
    for (a, wa) in ox.iter().zip(wx) {
        for (b, wb) in oy.iter().zip(wy) {
            for (c, wc) in ot.iter().zip(wt) {
                let q = Point::new(p.x + a * h, p.y + b * h, p.t + c * h);
                acc += wa * wb * wc * f(q)?;
            }
        }
    }
    Ok(acc / h.powi(total as i32))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p0() -> Point {
        Point::new(0.0, 0.0, 0.0)
    }

    #[test]
    fn graded_order_is_a_prefix() {
        let t4 = table(4);
        let t3 = table(3);
        assert_eq!(&t4.indices[..t3.indices.len()], &t3.indices[..]);
        assert_eq!(t4.indices.len(), coeff_count(4));
        assert_eq!(t4.indices[1], [1, 0, 0]);
        assert_eq!(t4.indices[2], [0, 1, 0]);
        assert_eq!(t4.indices[3], [0, 0, 1]);
    }

    #[test]
    fn seeds_are_coordinate_jets() {
        let p = Point::new(1.0, 2.0, 3.0);
        let [x, y, t] = jet_seed::<f64>(p, 2);
        assert_eq!(x.value(), 1.0);
        assert_eq!(x.coeff([1, 0, 0]), 1.0);
        assert_eq!(y.value(), 2.0);
        assert_eq!(t.value(), 3.0);
        for ix in x.indices() {
            if *ix != [0, 0, 0] && *ix != [1, 0, 0] {
                assert_eq!(x.coeff(*ix), 0.0);
            }
        }
        let zs = jet_seed::<f64>(p0(), 0);
        assert!(zs.iter().all(|j| j.order() == 0 && j.value() == 0.0));
    }

    #[test]
    fn product_rule_on_seeds() {
        let p = Point::new(1.0, 2.0, 3.0);
        let [x, y, _] = jet_seed::<f64>(p, 1);
        let xy = x.mul_jet(&y);
        assert_eq!(xy.value(), 2.0);
        assert_eq!(xy.partial([1, 0, 0]).unwrap(), 2.0);
        assert_eq!(xy.partial([0, 1, 0]).unwrap(), 1.0);
        assert_eq!(xy.partial([0, 0, 1]).unwrap(), 0.0);
    }

    #[test]
    fn exp_series() {
        let [x, _, _] = jet_seed::<f64>(p0(), 3);
        let e = x.exp();
        let expect = [1.0, 1.0, 0.5, 1.0 / 6.0];
        for (k, v) in expect.iter().enumerate() {
            assert!((e.coeff([k, 0, 0]) - v).abs() < 1e-15);
        }
        assert_eq!(e.partial([2, 0, 0]).unwrap(), 1.0);
    }

    #[test]
    fn partial_beyond_order_is_an_error() {
        let [x, _, _] = jet_seed::<f64>(p0(), 2);
        assert!(matches!(x.partial([2, 1, 0]), Err(Error::Order { .. })));
    }

    #[test]
    fn reciprocal_of_zero_is_a_domain_error() {
        let [x, _, _] = jet_seed::<f64>(p0(), 3);
        assert!(matches!(x.recip(), Err(Error::Domain { .. })));
        assert!(x.ln().is_err());
        assert!(x.scale(-1.0).add_scalar(-1.0).sqrt().is_err());
    }

    #[test]
    fn differentiate_lowers_order() {
        let p = Point::new(1.0, 2.0, 3.0);
        let [x, y, _] = jet_seed::<f64>(p, 3);
        let f = x.mul_jet(&x).mul_jet(&y);
        let fx = f.differentiate(0).unwrap();
        assert_eq!(fx.order(), 2);
        // ∂x(x²y) = 2xy = 4 at (1,2,3); ∂y∂x = 2x = 2
        assert!((fx.value() - 4.0).abs() < 1e-14);
        assert!((fx.partial([0, 1, 0]).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn truncation_commutes_with_evaluation() {
        let p = Point::new(0.3, -0.2, 0.7);
        let make = |k| {
            let [x, y, t] = jet_seed::<f64>(p, k);
            x.mul_jet(&y).add_jet(&t).exp().sin()
        };
        let hi = make(5).truncate(4);
        let lo = make(4);
        for (a, b) in hi.coeffs().iter().zip(lo.coeffs()) {
            assert!((a - b).abs() <= 1e-14 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn powi_matches_repeated_product() {
        let p = Point::new(0.0, 1.5, -0.5);
        let [x, y, _] = jet_seed::<f64>(p, 4);
        let s = x.add_jet(&y);
        let cube = s.powi(3).unwrap();
        let manual = s.mul_jet(&s).mul_jet(&s);
        for (a, b) in cube.coeffs().iter().zip(manual.coeffs()) {
            assert!((a - b).abs() < 1e-13);
        }
        let inv2 = s.powi(-2).unwrap();
        let check = inv2.mul_jet(&manual).div_jet(&s).unwrap();
        assert!((check.value() - 1.0).abs() < 1e-14);
        for c in &check.coeffs()[1..] {
            assert!(c.abs() < 1e-12);
        }
    }

    #[test]
    fn fd_oracle_examples() {
        let d = fd_oracle(|q| Ok(q.x.exp()), p0(), [1, 0, 0], 1e-4).unwrap();
        assert!((d - 1.0).abs() < 1e-7);
        for h in [0.1, 0.01, 0.5] {
            let d2 = fd_oracle(|q| Ok(q.x * q.x), Point::new(0.7, 0.0, 0.0), [2, 0, 0], h).unwrap();
            assert!((d2 - 2.0).abs() < 1e-9);
        }
        let d3 = fd_oracle(|q| Ok(q.t.sin()), p0(), [0, 0, 3], 1e-3).unwrap();
        assert!((d3 + 1.0).abs() < 1e-5);
    }

    #[test]
    fn complex_conj_acts_coefficientwise() {
        let p = Point::new(0.2, 0.1, 0.0);
        let [x, y, _] = jet_seed::<f64>(p, 3);
        let z = Jet::complexify(&x, &y);
        let zz = z.mul_jet(&z.conj());
        // |z|² is real
        assert!(zz.coeffs().iter().all(|c| c.im.abs() < 1e-15));
        assert!((zz.value().re - 0.05).abs() < 1e-15);
    }
}
