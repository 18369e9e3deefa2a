//! Left-invariant derivatives on jets and contact diagnostics.
//!
//! `X = ∂x + 2y ∂t`, `Y = ∂y − 2x ∂t`, `T = ∂t`, `Z = ½(X − iY)`,
//! `Z̄ = ½(X + iY)`. The coefficient functions `y` and `x` enter as coordinate
//! jets, so iterated operators stay exact to the jet order.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{jet_eval, Expr};
use crate::group::Point;
use crate::jet::{Jet, Scalar};
use crate::map::{HeisMap, MapJets};
use crate::{TAU_ABS, TAU_REL};

/// One letter of an operator word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Op {
    X,
    Y,
    T,
    Z,
    Zbar,
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Op::X => "X",
            Op::Y => "Y",
            Op::T => "T",
            Op::Z => "Z",
            Op::Zbar => "Zbar",
        })
    }
}

const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn x_jet<S: Scalar>(j: &Jet<S>) -> Result<Jet<S>> {
    let dx = j.differentiate(0)?;
    let dt = j.differentiate(2)?;
    let y = Jet::coordinate(j.base(), dx.order(), 1);
    Ok(dx.add_jet(&dt.mul_jet(&y).scale(S::from_f64(2.0))))
}

pub fn y_jet<S: Scalar>(j: &Jet<S>) -> Result<Jet<S>> {
    let dy = j.differentiate(1)?;
    let dt = j.differentiate(2)?;
    let x = Jet::coordinate(j.base(), dy.order(), 0);
    Ok(dy.sub_jet(&dt.mul_jet(&x).scale(S::from_f64(2.0))))
}

pub fn t_jet<S: Scalar>(j: &Jet<S>) -> Result<Jet<S>> {
    j.differentiate(2)
}

pub fn z_jet(j: &Jet<Complex64>) -> Result<Jet<Complex64>> {
    let xj = x_jet(j)?;
    let yj = y_jet(j)?;
    Ok(xj.sub_jet(&yj.scale(I)).scale(Complex64::new(0.5, 0.0)))
}

pub fn zbar_jet(j: &Jet<Complex64>) -> Result<Jet<Complex64>> {
    let xj = x_jet(j)?;
    let yj = y_jet(j)?;
    Ok(xj.add_jet(&yj.scale(I)).scale(Complex64::new(0.5, 0.0)))
}

pub fn apply_op(op: Op, j: &Jet<Complex64>) -> Result<Jet<Complex64>> {
    match op {
        Op::X => x_jet(j),
        Op::Y => y_jet(j),
        Op::T => t_jet(j),
        Op::Z => z_jet(j),
        Op::Zbar => zbar_jet(j),
    }
}

/// Sub-Laplacian `X² + Y²` on a jet (two orders lost).
pub fn sublaplacian_jet<S: Scalar>(j: &Jet<S>) -> Result<Jet<S>> {
    Ok(x_jet(&x_jet(j)?)?.add_jet(&y_jet(&y_jet(j)?)?))
}

/// A word of operators in application order: the first letter acts first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OperatorWord(pub Vec<Op>);

impl OperatorWord {
    pub fn new(ops: Vec<Op>) -> Self {
        OperatorWord(ops)
    }

    /// From operator notation, where the rightmost letter acts first
    /// (`[Z, Zbar]` is `Z Z̄`, i.e. `Z̄` then `Z`).
    pub fn operator_notation(ops: &[Op]) -> Self {
        OperatorWord(ops.iter().rev().copied().collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply_jet(&self, j: &Jet<Complex64>) -> Result<Jet<Complex64>> {
        if j.order() < self.len() {
            return Err(Error::Order {
                needed: self.len(),
                available: j.order(),
            });
        }
        self.0.iter().try_fold(j.clone(), |acc, &op| apply_op(op, &acc))
    }
}

impl fmt::Display for OperatorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(Op::to_string).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// The iterated derivative of `e` at `p`.
pub fn apply_word(w: &OperatorWord, e: &Expr, p: Point) -> Result<Complex64> {
    let j = jet_eval::<Complex64>(e, p, w.len())?;
    Ok(w.apply_jet(&j)?.value())
}

/// `Δ_H e (p)` with `Δ_H = X² + Y²`.
pub fn sublaplacian(e: &Expr, p: Point) -> Result<Complex64> {
    let j = jet_eval::<Complex64>(e, p, 2)?;
    Ok(sublaplacian_jet(&j)?.value())
}

/// Jet of `λ_f = |ZF|² − |Z̄F|²`, one order below the map jets.
pub fn lambda_jet(m: &MapJets) -> Result<Jet<f64>> {
    let zf = z_jet(&m.big_f)?;
    let zbf = zbar_jet(&m.big_f)?;
    let a = zf.mul_jet(&zf.conj()).sub_jet(&zbf.mul_jet(&zbf.conj()));
    Ok(a.real_part())
}

/// Jets of the contact residuals `r₁`, `r₂`.
pub fn contact_residual_jets(m: &MapJets) -> Result<(Jet<f64>, Jet<f64>)> {
    let [f1, f2, f3] = &m.f;
    let two = 2.0;
    let r = |d: &dyn Fn(&Jet<f64>) -> Result<Jet<f64>>| -> Result<Jet<f64>> {
        let (d1, d2, d3) = (d(f1)?, d(f2)?, d(f3)?);
        Ok(d3
            .sub_jet(&f2.mul_jet(&d1).scale(two))
            .add_jet(&f1.mul_jet(&d2).scale(two)))
    };
    Ok((r(&|j| x_jet(j))?, r(&|j| y_jet(j))?))
}

/// Pointwise contact, conformality and distortion data of a map.
#[derive(Clone, Debug, PartialEq)]
pub struct ContactAssessment {
    pub point: Point,
    pub image: Point,
    /// `[[Xf₁, Yf₁], [Xf₂, Yf₂]]`
    pub dh: [[f64; 2]; 2],
    pub lambda: f64,
    /// `Tf₃ − 2f₂Tf₁ + 2f₁Tf₂`, equal to `λ` for contact maps.
    pub lambda_t: f64,
    pub r1: f64,
    pub r2: f64,
    pub r_z: Complex64,
    pub zf: Complex64,
    pub zbar_f: Complex64,
    /// `Z̄F/ZF`; `None` where `ZF = 0`.
    pub mu: Option<Complex64>,
    pub distortion: f64,
    pub orientation: i32,
    /// Scale for relative residual checks.
    pub scale: f64,
}

impl ContactAssessment {
    pub fn residual(&self) -> f64 {
        self.r1.abs().max(self.r2.abs())
    }

    pub fn is_contact(&self, tol_rel: f64, tol_abs: f64) -> bool {
        self.residual() <= tol_rel * self.scale + tol_abs
    }

    pub fn is_conformal(&self, tol_rel: f64, tol_abs: f64) -> bool {
        self.is_contact(tol_rel, tol_abs)
            && self.zbar_f.norm() <= tol_rel * (1.0 + self.zf.norm()) + tol_abs
    }
}

pub fn assess_jets(m: &MapJets) -> Result<ContactAssessment> {
    if m.order() < 1 {
        return Err(Error::Order {
            needed: 1,
            available: m.order(),
        });
    }
    let m1 = MapJets {
        f: [m.f[0].truncate(1), m.f[1].truncate(1), m.f[2].truncate(1)],
        big_f: m.big_f.truncate(1),
    };
    let [f1, f2, f3] = &m1.f;
    let v = |j: Jet<f64>| j.value();
    let (xf1, yf1, tf1) = (v(x_jet(f1)?), v(y_jet(f1)?), v(t_jet(f1)?));
    let (xf2, yf2, tf2) = (v(x_jet(f2)?), v(y_jet(f2)?), v(t_jet(f2)?));
    let (xf3, yf3, tf3) = (v(x_jet(f3)?), v(y_jet(f3)?), v(t_jet(f3)?));
    let (a, b) = (f1.value(), f2.value());
    let r1 = xf3 - 2.0 * b * xf1 + 2.0 * a * xf2;
    let r2 = yf3 - 2.0 * b * yf1 + 2.0 * a * yf2;
    let zf = z_jet(&m1.big_f)?.value();
    let zbar_f = zbar_jet(&m1.big_f)?.value();
    // Zf₃ − 2(f₂Zf₁ − f₁Zf₂), so that r_Z = ½(r₁ − i r₂)
    let rz = 0.5 * Complex64::new(xf3, -yf3)
        - (b * Complex64::new(xf1, -yf1) - a * Complex64::new(xf2, -yf2));
    let lambda = xf1 * yf2 - yf1 * xf2;
    let lambda_t = tf3 - 2.0 * b * tf1 + 2.0 * a * tf2;
    let mu = (zf.norm() > 0.0).then(|| zbar_f / zf);
    let (na, nb) = (zf.norm(), zbar_f.norm());
    let distortion = if lambda == 0.0 || (na - nb).abs() == 0.0 {
        1.0
    } else {
        (na + nb) / (na - nb).abs()
    };
    let scale = 1.0
        + xf3.abs().max(yf3.abs())
        + 2.0 * (b.abs() * xf1.abs().max(yf1.abs()) + a.abs() * xf2.abs().max(yf2.abs()));
    Ok(ContactAssessment {
        point: m.f[0].base(),
        image: m.value(),
        dh: [[xf1, yf1], [xf2, yf2]],
        lambda,
        lambda_t,
        r1,
        r2,
        r_z: rz,
        zf,
        zbar_f,
        mu,
        distortion,
        orientation: if lambda > 0.0 {
            1
        } else if lambda < 0.0 {
            -1
        } else {
            0
        },
        scale,
    })
}

pub fn assess_contact(f: &HeisMap, p: Point) -> Result<ContactAssessment> {
    assess_jets(&f.eval_jets(p, 1)?)
}

/// Fails with `NotContact` unless the residuals are within the default tolerance.
pub fn require_contact(a: &ContactAssessment) -> Result<()> {
    if a.is_contact(TAU_REL, TAU_ABS) {
        Ok(())
    } else {
        Err(Error::NotContact {
            residual: a.residual(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{sl2_map, word_to_map, ConformalWord, Generator};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn word_examples() {
        let t = Expr::t();
        let p = Point::new(1.0, 2.0, 3.0);
        assert_eq!(apply_word(&OperatorWord::new(vec![Op::X]), &t, p).unwrap(), c(4.0, 0.0));
        let q = Point::new(0.3, -0.7, 1.1);
        let z = apply_word(&OperatorWord::new(vec![Op::Z]), &t, q).unwrap();
        assert!((z - c(q.y, q.x)).norm() < 1e-15);
    }

    #[test]
    fn commutators() {
        let e = Expr::parse("x^2*y*t + t^2*x - y^3 + exp(x)*t").unwrap();
        let p = Point::new(0.4, -0.3, 0.9);
        let w = |v: Vec<Op>| apply_word(&OperatorWord::new(v), &e, p).unwrap();
        let tv = w(vec![Op::T]);
        // XY − YX = −4T (operator notation: Y acts first in XY)
        let xy = w(vec![Op::Y, Op::X]) - w(vec![Op::X, Op::Y]);
        assert!((xy + 4.0 * tv).norm() < 1e-12);
        let zz = w(vec![Op::Zbar, Op::Z]) - w(vec![Op::Z, Op::Zbar]);
        assert!((zz - c(0.0, -2.0) * tv).norm() < 1e-12);
        assert_eq!(
            OperatorWord::operator_notation(&[Op::Z, Op::Zbar]),
            OperatorWord::new(vec![Op::Zbar, Op::Z])
        );
    }

    #[test]
    fn order_error() {
        let j = jet_eval::<Complex64>(&Expr::t(), Point::ORIGIN, 1).unwrap();
        assert!(matches!(
            OperatorWord::new(vec![Op::X, Op::X]).apply_jet(&j),
            Err(Error::Order { .. })
        ));
    }

    #[test]
    fn sublaplacian_examples() {
        let p = Point::new(0.5, -1.5, 2.0);
        assert!(sublaplacian(&Expr::t(), p).unwrap().norm() < 1e-15);
        assert!(sublaplacian(&Expr::parse("x^2-y^2").unwrap(), p).unwrap().norm() < 1e-14);
        let v = sublaplacian(&Expr::parse("t^2").unwrap(), p).unwrap();
        assert!((v - c(8.0 * (0.25 + 2.25), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn dilation_and_sl2_assessments() {
        let p = Point::new(0.3, 0.2, -0.5);
        let a = assess_contact(&HeisMap::generator(&Generator::Dilate { r: 3.0 }), p).unwrap();
        assert!((a.lambda - 9.0).abs() < 1e-12);
        assert!(a.residual() < 1e-12 && a.zbar_f.norm() < 1e-12);

        let a = assess_contact(&sl2_map(2.0, 0.0, 0.0, 0.5), p).unwrap();
        assert!((a.lambda - 1.0).abs() < 1e-14);
        assert!((a.zf - c(1.25, 0.0)).norm() < 1e-14);
        assert!((a.zbar_f - c(0.75, 0.0)).norm() < 1e-14);
        assert!(a.residual() < 1e-14);
        assert!((a.distortion - 4.0).abs() < 1e-12);

        let a = assess_contact(&HeisMap::generator(&Generator::Reflect), p).unwrap();
        assert!((a.lambda + 1.0).abs() < 1e-14);
        assert_eq!(a.orientation, -1);
        assert!(a.mu.is_none());
    }

    #[test]
    fn complex_residual_matches_real_pair() {
        let w = ConformalWord::make_type2(Point::new(0.1, -0.2, 0.3), 0.7, 1.3, Point::new(0.5, 0.5, 0.0));
        let m = word_to_map(&w);
        let p = Point::new(0.9, -0.4, 0.6);
        let a = assess_contact(&m, p).unwrap();
        assert!((a.r_z - 0.5 * c(a.r1, -a.r2)).norm() < 1e-12);
        assert!(a.is_conformal(TAU_REL, TAU_ABS));
        assert!((a.lambda - a.lambda_t).abs() < 1e-10 * (1.0 + a.lambda.abs()));
        assert!((a.lambda - (a.zf.norm_sqr() - a.zbar_f.norm_sqr())).abs() < 1e-10 * (1.0 + a.lambda.abs()));
        // non-contact map
        let bad = HeisMap::from_exprs("bad", [Expr::x(), Expr::y(), Expr::t() + Expr::x()]);
        assert!(require_contact(&assess_contact(&bad, p).unwrap()).is_err());
    }
}
