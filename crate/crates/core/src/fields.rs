//! Contact vector fields `V = v₁X + v₂Y − 4v₀T` generated by a potential
//! `v₀`, the eight-parameter conformal family, pushforward potentials and flows.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{jet_eval, Expr, Var};
use crate::group::Point;
use crate::horizontal::{
    assess_jets, lambda_jet, require_contact, x_jet, y_jet, z_jet, Op, OperatorWord,
};
use crate::jet::Jet;
use crate::map::HeisMap;

/// Contact field determined by its potential.
#[derive(Clone, Debug)]
pub struct ContactVF {
    pub v0: Expr,
    comps: [Expr; 3],
}

fn x_expr(e: &Expr) -> Expr {
    e.diff(Var::X) + Expr::real(2.0) * Expr::y() * e.diff(Var::T)
}

fn y_expr(e: &Expr) -> Expr {
    e.diff(Var::Y) - Expr::real(2.0) * Expr::x() * e.diff(Var::T)
}

impl ContactVF {
    pub fn new(v0: Expr) -> Self {
        let v1 = y_expr(&v0);
        let v2 = -x_expr(&v0);
        let k = Expr::real;
        let tdot = k(2.0) * Expr::y() * v1.clone() - k(2.0) * Expr::x() * v2.clone() - k(4.0) * v0.clone();
        ContactVF {
            v0,
            comps: [v1, v2, tdot],
        }
    }

    /// `v₁ = Yv₀`.
    pub fn v1(&self) -> &Expr {
        &self.comps[0]
    }

    /// `v₂ = −Xv₀`.
    pub fn v2(&self) -> &Expr {
        &self.comps[1]
    }

    /// Coordinate velocity `(ẋ, ẏ, ṫ)`.
    pub fn velocity(&self, p: Point) -> Result<[f64; 3]> {
        let env = [p.x, p.y, p.t];
        Ok([
            self.comps[0].eval(&env)?,
            self.comps[1].eval(&env)?,
            self.comps[2].eval(&env)?,
        ])
    }
}

/// Coefficients `c₁..c₈` of the conformal potential family.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConformalVFCoeffs(pub [f64; 8]);

/// `c₁(x⁴+2x²y²+y⁴+t²) + c₂(ty−xy²−x³) + c₃(tx+x²y+y³) + c₄(x²+y²) + c₅x + c₆y + c₇t + c₈`.
pub fn conformal_v0(c: &ConformalVFCoeffs) -> Expr {
    const BASIS: [&str; 8] = [
        "x^4 + 2*x^2*y^2 + y^4 + t^2",
        "t*y - x*y^2 - x^3",
        "t*x + x^2*y + y^3",
        "x^2 + y^2",
        "x",
        "y",
        "t",
        "1",
    ];
    c.0.iter()
        .zip(BASIS)
        .filter(|(k, _)| **k != 0.0)
        .fold(Expr::real(0.0), |acc, (k, s)| {
            acc + Expr::real(*k) * Expr::parse(s).expect("static basis")
        })
}

/// `Z²v₀` together with the real pair `(X²−Y²)v₀` and `(XY+YX)v₀`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConformalResidual {
    pub z2: Complex64,
    pub x2_minus_y2: f64,
    pub xy_plus_yx: f64,
}

pub fn conformal_residual(v0: &Expr, p: Point) -> Result<ConformalResidual> {
    let j = jet_eval::<f64>(v0, p, 2)?;
    let (xj, yj) = (x_jet(&j)?, y_jet(&j)?);
    let xx = x_jet(&xj)?.value();
    let yy = y_jet(&yj)?.value();
    let xy = x_jet(&yj)?.value() + y_jet(&xj)?.value();
    let jc = j.to_complex();
    let z2 = z_jet(&z_jet(&jc)?)?.value();
    Ok(ConformalResidual {
        z2,
        x2_minus_y2: xx - yy,
        xy_plus_yx: xy,
    })
}

/// Potential `w₀ = λ_f⁻¹ · P(f)` of case `1..=8` at `p`, and `Z²w₀` there.
pub fn pushforward_w0(f: &HeisMap, case: usize, p: Point) -> Result<(f64, Complex64)> {
    if !(1..=8).contains(&case) {
        return Err(Error::Shape(format!("pushforward case must be 1..=8, got {case}")));
    }
    let m = f.eval_jets(p, 3)?;
    require_contact(&assess_jets(&m)?)?;
    let lam = lambda_jet(&m)?;
    let inv = lam.recip()?;
    let [f1, f2, f3] = [m.f[0].truncate(2), m.f[1].truncate(2), m.f[2].truncate(2)];
    let r2 = f1.mul_jet(&f1).add_jet(&f2.mul_jet(&f2));
    let one = Jet::constant(p, 2, 1.0);
    let pj = match case {
        1 => f3.mul_jet(&f3).add_jet(&r2.mul_jet(&r2)),
        2 => f3.mul_jet(&f2).sub_jet(&f1.mul_jet(&r2)),
        3 => f3.mul_jet(&f1).add_jet(&f2.mul_jet(&r2)),
        4 => r2,
        5 => f1,
        6 => f2,
        7 => f3,
        _ => one,
    };
    let w = inv.mul_jet(&pj);
    let z2 = z_jet(&z_jet(&w.to_complex())?)?.value();
    Ok((w.value(), z2))
}

/// `f_s(z,t) = (z − i s h'(x), t + s(2x h'(x) − 4h(x)))` for a potential `h(x)`.
pub fn flow_closed_form(h: &Expr, s: f64) -> Result<HeisMap> {
    let samples = [
        Point::new(0.0, 0.0, 0.0),
        Point::new(0.37, -1.3, 0.8),
        Point::new(-0.9, 2.1, -1.7),
    ];
    for v in [Var::Y, Var::T] {
        let d = h.diff(v);
        for q in samples {
            let val: Complex64 = d.eval(&[q.x, q.y, q.t].map(|c| Complex64::new(c, 0.0)))?;
            if val.norm() > 0.0 {
                return Err(Error::BadPotential(format!("`{h}` depends on {v:?}")));
            }
        }
    }
    let hp = h.diff(Var::X);
    let k = Expr::real;
    let comps = [
        Expr::x(),
        Expr::y() - k(s) * hp.clone(),
        Expr::t() + k(s) * (k(2.0) * Expr::x() * hp - k(4.0) * h.clone()),
    ];
    Ok(HeisMap::from_exprs(format!("flow(h={h},s={s})"), comps))
}

/// The quadratic-potential flow `h = ax² + bx + c`.
pub fn quadratic_flow(a: f64, b: f64, c: f64, s: f64) -> HeisMap {
    let h = Expr::real(a) * Expr::x().powi(2) + Expr::real(b) * Expr::x() + Expr::real(c);
    flow_closed_form(&h, s).expect("quadratic potential depends on x only")
}

/// Classical RK4 for `ṗ = V(p)` over time `s` in `steps` equal steps.
pub fn flow_integrate(vf: &ContactVF, p: Point, s: f64, steps: usize) -> Result<Point> {
    if steps == 0 {
        return Err(Error::Shape("flow_integrate needs at least one step".into()));
    }
    let h = s / steps as f64;
    let add = |p: Point, k: [f64; 3], c: f64| Point::new(p.x + c * k[0], p.y + c * k[1], p.t + c * k[2]);
    let mut q = p;
    for _ in 0..steps {
        let k1 = vf.velocity(q)?;
        let k2 = vf.velocity(add(q, k1, h / 2.0))?;
        let k3 = vf.velocity(add(q, k2, h / 2.0))?;
        let k4 = vf.velocity(add(q, k3, h))?;
        q = Point::new(
            q.x + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            q.y + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            q.t + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
        );
    }
    Ok(q)
}

/// Time-`s` map of a field, evaluated by integration; derivatives by central differences.
#[derive(Clone, Debug)]
pub struct TabulatedFlow {
    pub vf: ContactVF,
    pub s: f64,
    pub steps: usize,
}

/// Finite-difference horizontal data of a pointwise map.
#[derive(Clone, Copy, Debug)]
pub struct FdContact {
    pub r1: f64,
    pub r2: f64,
    pub zf: Complex64,
    pub zbar_f: Complex64,
    pub lambda: f64,
}

impl TabulatedFlow {
    pub fn new(vf: ContactVF, s: f64, steps: usize) -> Self {
        TabulatedFlow { vf, s, steps }
    }

    pub fn apply(&self, p: Point) -> Result<Point> {
        flow_integrate(&self.vf, p, self.s, self.steps)
    }

    /// Contact residuals and `Z̄F` from central differences with step `h`.
    pub fn fd_contact(&self, p: Point, h: f64) -> Result<FdContact> {
        let d = |dx: f64, dy: f64, dt: f64| -> Result<[f64; 3]> {
            let a = self.apply(Point::new(p.x + dx * h, p.y + dy * h, p.t + dt * h))?;
            let b = self.apply(Point::new(p.x - dx * h, p.y - dy * h, p.t - dt * h))?;
            Ok([
                (a.x - b.x) / (2.0 * h),
                (a.y - b.y) / (2.0 * h),
                (a.t - b.t) / (2.0 * h),
            ])
        };
        let (px, py, pt) = (d(1.0, 0.0, 0.0)?, d(0.0, 1.0, 0.0)?, d(0.0, 0.0, 1.0)?);
        let xf: Vec<f64> = (0..3).map(|i| px[i] + 2.0 * p.y * pt[i]).collect();
        let yf: Vec<f64> = (0..3).map(|i| py[i] - 2.0 * p.x * pt[i]).collect();
        let f = self.apply(p)?;
        let r1 = xf[2] - 2.0 * f.y * xf[0] + 2.0 * f.x * xf[1];
        let r2 = yf[2] - 2.0 * f.y * yf[0] + 2.0 * f.x * yf[1];
        let xb = Complex64::new(xf[0], xf[1]);
        let yb = Complex64::new(yf[0], yf[1]);
        let i = Complex64::new(0.0, 1.0);
        Ok(FdContact {
            r1,
            r2,
            zf: 0.5 * (xb - i * yb),
            zbar_f: 0.5 * (xb + i * yb),
            lambda: xf[0] * yf[1] - yf[0] * xf[1],
        })
    }
}

/// `−2i Z³Z̄v₀`, the first variation of `S_CL` along the flow of `v₀`.
pub fn scl_flow_derivative(v0: &Expr, p: Point) -> Result<Complex64> {
    let w = OperatorWord::new(vec![Op::Zbar, Op::Z, Op::Z, Op::Z]);
    let j = jet_eval::<Complex64>(v0, p, 4)?;
    Ok(Complex64::new(0.0, -2.0) * w.apply_jet(&j)?.value())
}
