//! Subelliptic harmonic polynomials, gradient harmonic maps `f = (Xu, Yu, Tu)`
//! and the identities and sign claims attached to them.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::ledger::{fit_constant, Fit};
use crate::exact::{linalg::nullspace, monomials, GaussRat, Monomial, RatPoly};
use crate::expr::{jet_eval, Expr, Var};
use crate::group::{koranyi_norm, radial_curve, Point};
use crate::horizontal::{sublaplacian_jet, t_jet, x_jet, y_jet, z_jet, zbar_jet, Op};
use crate::jet::Jet;
use crate::map::HeisMap;
use crate::TAU_ABS;

/// Exact basis of `{p : Δ_H p = 0}` in weighted degree `≤ degree`.
#[derive(Clone, Debug)]
pub struct HarmonicBasis {
    pub degree: u32,
    pub basis: Vec<RatPoly>,
}

pub fn harmonic_poly_basis(degree: u32) -> HarmonicBasis {
    let unknowns = monomials(degree, degree / 2);
    let n = unknowns.len();
    let mut rows: BTreeMap<Monomial, Vec<BigRational>> = BTreeMap::new();
    for (j, &m) in unknowns.iter().enumerate() {
        for (om, c) in RatPoly::monomial(m, GaussRat::one()).sublaplacian().terms() {
            rows.entry(*om).or_insert_with(|| vec![BigRational::zero(); n])[j] = c.re.clone();
        }
    }
    let basis = nullspace(rows.into_values().collect(), n)
        .into_iter()
        .map(|v| {
            unknowns.iter().zip(v).fold(RatPoly::zero(), |acc, (&m, c)| {
                &acc + &RatPoly::monomial(m, GaussRat::real(c))
            })
        })
        .collect();
    HarmonicBasis { degree, basis }
}

fn x_expr(e: &Expr) -> Expr {
    e.diff(Var::X) + Expr::real(2.0) * Expr::y() * e.diff(Var::T)
}

fn y_expr(e: &Expr) -> Expr {
    e.diff(Var::Y) - Expr::real(2.0) * Expr::x() * e.diff(Var::T)
}

/// `f = (Xu, Yu, Tu)` for a harmonic `u`.
#[derive(Clone, Debug)]
pub struct GradientHarmonicMap {
    pub u: Expr,
    pub f: [Expr; 3],
    pub map: HeisMap,
}

const HARMONIC_SAMPLES: [Point; 4] = [
    Point::new(0.3, -0.7, 0.2),
    Point::new(-1.1, 0.4, 0.9),
    Point::new(0.8, 0.8, -0.6),
    Point::new(0.05, -0.2, 1.3),
];

pub fn gradient_harmonic(u: &Expr) -> Result<GradientHarmonicMap> {
    match RatPoly::from_expr(u) {
        Ok(p) => {
            let lap = p.sublaplacian();
            if !lap.is_zero() {
                return Err(Error::NotHarmonic(format!("Δ_H({u}) = {lap}")));
            }
        }
        Err(_) => {
            for q in HARMONIC_SAMPLES {
                let j = jet_eval::<f64>(u, q, 2)?;
                let v = sublaplacian_jet(&j)?.value();
                if v.abs() > TAU_ABS * (1.0 + j.value().abs()) {
                    return Err(Error::NotHarmonic(format!("Δ_H({u}) = {v:.3e} at {q:?}")));
                }
            }
        }
    }
    let f = [x_expr(u), y_expr(u), u.diff(Var::T)];
    let map = HeisMap::from_exprs(format!("grad(u={u})"), f.clone());
    Ok(GradientHarmonicMap {
        u: u.clone(),
        f,
        map,
    })
}

/// `[Xu, Yu, Tu]` exactly.
pub fn gradient_exact(u: &RatPoly) -> [RatPoly; 3] {
    [u.derive(Op::X), u.derive(Op::Y), u.derive(Op::T)]
}

/// Exact `[Δf₁ − 8Tf₂, Δf₂ + 8Tf₁, Δf₃, Δ²f₁ + 64T²f₁, Δ²f₂ + 64T²f₂]`.
pub fn harmonic_system_exact(u: &RatPoly) -> [RatPoly; 5] {
    let [f1, f2, f3] = gradient_exact(u);
    let k = |n: i64| GaussRat::from_int(n);
    [
        &f1.sublaplacian() - &f2.derive(Op::T).scale(&k(8)),
        &f2.sublaplacian() + &f1.derive(Op::T).scale(&k(8)),
        f3.sublaplacian(),
        &f1.sublaplacian().sublaplacian() + &f1.derive_word(&[Op::T, Op::T]).scale(&k(64)),
        &f2.sublaplacian().sublaplacian() + &f2.derive_word(&[Op::T, Op::T]).scale(&k(64)),
    ]
}

/// Jets of `u` and of its horizontal gradient at one point.
struct GradJets {
    u: Jet<f64>,
    xu: Jet<f64>,
    yu: Jet<f64>,
    tu: Jet<f64>,
}

impl GradJets {
    fn new(u: &Expr, p: Point, order: usize) -> Result<Self> {
        let u = jet_eval::<f64>(u, p, order)?;
        Ok(GradJets {
            xu: x_jet(&u)?,
            yu: y_jet(&u)?,
            tu: t_jet(&u)?,
            u,
        })
    }

    fn big_f(&self) -> Jet<Complex64> {
        Jet::complexify(&self.xu, &self.yu)
    }

    /// `det D_H F` as a jet.
    fn jacobian(&self) -> Result<Jet<f64>> {
        let a = x_jet(&self.xu)?.mul_jet(&y_jet(&self.yu)?);
        let b = y_jet(&self.xu)?.mul_jet(&x_jet(&self.yu)?);
        Ok(a.sub_jet(&b))
    }

    /// `XuTYu − YuTXu` as a jet.
    fn geometric(&self) -> Result<Jet<f64>> {
        let a = self.xu.mul_jet(&t_jet(&self.yu)?);
        let b = self.yu.mul_jet(&t_jet(&self.xu)?);
        Ok(a.sub_jet(&b))
    }
}

/// The five residuals of the gradient-harmonic system at `p`.
pub fn harmonic_system_residuals(m: &GradientHarmonicMap, p: Point) -> Result<[f64; 5]> {
    let g = GradJets::new(&m.u, p, 5)?;
    let (f1, f2, f3) = (&g.xu, &g.yu, &g.tu);
    let l1 = sublaplacian_jet(f1)?;
    let l2 = sublaplacian_jet(f2)?;
    let tt = |j: &Jet<f64>| -> Result<f64> { Ok(t_jet(&t_jet(j)?)?.value()) };
    Ok([
        l1.value() - 8.0 * t_jet(f2)?.value(),
        l2.value() + 8.0 * t_jet(f1)?.value(),
        sublaplacian_jet(f3)?.value(),
        sublaplacian_jet(&l1)?.value() + 64.0 * tt(f1)?,
        sublaplacian_jet(&l2)?.value() + 64.0 * tt(f2)?,
    ])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HessianReport {
    pub det_hess: f64,
    pub det_hess_sym: f64,
    pub j_f: f64,
    pub gap: f64,
}

/// Horizontal Hessian determinant, its symmetrization, `J_F` and the gap `J_F − det Hess*`.
pub fn hessian_report(u: &Expr, p: Point) -> Result<HessianReport> {
    let g = GradJets::new(u, p, 2)?;
    let xf1 = x_jet(&g.xu)?.value();
    let yf1 = y_jet(&g.xu)?.value();
    let xf2 = x_jet(&g.yu)?.value();
    let yf2 = y_jet(&g.yu)?.value();
    // Hess_H u has rows (X²u, YXu), (XYu, Y²u) in the notation where the left letter acts last
    let det_hess = xf1 * yf2 - yf1 * xf2;
    let off = 0.5 * (yf1 + xf2);
    let det_hess_sym = xf1 * yf2 - off * off;
    let j_f = g.jacobian()?.value();
    Ok(HessianReport {
        det_hess,
        det_hess_sym,
        j_f,
        gap: j_f - det_hess_sym,
    })
}

/// `½Δ_H|∇_H u|² − ‖Hess u‖² − κ(XuYTu − YuXTu)`.
pub fn bochner_residual(u: &Expr, p: Point, kappa: f64) -> Result<f64> {
    let g = GradJets::new(u, p, 3)?;
    let grad2 = g.xu.mul_jet(&g.xu).add_jet(&g.yu.mul_jet(&g.yu));
    let lhs = 0.5 * sublaplacian_jet(&grad2)?.value();
    let hess: f64 = [x_jet(&g.xu)?, y_jet(&g.xu)?, x_jet(&g.yu)?, y_jet(&g.yu)?]
        .iter()
        .map(|j| j.value() * j.value())
        .sum();
    Ok(lhs - hess - kappa * g.geometric()?.value())
}

/// Exact Bochner pieces `(½Δ|∇u|² − ‖Hess‖², XuTYu − YuTXu)`.
pub fn bochner_exact(u: &RatPoly) -> (RatPoly, RatPoly) {
    let [xu, yu, _] = gradient_exact(u);
    let half = GaussRat::ratio(1, 2);
    let grad2 = &(&xu * &xu) + &(&yu * &yu);
    let hess = [xu.derive(Op::X), xu.derive(Op::Y), yu.derive(Op::X), yu.derive(Op::Y)]
        .iter()
        .fold(RatPoly::zero(), |acc, h| &acc + &(h * h));
    let lhs = &grad2.sublaplacian().scale(&half) - &hess;
    let geo = &(&xu * &yu.derive(Op::T)) - &(&yu * &xu.derive(Op::T));
    (lhs, geo)
}

/// The single Bochner constant fitted over the harmonic basis of degree ≤ 5.
pub fn determine_kappa() -> Result<GaussRat> {
    let basis = harmonic_poly_basis(5).basis;
    match fit_constant("bochner", basis.iter().map(bochner_exact))? {
        Fit::Constant(c) => Ok(c),
        Fit::Unconstrained => Err(Error::NoConsistentConstant {
            id: "bochner".into(),
            detail: "geometric term vanishes on the whole basis".into(),
        }),
    }
}

/// Axis-aligned grid `[lo, hi]` with `n` points per axis (a degenerate axis has `n = 1`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub x: (f64, f64, usize),
    pub y: (f64, f64, usize),
    pub t: (f64, f64, usize),
}

impl GridSpec {
    pub fn cube(lo: f64, hi: f64, n: usize) -> Self {
        GridSpec {
            x: (lo, hi, n),
            y: (lo, hi, n),
            t: (lo, hi, n),
        }
    }

    fn axis((lo, hi, n): (f64, f64, usize)) -> Vec<f64> {
        if n <= 1 {
            return vec![lo];
        }
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    /// Points in x-major order.
    pub fn points(&self) -> Vec<Point> {
        let (xs, ys, ts) = (Self::axis(self.x), Self::axis(self.y), Self::axis(self.t));
        let mut out = Vec::with_capacity(xs.len() * ys.len() * ts.len());
        for &x in &xs {
            for &y in &ys {
                for &t in &ts {
                    out.push(Point::new(x, y, t));
                }
            }
        }
        out
    }
}

/// One grid point of a sign scan for a gradient harmonic map.
#[derive(Clone, Debug, Serialize)]
pub struct SignRow {
    pub point: Point,
    pub zf2: f64,
    pub lap_zf2: f64,
    /// `None` where `ZF = 0`.
    pub lap_ln_zf2: Option<f64>,
    pub j_f: f64,
    pub lap_j: f64,
    /// `None` where `J_F ≤ 0`.
    pub lap_ln_j: Option<f64>,
    pub geometric: f64,
    pub lap_geometric: f64,
    pub lap_grad2: f64,
    pub mu_abs: Option<f64>,
    pub cond: [bool; 4],
    pub contact_residual: f64,
    pub singular: bool,
    pub violations: Vec<&'static str>,
}

/// Scan summary; `violations` must be zero.
#[derive(Clone, Debug, Serialize)]
pub struct SignReport {
    pub u: String,
    pub points: usize,
    pub singular_points: usize,
    pub geometric_nonneg_points: usize,
    pub quasiconformal_points: usize,
    pub violations: usize,
    pub first_violation: Option<String>,
    #[serde(skip)]
    pub rows: Vec<SignRow>,
}

fn sign_tol(scale: f64) -> f64 {
    1e-9 * (1.0 + scale.abs())
}

fn sign_row(u: &Expr, p: Point) -> Result<SignRow> {
    let g = GradJets::new(u, p, 4)?;
    let big_f = g.big_f();
    let zf = z_jet(&big_f)?;
    let zbf = zbar_jet(&big_f.truncate(1))?.value();
    let zf2 = zf.mul_jet(&zf.conj()).real_part();
    let lap_zf2 = sublaplacian_jet(&zf2)?.value();
    // ZF = −2iTu here, so rounding leaves |ZF|² ~ 1e-31 on {Tu = 0}
    let singular = zf.value().norm() <= 1e-10 * (1.0 + zbf.norm());
    let lap_ln_zf2 = if !singular {
        Some(sublaplacian_jet(&zf2.ln()?)?.value())
    } else {
        None
    };
    let j = g.jacobian()?;
    let lap_j = sublaplacian_jet(&j)?.value();
    let lap_ln_j = if j.value() > 0.0 {
        Some(sublaplacian_jet(&j.ln()?)?.value())
    } else {
        None
    };
    let geo = g.geometric()?;
    let grad2 = g.xu.mul_jet(&g.xu).add_jet(&g.yu.mul_jet(&g.yu));
    let lap_grad2 = sublaplacian_jet(&grad2)?.value();
    let zfv = zf.value();
    let mu_abs = (!singular).then(|| zbf.norm() / zfv.norm());

    let grad = |j: &Jet<f64>| -> Result<[f64; 2]> { Ok([x_jet(j)?.value(), y_jet(j)?.value()]) };
    let dot = |a: [f64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];
    let (gf1, gf2) = (grad(&g.xu)?, grad(&g.yu)?);
    let (gtf1, gtf2) = (grad(&t_jet(&g.xu)?)?, grad(&t_jet(&g.yu)?)?);
    let n = |a: [f64; 2]| dot(a, a).sqrt();
    let cond = [
        dot(gf1, gtf2) <= dot(gf2, gtf1),
        dot(gf1, gf1) + dot(gtf2, gtf2) <= dot(gf2, gf2) + dot(gtf1, gtf1),
        n(gf1) <= n(gf2) && n(gtf2) <= n(gtf1),
        n(gf1) <= n(gtf1) && n(gtf2) <= n(gf2),
    ];
    let (f1, f2) = (g.xu.value(), g.yu.value());
    let r1 = x_jet(&g.tu)?.value() - 2.0 * f2 * gf1[0] + 2.0 * f1 * gf2[0];
    let r2 = y_jet(&g.tu)?.value() - 2.0 * f2 * gf1[1] + 2.0 * f1 * gf2[1];

    let mut violations = Vec::new();
    if lap_zf2 < -sign_tol(zf2.value()) {
        violations.push("lap|ZF|^2 < 0");
    }
    if let Some(v) = lap_ln_zf2 {
        if v > sign_tol(0.0) {
            violations.push("lap ln|ZF|^2 > 0");
        }
    }
    let gv = geo.value();
    if gv >= 0.0 && lap_grad2 < -sign_tol(grad2.value()) {
        violations.push("lap|grad u|^2 < 0 with geometric term >= 0");
    }
    let det = j.value();
    if let Some(m) = mu_abs {
        let tol = sign_tol(zf2.value());
        if det.abs() > tol && (m < 1.0) != (det > 0.0) {
            violations.push("|mu| < 1 disagrees with det Hess > 0");
        }
    }
    Ok(SignRow {
        point: p,
        zf2: zf2.value(),
        lap_zf2,
        lap_ln_zf2,
        j_f: det,
        lap_j,
        lap_ln_j,
        geometric: gv,
        lap_geometric: sublaplacian_jet(&geo)?.value(),
        lap_grad2,
        mu_abs,
        cond,
        contact_residual: r1.abs().max(r2.abs()),
        singular,
        violations,
    })
}

/// Sign claims for the gradient harmonic map of `u` on every grid point.
pub fn subharmonicity_scan(m: &GradientHarmonicMap, grid: &GridSpec) -> Result<SignReport> {
    let rows = grid
        .points()
        .par_iter()
        .map(|&p| sign_row(&m.u, p))
        .collect::<Result<Vec<_>>>()?;
    let first_violation = rows
        .iter()
        .find(|r| !r.violations.is_empty())
        .map(|r| format!("{:?}: {}", r.point, r.violations.join("; ")));
    Ok(SignReport {
        u: m.u.to_string(),
        points: rows.len(),
        singular_points: rows.iter().filter(|r| r.singular).count(),
        geometric_nonneg_points: rows.iter().filter(|r| r.geometric >= 0.0).count(),
        quasiconformal_points: rows.iter().filter(|r| r.mu_abs.is_some_and(|m| m < 1.0)).count(),
        violations: rows.iter().filter(|r| !r.violations.is_empty()).count(),
        first_violation,
        rows,
    })
}

pub const SIGN_CSV_HEADER: &str = "x,y,t,zf2,lap_zf2,lap_ln_zf2,j_f,lap_j,lap_ln_j,geometric,lap_geometric,lap_grad2,mu_abs,cond1,cond2,cond3,cond4,contact_residual,status";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".into(), |v| format!("{v:.12e}"))
}

impl SignRow {
    pub fn csv(&self) -> String {
        let status = if !self.violations.is_empty() {
            "violation"
        } else if self.singular {
            "singular"
        } else {
            "ok"
        };
        format!(
            "{},{},{},{:.12e},{:.12e},{},{:.12e},{:.12e},{},{:.12e},{:.12e},{:.12e},{},{},{},{},{},{:.6e},{}",
            self.point.x,
            self.point.y,
            self.point.t,
            self.zf2,
            self.lap_zf2,
            opt(self.lap_ln_zf2),
            self.j_f,
            self.lap_j,
            opt(self.lap_ln_j),
            self.geometric,
            self.lap_geometric,
            self.lap_grad2,
            opt(self.mu_abs),
            self.cond[0] as u8,
            self.cond[1] as u8,
            self.cond[2] as u8,
            self.cond[3] as u8,
            self.contact_residual,
            status
        )
    }
}

/// One radial-curve sample of the growth-theorem ingredients.
#[derive(Clone, Debug, Serialize)]
pub struct GrowthRow {
    pub r: f64,
    pub point: Point,
    pub norm: f64,
    pub norm_error: f64,
    pub theta_dot: f64,
    pub j_f: f64,
    pub t2u: f64,
    pub geometric: f64,
    pub weighted_pf: Option<f64>,
    pub contact_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    pub u: String,
    pub alpha: f64,
    pub samples: usize,
    pub max_norm_error: f64,
    pub max_theta_dot: f64,
    /// `sup |Pf|(1 − N⁴)^α` over samples with `J_F > 0`.
    pub weighted_sup: f64,
    /// Contact residuals vanish on every sample.
    pub contact_on_set: bool,
    pub nonpositive_j_points: usize,
    /// Samples satisfying the full hypothesis (contact set, `J_F ≥ 0`, geometric term `≥ 0`).
    pub hypothesis_points: usize,
    /// Hypothesis samples with `J_F > T²u + τ`.
    pub bound_failures: usize,
    /// Samples with geometric term `≥ 0` and `J_F > T²u + τ`, ignoring the contact hypothesis.
    pub relaxed_bound_failures: usize,
    #[serde(skip)]
    pub rows: Vec<GrowthRow>,
}

/// Contact-form component `θ(γ̇)` of the radial curve, by central differences in `r`.
pub fn radial_theta_dot(r: f64, p: Point, h: f64) -> Result<f64> {
    let a = radial_curve(r - h, p)?;
    let b = radial_curve(r + h, p)?;
    let c = radial_curve(r, p)?;
    let d = |u: f64, v: f64| (v - u) / (2.0 * h);
    Ok(d(a.t, b.t) - 2.0 * c.y * d(a.x, b.x) + 2.0 * c.x * d(a.y, b.y))
}

pub fn growth_ingredients(
    m: &GradientHarmonicMap,
    p: Point,
    r_grid: &[f64],
    alpha: f64,
) -> Result<GrowthReport> {
    let n0 = koranyi_norm(p);
    let mut rows = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let q = radial_curve(r, p)?;
        let g = GradJets::new(&m.u, q, 3)?;
        let j = g.jacobian()?;
        let jv = j.value();
        let weighted_pf = if jv > 0.0 {
            let pf = z_jet(&j.ln()?.to_complex())?.value();
            let nq = koranyi_norm(q);
            Some(pf.norm() * (1.0 - nq.powi(4)).max(0.0).powf(alpha))
        } else {
            None
        };
        let (f1, f2) = (g.xu.value(), g.yu.value());
        let r1 = x_jet(&g.tu)?.value() - 2.0 * f2 * x_jet(&g.xu)?.value()
            + 2.0 * f1 * x_jet(&g.yu)?.value();
        let r2 = y_jet(&g.tu)?.value() - 2.0 * f2 * y_jet(&g.xu)?.value()
            + 2.0 * f1 * y_jet(&g.yu)?.value();
        let nq = koranyi_norm(q);
        rows.push(GrowthRow {
            r,
            point: q,
            norm: nq,
            norm_error: (nq - r * n0).abs(),
            theta_dot: radial_theta_dot(r, p, 1e-6 * r.max(1e-3))?,
            j_f: jv,
            t2u: t_jet(&t_jet(&g.u)?)?.value(),
            geometric: g.geometric()?.value(),
            weighted_pf,
            contact_residual: r1.abs().max(r2.abs()),
        });
    }
    let contact_on_set = rows.iter().all(|r| r.contact_residual <= 1e-9);
    let tol = 1e-10;
    let hyp = |r: &&GrowthRow| contact_on_set && r.j_f >= 0.0 && r.geometric >= 0.0;
    Ok(GrowthReport {
        u: m.u.to_string(),
        alpha,
        samples: rows.len(),
        max_norm_error: rows.iter().map(|r| r.norm_error).fold(0.0, f64::max),
        max_theta_dot: rows.iter().map(|r| r.theta_dot.abs()).fold(0.0, f64::max),
        weighted_sup: rows.iter().filter_map(|r| r.weighted_pf).fold(0.0, f64::max),
        contact_on_set,
        nonpositive_j_points: rows.iter().filter(|r| r.j_f <= 0.0).count(),
        hypothesis_points: rows.iter().filter(hyp).count(),
        bound_failures: rows.iter().filter(hyp).filter(|r| r.j_f > r.t2u + tol).count(),
        relaxed_bound_failures: rows
            .iter()
            .filter(|r| r.geometric >= 0.0 && r.j_f > r.t2u + tol)
            .count(),
        rows,
    })
}

pub const GROWTH_CSV_HEADER: &str =
    "r,x,y,t,norm,norm_error,theta_dot,j_f,t2u,geometric,weighted_pf,contact_residual";

impl GrowthRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{:.12e},{:.12e},{:.12e},{:.12e},{:.3e},{:.3e},{:.12e},{:.12e},{:.12e},{},{:.6e}",
            self.r,
            self.point.x,
            self.point.y,
            self.point.t,
            self.norm,
            self.norm_error,
            self.theta_dot,
            self.j_f,
            self.t2u,
            self.geometric,
            self.weighted_pf.map_or_else(|| "undefined".into(), |v| format!("{v:.12e}")),
            self.contact_residual
        )
    }
}

/// The five harmonic test functions used by the sign suites.
pub fn test_functions() -> Vec<Expr> {
    [
        "t",
        "t^2 - (2/3)*(x^4 + y^4)",
        "x*t - (2/3)*y^3",
        "y*t + (2/3)*x^3 + x^2 - y^2",
        "t^2 - (2/3)*(x^4 + y^4) + x*t - (2/3)*y^3 + x*y/2",
    ]
    .iter()
    .map(|s| Expr::parse(s).expect("static test function"))
    .collect()
}
