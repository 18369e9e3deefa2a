//! Constants ledger: every constant-bearing identity gets its single free
//! constant fitted by an exact or jet oracle and compared with the printed one.

use num_complex::Complex64;
use serde::Serialize;

use super::{monomials, GaussRat, RatPoly};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fields::{flow_closed_form, quadratic_flow, scl_flow_derivative};
use crate::group::{sl2_map, word_to_map, ConformalWord, Generator, Point};
use crate::harmonic::{bochner_exact, gradient_exact, harmonic_poly_basis};
use crate::horizontal::{z_jet, Op};
use crate::map::HeisMap;
use crate::schwarzian::{claim3_direct, claim3_printed, cr_chain, left_cocycle, pf_gradient_ratio, s_cl};
use crate::TAU_REL;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Confirmed,
    Rescaled,
    Mismatch,
}

#[derive(Clone, Debug, Serialize)]
pub struct LedgerEntry {
    pub id: String,
    pub identity: String,
    pub paper_constant: String,
    /// Exact rational, or `None` where the arbitration is not a constant fit.
    pub fitted_constant: Option<String>,
    pub verdict: Verdict,
    pub witness: String,
}

/// Outcome of fitting `lhs = c · rhs` over a family.
#[derive(Clone, Debug, PartialEq)]
pub enum Fit {
    Constant(GaussRat),
    /// Every `rhs` vanished (and so did every `lhs`).
    Unconstrained,
}

/// Exact single-constant fit of `lhs = c · rhs` over all pairs.
pub fn fit_constant(id: &str, pairs: impl IntoIterator<Item = (RatPoly, RatPoly)>) -> Result<Fit> {
    let pairs: Vec<_> = pairs.into_iter().collect();
    let mut c = None;
    for (lhs, rhs) in &pairs {
        if let Some((m, rc)) = rhs.terms().next() {
            let inv = rc.inv().expect("canonical coefficients are nonzero");
            c = Some(&lhs.coeff(*m) * &inv);
            break;
        }
    }
    for (lhs, rhs) in &pairs {
        let pred = match &c {
            Some(c) => rhs.scale(c),
            None => RatPoly::zero(),
        };
        if &pred != lhs {
            return Err(Error::NoConsistentConstant {
                id: id.into(),
                detail: format!("lhs {lhs} vs c·rhs {pred}"),
            });
        }
    }
    Ok(c.map_or(Fit::Unconstrained, Fit::Constant))
}

/// Numeric single-constant fit `lhs ≈ c · term`, with `c` snapped to a small rational.
fn fit_numeric(id: &str, samples: &[(Complex64, Complex64)]) -> Result<GaussRat> {
    let fits: Vec<Complex64> = samples
        .iter()
        .filter(|(_, t)| t.norm() > 1e-6)
        .map(|(l, t)| l / t)
        .collect();
    let Some(&c0) = fits.first() else {
        return Err(Error::NoConsistentConstant {
            id: id.into(),
            detail: "term vanishes on every sample".into(),
        });
    };
    if let Some(bad) = fits.iter().find(|c| (**c - c0).norm() > 1e-6 * (1.0 + c0.norm())) {
        return Err(Error::NoConsistentConstant {
            id: id.into(),
            detail: format!("samples give {c0} and {bad}"),
        });
    }
    snap(c0).ok_or_else(|| Error::NoConsistentConstant {
        id: id.into(),
        detail: format!("{c0} is not a small rational"),
    })
}

fn snap(c: Complex64) -> Option<GaussRat> {
    let part = |v: f64| -> Option<GaussRat> {
        (1..=64i64).find_map(|d| {
            let n = (v * d as f64).round();
            ((v * d as f64 - n).abs() < 1e-6 * d as f64).then(|| GaussRat::ratio(n as i64, d))
        })
    };
    let (re, im) = (part(c.re)?, part(c.im)?);
    Some(&re + &(&im * &GaussRat::i()))
}

fn verdict(paper: &GaussRat, fitted: &GaussRat) -> Verdict {
    if paper == fitted {
        Verdict::Confirmed
    } else {
        Verdict::Rescaled
    }
}

fn exact_entry(
    id: &str,
    identity: &str,
    paper: GaussRat,
    pairs: Vec<(RatPoly, RatPoly)>,
    witness: &str,
) -> Result<LedgerEntry> {
    let fitted = match fit_constant(id, pairs)? {
        Fit::Constant(c) => c,
        Fit::Unconstrained => {
            return Err(Error::NoConsistentConstant {
                id: id.into(),
                detail: "right-hand side vanishes on every case".into(),
            })
        }
    };
    Ok(LedgerEntry {
        id: id.into(),
        identity: identity.into(),
        paper_constant: paper.to_string(),
        fitted_constant: Some(fitted.to_string()),
        verdict: verdict(&paper, &fitted),
        witness: witness.into(),
    })
}

fn int(n: i64) -> GaussRat {
    GaussRat::from_int(n)
}

/// Published closed form for `S_CL(f_s)`, `h = eˣ`.
pub fn exp_flow_printed(x: f64, s: f64) -> Complex64 {
    let w = x.exp() * s;
    let (w2, w4, w6) = (w * w, w.powi(4), w.powi(6));
    let den = (16.0 + 8.0 * w2 + w4).powi(2);
    Complex64::new(
        w2 * (272.0 + 104.0 * w2 + 17.0 * w4) / (8.0 * den),
        w * (-256.0 - 32.0 * w2 + 8.0 * w4 + 4.0 * w6) / (8.0 * den),
    )
}

/// Engine value of `S_CL(f_s)` for `h = eˣ` at `(x, 0, 0)`.
pub fn exp_flow_engine(x: f64, s: f64) -> Result<Complex64> {
    let f = flow_closed_form(&Expr::x().exp(), s)?;
    s_cl(&f, Point::new(x, 0.0, 0.0))
}

/// Result of arbitrating the eˣ closed form.
#[derive(Clone, Debug, Serialize)]
pub struct ExpFlowArbitration {
    pub grid: usize,
    pub max_rel_discrepancy: f64,
    pub worst: (f64, f64),
    pub engine_at_worst: [f64; 2],
    pub printed_at_worst: [f64; 2],
    /// Max over sampled `x` of the central-difference error against `−2iZ³Z̄v₀`.
    pub first_order_error: f64,
    /// Max deviation of `−2iZ³Z̄v₀` from `−(i/8)eˣ`.
    pub first_order_closed_error: f64,
    /// Max deviation of the engine from a function of `w = s·eˣ` alone.
    pub w_dependence_error: f64,
}

pub fn exp_flow_arbitration(n: usize) -> Result<ExpFlowArbitration> {
    let mut worst = (0.0, (0.0, 0.0), Complex64::default(), Complex64::default());
    for i in 0..n {
        let x = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
        for j in 1..=n {
            let s = 2.0 * j as f64 / n as f64;
            let e = exp_flow_engine(x, s)?;
            let pr = exp_flow_printed(x, s);
            let rel = (e - pr).norm() / pr.norm().max(1e-300);
            if rel > worst.0 {
                worst = (rel, (x, s), e, pr);
            }
        }
    }
    let v0 = Expr::x().exp();
    let h = 1e-4;
    let (mut fo, mut fc, mut wd) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..20 {
        let x = -1.0 + 2.0 * k as f64 / 19.0;
        let p = Point::new(x, 0.0, 0.0);
        let fd = (exp_flow_engine(x, h)? - exp_flow_engine(x, -h)?) / (2.0 * h);
        let d = scl_flow_derivative(&v0, p)?;
        fo = fo.max((fd - d).norm());
        fc = fc.max((d - Complex64::new(0.0, -x.exp() / 8.0)).norm());
        let s = 0.7;
        let lhs = exp_flow_engine(x, s)?;
        let rhs = exp_flow_engine(0.0, s * x.exp())?;
        wd = wd.max((lhs - rhs).norm() / (1.0 + rhs.norm()));
    }
    Ok(ExpFlowArbitration {
        grid: n,
        max_rel_discrepancy: worst.0,
        worst: worst.1,
        engine_at_worst: [worst.2.re, worst.2.im],
        printed_at_worst: [worst.3.re, worst.3.im],
        first_order_error: fo,
        first_order_closed_error: fc,
        w_dependence_error: wd,
    })
}

fn entry_f() -> Result<LedgerEntry> {
    let a = exp_flow_arbitration(21)?;
    if a.first_order_error > 1e-6 || a.first_order_closed_error > 1e-12 {
        return Err(Error::NoConsistentConstant {
            id: "f".into(),
            detail: format!(
                "first-order term disagrees: fd {:.3e}, closed {:.3e}",
                a.first_order_error, a.first_order_closed_error
            ),
        });
    }
    let verdict = if a.max_rel_discrepancy <= TAU_REL {
        Verdict::Confirmed
    } else {
        Verdict::Mismatch
    };
    let e0 = exp_flow_engine(0.0, 1.0)?;
    Ok(LedgerEntry {
        id: "f".into(),
        identity: "S_CL of the e^x potential flow against the printed closed form".into(),
        paper_constant: "closed form, 393/5000 - 276/5000 i at x=0, s=1".into(),
        fitted_constant: None,
        verdict,
        witness: format!(
            "max rel discrepancy {:.3e} at (x,s)=({},{}) engine {:.10}{:+.10}i printed {:.10}{:+.10}i; engine at (0,1) {:.10}{:+.10}i; O(s) term -(i/8)e^x matches (fd err {:.1e}); engine depends on s*e^x only (err {:.1e})",
            a.max_rel_discrepancy,
            a.worst.0,
            a.worst.1,
            a.engine_at_worst[0],
            a.engine_at_worst[1],
            a.printed_at_worst[0],
            a.printed_at_worst[1],
            e0.re,
            e0.im,
            a.first_order_error,
            a.w_dependence_error
        ),
    })
}

fn sample_points() -> [Point; 4] {
    [
        Point::new(0.3, -0.4, 0.2),
        Point::new(-0.7, 0.5, -0.3),
        Point::new(1.1, 0.2, 0.6),
        Point::new(-0.2, -0.9, 1.4),
    ]
}

fn contact_samples() -> Vec<HeisMap> {
    vec![
        flow_closed_form(&Expr::x().exp(), 0.6).expect("x-only potential"),
        quadratic_flow(0.7, -0.4, 0.2, 0.9),
        word_to_map(&ConformalWord::new(vec![
            Generator::Invert,
            Generator::Translate { p: Point::new(0.5, -1.5, 0.7) },
            Generator::Dilate { r: 1.3 },
        ])),
    ]
}

fn entry_g() -> Result<LedgerEntry> {
    let g = ConformalWord::new(vec![
        Generator::Invert,
        Generator::Translate { p: Point::new(1.0, 0.5, -0.4) },
    ]);
    let f = flow_closed_form(&Expr::x().exp(), 0.6)?;
    let mut samples = Vec::new();
    for p in sample_points() {
        let lc = left_cocycle(&g, &f, p)?;
        // rhs_printed − rhs = −(c−1)·term with coefficient c = 2 printed; fit lhs − base = k·term
        let term = lc.rhs - lc.rhs_printed;
        let base = lc.rhs + term;
        samples.push((base - lc.lhs, term));
    }
    let fitted = fit_numeric("g", &samples)?;
    let paper = int(2);
    Ok(LedgerEntry {
        id: "g".into(),
        identity: "left cocycle of S_CL: coefficient of (C/A)(Z^2 F)(Z Fbar)/ZF".into(),
        paper_constant: paper.to_string(),
        fitted_constant: Some(fitted.to_string()),
        verdict: verdict(&paper, &fitted),
        witness: format!("g = {}, f = {f}, jet samples at 4 points", g.label()),
    })
}

fn entry_h() -> Result<LedgerEntry> {
    let mut samples = Vec::new();
    for f in contact_samples() {
        for p in sample_points() {
            let m = f.eval_jets(p, 1)?;
            let [f1, f2, f3] = m.f.clone().map(|j| j.to_complex());
            let zf = |j: &crate::jet::Jet<Complex64>| z_jet(j).map(|z| z.value());
            let term = f2.value() * zf(&f1)? - f1.value() * zf(&f2)?;
            samples.push((zf(&f3)?, term));
        }
    }
    let fitted = fit_numeric("h", &samples)?;
    let paper = int(1);
    Ok(LedgerEntry {
        id: "h".into(),
        identity: "complex contact equation Zf3 = c(f2 Zf1 - f1 Zf2)".into(),
        paper_constant: paper.to_string(),
        fitted_constant: Some(fitted.to_string()),
        verdict: verdict(&paper, &fitted),
        witness: "three contact maps (e^x flow, quadratic flow, inversion word) at 4 points".into(),
    })
}

fn entry_i() -> Result<LedgerEntry> {
    let mut samples = Vec::new();
    for f in contact_samples() {
        for p in sample_points() {
            match pf_gradient_ratio(&f, p) {
                Ok(r) => samples.push((Complex64::new(r, 0.0), Complex64::new(1.0, 0.0))),
                Err(Error::Singular(_)) | Err(Error::NotPositive { .. }) => {}
                Err(e) => return Err(e),
            }
        }
    }
    let fitted = fit_numeric("i", &samples)?;
    let paper = int(1);
    Ok(LedgerEntry {
        id: "i".into(),
        identity: "|Pf| = c |grad_H J_F| / J_F".into(),
        paper_constant: paper.to_string(),
        fitted_constant: Some(fitted.to_string()),
        verdict: verdict(&paper, &fitted),
        witness: format!("{} jet samples on contact maps", samples.len()),
    })
}

fn entry_k() -> Result<LedgerEntry> {
    let f = word_to_map(&ConformalWord::new(vec![
        Generator::Invert,
        Generator::Translate { p: Point::new(0.7, 0.2, -0.4) },
    ]))
    .compose(&flow_closed_form(&Expr::x().exp(), 0.4)?);
    let inner = [
        sl2_map(1.5, 0.4, -0.25, 0.6),
        quadratic_flow(0.3, -0.2, 0.1, 0.7),
    ];
    let mut samples = Vec::new();
    for g in &inner {
        for p in sample_points() {
            let c = cr_chain(&f, g, p)?;
            samples.push((c.lhs - c.base, c.mixed + c.log_terms));
        }
    }
    let fitted = fit_numeric("k", &samples)?;
    let paper = int(1);
    Ok(LedgerEntry {
        id: "k".into(),
        identity: "S_CR chain rule: common coefficient of the Z G Z Gbar line and the two Z ln(lambda_f) lines".into(),
        paper_constant: paper.to_string(),
        fitted_constant: Some(fitted.to_string()),
        verdict: verdict(&paper, &fitted),
        witness: format!("f = {f}; g in {{sl2, quadratic flow}}; jet samples at 4 points"),
    })
}

fn entry_l() -> Result<LedgerEntry> {
    let mut samples = Vec::new();
    for abcd in [[2.0, 0.0, 0.0, 0.5], [1.5, 0.4, -0.25, 0.6]] {
        for p in sample_points() {
            samples.push((claim3_direct(abcd, p)?, claim3_printed(abcd, p) / -6.0));
        }
    }
    let fitted = fit_numeric("l", &samples)?;
    let paper = int(-6);
    let v = claim3_direct([2.0, 0.0, 0.0, 0.5], Point::new(1.0, 1.0, 0.0))?;
    Ok(LedgerEntry {
        id: "l".into(),
        identity: "S_CR(inversion o sl2) = c |G|^2 / N(g)^4 Z G Z Gbar".into(),
        paper_constant: paper.to_string(),
        fitted_constant: Some(fitted.to_string()),
        verdict: verdict(&paper, &fitted),
        witness: format!("diag(2,1/2) at (1,1,0): direct {:.10}, printed -1.3235294118", v.re),
    })
}

/// Runs every ledger arbitration; fails only if some identity admits no single constant.
pub fn ledger_run() -> Result<Vec<LedgerEntry>> {
    let basis = harmonic_poly_basis(5).basis;
    let grads: Vec<[RatPoly; 3]> = basis.iter().map(gradient_exact).collect();
    let mut out = Vec::new();

    let mut pairs = Vec::new();
    for [f1, f2, _] in &grads {
        pairs.push((f1.sublaplacian(), f2.derive(Op::T)));
        pairs.push((f2.sublaplacian(), -&f1.derive(Op::T)));
    }
    out.push(exact_entry(
        "a",
        "Delta_H f1 = c T f2 and Delta_H f2 = -c T f1 for f = (Xu, Yu, Tu)",
        int(8),
        pairs,
        "harmonic basis of weighted degree <= 5; u = t^2 - (2/3)(x^4+y^4) gives Delta_H f1 = -32x",
    )?);

    let mut pairs = Vec::new();
    for [f1, f2, _] in &grads {
        for f in [f1, f2] {
            pairs.push((f.sublaplacian().sublaplacian(), f.derive_word(&[Op::T, Op::T])));
        }
    }
    out.push(exact_entry(
        "b",
        "Delta_H^2 f_k = c T^2 f_k",
        int(-64),
        pairs,
        "harmonic basis of weighted degree <= 5",
    )?);

    out.push(exact_entry(
        "c",
        "1/2 Delta_H |grad_H u|^2 - |Hess_H u|^2 = c (Xu YTu - Yu XTu)",
        GaussRat::ratio(1, 2),
        basis.iter().map(bochner_exact).collect(),
        "harmonic basis of weighted degree <= 5",
    )?);

    // Δ ln J = c Re(Z̄ Z ln J), multiplied through by J²
    let half = GaussRat::ratio(1, 2);
    let mut pairs = Vec::new();
    for [f1, f2, _] in &grads {
        let j = &(&f1.derive(Op::X) * &f2.derive(Op::Y)) - &(&f1.derive(Op::Y) * &f2.derive(Op::X));
        let (jx, jy) = (j.derive(Op::X), j.derive(Op::Y));
        let lhs = &(&j * &j.sublaplacian()) - &(&(&jx * &jx) + &(&jy * &jy));
        let zj = j.derive(Op::Z);
        let zbzj = j.derive_word(&[Op::Z, Op::Zbar]);
        let re = |p: &RatPoly| (p + &p.conj()).scale(&half);
        let rhs = &(&j * &re(&zbzj)) - &re(&(&zj * &j.derive(Op::Zbar)));
        pairs.push((lhs, rhs));
    }
    out.push(exact_entry(
        "d",
        "Delta_H ln J_F = c Re(Zbar Pf), cleared of the J_F^2 denominator",
        int(8),
        pairs,
        "Jacobians of gradient maps of the harmonic basis of weighted degree <= 5",
    )?);

    let pairs = monomials(4, 2)
        .into_iter()
        .map(|m| {
            let p = RatPoly::monomial(m, GaussRat::one());
            let s = &p.derive_word(&[Op::Z, Op::Zbar]) + &p.derive_word(&[Op::Zbar, Op::Z]);
            (s.scale(&int(4)), p.sublaplacian())
        })
        .collect();
    out.push(exact_entry(
        "e",
        "4(Zbar Z + Z Zbar) = c Delta_H with Delta_H = X^2 + Y^2",
        int(1),
        pairs,
        "all monomials of weighted degree <= 4",
    )?);

    out.push(entry_f()?);
    out.push(entry_g()?);
    out.push(entry_h()?);
    out.push(entry_i()?);

    // λ_t = Tf3 − 2f2Tf1 + 2f1Tf2 for f = (Xu, Yu, Tu) against T²u + c·G
    let mut pairs = Vec::new();
    for (u, [f1, f2, f3]) in basis.iter().zip(&grads) {
        let two = int(2);
        let lam_t = &(&f3.derive(Op::T) - &(f2 * &f1.derive(Op::T)).scale(&two))
            + &(f1 * &f2.derive(Op::T)).scale(&two);
        let lhs = &lam_t - &u.derive_word(&[Op::T, Op::T]);
        let g = &(f1 * &f2.derive(Op::T)) - &(f2 * &f1.derive(Op::T));
        pairs.push((lhs, g));
    }
    let mut j = exact_entry(
        "j",
        "J_F = T^2 u + c (Xu TYu - Yu TXu) for contact gradient maps (growth step)",
        int(-2),
        pairs,
        "harmonic basis of weighted degree <= 5; the printed -2 reverses the bound J_F <= T^2 u",
    )?;
    if j.verdict == Verdict::Rescaled {
        j.verdict = Verdict::Mismatch;
    }
    out.push(j);
    out.push(entry_k()?);
    out.push(entry_l()?);
    Ok(out)
}
