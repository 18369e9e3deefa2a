//! The twelve acceptance criteria as runnable checks, shared by `heis verify`
//! and the acceptance test target.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::ledger::{exp_flow_arbitration, exp_flow_engine, ledger_run, Verdict};
use crate::exact::{appendix_identities, monomials, reference_v0_basis, vzerosol_nullspace, GaussRat, RatPoly};
use crate::expr::{jet_eval, Expr};
use crate::fields::{flow_closed_form, flow_integrate, pushforward_w0, quadratic_flow, scl_flow_derivative, ContactVF};
use crate::group::{dilate, koranyi_norm, radial_curve, word_to_map, ConformalWord, Generator, Point};
use crate::harmonic::{
    gradient_exact, gradient_harmonic, growth_ingredients, harmonic_poly_basis, harmonic_system_exact,
    hessian_report, subharmonicity_scan, test_functions, GridSpec, SignRow, GROWTH_CSV_HEADER, SIGN_CSV_HEADER,
};
use crate::horizontal::{apply_word, Op, OperatorWord};
use crate::jet::fd_oracle;
use crate::map::HeisMap;
use crate::schwarzian::{
    claim1_residual, claim2_residual, claim3_closed_form, claim3_direct, cocycle_residual_right, cr_chain,
    left_cocycle, s_cl, s_cr, zh_one_builder,
};

/// Knobs shared by every criterion.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Overrides the primary tolerance of each criterion when set.
    pub tol: Option<f64>,
    /// Points per axis of the sign-suite grid.
    pub grid_n: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 7,
            tol: None,
            grid_n: 21,
        }
    }
}

impl SuiteConfig {
    fn rng(&self, id: u8) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ id as u64)
    }

    fn tol(&self, pinned: f64) -> f64 {
        self.tol.unwrap_or(pinned)
    }
}

/// One criterion's outcome; `rows` become the per-case CSV.
#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    pub detail: String,
    #[serde(skip)]
    pub csv_header: String,
    #[serde(skip)]
    pub rows: Vec<String>,
}

pub const CRITERIA: [(u8, &str); 12] = [
    (1, "conformal annihilation"),
    (2, "quadratic flows"),
    (3, "exponential flow arbitration"),
    (4, "right cocycle, chain rule, claims"),
    (5, "left cocycle"),
    (6, "potential nullspace and operator identities"),
    (7, "pushforward potentials"),
    (8, "gradient harmonic battery"),
    (9, "sign suites"),
    (10, "growth ingredients"),
    (11, "engine validation"),
    (12, "ZH = 1 constructor"),
];

/// Criteria run by each CLI suite.
pub fn suite_criteria(suite: &str) -> Option<&'static [u8]> {
    Some(match suite {
        "conformal" => &[1],
        "cocycles" => &[4, 5, 12],
        "vfields" => &[2, 3, 7, 11],
        "appendix" => &[6],
        "harmonic" => &[8, 9, 10],
        _ => return None,
    })
}

pub fn run_criterion(id: u8, cfg: &SuiteConfig) -> Result<CriterionResult> {
    let name = CRITERIA
        .iter()
        .find(|(i, _)| *i == id)
        .map(|(_, n)| n.to_string())
        .ok_or_else(|| Error::Shape(format!("no criterion {id}")))?;
    let mut r = match id {
        1 => c1(cfg),
        2 => c2(cfg),
        3 => c3(cfg),
        4 => c4(cfg),
        5 => c5(cfg),
        6 => c6(cfg),
        7 => c7(cfg),
        8 => c8(cfg),
        9 => c9(cfg),
        10 => c10(cfg),
        11 => c11(cfg),
        _ => c12(cfg),
    }?;
    r.id = id;
    r.name = name;
    Ok(r)
}

fn result(passed: bool, cases: usize, detail: String, header: &str, rows: Vec<String>) -> CriterionResult {
    CriterionResult {
        id: 0,
        name: String::new(),
        passed,
        cases,
        detail,
        csv_header: header.into(),
        rows,
    }
}

fn cube_point(rng: &mut impl Rng, half: f64) -> Point {
    Point::new(
        rng.gen_range(-half..half),
        rng.gen_range(-half..half),
        rng.gen_range(-half..half),
    )
}

/// Random point with Korányi norm uniform in `[lo, hi]`.
fn point_with_norm(rng: &mut impl Rng, lo: f64, hi: f64) -> Point {
    loop {
        let d = cube_point(rng, 1.0);
        let n = koranyi_norm(d);
        if n > 1e-3 {
            return dilate(d, rng.gen_range(lo..hi) / n);
        }
    }
}

/// Every point fed to an inversion along the word stays at norm ≥ `margin`.
fn clear_of_poles(w: &ConformalWord, p: Point, margin: f64) -> bool {
    let mut q = p;
    for g in w.generators.iter().rev() {
        if *g == Generator::Invert && koranyi_norm(q) < margin {
            return false;
        }
        match g.act(q) {
            Ok(next) if next.is_finite() && koranyi_norm(next) < 1e6 => q = next,
            _ => return false,
        }
    }
    true
}

fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / (1.0 + b.norm())
}

const POTENTIALS: [&str; 6] = ["exp(x)", "x^3", "sin(x)", "x^2 - x", "exp(-x)/2", "x^3/3 - x"];

fn random_flow(rng: &mut impl Rng) -> Result<HeisMap> {
    let h = Expr::parse(POTENTIALS[rng.gen_range(0..POTENTIALS.len())])?;
    flow_closed_form(&h, rng.gen_range(0.1..0.8))
}

fn c1(cfg: &SuiteConfig) -> Result<CriterionResult> {
    let tol = cfg.tol(1e-8);
    let mut rng = cfg.rng(1);
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for case in 0..200 {
        let w = ConformalWord::random_orientation_preserving(&mut rng, 6);
        let m = word_to_map(&w);
        let (p, a, b) = loop {
            let p = point_with_norm(&mut rng, 0.1, 3.0);
            if !clear_of_poles(&w, p, 0.05) {
                continue;
            }
            match (s_cr(&m, p), s_cl(&m, p)) {
                (Ok(a), Ok(b)) => break (p, a.norm(), b.norm()),
                (Err(Error::Singular(_)), _) | (_, Err(Error::Singular(_))) => continue,
                (Err(e), _) | (_, Err(e)) => return Err(e),
            }
        };
        worst = worst.max(a).max(b);
        rows.push(format!("{case},\"{}\",{},{},{},{a:.3e},{b:.3e}", w.label(), p.x, p.y, p.t));
    }
    Ok(result(
        worst <= tol,
        200,
        format!("max |S_CR|, |S_CL| = {worst:.2e} (tol {tol:.0e})"),
        "case,word,x,y,t,s_cr_abs,s_cl_abs",
        rows,
    ))
}

fn c2(cfg: &SuiteConfig) -> Result<CriterionResult> {
    let tol = cfg.tol(1e-9);
    let pts = [Point::new(0.3, -0.2, 0.5), Point::new(-0.8, 0.6, -0.1), Point::new(1.2, 1.0, 0.7)];
    let lin = |lo: f64, hi: f64, n: usize, i: usize| lo + (hi - lo) * i as f64 / (n - 1) as f64;
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for i in 0..10 {
        for j in 0..10 {
            for k in 0..5 {
                let (a, b, s) = (lin(-2.0, 2.0, 10, i), lin(-2.0, 2.0, 10, j), lin(0.25, 1.25, 5, k));
                let f = quadratic_flow(a, b, 0.5, s);
                let v = pts.iter().map(|&p| s_cl(&f, p).map(|v| v.norm())).sum::<Result<f64>>()?;
                worst = worst.max(v);
                rows.push(format!("{a},{b},{s},{v:.3e}"));
            }
        }
    }
    Ok(result(
        worst <= tol,
        500,
        format!("max |S_CL| = {worst:.2e} (tol {tol:.0e})"),
        "a,b,s,s_cl_abs_sum",
        rows,
    ))
}

fn c3(cfg: &SuiteConfig) -> Result<CriterionResult> {
    let tol = cfg.tol(1e-6);
    let mut rng = cfg.rng(3);
    let v0 = Expr::x().exp();
    let h = 1e-4;
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let x: f64 = rng.gen_range(-1.0..1.0);
        let fd = (exp_flow_engine(x, h)? - exp_flow_engine(x, -h)?) / (2.0 * h);
        let d = scl_flow_derivative(&v0, Point::new(x, 0.0, 0.0))?;
        let e = (fd - d).norm();
        worst = worst.max(e);
        rows.push(format!("{x},{},{},{},{},{e:.3e}", fd.re, fd.im, d.re, d.im));
    }
    let a = exp_flow_arbitration(21)?;
    let verdict = if a.max_rel_discrepancy <= crate::TAU_REL { "match" } else { "mismatch" };
    Ok(result(
        worst <= tol,
        20,
        format!(
            "O(s) check max err {worst:.2e} (tol {tol:.0e}); closed form {verdict}, max rel discrepancy {:.3e} at (x,s)=({},{})",
            a.max_rel_discrepancy, a.worst.0, a.worst.1
        ),
        "x,fd_re,fd_im,formula_re,formula_im,err",
        rows,
    ))
}

fn c4(cfg: &SuiteConfig) -> Result<CriterionResult> {
    let tol = cfg.tol(1e-8);
    let mut rng = cfg.rng(4);
    let mut rows = Vec::new();
    let mut worst = [0.0f64; 5];
    let labels = ["right", "chain", "claim1", "claim2", "claim3"];
    for case in 0..100 {
        let f = random_flow(&mut rng)?;
        let g = ConformalWord::random_orientation_preserving(&mut rng, 4);
        let gm = word_to_map(&g);
        let outer = ConformalWord::random_orientation_preserving(&mut rng, 3);
        let f_lam = word_to_map(&outer).compose(&f);
        let inner: HeisMap = if rng.gen_bool(0.5) {
            random_flow(&mut rng)?
        } else {
            let (a, b, c) = (rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            crate::group::sl2_map(a, b, c, (1.0 + b * c) / a)
        };
        let type1 = ConformalWord::make_type1(
            cube_point(&mut rng, 1.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(0.5..2.0),
            cube_point(&mut rng, 1.0),
        );
        let mut errs;
        let p = loop {
            let p = cube_point(&mut rng, 1.0);
            if koranyi_norm(p) < 0.1 || !clear_of_poles(&g, p, 0.05) {
                continue;
            }
            let q = match inner.apply(p) {
                Ok(q) => q,
                Err(_) => continue,
            };
            if !clear_of_poles(&outer, f.apply(p)?, 0.05) || !clear_of_poles(&outer, f.apply(q)?, 0.05) {
                continue;
            }
            let attempt = (|| -> Result<[f64; 5]> {
                let lhs = s_cl(&f.compose(&gm), p)?;
                let right = cocycle_residual_right(&f, &g, p)?.norm() / (1.0 + lhs.norm());
                let ch = cr_chain(&f_lam, &inner, p)?;
                let chain = rel_err(ch.lhs, ch.rhs);
                let l1 = s_cr(&f_lam.compose(&gm), p)?;
                let cl1 = claim1_residual(&f_lam, &g, p)?.norm() / (1.0 + l1.norm());
                let l2 = s_cr(&word_to_map(&type1).compose(&f_lam), p)?;
                let cl2 = claim2_residual(&type1, &f_lam, p)?.norm() / (1.0 + l2.norm());
                Ok([right, chain, cl1, cl2, 0.0])
            })();
            match attempt {
                Ok(e) => {
                    errs = e;
                    break p;
                }
                Err(Error::Singular(_)) | Err(Error::NotPositive { .. }) => continue,
                Err(e) => return Err(e),
            }
        };
        if case < 50 {
            let (a, b, c) = (rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let abcd = [a, b, c, (1.0 + b * c) / a];
            let q = point_with_norm(&mut rng, 0.2, 2.0);
            errs[4] = rel_err(claim3_direct(abcd, q)?, claim3_closed_form(abcd, q));
        }
        for k in 0..5 {
            worst[k] = worst[k].max(errs[k]);
        }
        rows.push(format!(
            "{case},\"{}\",{},{},{},{:.3e},{:.3e},{:.3e},{:.3e},{:.3e}",
            g.label(),
            p.x,
            p.y,
            p.t,
            errs[0],
            errs[1],
            errs[2],
            errs[3],
            errs[4]
        ));
    }
    let detail = labels
        .iter()
        .zip(worst)
        .map(|(l, w)| format!("{l} {w:.2e}"))
        .collect::<Vec<_>>()
        .join(", ");
    Ok(result(
        worst.iter().all(|w| *w <= tol),
        100,
        format!("max rel residuals: {detail} (tol {tol:.0e})"),
        "case,g,x,y,t,right,chain,claim1,claim2,claim3",
        rows,
    ))
}

fn c5(cfg: &SuiteConfig) -> Result<CriterionResult> {
    let tol = cfg.tol(1e-8);
    let sep = 1e-3;
    let mut rng = cfg.rng(5);
    let mut rows = Vec::new();
    let (mut w1, mut w2, mut min_gap) = (0.0f64, 0.0f64, f64::INFINITY);
    for case in 0..100 {
        let f = random_flow(&mut rng)?;
        let t1 = ConformalWord::make_type1(
            cube_point(&mut rng, 1.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(0.5..2.0),
            cube_point(&mut rng, 1.0),
        );
        let t2 = ConformalWord::make_type2(
            cube_point(&mut rng, 1.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(0.5..2.0),
            cube_point(&mut rng, 1.0),
        );
        let (p, e1, e2, gap) = loop {
            let p = cube_point(&mut rng, 1.0);
            let fp = f.apply(p)?;
            if !clear_of_poles(&t2, fp, 0.1) {
                continue;
            }
            let attempt = (|| -> Result<(f64, f64, f64)> {
                let sf = s_cl(&f, p)?;
                let s1 = s_cl(&word_to_map(&t1).compose(&f), p)?;
                let lc = left_cocycle(&t2, &f, p)?;
                Ok((rel_err(s1, sf), lc.residual().norm() / (1.0 + lc.lhs.norm()), (lc.lhs - sf).norm()))
            })();
            match attempt {
                Ok((a, b, c)) => break (p, a, b, c),
                Err(Error::Singular(_)) => continue,
                Err(e) => return Err(e),
            }
        };
        w1 = w1.max(e1);
        w2 = w2.max(e2);
        min_gap = min_gap.min(gap);
        rows.push(format!("{case},\"{}\",\"{}\",{},{},{},{e1:.3e},{e2:.3e},{gap:.3e}", t2.label(), f, p.x, p.y, p.t));
    }
    Ok(result(
        w1 <= tol && w2 <= tol && min_gap > sep,
        100,
        format!("type-1 max {w1:.2e}, inversion full-RHS max {w2:.2e} (tol {tol:.0e}); min |S_CL(g∘f) − S_CL(f)| {min_gap:.2e} (> {sep:.0e})"),
        "case,g,f,x,y,t,type1_residual,full_rhs_residual,gap",
        rows,
    ))
}

fn c6(_cfg: &SuiteConfig) -> Result<CriterionResult> {
    let start = Instant::now();
    let mut rows = Vec::new();
    let mut ok = true;
    for d in 4..=7 {
        let (dim, _) = vzerosol_nullspace(d);
        ok &= dim == 8;
        rows.push(format!("nullspace_dim_{d},{dim},{}", dim == 8));
    }
    for (i, v) in reference_v0_basis().iter().enumerate() {
        let z2 = v.derive_word(&[Op::Z, Op::Z]).is_zero();
        let t3 = v.derive_word(&[Op::T, Op::T, Op::T]).is_zero();
        ok &= z2 && t3;
        rows.push(format!("c{}_Z2_T3,{},{}", i + 1, v, z2 && t3));
    }
    let report = appendix_identities(6);
    for c in &report.checks {
        ok &= c.pass();
        rows.push(format!(
            "\"{}\",{},{}",
            c.name,
            c.cases,
            if c.pass() { "exact: pass".to_string() } else { format!("fail on {}", c.witness.clone().unwrap_or_default()) }
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 60.0;
    Ok(result(
        ok,
        rows.len(),
        format!("dims 8 at degrees 4-7, {} identities exact, {secs:.1}s", report.checks.len()),
        "check,value,pass",
        rows,
    ))
}

fn c7(cfg: &SuiteConfig) -> Result<CriterionResult> {
    let tol = cfg.tol(1e-8);
    let mut rng = cfg.rng(7);
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for case in 0..50 {
        let w = ConformalWord::random_orientation_preserving(&mut rng, 4);
        let m = word_to_map(&w);
        let p = loop {
            let p = point_with_norm(&mut rng, 0.2, 2.0);
            if clear_of_poles(&w, p, 0.1) {
                break p;
            }
        };
        let mut line = format!("{case},\"{}\",{},{},{}", w.label(), p.x, p.y, p.t);
        for k in [4, 5, 6, 8] {
            let (w0, z2) = pushforward_w0(&m, k, p)?;
            let e = z2.norm() / (1.0 + w0.abs());
            worst = worst.max(e);
            line.push_str(&format!(",{e:.3e}"));
        }
        rows.push(line);
    }
    Ok(result(
        worst <= tol,
        50,
        format!("max |Z²w₀| / (1 + |w₀|) = {worst:.2e} (tol {tol:.0e})"),
        "case,word,x,y,t,case4,case5,case6,case8",
        rows,
    ))
}

fn c8(_cfg: &SuiteConfig) -> Result<CriterionResult> {
    let basis = harmonic_poly_basis(5).basis;
    let mut rows = Vec::new();
    let mut ok = true;
    for (i, u) in basis.iter().enumerate() {
        let sys = harmonic_system_exact(u);
        let zero = sys.iter().all(RatPoly::is_zero);
        // J_F from the gradient map against the Hessian determinant evaluated by jets
        let [f1, f2, _] = gradient_exact(u);
        let j = &(&f1.derive(Op::X) * &f2.derive(Op::Y)) - &(&f1.derive(Op::Y) * &f2.derive(Op::X));
        let p = Point::new(0.3 + 0.01 * i as f64, -0.7, 0.4);
        let h = hessian_report(&u.to_expr(), p)?;
        let jv = j.eval(p).re;
        let hess_ok = (h.det_hess - jv).abs() <= 1e-12 * (1.0 + jv.abs());
        ok &= zero && hess_ok;
        rows.push(format!("{i},\"{u}\",{zero},{hess_ok}"));
    }
    let ledger = ledger_run()?;
    let get = |id: &str| ledger.iter().find(|e| e.id == id).cloned();
    let (a, b, c, d) = (get("a"), get("b"), get("c"), get("d"));
    let all = [&a, &b, &c, &d];
    ok &= all.iter().all(|e| e.as_ref().is_some_and(|e| e.fitted_constant.is_some()));
    ok &= a.as_ref().is_some_and(|e| e.verdict == Verdict::Confirmed);
    let detail = all
        .iter()
        .filter_map(|e| e.as_ref())
        .map(|e| {
            format!(
                "({}) {} vs printed {} [{:?}]",
                e.id,
                e.fitted_constant.clone().unwrap_or_default(),
                e.paper_constant,
                e.verdict
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    Ok(result(
        ok,
        basis.len(),
        format!("{} basis elements exact; {detail}", basis.len()),
        "index,u,system_zero,det_hess_eq_jf",
        rows,
    ))
}

fn c9(cfg: &SuiteConfig) -> Result<CriterionResult> {
    let grid = GridSpec::cube(-1.0, 1.0, cfg.grid_n);
    let mut rows = Vec::new();
    let mut total = 0;
    let mut details = Vec::new();
    for u in test_functions() {
        let m = gradient_harmonic(&u)?;
        let r = subharmonicity_scan(&m, &grid)?;
        total += r.violations;
        details.push(format!("{}: {} pts, {} singular, {} violations", r.u, r.points, r.singular_points, r.violations));
        rows.extend(r.rows.iter().map(|row: &SignRow| format!("\"{}\",{}", r.u, row.csv())));
    }
    Ok(result(
        total == 0,
        rows.len(),
        details.join("; "),
        &format!("u,{SIGN_CSV_HEADER}"),
        rows,
    ))
}

fn c10(cfg: &SuiteConfig) -> Result<CriterionResult> {
    let mut rng = cfg.rng(10);
    let r_grid: Vec<f64> = (1..=19).map(|k| k as f64 * 0.05).collect();
    let mut points = Vec::new();
    while points.len() < 20 {
        let d = cube_point(&mut rng, 1.0);
        let n = koranyi_norm(d);
        if n > 1e-3 && d.z().norm() > 1e-2 {
            points.push(dilate(d, 1.0 / n));
        }
    }
    let mut us = test_functions();
    us.push(Expr::parse("x + 2*y")?);
    let (mut norm_err, mut theta) = (0.0f64, 0.0f64);
    let (mut hyp, mut fails, mut relaxed, mut samples) = (0, 0, 0, 0);
    let mut rows = Vec::new();
    let mut contact_us = Vec::new();
    for u in &us {
        let m = gradient_harmonic(u)?;
        let mut contact_everywhere = true;
        for &p in &points {
            let g = growth_ingredients(&m, p, &r_grid, 1.0)?;
            contact_everywhere &= g.contact_on_set;
            norm_err = norm_err.max(g.max_norm_error);
            theta = theta.max(g.max_theta_dot);
            hyp += g.hypothesis_points;
            fails += g.bound_failures;
            relaxed += g.relaxed_bound_failures;
            samples += g.samples;
            rows.extend(g.rows.iter().map(|r| format!("\"{}\",{}", g.u, r.csv())));
        }
        if contact_everywhere {
            contact_us.push(u.to_string());
        }
    }
    // the radial curve itself on exact unit-sphere points
    for &p in &points {
        for &r in &r_grid {
            let q = radial_curve(r, p)?;
            norm_err = norm_err.max((koranyi_norm(q) - r).abs());
        }
    }
    Ok(result(
        norm_err <= 1e-9 && theta <= 1e-8 && fails == 0,
        samples,
        format!(
            "max |N(γ) − rN(p)| {norm_err:.2e}, max |θ(γ')| {theta:.2e}; J_F ≤ T²u + 1e-10 on {hyp} hypothesis samples with {fails} failures (contact maps: {}); dropping contact, {relaxed} of {samples} samples violate the bound",
            contact_us.join(", ")
        ),
        &format!("u,{GROWTH_CSV_HEADER}"),
        rows,
    ))
}

const CORPUS: [&str; 30] = [
    "x*y*t",
    "x^3 - 3*x*y^2 + t",
    "exp(x + y)",
    "sin(x)*cos(t)",
    "ln(2 + x^2 + y^2)",
    "sqrt(1 + x^2 + t^2)",
    "1/(1 + x^2 + y^2)",
    "exp(-t^2)*x",
    "(x^2 + y^2)^2 + t^2",
    "cos(x*y) + sin(t)",
    "x*exp(y)*t",
    "t^3 - x*y",
    "(1 + x)/(2 + y^2)",
    "exp(x)*sin(y)",
    "ln(3 + sin(x*t))",
    "sqrt(4 + x*y)",
    "x^4*y - t^2*x",
    "sin(x + 2*y - t)",
    "exp(x*y*t)",
    "y^5 - x*t^2",
    "cos(x)^2 - sin(y)",
    "1/(3 + t) + x",
    "x/(1 + y^2 + t^2)",
    "exp(-x^2 - y^2)",
    "ln(1 + exp(t))",
    "t*sin(x)*exp(y)",
    "(x - y)^3*t",
    "sqrt(2 + cos(x + t))",
    "x*y/(1 + t^2)",
    "exp(sin(x))*y",
];

fn c11(cfg: &SuiteConfig) -> Result<CriterionResult> {
    let mut rng = cfg.rng(11);
    let mut rows = Vec::new();
    let mut fd_worst = 0.0f64;
    for src in CORPUS {
        let e = Expr::parse(src)?;
        let p = cube_point(&mut rng, 0.5);
        let j = jet_eval::<f64>(&e, p, 3)?;
        let f = |q: Point| -> Result<f64> { jet_eval::<f64>(&e, q, 0).map(|j| j.value()) };
        for &ix in j.indices() {
            let exact = j.partial(ix)?;
            let order: usize = ix.iter().sum();
            let h = if order == 3 { 2e-3 } else { 1e-3 };
            // Richardson step removes the O(h²) stencil error
            let approx = (4.0 * fd_oracle(f, p, ix, h / 2.0)? - fd_oracle(f, p, ix, h)?) / 3.0;
            let err = (exact - approx).abs() / (1.0 + exact.abs());
            fd_worst = fd_worst.max(err);
        }
        rows.push(format!("fd,\"{src}\",{fd_worst:.3e}"));
    }

    let mons = monomials(5, 2);
    let ops = [Op::X, Op::Y, Op::T, Op::Z, Op::Zbar];
    let mut exact_worst = 0.0f64;
    for case in 0..50 {
        let mut poly = RatPoly::zero();
        for _ in 0..4 {
            let m = mons[rng.gen_range(0..mons.len())];
            poly = &poly + &RatPoly::monomial(m, GaussRat::ratio(rng.gen_range(-9..=9), rng.gen_range(1..=4)));
        }
        let word: Vec<Op> = (0..rng.gen_range(1..=3)).map(|_| ops[rng.gen_range(0..5)]).collect();
        let p = cube_point(&mut rng, 1.0);
        let ex = poly.derive_word(&word).eval(p);
        let jt = apply_word(&OperatorWord::new(word.clone()), &poly.to_expr(), p)?;
        let err = (ex - jt).norm() / ex.norm().max(1.0);
        exact_worst = exact_worst.max(err);
        rows.push(format!("exact,{case},{err:.3e}"));
    }

    let mut rk_worst = 0.0f64;
    for src in ["exp(x)", "x^3", "x^2 - x", "sin(x)"] {
        let h = Expr::parse(src)?;
        let vf = ContactVF::new(h.clone());
        for _ in 0..5 {
            let p = cube_point(&mut rng, 1.0);
            let s = rng.gen_range(0.1..1.0);
            let a = flow_integrate(&vf, p, s, 2000)?;
            let b = flow_closed_form(&h, s)?.apply(p)?;
            let err = [(a.x - b.x), (a.y - b.y), (a.t - b.t)].iter().map(|d| d.abs()).fold(0.0, f64::max);
            rk_worst = rk_worst.max(err);
            rows.push(format!("rk4,\"{src}\",{err:.3e}"));
        }
    }
    Ok(result(
        fd_worst <= 1e-6 && exact_worst <= 1e-12 && rk_worst <= 1e-8,
        CORPUS.len() + 50 + 20,
        format!("jet vs fd {fd_worst:.2e} (1e-6), jet vs exact {exact_worst:.2e} (1e-12), rk4 vs closed {rk_worst:.2e} (1e-8)"),
        "kind,case,err",
        rows,
    ))
}

fn c12(cfg: &SuiteConfig) -> Result<CriterionResult> {
    let tol = cfg.tol(1e-10);
    let mut rng = cfg.rng(12);
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    // Re and Im of (x + iy)^k
    let z = &RatPoly::var(0) + &(&RatPoly::var(1) * &RatPoly::constant(GaussRat::i()));
    for case in 0..10 {
        let mut q = RatPoly::zero();
        for k in 0..=4u32 {
            let zk = z.pow(k);
            for part in [zk.re(), zk.im()] {
                let c = GaussRat::ratio(rng.gen_range(-16..=16), 8);
                q = &q + &part.scale(&c);
            }
        }
        let q = q.to_expr();
        let (c1, c2, c3) = (
            (rng.gen_range(-2.0f64..2.0) * 4.0).round() / 4.0,
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let h = zh_one_builder(&q, c1, c2, c3)?;
        let mut case_worst = 0.0f64;
        for _ in 0..100 {
            let p = cube_point(&mut rng, 1.5);
            let zh = apply_word(&OperatorWord::new(vec![Op::Z]), &h, p)?;
            case_worst = case_worst.max((zh - 1.0).norm());
        }
        worst = worst.max(case_worst);
        rows.push(format!("{case},\"{q}\",{c1},{c2},{c3},{case_worst:.3e}"));
    }
    Ok(result(
        worst <= tol,
        1000,
        format!("max |ZH − 1| = {worst:.2e} (tol {tol:.0e})"),
        "case,q,c1,c2,c3,max_err",
        rows,
    ))
}
