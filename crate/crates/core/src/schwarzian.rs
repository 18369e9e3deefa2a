//! The CR Schwarzian, the classical-type Schwarzian and the Preschwarzian,
//! with the chain-rule and cocycle residuals that relate them under composition.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exact::{GaussRat, RatPoly};
use crate::expr::{jet_eval, Expr};
use crate::group::{koranyi_norm, word_to_map, ConformalWord, Generator, Point};
use crate::horizontal::{
    assess_jets, lambda_jet, require_contact, x_jet, y_jet, z_jet, zbar_jet, Op, OperatorWord,
};
use crate::jet::Jet;
use crate::map::{HeisMap, MapJets};

/// Jet order used for Schwarzian evaluation (three derivatives of the map).
pub const SCHWARZIAN_ORDER: usize = 3;

fn cplx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Map jets at `p`, rejecting non-contact maps.
pub fn contact_jets(f: &HeisMap, p: Point, order: usize) -> Result<MapJets> {
    let m = f.eval_jets(p, order)?;
    require_contact(&assess_jets(&m)?)?;
    Ok(m)
}

fn positive_lambda(m: &MapJets) -> Result<Jet<f64>> {
    let lam = lambda_jet(m)?;
    if lam.value() <= 0.0 {
        return Err(Error::NotPositive {
            lambda: lam.value(),
        });
    }
    Ok(lam)
}

/// `½ λ Z²(λ⁻¹)` from map jets of order ≥ 3.
pub fn s_cr_of(m: &MapJets) -> Result<Complex64> {
    let lam = positive_lambda(m)?;
    let inv = lam.recip()?.to_complex();
    let z2 = z_jet(&z_jet(&inv)?)?;
    Ok(0.5 * lam.value() * z2.value())
}

/// `2(Z²φ − 2(Zφ)²)` with `φ = ½ ln λ`.
pub fn b_theta_coeff_of(m: &MapJets) -> Result<Complex64> {
    let lam = positive_lambda(m)?;
    let phi = lam.ln()?.scale(0.5).to_complex();
    let zphi = z_jet(&phi)?;
    let z2phi = z_jet(&zphi)?;
    Ok(2.0 * (z2phi.value() - 2.0 * zphi.value() * zphi.value()))
}

/// `ZF`, `Z²F`, `Z³F` at the base point.
fn z_powers(big_f: &Jet<Complex64>) -> Result<[Complex64; 3]> {
    let z1 = z_jet(big_f)?;
    let z2 = z_jet(&z1)?;
    let z3 = z_jet(&z2)?;
    Ok([z1.value(), z2.value(), z3.value()])
}

fn singular_zf(zf: Complex64, zbar_f: Complex64) -> bool {
    zf.norm() <= f64::EPSILON * (1.0 + zbar_f.norm())
}

/// `Z³F/ZF − (3/2)(Z²F/ZF)²`.
pub fn s_cl_of(m: &MapJets) -> Result<Complex64> {
    let [z1, z2, z3] = z_powers(&m.big_f)?;
    if singular_zf(z1, zbar_jet(&m.big_f.truncate(1))?.value()) {
        return Err(Error::Singular("S_CL undefined where ZF = 0".into()));
    }
    let r = z2 / z1;
    Ok(z3 / z1 - 1.5 * r * r)
}

/// `Z ln J_F`.
pub fn pf_of(m: &MapJets) -> Result<Complex64> {
    let lam = positive_lambda(m)?;
    Ok(z_jet(&lam.ln()?.to_complex())?.value())
}

pub fn s_cr(f: &HeisMap, p: Point) -> Result<Complex64> {
    s_cr_of(&contact_jets(f, p, SCHWARZIAN_ORDER)?)
}

pub fn s_cl(f: &HeisMap, p: Point) -> Result<Complex64> {
    s_cl_of(&contact_jets(f, p, SCHWARZIAN_ORDER)?)
}

/// Defined for any map whose horizontal Jacobian is positive; contact is not required.
pub fn preschwarzian(f: &HeisMap, p: Point) -> Result<Complex64> {
    pf_of(&f.eval_jets(p, 2)?)
}

/// All Schwarzian-type quantities of a contact map at one point.
#[derive(Debug)]
pub struct SchwarzianValue {
    pub lambda: f64,
    pub s_cr: Result<Complex64>,
    pub s_cl: Result<Complex64>,
    pub pf: Result<Complex64>,
    pub phi: Option<f64>,
    pub b_theta_coeff: Result<Complex64>,
}

pub fn schwarzian_value(f: &HeisMap, p: Point) -> Result<SchwarzianValue> {
    let m = contact_jets(f, p, SCHWARZIAN_ORDER)?;
    let lambda = lambda_jet(&m)?.value();
    Ok(SchwarzianValue {
        lambda,
        s_cr: s_cr_of(&m),
        s_cl: s_cl_of(&m),
        pf: pf_of(&m),
        phi: (lambda > 0.0).then(|| 0.5 * lambda.ln()),
        b_theta_coeff: b_theta_coeff_of(&m),
    })
}

/// `|Pf|` against `|∇_H J_F| / J_F`; the ratio is ½ because `|Zg| = ½|∇_H g|` for real `g`.
pub fn pf_gradient_ratio(f: &HeisMap, p: Point) -> Result<f64> {
    let m = f.eval_jets(p, 2)?;
    let pf = pf_of(&m)?;
    let lam = lambda_jet(&m)?;
    let (xl, yl) = (x_jet(&lam)?.value(), y_jet(&lam)?.value());
    let grad = xl.hypot(yl) / lam.value();
    if grad == 0.0 {
        return Err(Error::Singular("horizontal gradient of J_F vanishes".into()));
    }
    Ok(pf.norm() / grad)
}

/// `Z²Z̄u`; zero exactly for CR-pluriharmonic `u`.
pub fn pluriharmonic_residual(u: &Expr, p: Point) -> Result<Complex64> {
    let w = OperatorWord::new(vec![Op::Zbar, Op::Z, Op::Z]);
    let j = jet_eval::<Complex64>(u, p, 3)?;
    Ok(w.apply_jet(&j)?.value())
}

fn word_jets(g: &ConformalWord, p: Point) -> Result<MapJets> {
    word_to_map(g).eval_jets(p, SCHWARZIAN_ORDER)
}

/// `S_CL(f∘g) − [S_CL(f)∘g · (ZG)² + S_CL(g)]` for conformal `g`.
pub fn cocycle_residual_right(f: &HeisMap, g: &ConformalWord, p: Point) -> Result<Complex64> {
    let gm = word_to_map(g);
    let lhs = s_cl(&f.compose(&gm), p)?;
    let gj = gm.eval_jets(p, SCHWARZIAN_ORDER)?;
    let zg = z_jet(&gj.big_f)?.value();
    let rhs = s_cl(f, gj.value())? * zg * zg + s_cl_of(&gj)?;
    Ok(lhs - rhs)
}

/// Both sides of the left cocycle relation for `S_CL(g∘f)`.
#[derive(Clone, Copy, Debug)]
pub struct LeftCocycle {
    pub lhs: Complex64,
    pub s_cl_f: Complex64,
    /// Right-hand side as derived from the chain rule.
    pub rhs: Complex64,
    /// Right-hand side with the printed coefficient `2` on `(Z²F)(ZF̄)`.
    pub rhs_printed: Complex64,
    /// `Z̄ZG∘f`, which equals `2i TG∘f` for conformal `G`.
    pub zbar_z_g: Complex64,
}

impl LeftCocycle {
    pub fn residual(&self) -> Complex64 {
        self.lhs - self.rhs
    }
}

pub fn left_cocycle(g: &ConformalWord, f: &HeisMap, p: Point) -> Result<LeftCocycle> {
    let gm = word_to_map(g);
    let lhs = s_cl(&gm.compose(f), p)?;
    let fj = contact_jets(f, p, SCHWARZIAN_ORDER)?;
    let s_cl_f = s_cl_of(&fj)?;
    let q = fj.value();
    let gj = gm.eval_jets(q, SCHWARZIAN_ORDER)?;

    let zg = z_jet(&gj.big_f)?;
    let z2g = z_jet(&zg)?;
    let a = zg.value();
    let b = z2g.value();
    let c = zbar_jet(&zg)?.value();
    let e = zbar_jet(&z2g)?.value();
    let s_cl_g = s_cl_of(&gj)?;

    let zf1 = z_jet(&fj.big_f)?;
    let zf = zf1.value();
    let z2f = z_jet(&zf1)?.value();
    let fb = fj.big_f.conj();
    let zfb1 = z_jet(&fb)?;
    let zfb = zfb1.value();
    let z2fb = z_jet(&zfb1)?.value();

    let ca = c / a;
    let common = s_cl_f + zf * zf * s_cl_g + zf * zfb * (1.5 * e - 3.0 * b * c / a) / a
        - 1.5 * ca * ca * zfb * zfb;
    let rhs = common + ca * (z2fb * zf - z2f * zfb) / zf;
    let rhs_printed = common + ca * (z2fb * zf - 2.0 * z2f * zfb) / zf;
    Ok(LeftCocycle {
        lhs,
        s_cl_f,
        rhs,
        rhs_printed,
        zbar_z_g: c,
    })
}

pub fn cocycle_residual_left(g: &ConformalWord, f: &HeisMap, p: Point) -> Result<Complex64> {
    Ok(left_cocycle(g, f, p)?.residual())
}

/// Every term of the four-line chain rule for `S_CR(f∘g)`.
#[derive(Clone, Copy, Debug)]
pub struct CrChain {
    pub lhs: Complex64,
    /// `S_CR(f)∘g (ZG)² + conj(S_CR(f))∘g (ZḠ)² + S_CR(g)`.
    pub base: Complex64,
    /// The `ZG·ZḠ` line.
    pub mixed: Complex64,
    /// The two `Z ln λ_f` lines.
    pub log_terms: Complex64,
    /// Derived right-hand side `base − mixed − log_terms`.
    pub rhs: Complex64,
    /// Printed right-hand side `base + mixed + log_terms`.
    pub rhs_printed: Complex64,
}

impl CrChain {
    pub fn residual(&self) -> Complex64 {
        self.lhs - self.rhs
    }
}

/// `S_CR(f∘g)` against the chain-rule expansion, for contact `f` and `g`.
pub fn cr_chain(f: &HeisMap, g: &HeisMap, p: Point) -> Result<CrChain> {
    let lhs = s_cr(&f.compose(g), p)?;

    let gj = contact_jets(g, p, SCHWARZIAN_ORDER)?;
    let q = gj.value();
    let fj = contact_jets(f, q, SCHWARZIAN_ORDER)?;

    let s_f = s_cr_of(&fj)?;
    let lf = positive_lambda(&fj)?;
    let lfc = lf.to_complex();
    let zl = z_jet(&lfc)?;
    let zbl = zbar_jet(&lfc)?;
    let zbar_z_lf = zbar_jet(&zl)?.value();
    let z_zbar_lf = z_jet(&zbl)?.value();
    let (lf0, zlf, zblf) = (lf.value(), zl.value(), zbl.value());
    let z_ln_lf = zlf / lf0;
    let zb_ln_lf = zblf / lf0;

    let s_g = s_cr_of(&gj)?;
    let lg = positive_lambda(&gj)?;
    let lg0 = lg.value();
    let zlg = z_jet(&lg.to_complex())?.value();
    let zg1 = z_jet(&gj.big_f)?;
    let zgb1 = z_jet(&gj.big_f.conj())?;
    let (zg, z2g) = (zg1.value(), z_jet(&zg1)?.value());
    let (zgb, z2gb) = (zgb1.value(), z_jet(&zgb1)?.value());

    let base = s_f * zg * zg + s_f.conj() * zgb * zgb + s_g;
    let mixed = (lf0 * (zbar_z_lf + z_zbar_lf) - 4.0 * zlf * zblf) * zg * zgb / (2.0 * lf0 * lf0);
    let log_terms = (z2g * lg0 - 2.0 * zg * zlg) * z_ln_lf / (2.0 * lg0)
        + (z2gb * lg0 - 2.0 * zgb * zlg) * zb_ln_lf / (2.0 * lg0);
    // ½λ_f Z²(λ_f⁻¹∘g) produces −λ_f(Z̄Z+ZZ̄)λ_f + 4ZλZ̄λ and −Z ln λ_f, so both carry a minus sign
    Ok(CrChain {
        lhs,
        base,
        mixed,
        log_terms,
        rhs: base - mixed - log_terms,
        rhs_printed: base + mixed + log_terms,
    })
}

pub fn cr_chain_residual(f: &HeisMap, g: &HeisMap, p: Point) -> Result<Complex64> {
    Ok(cr_chain(f, g, p)?.residual())
}

/// `Z²G·λ_g − 2 ZG·Zλ_g`, which vanishes for conformal `g`.
pub fn conformal_lambda_identity(g: &HeisMap, p: Point) -> Result<Complex64> {
    let gj = g.eval_jets(p, SCHWARZIAN_ORDER)?;
    let lg = lambda_jet(&gj)?;
    let zlg = z_jet(&lg.to_complex())?.value();
    let zg1 = z_jet(&gj.big_f)?;
    Ok(z_jet(&zg1)?.value() * lg.value() - 2.0 * zg1.value() * zlg)
}

/// `S_CR(f∘g) − S_CR(f)∘g·(ZG)²` for contact `f`, conformal `g`.
pub fn claim1_residual(f: &HeisMap, g: &ConformalWord, p: Point) -> Result<Complex64> {
    let gm = word_to_map(g);
    let gj = word_jets(g, p)?;
    let zg = z_jet(&gj.big_f)?.value();
    Ok(s_cr(&f.compose(&gm), p)? - s_cr(f, gj.value())? * zg * zg)
}

/// `S_CR(f∘g) − S_CR(g)` for a type-1 word `f` and contact `g`.
pub fn claim2_residual(f: &ConformalWord, g: &HeisMap, p: Point) -> Result<Complex64> {
    if f.contains_inversion() || f.orientation() < 0 {
        return Err(Error::Shape(format!(
            "claim 2 needs an inversion- and reflection-free word, got {}",
            f.label()
        )));
    }
    Ok(s_cr(&word_to_map(f).compose(g), p)? - s_cr(g, p)?)
}

/// `S_CR(ι∘g) = 6 |G|²/N(g)⁴ · ZG·ZḠ` for `g` the linear action of `[[a, b], [c, d]]`.
pub fn claim3_closed_form(abcd: [f64; 4], p: Point) -> Complex64 {
    -claim3_printed(abcd, p)
}

/// The printed form `−6 |G|²/N(g)⁴ · ZG·ZḠ`.
pub fn claim3_printed(abcd: [f64; 4], p: Point) -> Complex64 {
    let [a, b, c, d] = abcd;
    let alpha = cplx(a, c);
    let beta = cplx(b, d);
    let big_g = alpha * p.x + beta * p.y;
    let i = cplx(0.0, 1.0);
    let zg = 0.5 * (alpha - i * beta);
    let zgb = 0.5 * (alpha.conj() - i * beta.conj());
    let n = koranyi_norm(Point::new(big_g.re, big_g.im, p.t));
    -6.0 * big_g.norm_sqr() / n.powi(4) * zg * zgb
}

/// `S_CR(ι ∘ g)` by direct jet computation.
pub fn claim3_direct(abcd: [f64; 4], p: Point) -> Result<Complex64> {
    let [a, b, c, d] = abcd;
    let g = crate::group::sl2_map(a, b, c, d);
    s_cr(&HeisMap::generator(&Generator::Invert).compose(&g), p)
}

/// `H` with `ZH = 1`, built from a harmonic polynomial `Q(x, y)`:
/// `ψ = Q − C₁(x²+y²)`, `H = C₁(t + 2xy) + 2x + C₂ + k + i(ψ + C₃)` with
/// `k = ∫₀^y ψ_x(x, s) ds − ∫₀^x ψ_y(s, 0) ds`.
pub fn zh_one_builder(q: &Expr, c1: f64, c2: f64, c3: f64) -> Result<Expr> {
    let qp = RatPoly::from_expr(q)?;
    if qp.degree_in(2) > 0 {
        return Err(Error::NotHarmonic(format!("{q} depends on t")));
    }
    if !qp.is_real() {
        return Err(Error::NotHarmonic(format!("{q} is not real")));
    }
    let lap = qp.partial(0).partial(0) + qp.partial(1).partial(1);
    if !lap.is_zero() {
        return Err(Error::NotHarmonic(format!("Δ({q}) = {lap}")));
    }
    let k1 = RatPoly::constant(GaussRat::from_f64(c1)?);
    let (x, y, t) = (RatPoly::var(0), RatPoly::var(1), RatPoly::var(2));
    let psi = &qp - &(&k1 * &(&(&x * &x) + &(&y * &y)));
    let k = psi.partial(0).integrate_from_zero(1)
        - psi.partial(1).at_zero(1).integrate_from_zero(0);
    let two = RatPoly::constant(GaussRat::from_int(2));
    let h1 = &(&(&k1 * &(&t + &(&two * &(&x * &y)))) + &(&two * &x)) + &k;
    let h2 = psi;
    let i = Expr::complex(cplx(0.0, 1.0));
    Ok(h1.to_expr() + Expr::real(c2) + i * (h2.to_expr() + Expr::real(c3)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::flow_closed_form;
    use crate::group::sl2_map;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn dilation_and_sl2_are_flat() {
        let p = Point::new(0.4, -0.2, 0.3);
        let d = HeisMap::generator(&Generator::Dilate { r: 2.0 });
        assert!(s_cr(&d, p).unwrap().norm() < 1e-12);
        assert!(s_cl(&d, p).unwrap().norm() < 1e-12);
        assert!(preschwarzian(&d, p).unwrap().norm() < 1e-12);
        let g = sl2_map(2.0, 0.0, 0.0, 0.5);
        assert!(s_cr(&g, p).unwrap().norm() < 1e-12);
    }

    #[test]
    fn claim3_example_value() {
        let p = Point::new(1.0, 1.0, 0.0);
        let printed = claim3_printed([2.0, 0.0, 0.0, 0.5], p);
        assert!((printed.re + 1.323_529_411_764_705_9).abs() < 1e-12 && printed.im.abs() < 1e-15);
        let v = claim3_closed_form([2.0, 0.0, 0.0, 0.5], p);
        let d = claim3_direct([2.0, 0.0, 0.0, 0.5], p).unwrap();
        assert!(close(d, v, 1e-9), "{d} vs {v}");
    }

    #[test]
    fn chain_rule_with_non_conformal_inner_map() {
        // the flow alone has λ = 1, so an inversion is needed for the extra lines to matter
        let f = word_to_map(&ConformalWord::new(vec![
            Generator::Invert,
            Generator::Translate { p: Point::new(0.7, 0.2, -0.4) },
        ]))
        .compose(&flow_closed_form(&Expr::parse("exp(x)").unwrap(), 0.4).unwrap());
        let p = Point::new(0.3, -0.5, 0.2);
        for g in [
            sl2_map(1.5, 0.4, -0.25, 0.6),
            crate::fields::quadratic_flow(0.3, -0.2, 0.1, 0.7),
            flow_closed_form(&Expr::parse("x^3/3").unwrap(), 0.2).unwrap(),
        ] {
            let c = cr_chain(&f, &g, p).unwrap();
            assert!(close(c.lhs, c.rhs, 1e-9), "{} vs {}", c.lhs, c.rhs);
            assert!((c.mixed + c.log_terms).norm() > 1e-3);
            assert!(!close(c.lhs, c.rhs_printed, 1e-6));
        }
    }

    #[test]
    fn reflection_is_rejected() {
        let p = Point::new(0.4, -0.2, 0.3);
        let r = HeisMap::generator(&Generator::Reflect);
        assert!(matches!(s_cr(&r, p), Err(Error::NotPositive { .. })));
        assert!(matches!(s_cl(&r, p), Err(Error::Singular(_))));
    }

    #[test]
    fn non_contact_is_rejected() {
        let bad = HeisMap::from_exprs("bad", [Expr::x(), Expr::y(), Expr::t() + Expr::x()]);
        assert!(matches!(s_cr(&bad, Point::new(0.1, 0.2, 0.3)), Err(Error::NotContact { .. })));
    }

    #[test]
    fn pluriharmonic_examples() {
        let p = Point::new(0.3, 0.6, -0.1);
        assert!(pluriharmonic_residual(&Expr::x(), p).unwrap().norm() < 1e-15);
        // Z̄(x²y) = xy + i x²/2; Z(xy + i x²/2) = y/2 − ix/2 + i x/2 = y/2 ... then Z(y/2) = −i/4
        let v = pluriharmonic_residual(&Expr::parse("x^2*y").unwrap(), p).unwrap();
        assert!(close(v, cplx(0.0, -0.25), 1e-13), "{v}");
    }

    #[test]
    fn two_routes_agree_on_a_flow_composition() {
        let f = flow_closed_form(&Expr::parse("exp(x)").unwrap(), 0.4)
            .unwrap()
            .compose(&word_to_map(&ConformalWord::make_type2(
                Point::new(0.1, 0.2, 0.3),
                0.5,
                1.2,
                Point::new(-0.3, 0.1, 0.2),
            )));
        let v = schwarzian_value(&f, Point::new(0.3, -0.5, 0.4)).unwrap();
        let b = v.b_theta_coeff.unwrap();
        let s = v.s_cr.unwrap();
        assert!(close(b, 2.0 * s, 1e-9));
    }

    #[test]
    fn zh_builder_example() {
        let h = zh_one_builder(&Expr::parse("x^3 - 3*x*y^2").unwrap(), 1.0, 0.5, -2.0).unwrap();
        let p = Point::new(0.7, -0.3, 1.2);
        let zh = crate::horizontal::apply_word(&OperatorWord::new(vec![Op::Z]), &h, p).unwrap();
        assert!(close(zh, cplx(1.0, 0.0), 1e-12), "{zh}");
        assert!(matches!(
            zh_one_builder(&Expr::parse("x^2").unwrap(), 0.0, 0.0, 0.0),
            Err(Error::NotHarmonic(_))
        ));
    }
}
