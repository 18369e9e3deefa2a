use heis_core::exact::RatPoly;
use heis_core::expr::{jet_eval, Expr};
use heis_core::fields::{flow_closed_form, quadratic_flow};
use heis_core::group::{sl2_map, word_to_map, ConformalWord, Point};
use heis_core::horizontal::{apply_word, assess_contact, lambda_jet, z_jet, zbar_jet, Op, OperatorWord};
use heis_core::map::HeisMap;
use heis_core::{Error, TAU_ABS, TAU_REL};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const POLYS: [&str; 5] = [
    "x^3*y - t^2",
    "x*y*t + y^4",
    "t^3 - 3*x^2*t + x*y",
    "(x^2 + y^2)^2 + x*t",
    "x^5 - 2*y^3*t + 7",
];

const FNS: [&str; 4] = ["sin(x) * exp(t)", "x^2*y - t", "cos(x*y + t)", "exp(-x^2 - t^2) * y"];

fn point(r: f64) -> impl Strategy<Value = Point> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, t)| Point::new(x, y, t))
}

fn word(seed: u64) -> ConformalWord {
    ConformalWord::random_orientation_preserving(&mut ChaCha8Rng::seed_from_u64(seed), 6)
}

/// Assorted contact maps: conformal words, SL(2) actions and potential flows.
fn contact_map(kind: u8, seed: u64) -> HeisMap {
    match kind % 4 {
        0 => word_to_map(&word(seed)),
        1 => sl2_map(1.5, 0.4, -0.25, 0.6),
        2 => quadratic_flow(0.3, -0.2, 0.1, 0.7),
        _ => flow_closed_form(&Expr::parse("exp(x)").unwrap(), 0.4)
            .unwrap()
            .compose(&word_to_map(&word(seed))),
    }
}

fn close(a: Complex64, b: Complex64, tol_rel: f64) -> bool {
    (a - b).norm() <= tol_rel * (1.0 + a.norm().max(b.norm())) + TAU_ABS
}

fn skip(e: &Error) -> bool {
    matches!(e, Error::Singular(_) | Error::Domain { .. } | Error::NotPositive { .. })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_x_y_is_minus_four_t(k in 0..POLYS.len(), p in point(2.0)) {
        let e = Expr::parse(POLYS[k]).unwrap();
        let xy = apply_word(&OperatorWord::new(vec![Op::Y, Op::X]), &e, p).unwrap();
        let yx = apply_word(&OperatorWord::new(vec![Op::X, Op::Y]), &e, p).unwrap();
        let t = apply_word(&OperatorWord::new(vec![Op::T]), &e, p).unwrap();
        prop_assert!(close(xy - yx, -4.0 * t, TAU_REL));
        // and exactly on polynomials
        let q = RatPoly::from_expr(&e).unwrap();
        let lhs = &q.derive_word(&[Op::Y, Op::X]) - &q.derive_word(&[Op::X, Op::Y]);
        let rhs = q.derive(Op::T).scale(&heis_core::exact::GaussRat::from_int(-4));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn horizontal_chain_rule(kind in 0u8..4, seed in 0u64..1000, k in 0..FNS.len(), p in point(1.5)) {
        let g = contact_map(kind, seed);
        let e = Expr::parse(FNS[k]).unwrap();
        let m = match g.eval_jets(p, 2) {
            Ok(m) => m,
            Err(e) if skip(&e) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let comp = e.eval(&m.f).unwrap().to_complex();
        let q = m.value();
        let outer = jet_eval::<Complex64>(&e, q, 1).unwrap();
        let (zf, zbf) = (z_jet(&outer).unwrap().value(), zbar_jet(&outer).unwrap().value());
        let gbar = m.big_f.conj();
        for (lhs, vg, vgbar) in [
            (z_jet(&comp).unwrap().value(), z_jet(&m.big_f).unwrap().value(), z_jet(&gbar).unwrap().value()),
            (zbar_jet(&comp).unwrap().value(), zbar_jet(&m.big_f).unwrap().value(), zbar_jet(&gbar).unwrap().value()),
        ] {
            let rhs = zf * vg + zbf * vgbar;
            prop_assert!(close(lhs, rhs, TAU_REL), "{} vs {} for {}", lhs, rhs, g);
        }
    }

    #[test]
    fn jacobian_is_multiplicative(a in 0u8..4, b in 0u8..4, s1 in 0u64..1000, s2 in 0u64..1000, p in point(1.5)) {
        let (f, g) = (contact_map(a, s1), contact_map(b, s2));
        let run = || -> heis_core::Result<(f64, f64)> {
            let mg = g.eval_jets(p, 1)?;
            let lg = lambda_jet(&mg)?.value();
            let lf = lambda_jet(&f.eval_jets(mg.value(), 1)?)?.value();
            let lfg = lambda_jet(&f.compose(&g).eval_jets(p, 1)?)?.value();
            Ok((lfg, lf * lg))
        };
        match run() {
            Ok((lhs, rhs)) => prop_assert!((lhs - rhs).abs() <= TAU_REL * (1.0 + lhs.abs().max(rhs.abs()))),
            Err(e) if skip(&e) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn conformal_words_are_conformal(seed in 0u64..100_000, p in point(2.0)) {
        let w = word(seed);
        let a = match assess_contact(&word_to_map(&w), p) {
            Ok(a) => a,
            Err(e) if skip(&e) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        prop_assert!(a.is_conformal(TAU_REL, TAU_ABS), "{}: Z̄F = {}", w.label(), a.zbar_f);
        let [[xf1, yf1], [xf2, yf2]] = a.dh;
        let (nx, ny) = (xf1 * xf1 + xf2 * xf2, yf1 * yf1 + yf2 * yf2);
        prop_assert!((nx - ny).abs() <= TAU_REL * (1.0 + nx.max(ny)));
        prop_assert!((xf1 * yf1 + xf2 * yf2).abs() <= TAU_REL * (1.0 + nx.max(ny)));
    }

    #[test]
    fn complex_residual_matches_real_pair(kind in 0u8..4, seed in 0u64..1000, p in point(1.5)) {
        let f = contact_map(kind, seed).compose(
            &HeisMap::from_exprs("bump", [Expr::x(), Expr::y(), Expr::parse("t + x^2*y").unwrap()]),
        );
        let a = match assess_contact(&f, p) {
            Ok(a) => a,
            Err(e) if skip(&e) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let half = 0.5 * Complex64::new(a.r1, -a.r2);
        prop_assert!(close(a.r_z, half, 1e-12), "{} vs {}", a.r_z, half);
    }
}
