use heis_core::expr::Expr;
use heis_core::fields::{
    conformal_residual, conformal_v0, flow_integrate, pushforward_w0, ConformalVFCoeffs, ContactVF, TabulatedFlow,
};
use heis_core::group::{word_to_map, ConformalWord, Point};
use heis_core::{Error, TAU_ABS, TAU_REL};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn point(r: f64) -> impl Strategy<Value = Point> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, t)| Point::new(x, y, t))
}

fn coeffs() -> impl Strategy<Value = ConformalVFCoeffs> {
    prop::array::uniform8(-0.3..0.3f64).prop_map(ConformalVFCoeffs)
}

const CONTACT_POTENTIALS: [&str; 4] = ["x*y + t", "x^2 - y*t/3", "sin(x) + y^2", "x*y^2 - t^2/4"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn flow_is_a_one_parameter_group(k in 0..CONTACT_POTENTIALS.len(), p in point(0.5), s1 in -0.3..0.3f64, s2 in -0.3..0.3f64) {
        let vf = ContactVF::new(Expr::parse(CONTACT_POTENTIALS[k]).unwrap());
        let steps = 400;
        let direct = flow_integrate(&vf, p, s1 + s2, 2 * steps).unwrap();
        let mid = flow_integrate(&vf, p, s1, steps).unwrap();
        let split = flow_integrate(&vf, mid, s2, steps).unwrap();
        for (a, b) in [(direct.x, split.x), (direct.y, split.y), (direct.t, split.t)] {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "{} vs {}", a, b);
        }
    }

    #[test]
    fn time_s_maps_are_contact(k in 0..CONTACT_POTENTIALS.len(), p in point(0.5), s in -0.3..0.3f64) {
        let flow = TabulatedFlow::new(ContactVF::new(Expr::parse(CONTACT_POTENTIALS[k]).unwrap()), s, 200);
        let fd = flow.fd_contact(p, 1e-4).unwrap();
        prop_assert!(fd.r1.abs() <= 1e-6 && fd.r2.abs() <= 1e-6, "{:?}", fd);
    }

    #[test]
    fn conformal_family_generates_conformal_maps(c in coeffs(), p in point(0.5), s in -0.3..0.3f64) {
        let v0 = conformal_v0(&c);
        let r = conformal_residual(&v0, p).unwrap();
        prop_assert!(r.z2.norm() <= TAU_REL + TAU_ABS);
        let fd = TabulatedFlow::new(ContactVF::new(v0), s, 200).fd_contact(p, 1e-4).unwrap();
        prop_assert!(fd.zbar_f.norm() <= 1e-6, "Z̄F = {}", fd.zbar_f);
    }

    #[test]
    fn pushforward_keeps_potentials_conformal(seed in 0u64..100_000, case in 1usize..=8, p in point(1.5)) {
        let w = ConformalWord::random_orientation_preserving(&mut ChaCha8Rng::seed_from_u64(seed), 4);
        match pushforward_w0(&word_to_map(&w), case, p) {
            Ok((w0, z2)) => prop_assert!(z2.norm() <= TAU_REL * (1.0 + w0.abs()) + TAU_ABS, "case {}: {}", case, z2),
            Err(Error::Singular(_) | Error::Domain { .. } | Error::NotPositive { .. }) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }
}
