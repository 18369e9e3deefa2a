use heis_core::expr::{jet_eval, Expr};
use heis_core::group::Point;
use heis_core::jet::{fd_oracle, Jet};
use proptest::prelude::*;

const CORPUS: [&str; 6] = [
    "sin(x*y) + t",
    "exp(x - t^2/2)",
    "ln(2 + x^2 + y^2)",
    "sqrt(1 + t^2 + x^2)",
    "(x + y^2)/(3 + t^2)",
    "cos(x*t)*y^3 - x*y*t",
];

fn point() -> impl Strategy<Value = Point> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(x, y, t)| Point::new(x, y, t))
}

fn indices(k: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for a in 0..=k {
        for b in 0..=k - a {
            for c in 0..=k - a - b {
                out.push([a, b, c]);
            }
        }
    }
    out
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn jets_close(a: &Jet<f64>, b: &Jet<f64>) -> bool {
    a.coeffs().iter().zip(b.coeffs()).all(|(x, y)| close(*x, *y, 1e-12))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partials_match_finite_differences(k in 0..CORPUS.len(), p in point()) {
        let e = Expr::parse(CORPUS[k]).unwrap();
        let j = jet_eval::<f64>(&e, p, 3).unwrap();
        let f = |q: Point| e.eval(&[q.x, q.y, q.t]);
        for ix in indices(3) {
            let order: usize = ix.iter().sum();
            let h = if order == 3 { 2e-3 } else { 1e-3 };
            // one Richardson step lifts the O(h²) stencil to O(h⁴)
            let fd = (4.0 * fd_oracle(f, p, ix, h / 2.0).unwrap() - fd_oracle(f, p, ix, h).unwrap()) / 3.0;
            let jp = j.partial(ix).unwrap();
            prop_assert!((jp - fd).abs() <= 1e-6 * (1.0 + j.value().abs()),
                "{} at {:?}, {:?}: jet {} fd {}", CORPUS[k], p, ix, jp, fd);
        }
    }

    #[test]
    fn ring_laws(a in 0..CORPUS.len(), b in 0..CORPUS.len(), c in 0..CORPUS.len(), p in point()) {
        let j = |k: usize| jet_eval::<f64>(&Expr::parse(CORPUS[k]).unwrap(), p, 4).unwrap();
        let (ja, jb, jc) = (j(a), j(b), j(c));
        prop_assert!(jets_close(&ja.add_jet(&jb), &jb.add_jet(&ja)));
        prop_assert!(jets_close(&ja.mul_jet(&jb), &jb.mul_jet(&ja)));
        prop_assert!(jets_close(&ja.add_jet(&jb).add_jet(&jc), &ja.add_jet(&jb.add_jet(&jc))));
        prop_assert!(jets_close(&ja.mul_jet(&jb).mul_jet(&jc), &ja.mul_jet(&jb.mul_jet(&jc))));
        prop_assert!(jets_close(
            &ja.mul_jet(&jb.add_jet(&jc)),
            &ja.mul_jet(&jb).add_jet(&ja.mul_jet(&jc))
        ));
    }

    #[test]
    fn truncation_commutes_with_evaluation(k in 0..CORPUS.len(), p in point(), order in 1usize..6) {
        let e = Expr::parse(CORPUS[k]).unwrap();
        let high = jet_eval::<f64>(&e, p, order).unwrap().truncate(order - 1);
        let low = jet_eval::<f64>(&e, p, order - 1).unwrap();
        prop_assert_eq!(high.order(), low.order());
        prop_assert!(jets_close(&high, &low));
    }
}
