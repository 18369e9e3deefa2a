//! The eight-parameter conformal potential family and the operator identities
//! behind it, checked in exact arithmetic.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use super::linalg::{nullspace, rref};
use super::{monomials, GaussRat, Monomial, RatPoly};
use crate::expr::Expr;
use crate::horizontal::Op;

use Op::{Zbar as B, T, Z};

/// The eight potentials `v₀` solving `Z²v₀ = 0`, in coefficient order c₁..c₈.
pub fn reference_v0_basis() -> Vec<RatPoly> {
    [
        "x^4 + 2*x^2*y^2 + y^4 + t^2",
        "t*y - x*y^2 - x^3",
        "t*x + x^2*y + y^3",
        "x^2 + y^2",
        "x",
        "y",
        "t",
        "1",
    ]
    .iter()
    .map(|s| RatPoly::from_expr(&Expr::parse(s).expect("static")).expect("polynomial"))
    .collect()
}

/// Operator notation: the rightmost letter acts first.
fn apply(p: &RatPoly, ops: &[Op]) -> RatPoly {
    ops.iter().rev().fold(p.clone(), |acc, &op| acc.derive(op))
}

/// Exact real solutions of `Z²v₀ = 0` with `t`-degree ≤ 2 and weighted degree ≤ `dmax`.
pub fn vzerosol_nullspace(dmax: u32) -> (usize, Vec<RatPoly>) {
    let unknowns = monomials(dmax, 2);
    let mut rows: BTreeMap<(Monomial, bool), Vec<BigRational>> = BTreeMap::new();
    let n = unknowns.len();
    for (j, &m) in unknowns.iter().enumerate() {
        let img = RatPoly::monomial(m, GaussRat::one()).derive_word(&[Z, Z]);
        for (om, c) in img.terms() {
            for (imag, v) in [(false, &c.re), (true, &c.im)] {
                if !v.is_zero() {
                    rows.entry((*om, imag))
                        .or_insert_with(|| vec![BigRational::zero(); n])[j] = v.clone();
                }
            }
        }
    }
    let basis: Vec<RatPoly> = nullspace(rows.into_values().collect(), n)
        .into_iter()
        .map(|v| {
            unknowns.iter().zip(v).fold(RatPoly::zero(), |acc, (&m, c)| {
                &acc + &RatPoly::monomial(m, GaussRat::real(c))
            })
        })
        .collect();
    (basis.len(), basis)
}

/// Rank of a family of real polynomials, as coefficient vectors.
pub fn span_rank(polys: &[RatPoly]) -> usize {
    let mut mons: Vec<Monomial> = polys
        .iter()
        .flat_map(|p| p.terms().map(|(m, _)| *m).collect::<Vec<_>>())
        .collect();
    mons.sort();
    mons.dedup();
    let mut m: Vec<Vec<BigRational>> = polys
        .iter()
        .map(|p| mons.iter().map(|&mo| p.coeff(mo).re).collect())
        .collect();
    rref(&mut m, mons.len()).len()
}

/// Outcome of one exact identity check.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    /// Checked on the solution basis only (needs `Z²v₀ = Z̄²v₀ = 0`).
    pub conditional: bool,
    pub cases: usize,
    /// First polynomial where the identity failed.
    pub witness: Option<String>,
}

impl IdentityCheck {
    pub fn pass(&self) -> bool {
        self.witness.is_none()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AppendixReport {
    pub dmax: u32,
    pub checks: Vec<IdentityCheck>,
}

impl AppendixReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(IdentityCheck::pass)
    }
}

type Identity = (&'static str, fn(&RatPoly) -> RatPoly);

fn unconditional() -> Vec<Identity> {
    vec![
        ("2ZZbarZ = ZZZbar + ZbarZZ", |p| {
            &(&apply(p, &[Z, B, Z]).scale(&GaussRat::from_int(2)) - &apply(p, &[Z, Z, B]))
                - &apply(p, &[B, Z, Z])
        }),
        ("2ZbarZZbar = ZbarZbarZ + ZZbarZbar", |p| {
            &(&apply(p, &[B, Z, B]).scale(&GaussRat::from_int(2)) - &apply(p, &[B, B, Z]))
                - &apply(p, &[Z, B, B])
        }),
        ("ZbarZZZbar = ZZbarZbarZ", |p| {
            &apply(p, &[B, Z, Z, B]) - &apply(p, &[Z, B, B, Z])
        }),
        ("8T^2 = -(ZZZbarZbar - ZZbarZbarZ - ZbarZZZbar + ZbarZbarZZ)", |p| {
            let s = &(&(&apply(p, &[Z, Z, B, B]) - &apply(p, &[Z, B, B, Z]))
                - &apply(p, &[B, Z, Z, B]))
                + &apply(p, &[B, B, Z, Z]);
            &apply(p, &[T, T]).scale(&GaussRat::from_int(8)) + &s
        }),
        ("[Zbar,Z] = 2iT", |p| {
            &(&apply(p, &[B, Z]) - &apply(p, &[Z, B]))
                - &apply(p, &[T]).scale(&GaussRat::new(BigRational::zero(), GaussRat::from_int(2).re))
        }),
    ]
}

fn conditional() -> Vec<Identity> {
    vec![
        ("Z^2 v0 = 0", |p| apply(p, &[Z, Z])),
        ("4T^2 v0 = ZZbarZbarZ v0", |p| {
            &apply(p, &[T, T]).scale(&GaussRat::from_int(4)) - &apply(p, &[Z, B, B, Z])
        }),
        ("4T^2 v0 = ZbarZZZbar v0", |p| {
            &apply(p, &[T, T]).scale(&GaussRat::from_int(4)) - &apply(p, &[B, Z, Z, B])
        }),
        ("(ZbarZ)^2 v0 = (ZZbar)^2 v0", |p| {
            &apply(p, &[B, Z, B, Z]) - &apply(p, &[Z, B, Z, B])
        }),
        ("(ZbarZ)^3 v0 = 0", |p| apply(p, &[B, Z, B, Z, B, Z])),
        ("T^3 v0 = 0", |p| apply(p, &[T, T, T])),
    ]
}

fn run(name: &str, conditional: bool, cases: &[RatPoly], f: fn(&RatPoly) -> RatPoly) -> IdentityCheck {
    let witness = cases.iter().find(|p| !f(p).is_zero()).map(|p| p.to_string());
    IdentityCheck {
        name: name.into(),
        conditional,
        cases: cases.len(),
        witness,
    }
}

/// Unconditional identities on every monomial of weighted degree ≤ `dmax`;
/// conditional ones on the published basis and on the computed solution basis.
pub fn appendix_identities(dmax: u32) -> AppendixReport {
    use rayon::prelude::*;
    let mons: Vec<RatPoly> = monomials(dmax, dmax / 2)
        .into_iter()
        .map(|m| RatPoly::monomial(m, GaussRat::one()))
        .collect();
    let mut sols = reference_v0_basis();
    sols.extend(vzerosol_nullspace(dmax.max(4)).1);
    let mut jobs: Vec<(Identity, bool)> = unconditional().into_iter().map(|i| (i, false)).collect();
    jobs.extend(conditional().into_iter().map(|i| (i, true)));
    let checks = jobs
        .par_iter()
        .map(|((name, f), cond)| run(name, *cond, if *cond { &sols } else { &mons }, *f))
        .collect();
    AppendixReport { dmax, checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_basis_solves_and_spans() {
        for v in reference_v0_basis() {
            assert!(v.derive_word(&[Z, Z]).is_zero(), "{v}");
        }
        let (dim, basis) = vzerosol_nullspace(4);
        assert_eq!(dim, 8);
        let mut all = reference_v0_basis();
        assert_eq!(span_rank(&all), 8);
        all.extend(basis);
        assert_eq!(span_rank(&all), 8);
    }

    #[test]
    fn truncated_space_loses_the_quartic() {
        assert_eq!(vzerosol_nullspace(3).0, 7);
        assert_eq!(vzerosol_nullspace(6).0, 8);
    }

    #[test]
    fn x_squared_is_not_a_solution() {
        let v = RatPoly::from_expr(&Expr::parse("x^2").unwrap()).unwrap();
        assert_eq!(v.derive_word(&[Z, Z]), RatPoly::constant(GaussRat::ratio(1, 2)));
    }

    #[test]
    fn identities_hold_at_low_degree() {
        let r = appendix_identities(4);
        for c in &r.checks {
            assert!(c.pass(), "{} fails on {:?}", c.name, c.witness);
        }
    }
}
