//! The Heisenberg group H¹ in exponential coordinates `(x, y, t)`, its
//! Korányi gauge, the five conformal generators and their composition words.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::map::HeisMap;

/// A point `(z, t) = (x + iy, t)` of H¹.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl From<[f64; 3]> for Point {
    fn from(a: [f64; 3]) -> Self {
        Point::new(a[0], a[1], a[2])
    }
}

impl From<Point> for [f64; 3] {
    fn from(p: Point) -> Self {
        [p.x, p.y, p.t]
    }
}

impl Point {
    pub const ORIGIN: Point = Point {
        x: 0.0,
        y: 0.0,
        t: 0.0,
    };

    pub const fn new(x: f64, y: f64, t: f64) -> Self {
        Point { x, y, t }
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    pub fn coord(&self, i: usize) -> f64 {
        match i {
            0 => self.x,
            1 => self.y,
            2 => self.t,
            _ => panic!("coordinate index {i} out of range"),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.t.is_finite()
    }
}

/// `(z₁,t₁)(z₂,t₂) = (z₁+z₂, t₁+t₂+2 Im(z₁ z̄₂))`.
pub fn group_mul(p: Point, q: Point) -> Point {
    Point::new(p.x + q.x, p.y + q.y, p.t + q.t + 2.0 * (q.x * p.y - p.x * q.y))
}

pub fn group_inv(p: Point) -> Point {
    Point::new(-p.x, -p.y, -p.t)
}

/// Korányi gauge `N(z,t) = (|z|⁴ + t²)^{1/4}`.
pub fn koranyi_norm(p: Point) -> f64 {
    let r2 = p.x * p.x + p.y * p.y;
    (r2 * r2 + p.t * p.t).sqrt().sqrt()
}

/// Left-invariant Korányi distance `N(q⁻¹p)`.
pub fn koranyi_dist(p: Point, q: Point) -> f64 {
    koranyi_norm(group_mul(group_inv(q), p))
}

/// Heisenberg dilation `δ_r(z,t) = (rz, r²t)`.
pub fn dilate(p: Point, r: f64) -> Point {
    Point::new(r * p.x, r * p.y, r * r * p.t)
}

/// Point on the radial horizontal curve `γ(r,(z,t)) = (r z e^{−i (t/|z|²) log r}, r² t)`.
pub fn radial_curve(r: f64, p: Point) -> Result<Point> {
    let r2 = p.x * p.x + p.y * p.y;
    if r2 == 0.0 {
        return Err(Error::Singular(
            "radial curve undefined on the t-axis (z = 0)".into(),
        ));
    }
    if r <= 0.0 {
        return Err(Error::Shape(format!("radial parameter must be positive, got {r}")));
    }
    let phase = Complex64::from_polar(1.0, -(p.t / r2) * r.ln());
    let z = p.z() * r * phase;
    Ok(Point::new(z.re, z.im, r * r * p.t))
}

/// One of the five explicit conformal generators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Generator {
    Translate { p: Point },
    Dilate { r: f64 },
    Rotate { phi: f64 },
    Invert,
    Reflect,
}

impl Generator {
    /// `+1` for the orientation-preserving generators, `−1` for the reflection.
    pub fn orientation(&self) -> i32 {
        match self {
            Generator::Reflect => -1,
            _ => 1,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Generator::Translate { p } => format!("tr({},{},{})", p.x, p.y, p.t),
            Generator::Dilate { r } => format!("dil({r})"),
            Generator::Rotate { phi } => format!("rot({phi})"),
            Generator::Invert => "inv".into(),
            Generator::Reflect => "refl".into(),
        }
    }

    /// Closed form as an expression triple.
    pub fn components(&self) -> [Expr; 3] {
        let (x, y, t) = (Expr::x(), Expr::y(), Expr::t());
        let c = Expr::real;
        match self {
            Generator::Translate { p } => [
                c(p.x) + x.clone(),
                c(p.y) + y.clone(),
                c(p.t) + t + c(2.0) * (x * c(p.y) - c(p.x) * y),
            ],
            Generator::Dilate { r } => [c(*r) * x, c(*r) * y, c(r * r) * t],
            Generator::Rotate { phi } => {
                let (s, co) = phi.sin_cos();
                [
                    c(co) * x.clone() - c(s) * y.clone(),
                    c(s) * x + c(co) * y,
                    t,
                ]
            }
            Generator::Invert => {
                let r2 = x.powi(2) + y.powi(2);
                let n4 = r2.powi(2) + t.powi(2);
                [
                    -((x.clone() * r2.clone() - y.clone() * t.clone()) / n4.clone()),
                    -((y * r2 + x * t.clone()) / n4.clone()),
                    -(t / n4),
                ]
            }
            Generator::Reflect => [x, -y, -t],
        }
    }

    /// Pointwise action, used to cross-check the expression form.
    pub fn act(&self, q: Point) -> Result<Point> {
        Ok(match self {
            Generator::Translate { p } => group_mul(*p, q),
            Generator::Dilate { r } => dilate(q, *r),
            Generator::Rotate { phi } => {
                let z = q.z() * Complex64::from_polar(1.0, *phi);
                Point::new(z.re, z.im, q.t)
            }
            Generator::Invert => {
                let r2 = q.x * q.x + q.y * q.y;
                let n4 = r2 * r2 + q.t * q.t;
                if n4 == 0.0 {
                    return Err(Error::Singular("inversion singular at origin".into()));
                }
                let z = q.z() / Complex64::new(-r2, q.t);
                Point::new(z.re, z.im, -q.t / n4)
            }
            Generator::Reflect => Point::new(q.x, -q.y, -q.t),
        })
    }
}

/// A composition `g₁ ∘ g₂ ∘ … ∘ gₙ` of generators; `gₙ` acts first.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConformalWord {
    pub generators: Vec<Generator>,
}

impl ConformalWord {
    pub fn new(generators: Vec<Generator>) -> Self {
        ConformalWord { generators }
    }

    /// Product of the generator orientations.
    pub fn orientation(&self) -> i32 {
        self.generators.iter().map(Generator::orientation).product()
    }

    pub fn contains_inversion(&self) -> bool {
        self.generators.contains(&Generator::Invert)
    }

    /// Type 1: `τ_p ∘ r_φ ∘ δ_r ∘ τ_q` (fixes ∞).
    pub fn make_type1(p: Point, phi: f64, r: f64, q: Point) -> Self {
        ConformalWord::new(vec![
            Generator::Translate { p },
            Generator::Rotate { phi },
            Generator::Dilate { r },
            Generator::Translate { p: q },
        ])
    }

    /// Type 2: `τ_p ∘ ι ∘ r_φ ∘ δ_r ∘ τ_q`.
    pub fn make_type2(p: Point, phi: f64, r: f64, q: Point) -> Self {
        ConformalWord::new(vec![
            Generator::Translate { p },
            Generator::Invert,
            Generator::Rotate { phi },
            Generator::Dilate { r },
            Generator::Translate { p: q },
        ])
    }

    pub fn act(&self, p: Point) -> Result<Point> {
        self.generators.iter().rev().try_fold(p, |q, g| g.act(q))
    }

    /// Random Reflect-free word of length `1..=max_len` with moderate parameters.
    pub fn random_orientation_preserving(rng: &mut impl Rng, max_len: usize) -> Self {
        let len = rng.gen_range(1..=max_len);
        let generators = (0..len)
            .map(|_| match rng.gen_range(0..4) {
                0 => Generator::Translate {
                    p: Point::new(
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                    ),
                },
                1 => Generator::Dilate {
                    r: rng.gen_range(0.5..2.0),
                },
                2 => Generator::Rotate {
                    phi: rng.gen_range(-PI..PI),
                },
                _ => Generator::Invert,
            })
            .collect();
        ConformalWord::new(generators)
    }

    pub fn label(&self) -> String {
        if self.generators.is_empty() {
            return "id".into();
        }
        self.generators
            .iter()
            .map(Generator::label)
            .collect::<Vec<_>>()
            .join("∘")
    }
}

/// The word as an evaluable map (closed forms composed in word order).
pub fn word_to_map(w: &ConformalWord) -> HeisMap {
    w.generators
        .iter()
        .rev()
        .fold(HeisMap::identity(), |acc, g| {
            HeisMap::generator(g).compose(&acc)
        })
}

/// Linear action of `[[a, b], [c, d]] ∈ SL(2,ℝ)` on `z`, fixing `t`.
pub fn sl2_map(a: f64, b: f64, c: f64, d: f64) -> HeisMap {
    let (x, y, t) = (Expr::x(), Expr::y(), Expr::t());
    let k = Expr::real;
    HeisMap::from_exprs(
        format!("sl2({a},{b},{c},{d})"),
        [
            k(a) * x.clone() + k(b) * y.clone(),
            k(c) * x + k(d) * y,
            t,
        ],
    )
}

/// Affine map `(a z + b z̄ + c, d t + e)`; not contact in general.
pub fn affine_map(a: Complex64, b: Complex64, c: Complex64, d: f64, e: f64) -> HeisMap {
    let (x, y, t) = (Expr::x(), Expr::y(), Expr::t());
    let k = Expr::real;
    // (a + b) x + i (a − b) y + c, split into real and imaginary parts
    let s = a + b;
    let m = (a - b) * Complex64::new(0.0, 1.0);
    HeisMap::from_exprs(
        "affine",
        [
            k(s.re) * x.clone() + k(m.re) * y.clone() + k(c.re),
            k(s.im) * x + k(m.im) * y + k(c.im),
            k(d) * t + k(e),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: Point, b: Point, tol: f64) -> bool {
        let s = 1.0 + a.x.abs().max(a.y.abs()).max(a.t.abs());
        (a.x - b.x).abs() <= tol * s && (a.y - b.y).abs() <= tol * s && (a.t - b.t).abs() <= tol * s
    }

    fn rand_point(rng: &mut impl Rng) -> Point {
        Point::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))
    }

    #[test]
    fn multiplication_examples() {
        assert_eq!(
            group_mul(Point::new(1.0, 0.0, 0.0), Point::new(0.0, 1.0, 0.0)),
            Point::new(1.0, 1.0, -2.0)
        );
        assert_eq!(
            group_mul(Point::new(0.0, 0.0, 2.0), Point::new(0.0, 0.0, 3.5)),
            Point::new(0.0, 0.0, 5.5)
        );
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let p = rand_point(&mut rng);
            let e = group_mul(p, group_inv(p));
            assert!(close(e, Point::ORIGIN, 1e-15));
        }
    }

    #[test]
    fn associativity_and_left_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let (a, b, c) = (rand_point(&mut rng), rand_point(&mut rng), rand_point(&mut rng));
            assert!(close(
                group_mul(group_mul(a, b), c),
                group_mul(a, group_mul(b, c)),
                1e-12
            ));
            let d0 = koranyi_dist(b, c);
            let d1 = koranyi_dist(group_mul(a, b), group_mul(a, c));
            assert!((d0 - d1).abs() <= 1e-8 * (1.0 + d0));
        }
    }

    #[test]
    fn norm_examples_and_homogeneity() {
        assert!((koranyi_norm(Point::new(1.0, 1.0, 0.0)) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(koranyi_norm(Point::new(0.0, 0.0, 1.0)), 1.0);
        let p = Point::new(0.3, -1.2, 0.7);
        assert_eq!(koranyi_dist(p, p), 0.0);
        for r in [0.1, 0.5, 2.0, 7.0] {
            let n = koranyi_norm(dilate(p, r));
            assert!((n - r * koranyi_norm(p)).abs() < 1e-12);
        }
    }

    #[test]
    fn inversion_examples() {
        let inv = Generator::Invert;
        assert!(close(inv.act(Point::new(1.0, 0.0, 0.0)).unwrap(), Point::new(-1.0, 0.0, 0.0), 1e-15));
        assert!(close(inv.act(Point::new(0.0, 0.0, 1.0)).unwrap(), Point::new(0.0, 0.0, -1.0), 1e-15));
        assert!(matches!(inv.act(Point::ORIGIN), Err(Error::Singular(_))));

        let m = word_to_map(&ConformalWord::new(vec![Generator::Invert, Generator::Invert]));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let p = rand_point(&mut rng);
            assert!(close(m.apply(p).unwrap(), p, 1e-8));
        }
    }

    #[test]
    fn word_map_matches_pointwise_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let w = ConformalWord::random_orientation_preserving(&mut rng, 6);
            let p = rand_point(&mut rng);
            if let (Ok(a), Ok(b)) = (w.act(p), word_to_map(&w).apply(p)) {
                assert!(close(a, b, 1e-9), "{}: {a:?} vs {b:?}", w.label());
            }
        }
    }

    #[test]
    fn radial_curve_examples() {
        let q = radial_curve(0.5, Point::new(1.0, 0.0, 0.0)).unwrap();
        assert!(close(q, Point::new(0.5, 0.0, 0.0), 1e-15));
        let p = Point::new(0.6, -0.3, 0.8);
        assert!(close(radial_curve(1.0, p).unwrap(), p, 1e-15));
        assert!(radial_curve(0.5, Point::new(0.0, 0.0, 1.0)).is_err());
        for r in [0.05, 0.3, 0.9] {
            let n = koranyi_norm(radial_curve(r, p).unwrap());
            assert!((n - r * koranyi_norm(p)).abs() < 1e-12);
        }
    }

    #[test]
    fn radial_curve_is_horizontal() {
        // θ(γ̇) = ṫ − 2y ẋ + 2x ẏ by central differences in r
        let p = Point::new(1.0, 0.0, 1.0);
        let h = 1e-5;
        for r in [0.2, 0.5, 0.8] {
            let a = radial_curve(r - h, p).unwrap();
            let b = radial_curve(r + h, p).unwrap();
            let c = radial_curve(r, p).unwrap();
            let (dx, dy, dt) = ((b.x - a.x) / (2.0 * h), (b.y - a.y) / (2.0 * h), (b.t - a.t) / (2.0 * h));
            let theta = dt - 2.0 * c.y * dx + 2.0 * c.x * dy;
            assert!(theta.abs() < 1e-8, "{theta}");
        }
    }

    #[test]
    fn serde_shapes() {
        let w = ConformalWord::make_type2(Point::new(1.0, 2.0, 3.0), 0.5, 2.0, Point::ORIGIN);
        let s = serde_json::to_string(&w).unwrap();
        assert!(s.starts_with(r#"[{"type":"translate","p":[1.0,2.0,3.0]},{"type":"invert"}"#), "{s}");
        let back: ConformalWord = serde_json::from_str(&s).unwrap();
        assert_eq!(back, w);
        assert_eq!(w.orientation(), 1);
        let r = ConformalWord::new(vec![Generator::Reflect, Generator::Dilate { r: 2.0 }]);
        assert_eq!(r.orientation(), -1);
    }
}
