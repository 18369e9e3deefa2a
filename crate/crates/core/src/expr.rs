//! Expression trees for scalar fields on H¹.
//!
//! An [`Expr`] is evaluated over any [`Algebra`]: plain `f64`/`Complex64`
//! values, or real/complex [`Jet`]s when derivatives are needed. Coordinates
//! are bound through a three-slot environment, so composing maps amounts to
//! evaluating the outer expression on the inner map's jets.

use std::fmt;
use std::ops;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{DomainReason, Error, Result};
use crate::jet::{Jet, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
    T,
}

impl Var {
    pub fn index(self) -> usize {
        match self {
            Var::X => 0,
            Var::Y => 1,
            Var::T => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    Conj,
    Re,
    Im,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Conj => "conj",
            Func::Re => "re",
            Func::Im => "im",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            "conj" => Func::Conj,
            "re" => Func::Re,
            "im" => Func::Im,
            _ => return None,
        })
    }
}

#[derive(Debug, PartialEq)]
pub enum Node {
    Var(Var),
    Const(Complex64),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Neg(Expr),
    Pow(Expr, i32),
    Func(Func, Expr),
}

/// Shared, immutable expression tree.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr(Arc<Node>);

/// Commutative algebra an [`Expr`] can be evaluated in.
pub trait Algebra: Clone + Sized {
    /// A constant in the same shape as `self` (same base point and order for jets).
    fn lift(&self, c: Complex64) -> Result<Self>;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Result<Self>;
    fn neg(&self) -> Self;
    fn powi(&self, n: i32) -> Result<Self>;
    fn exp(&self) -> Self;
    fn ln(&self) -> Result<Self>;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn sqrt(&self) -> Result<Self>;
    fn conj(&self) -> Self;
    fn re(&self) -> Self;
    fn im(&self) -> Self;
}

macro_rules! scalar_algebra {
    ($t:ty) => {
        impl Algebra for $t {
            fn lift(&self, c: Complex64) -> Result<Self> {
                <$t as Scalar>::from_complex(c)
                    .ok_or_else(|| Error::domain(DomainReason::ComplexInRealContext, "constant"))
            }
            fn add(&self, o: &Self) -> Self {
                *self + *o
            }
            fn sub(&self, o: &Self) -> Self {
                *self - *o
            }
            fn mul(&self, o: &Self) -> Self {
                *self * *o
            }
            fn div(&self, o: &Self) -> Result<Self> {
                if Scalar::is_zero(*o) {
                    return Err(Error::domain(DomainReason::DivisionByZero, "division"));
                }
                Ok(*self / *o)
            }
            fn neg(&self) -> Self {
                -*self
            }
            fn powi(&self, n: i32) -> Result<Self> {
                if n < 0 && Scalar::is_zero(*self) {
                    return Err(Error::domain(DomainReason::DivisionByZero, "division"));
                }
                Ok(Scalar::powi(*self, n))
            }
            fn exp(&self) -> Self {
                Scalar::exp(*self)
            }
            fn ln(&self) -> Result<Self> {
                if Scalar::is_nonpositive_real(*self) {
                    return Err(Error::domain(DomainReason::LogNonPositive, "log"));
                }
                Ok(Scalar::ln(*self))
            }
            fn sin(&self) -> Self {
                Scalar::sin(*self)
            }
            fn cos(&self) -> Self {
                Scalar::cos(*self)
            }
            fn sqrt(&self) -> Result<Self> {
                if Scalar::is_nonpositive_real(*self) && !Scalar::is_zero(*self) {
                    return Err(Error::domain(DomainReason::SqrtNonPositive, "sqrt"));
                }
                Ok(Scalar::powf(*self, 0.5))
            }
            fn conj(&self) -> Self {
                Scalar::conj(*self)
            }
            fn re(&self) -> Self {
                Scalar::re(*self)
            }
            fn im(&self) -> Self {
                Scalar::im(*self)
            }
        }
    };
}

scalar_algebra!(f64);
scalar_algebra!(Complex64);

impl<S: Scalar> Algebra for Jet<S> {
    fn lift(&self, c: Complex64) -> Result<Self> {
        let v = S::from_complex(c)
            .ok_or_else(|| Error::domain(DomainReason::ComplexInRealContext, "constant"))?;
        Ok(Jet::constant(self.base(), self.order(), v))
    }
    fn add(&self, o: &Self) -> Self {
        self.add_jet(o)
    }
    fn sub(&self, o: &Self) -> Self {
        self.sub_jet(o)
    }
    fn mul(&self, o: &Self) -> Self {
        self.mul_jet(o)
    }
    fn div(&self, o: &Self) -> Result<Self> {
        self.div_jet(o)
    }
    fn neg(&self) -> Self {
        self.scale(-S::one())
    }
    fn powi(&self, n: i32) -> Result<Self> {
        Jet::powi(self, n)
    }
    fn exp(&self) -> Self {
        Jet::exp(self)
    }
    fn ln(&self) -> Result<Self> {
        Jet::ln(self)
    }
    fn sin(&self) -> Self {
        Jet::sin(self)
    }
    fn cos(&self) -> Self {
        Jet::cos(self)
    }
    fn sqrt(&self) -> Result<Self> {
        Jet::sqrt(self)
    }
    fn conj(&self) -> Self {
        Jet::conj(self)
    }
    fn re(&self) -> Self {
        Jet::re(self)
    }
    fn im(&self) -> Self {
        Jet::im(self)
    }
}

impl Expr {
    fn new(n: Node) -> Self {
        Expr(Arc::new(n))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn var(v: Var) -> Self {
        Self::new(Node::Var(v))
    }

    pub fn x() -> Self {
        Self::var(Var::X)
    }

    pub fn y() -> Self {
        Self::var(Var::Y)
    }

    pub fn t() -> Self {
        Self::var(Var::T)
    }

    pub fn real(v: f64) -> Self {
        Self::new(Node::Const(Complex64::new(v, 0.0)))
    }

    pub fn complex(v: Complex64) -> Self {
        Self::new(Node::Const(v))
    }

    pub fn as_const(&self) -> Option<Complex64> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    fn is_const(&self, v: f64) -> bool {
        self.as_const() == Some(Complex64::new(v, 0.0))
    }

    pub fn powi(&self, n: i32) -> Self {
        match (n, self.as_const()) {
            (0, _) => Self::real(1.0),
            (1, _) => self.clone(),
            (_, Some(c)) if n > 0 => Self::complex(c.powi(n)),
            _ => Self::new(Node::Pow(self.clone(), n)),
        }
    }

    pub fn apply(f: Func, e: &Expr) -> Self {
        Self::new(Node::Func(f, e.clone()))
    }

    pub fn exp(&self) -> Self {
        Self::apply(Func::Exp, self)
    }

    pub fn ln(&self) -> Self {
        Self::apply(Func::Log, self)
    }

    pub fn sin(&self) -> Self {
        Self::apply(Func::Sin, self)
    }

    pub fn cos(&self) -> Self {
        Self::apply(Func::Cos, self)
    }

    pub fn sqrt(&self) -> Self {
        Self::apply(Func::Sqrt, self)
    }

    pub fn conj(&self) -> Self {
        Self::apply(Func::Conj, self)
    }

    pub fn re(&self) -> Self {
        Self::apply(Func::Re, self)
    }

    pub fn im(&self) -> Self {
        Self::apply(Func::Im, self)
    }

    /// Evaluate with x, y, t bound to `env`.
    pub fn eval<A: Algebra>(&self, env: &[A; 3]) -> Result<A> {
        let r = match self.node() {
            Node::Var(v) => Ok(env[v.index()].clone()),
            Node::Const(c) => env[0].lift(*c),
            Node::Add(a, b) => Ok(a.eval(env)?.add(&b.eval(env)?)),
            Node::Sub(a, b) => Ok(a.eval(env)?.sub(&b.eval(env)?)),
            Node::Mul(a, b) => Ok(a.eval(env)?.mul(&b.eval(env)?)),
            Node::Div(a, b) => a.eval(env)?.div(&b.eval(env)?),
            Node::Neg(a) => Ok(a.eval(env)?.neg()),
            Node::Pow(a, n) => a.eval(env)?.powi(*n),
            Node::Func(f, a) => {
                let v = a.eval(env)?;
                match f {
                    Func::Exp => Ok(v.exp()),
                    Func::Log => v.ln(),
                    Func::Sin => Ok(v.sin()),
                    Func::Cos => Ok(v.cos()),
                    Func::Sqrt => v.sqrt(),
                    Func::Conj => Ok(v.conj()),
                    Func::Re => Ok(v.re()),
                    Func::Im => Ok(v.im()),
                }
            }
        };
        r.map_err(|e| e.at_node(self))
    }

    /// Symbolic partial derivative with light constant folding.
    pub fn diff(&self, v: Var) -> Expr {
        match self.node() {
            Node::Var(w) => Expr::real(if *w == v { 1.0 } else { 0.0 }),
            Node::Const(_) => Expr::real(0.0),
            Node::Add(a, b) => a.diff(v) + b.diff(v),
            Node::Sub(a, b) => a.diff(v) - b.diff(v),
            Node::Mul(a, b) => a.diff(v) * b.clone() + a.clone() * b.diff(v),
            Node::Div(a, b) => {
                a.diff(v) / b.clone() - a.clone() * b.diff(v) / b.powi(2)
            }
            Node::Neg(a) => -a.diff(v),
            Node::Pow(a, n) => Expr::real(*n as f64) * a.powi(n - 1) * a.diff(v),
            Node::Func(f, a) => {
                let da = a.diff(v);
                if da.is_const(0.0) {
                    return Expr::real(0.0);
                }
                match f {
                    Func::Exp => self.clone() * da,
                    Func::Log => da / a.clone(),
                    Func::Sin => a.cos() * da,
                    Func::Cos => -(a.sin() * da),
                    Func::Sqrt => da / (Expr::real(2.0) * self.clone()),
                    Func::Conj => da.conj(),
                    Func::Re => da.re(),
                    Func::Im => da.im(),
                }
            }
        }
    }

    /// Which of x, y, t occur syntactically.
    pub fn free_vars(&self) -> [bool; 3] {
        let mut out = [false; 3];
        self.visit_vars(&mut out);
        out
    }

    fn visit_vars(&self, out: &mut [bool; 3]) {
        match self.node() {
            Node::Var(v) => out[v.index()] = true,
            Node::Const(_) => {}
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.visit_vars(out);
                b.visit_vars(out);
            }
            Node::Neg(a) | Node::Pow(a, _) | Node::Func(_, a) => a.visit_vars(out),
        }
    }

    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser {
            src: src.as_bytes(),
            pos: 0,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(Error::parse(p.pos, format!("unexpected `{}`", &src[p.pos..])));
        }
        Ok(e)
    }
}

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, o: Expr) -> Expr {
        match (self.as_const(), o.as_const()) {
            (Some(a), Some(b)) => Expr::complex(a + b),
            _ if self.is_const(0.0) => o,
            _ if o.is_const(0.0) => self,
            _ => Expr::new(Node::Add(self, o)),
        }
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, o: Expr) -> Expr {
        match (self.as_const(), o.as_const()) {
            (Some(a), Some(b)) => Expr::complex(a - b),
            _ if o.is_const(0.0) => self,
            _ if self.is_const(0.0) => -o,
            _ => Expr::new(Node::Sub(self, o)),
        }
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, o: Expr) -> Expr {
        match (self.as_const(), o.as_const()) {
            (Some(a), Some(b)) => Expr::complex(a * b),
            _ if self.is_const(0.0) || o.is_const(0.0) => Expr::real(0.0),
            _ if self.is_const(1.0) => o,
            _ if o.is_const(1.0) => self,
            _ => Expr::new(Node::Mul(self, o)),
        }
    }
}

impl ops::Div for Expr {
    type Output = Expr;
    fn div(self, o: Expr) -> Expr {
        if self.is_const(0.0) && !o.is_const(0.0) {
            return Expr::real(0.0);
        }
        if o.is_const(1.0) {
            return self;
        }
        Expr::new(Node::Div(self, o))
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self.node() {
            Node::Const(c) => Expr::complex(-*c),
            Node::Neg(a) => a.clone(),
            _ => Expr::new(Node::Neg(self)),
        }
    }
}

fn fmt_const(c: Complex64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c.im == 0.0 {
        if c.re < 0.0 {
            write!(f, "({})", c.re)
        } else {
            write!(f, "{}", c.re)
        }
    } else if c.re == 0.0 {
        write!(f, "({}*i)", c.im)
    } else {
        write!(f, "({}+{}*i)", c.re, c.im)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Var(Var::X) => f.write_str("x"),
            Node::Var(Var::Y) => f.write_str("y"),
            Node::Var(Var::T) => f.write_str("t"),
            Node::Const(c) => fmt_const(*c, f),
            Node::Add(a, b) => write!(f, "({a}+{b})"),
            Node::Sub(a, b) => write!(f, "({a}-{b})"),
            Node::Mul(a, b) => write!(f, "{a}*{b}"),
            Node::Div(a, b) => write!(f, "{a}/({b})"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Pow(a, n) if *n < 0 => write!(f, "{a}^({n})"),
            Node::Pow(a, n) => match a.node() {
                Node::Var(_) | Node::Func(..) => write!(f, "{a}^{n}"),
                _ => write!(f, "({a})^{n}"),
            },
            Node::Func(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::parse(self.pos, format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = Expr::new(Node::Add(acc, self.term()?));
            } else if self.eat(b'-') {
                acc = Expr::new(Node::Sub(acc, self.term()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = Expr::new(Node::Mul(acc, self.unary()?));
            } else if self.eat(b'/') {
                acc = Expr::new(Node::Div(acc, self.unary()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(Expr::new(Node::Neg(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let paren = self.eat(b'(');
        let neg = self.eat(b'-');
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        let n: i32 = digits
            .parse()
            .map_err(|_| Error::parse(start, "exponent must be an integer"))?;
        if paren {
            self.expect(b')')?;
        }
        Ok(Expr::new(Node::Pow(base, if neg { -n } else { n })))
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(Error::parse(self.pos, "unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                match name {
                    "x" => Ok(Expr::x()),
                    "y" => Ok(Expr::y()),
                    "t" => Ok(Expr::t()),
                    "i" => Ok(Expr::complex(Complex64::new(0.0, 1.0))),
                    "pi" => Ok(Expr::real(std::f64::consts::PI)),
                    _ => {
                        let func = Func::from_name(name)
                            .ok_or_else(|| Error::parse(start, format!("unknown identifier `{name}`")))?;
                        self.expect(b'(')?;
                        let arg = self.expr()?;
                        self.expect(b')')?;
                        Ok(Expr::apply(func, &arg))
                    }
                }
            }
            Some(c) => Err(Error::parse(self.pos, format!("unexpected `{}`", c as char))),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        let s = self.src;
        while self.pos < s.len() && (s[self.pos].is_ascii_digit() || s[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < s.len() && (s[self.pos] == b'e' || s[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < s.len() && (s[self.pos] == b'+' || s[self.pos] == b'-') {
                self.pos += 1;
            }
            if self.pos < s.len() && s[self.pos].is_ascii_digit() {
                while self.pos < s.len() && s[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                // `2exp(x)` is not valid anyway; back off so the error points at the `e`
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&s[start..self.pos]).unwrap_or("");
        text.parse::<f64>()
            .map(Expr::real)
            .map_err(|_| Error::parse(start, format!("bad number `{text}`")))
    }
}

/// Evaluate `e` to a jet of the given order at `p`.
pub fn jet_eval<S: Scalar>(e: &Expr, p: crate::group::Point, order: usize) -> Result<Jet<S>> {
    e.eval(&crate::jet::jet_seed::<S>(p, order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Point;
    use crate::jet::fd_oracle;

    #[test]
    fn parse_and_print_roundtrip_evaluates_the_same() {
        let src = "t^2-(2/3)*(x^4+y^4) + exp(-x)*sin(y) / (1 + t^2)";
        let e = Expr::parse(src).unwrap();
        let again = Expr::parse(&e.to_string()).unwrap();
        let p = Point::new(0.3, -0.4, 0.8);
        let a: f64 = e.eval(&[p.x, p.y, p.t]).unwrap();
        let b: f64 = again.eval(&[p.x, p.y, p.t]).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn parse_errors_carry_positions() {
        match Expr::parse("x + foo(y)") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        assert!(Expr::parse("x^y").is_err());
        assert!(Expr::parse("(x").is_err());
    }

    #[test]
    fn jet_eval_examples() {
        let e = Expr::parse("exp(x)").unwrap();
        let j: Jet<f64> = jet_eval(&e, Point::new(0.0, 0.0, 0.0), 3).unwrap();
        assert!((j.coeff([3, 0, 0]) - 1.0 / 6.0).abs() < 1e-15);

        let e = Expr::parse("x^2*y").unwrap();
        let j: Jet<f64> = jet_eval(&e, Point::new(1.0, 2.0, 3.0), 2).unwrap();
        assert_eq!(j.partial([1, 1, 0]).unwrap(), 2.0);
    }

    #[test]
    fn division_by_zero_names_the_node() {
        let e = Expr::parse("1/x").unwrap();
        for k in [0, 1, 4] {
            match jet_eval::<f64>(&e, Point::new(0.0, 0.0, 0.0), k) {
                Err(Error::Domain { reason, node }) => {
                    assert_eq!(reason, DomainReason::DivisionByZero);
                    assert!(node.contains('x'), "{node}");
                }
                other => panic!("{other:?}"),
            }
        }
        let e = Expr::parse("log(x - 1)").unwrap();
        assert!(matches!(
            jet_eval::<f64>(&e, Point::new(0.5, 0.0, 0.0), 2),
            Err(Error::Domain { reason: DomainReason::LogNonPositive, .. })
        ));
    }

    #[test]
    fn symbolic_diff_agrees_with_finite_differences() {
        let e = Expr::parse("sin(x*y)*exp(t) + sqrt(1 + x^2) / (2 + cos(t))").unwrap();
        let p = Point::new(0.4, -0.7, 0.3);
        for v in [Var::X, Var::Y, Var::T] {
            let d = e.diff(v);
            let val: f64 = d.eval(&[p.x, p.y, p.t]).unwrap();
            let mut alpha = [0; 3];
            alpha[v.index()] = 1;
            let fd = fd_oracle(|q| e.eval(&[q.x, q.y, q.t]), p, alpha, 1e-5).unwrap();
            assert!((val - fd).abs() < 1e-8, "{v:?}: {val} vs {fd}");
        }
    }

    #[test]
    fn complex_constant_in_real_context_is_rejected() {
        let e = Expr::parse("x + i").unwrap();
        assert!(e.eval(&[1.0, 2.0, 3.0]).is_err());
        let z: Complex64 = e
            .eval(&[Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0), Complex64::new(3.0, 0.0)])
            .unwrap();
        assert_eq!(z, Complex64::new(1.0, 1.0));
    }

    #[test]
    fn free_vars() {
        assert_eq!(Expr::parse("exp(x)*2").unwrap().free_vars(), [true, false, false]);
        assert_eq!(Expr::parse("y+t").unwrap().free_vars(), [false, true, true]);
    }
}
