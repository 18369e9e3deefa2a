//! Maps H¹ → H¹ as pipelines of expression triples.
//!
//! Each stage is a triple `(f₁, f₂, f₃)` of expressions in `(x, y, t)`; the
//! stages are applied in order, so jet evaluation of a composition is just
//! evaluating each stage on the previous stage's output jets.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{DomainReason, Error, Result};
use crate::expr::Expr;
use crate::group::{Generator, Point};
use crate::jet::{jet_seed, Jet};

#[derive(Clone, Debug)]
struct Stage {
    label: String,
    comps: Arc<[Expr; 3]>,
    inversion: bool,
}

/// A map H¹ → H¹; stages run first to last.
#[derive(Clone, Debug, Default)]
pub struct HeisMap {
    stages: Vec<Stage>,
}

/// Jets of the three components of a map at one point, plus `F = f₁ + i f₂`.
#[derive(Clone, Debug)]
pub struct MapJets {
    pub f: [Jet<f64>; 3],
    pub big_f: Jet<Complex64>,
}

impl MapJets {
    pub fn value(&self) -> Point {
        Point::new(self.f[0].value(), self.f[1].value(), self.f[2].value())
    }

    pub fn order(&self) -> usize {
        self.f[0].order()
    }
}

impl HeisMap {
    pub fn identity() -> Self {
        HeisMap { stages: Vec::new() }
    }

    pub fn from_exprs(label: impl Into<String>, comps: [Expr; 3]) -> Self {
        HeisMap {
            stages: vec![Stage {
                label: label.into(),
                comps: Arc::new(comps),
                inversion: false,
            }],
        }
    }

    pub fn generator(g: &Generator) -> Self {
        HeisMap {
            stages: vec![Stage {
                label: g.label(),
                comps: Arc::new(g.components()),
                inversion: *g == Generator::Invert,
            }],
        }
    }

    /// `self ∘ inner`: `inner` acts first.
    pub fn compose(&self, inner: &HeisMap) -> HeisMap {
        let mut stages = inner.stages.clone();
        stages.extend(self.stages.iter().cloned());
        HeisMap { stages }
    }

    pub fn is_identity(&self) -> bool {
        self.stages.is_empty()
    }

    /// The component expressions when the map is a single stage.
    pub fn single_stage(&self) -> Option<&[Expr; 3]> {
        match self.stages.as_slice() {
            [s] => Some(&s.comps),
            _ => None,
        }
    }

    fn run<A: crate::expr::Algebra>(&self, mut env: [A; 3]) -> Result<[A; 3]> {
        for s in &self.stages {
            let ev = |i: usize| s.comps[i].eval(&env).map_err(|e| stage_error(s, e));
            env = [ev(0)?, ev(1)?, ev(2)?];
        }
        Ok(env)
    }

    pub fn apply(&self, p: Point) -> Result<Point> {
        let [x, y, t] = self.run([p.x, p.y, p.t])?;
        Ok(Point::new(x, y, t))
    }

    /// Component jets of order `order` at `p`.
    pub fn eval_jets(&self, p: Point, order: usize) -> Result<MapJets> {
        let f = self.run(jet_seed::<f64>(p, order))?;
        let big_f = Jet::complexify(&f[0], &f[1]);
        Ok(MapJets { f, big_f })
    }
}

fn stage_error(s: &Stage, e: Error) -> Error {
    match e {
        Error::Domain {
            reason: DomainReason::DivisionByZero,
            ..
        } if s.inversion => Error::Singular("inversion singular at origin".into()),
        Error::Domain { reason, node } => Error::Domain {
            reason,
            node: format!("{node} in stage {}", s.label),
        },
        other => other,
    }
}

impl fmt::Display for HeisMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.stages.is_empty() {
            return f.write_str("id");
        }
        let labels: Vec<&str> = self.stages.iter().rev().map(|s| s.label.as_str()).collect();
        f.write_str(&labels.join("∘"))
    }
}
