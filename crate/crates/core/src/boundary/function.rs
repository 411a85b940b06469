use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::measure::{eval_schwarz, kernel_value, CircleMeasure, Density, DiscPoint, Kernel};

/// Where an analytic function came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionTag {
    SchwarzOfMeasure,
    ClosedForm,
    DecompositionPart,
}

type Evaluator = Arc<dyn Fn(DiscPoint) -> Result<Complex64> + Send + Sync>;

#[derive(Clone)]
enum Repr {
    Schwarz(CircleMeasure),
    Closed(Evaluator),
    Linear(Vec<(f64, AnalyticFunction)>),
}

/// An analytic function on the open unit disc.
#[derive(Clone)]
pub struct AnalyticFunction {
    name: String,
    tag: FunctionTag,
    repr: Repr,
}

impl fmt::Debug for AnalyticFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticFunction").field("name", &self.name).field("tag", &self.tag).finish()
    }
}

impl AnalyticFunction {
    /// The Schwarz integral of `mu`; the measure is kept for oracle checks.
    pub fn schwarz(mu: CircleMeasure) -> Self {
        AnalyticFunction { name: "schwarz".into(), tag: FunctionTag::SchwarzOfMeasure, repr: Repr::Schwarz(mu) }
    }

    pub fn closed_form<F>(name: &str, f: F) -> Self
    where
        F: Fn(DiscPoint) -> Result<Complex64> + Send + Sync + 'static,
    {
        AnalyticFunction { name: name.into(), tag: FunctionTag::ClosedForm, repr: Repr::Closed(Arc::new(f)) }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::closed_form("constant", move |_| Ok(c))
    }

    /// `exp((1 + z)/(1 − z))`, the reciprocal of the singular inner function.
    pub fn exp_inner_inverse() -> Self {
        Self::closed_form("exp-inner-inverse", |z| {
            let one = Complex64::new(1.0, 0.0);
            Ok(((one + z.z()) / (one - z.z())).exp())
        })
    }

    /// `Σ cᵢ fᵢ`.
    pub fn linear(name: &str, tag: FunctionTag, terms: Vec<(f64, AnalyticFunction)>) -> Self {
        AnalyticFunction { name: name.into(), tag, repr: Repr::Linear(terms) }
    }

    pub fn named(mut self, name: &str) -> Self {
        self.name = name.into();
        self
    }

    pub fn tagged(mut self, tag: FunctionTag) -> Self {
        self.tag = tag;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn tag(&self) -> FunctionTag {
        self.tag
    }

    /// The generating measure of a Schwarz integral.
    pub fn measure(&self) -> Option<&CircleMeasure> {
        match &self.repr {
            Repr::Schwarz(mu) => Some(mu),
            _ => None,
        }
    }

    pub fn eval(&self, z: DiscPoint) -> Result<Complex64> {
        match &self.repr {
            Repr::Schwarz(mu) => eval_schwarz(mu, z),
            Repr::Closed(f) => f(z),
            Repr::Linear(terms) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (c, f) in terms {
                    acc += f.eval(z)? * *c;
                }
                Ok(acc)
            }
        }
    }

    /// Values at `r e^{2πij/n}`, `j = 0..n`.
    pub fn eval_circle(&self, r: f64, n: usize) -> Result<Vec<Complex64>> {
        match &self.repr {
            Repr::Schwarz(mu) => schwarz_on_circle(mu, r, n),
            Repr::Closed(_) => {
                (0..n).into_par_iter().map(|j| self.eval(DiscPoint::polar(r, grid_angle(j, n))?)).collect()
            }
            Repr::Linear(terms) => {
                let mut acc = vec![Complex64::new(0.0, 0.0); n];
                for (c, f) in terms {
                    for (a, v) in acc.iter_mut().zip(f.eval_circle(r, n)?) {
                        *a += v * *c;
                    }
                }
                Ok(acc)
            }
        }
    }
}

pub(crate) fn grid_angle(j: usize, n: usize) -> f64 {
    2.0 * std::f64::consts::PI * j as f64 / n as f64
}

fn schwarz_on_circle(mu: &CircleMeasure, r: f64, n: usize) -> Result<Vec<Complex64>> {
    DiscPoint::polar(r, 0.0)?;
    let mut values = match mu.density() {
        Some(Density::Trig { poly, .. }) => {
            // Σ_k a_k r^k e^{ikθ_j} folded onto n frequencies and summed by one FFT.
            let mut buf = vec![Complex64::new(0.0, 0.0); n];
            buf[0] = poly.coeff(0);
            let mut rk = 1.0;
            for k in 1..=poly.degree() {
                rk *= r;
                buf[k % n] += poly.coeff(k as i64) * (2.0 * rk);
            }
            FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
            buf
        }
        Some(Density::Function(_)) => {
            let density_only = CircleMeasure::from_density(mu.density().unwrap().clone());
            (0..n)
                .into_par_iter()
                .map(|j| eval_schwarz(&density_only, DiscPoint::polar(r, grid_angle(j, n))?))
                .collect::<Result<Vec<_>>>()?
        }
        None => vec![Complex64::new(0.0, 0.0); n],
    };
    let atoms = mu.point_masses()?;
    if !atoms.is_empty() {
        values.par_iter_mut().enumerate().try_for_each(|(j, v)| -> Result<()> {
            let theta = grid_angle(j, n);
            for a in &atoms {
                let k = kernel_value(Kernel::Schwarz, a.angle, r, theta)
                    .ok_or(crate::Error::BoundaryEvaluation { angle: a.angle })?;
                *v += k * a.mass;
            }
            Ok(())
        })?;
    }
    Ok(values)
}
