use std::f64::consts::PI;

use num_complex::Complex64;

use crate::boundary::AnalyticFunction;
use crate::measure::{CantorPart, CircleMeasure, Density, TrigPoly};

/// A named test function and the condition it is built to violate, if any.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub function: AnalyticFunction,
    pub designed_failure: Option<Condition>,
}

/// The four representability conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    Smirnov,
    Kolmogorov,
    HvLimit,
    RealPart,
}

impl Condition {
    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Smirnov => "smirnov",
            Condition::Kolmogorov => "kolmogorov",
            Condition::HvLimit => "hv-limit",
            Condition::RealPart => "real-part",
        }
    }
}

fn schwarz(name: &'static str, mu: CircleMeasure) -> CatalogEntry {
    CatalogEntry { name, function: AnalyticFunction::schwarz(mu).named(name), designed_failure: None }
}

fn cos_density() -> Density {
    Density::trig(TrigPoly::harmonic(1, false))
}

/// Every catalog entry, Schwarz transforms first.
pub fn catalog() -> Vec<CatalogEntry> {
    let cantor = CircleMeasure::new()
        .with_cantor(CantorPart { depth: 8, mass: 1.0, arc: (-0.5 * PI, 0.5 * PI) })
        .expect("valid Cantor part");
    let pair = CircleMeasure::atom(0.0, 0.5).plus(&CircleMeasure::atom(PI, 0.5)).expect("distinct atoms");
    let atom_cos = CircleMeasure::atom(0.5 * PI, 0.5).with_density(cos_density());
    vec![
        schwarz("atom", CircleMeasure::atom(0.0, 1.0)),
        schwarz("atom-0.5", CircleMeasure::atom(0.0, 0.5)),
        schwarz("atom-0.25", CircleMeasure::atom(0.0, 0.25)),
        schwarz("cantor8", cantor),
        schwarz("atom-pair", pair),
        schwarz("density-const", CircleMeasure::from_density(Density::trig(TrigPoly::constant(1.0)))),
        schwarz("density-cos", CircleMeasure::from_density(cos_density())),
        schwarz("atom-plus-cos", atom_cos),
        CatalogEntry {
            name: "const-i",
            function: AnalyticFunction::constant(Complex64::new(0.0, 1.0)).named("const-i"),
            designed_failure: Some(Condition::RealPart),
        },
        CatalogEntry {
            name: "exp-inner-inverse",
            function: AnalyticFunction::exp_inner_inverse(),
            designed_failure: Some(Condition::Smirnov),
        },
    ]
}

pub fn catalog_entry(name: &str) -> Option<CatalogEntry> {
    catalog().into_iter().find(|e| e.name == name)
}
