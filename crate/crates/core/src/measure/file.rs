//! Measure description files.
//!
//! ```text
//! # unit atom at angle 0 on top of a cosine density
//! [density]
//! cos(theta)
//!
//! [atoms]
//! # angle   mass   [imaginary mass]
//! 0.0       0.5
//!
//! [cantor]
//! depth = 8
//! mass = 1.0
//! arc = 0.0 2.0943951023931957
//! ```
//!
//! All sections are optional. Lines of the `density` section are joined and
//! parsed with the expression grammar of [`parse_expression`](super::parse_expression).

use num_complex::Complex64;

use super::{CantorPart, CircleMeasure, Density};
use crate::config::{parse_f64, Document};
use crate::error::{Error, Result};

pub fn parse_measure(text: &str) -> Result<CircleMeasure> {
    let doc = Document::parse(text)?;
    let mut mu = CircleMeasure::new();
    for s in &doc.sections {
        match s.name.as_str() {
            "" => {
                if let Some((line, _)) = s.lines.first() {
                    return Err(Error::Parse { line: *line, message: "content outside of a section".into() });
                }
                if let Some((line, k, _)) = s.entries.first() {
                    return Err(Error::Parse { line: *line, message: format!("key `{k}` outside of a section") });
                }
            }
            "density" => {
                let Some(first) = s.lines.first().map(|l| l.0) else {
                    return Err(Error::Parse { line: 0, message: "empty density section".into() });
                };
                let src: Vec<&str> = s.lines.iter().map(|(_, l)| l.as_str()).collect();
                let d =
                    Density::parse(&src.join(" ")).map_err(|e| Error::Parse { line: first, message: e.to_string() })?;
                mu = mu.with_density(d);
            }
            "atoms" => {
                for (line, text) in &s.lines {
                    let cols: Vec<&str> = text.split_whitespace().collect();
                    if !(2..=3).contains(&cols.len()) {
                        return Err(Error::Parse {
                            line: *line,
                            message: "atom line must be `angle mass [imag]`".into(),
                        });
                    }
                    let angle = parse_f64(*line, cols[0])?;
                    let re = parse_f64(*line, cols[1])?;
                    let im = cols.get(2).map(|c| parse_f64(*line, c)).transpose()?.unwrap_or(0.0);
                    mu = mu
                        .with_atom(angle, Complex64::new(re, im))
                        .map_err(|e| Error::Parse { line: *line, message: e.to_string() })?;
                }
            }
            "cantor" => {
                let need = |key: &str| {
                    s.get(key).ok_or_else(|| Error::Parse {
                        line: s.entries.first().map(|e| e.0).unwrap_or(0),
                        message: format!("cantor section needs `{key}`"),
                    })
                };
                let (dl, depth) = need("depth")?;
                let depth = depth
                    .parse::<u32>()
                    .map_err(|_| Error::Parse { line: dl, message: format!("bad depth `{depth}`") })?;
                let (ml, mass) = need("mass")?;
                let mass = parse_f64(ml, mass)?;
                let (al, arc) = need("arc")?;
                let ends: Vec<&str> = arc.split_whitespace().collect();
                if ends.len() != 2 {
                    return Err(Error::Parse { line: al, message: "arc must be `start end`".into() });
                }
                let arc = (parse_f64(al, ends[0])?, parse_f64(al, ends[1])?);
                mu = mu
                    .with_cantor(CantorPart { depth, mass, arc })
                    .map_err(|e| Error::Parse { line: dl, message: e.to_string() })?;
            }
            other => {
                let line = s.lines.first().map(|l| l.0).or(s.entries.first().map(|e| e.0)).unwrap_or(0);
                return Err(Error::Parse { line, message: format!("unknown section `{other}`") });
            }
        }
    }
    Ok(mu)
}

/// Render a measure in the file format. Function densities cannot be written
/// and are reported as an error.
pub fn render_measure(mu: &CircleMeasure) -> Result<String> {
    let mut out = String::new();
    if let Some(d) = mu.density() {
        match d {
            Density::Trig { source: Some(src), .. } => {
                out.push_str("[density]\n");
                out.push_str(src);
                out.push('\n');
            }
            _ => return Err(Error::InvalidMeasure("only expression densities can be rendered".into())),
        }
    }
    if !mu.atoms().is_empty() {
        out.push_str("[atoms]\n");
        for a in mu.atoms() {
            if a.mass.im == 0.0 {
                out.push_str(&format!("{:e} {:e}\n", a.angle, a.mass.re));
            } else {
                out.push_str(&format!("{:e} {:e} {:e}\n", a.angle, a.mass.re, a.mass.im));
            }
        }
    }
    if let Some(c) = mu.singular() {
        out.push_str(&format!(
            "[cantor]\ndepth = {}\nmass = {:e}\narc = {:e} {:e}\n",
            c.depth, c.mass, c.arc.0, c.arc.1
        ));
    }
    Ok(out)
}
