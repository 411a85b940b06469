//! Trigonometric polynomials and the density expression language.
//!
//! Grammar (whitespace-insensitive, `theta` is the angle variable):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := power ('*' power)*
//! power   := unary ('^' INTEGER)?
//! unary   := '-' unary | primary
//! primary := NUMBER | 'const' '(' NUMBER ')'
//!          | ('cos' | 'sin') '(' [INTEGER '*'] 'theta' ')'
//!          | '(' expr ')'
//! ```
//!
//! The language is closed under the listed operations on trigonometric
//! polynomials, so every expression has a finite Fourier spectrum which is
//! computed exactly by coefficient algebra.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Highest harmonic an expression may produce.
pub const MAX_DEGREE: usize = 1 << 16;

/// A finite Fourier series `Σ_{|k| ≤ d} c_k e^{ikθ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    /// `coeffs[k + degree] = c_k`
    coeffs: Vec<Complex64>,
    degree: usize,
}

impl TrigPoly {
    pub fn constant(c: f64) -> Self {
        TrigPoly { coeffs: vec![Complex64::new(c, 0.0)], degree: 0 }
    }

    fn from_map(map: &BTreeMap<i64, Complex64>) -> Self {
        let degree = map.keys().map(|k| k.unsigned_abs() as usize).max().unwrap_or(0);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * degree + 1];
        for (&k, &c) in map {
            coeffs[(k + degree as i64) as usize] += c;
        }
        TrigPoly { coeffs, degree }
    }

    fn to_map(&self) -> BTreeMap<i64, Complex64> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() != 0.0)
            .map(|(i, c)| (i as i64 - self.degree as i64, *c))
            .collect()
    }

    /// `cos(kθ)` (or `sin(kθ)` when `sine`).
    pub fn harmonic(k: u32, sine: bool) -> Self {
        let mut m = BTreeMap::new();
        let k = k as i64;
        if k == 0 {
            m.insert(0, Complex64::new(if sine { 0.0 } else { 1.0 }, 0.0));
        } else if sine {
            m.insert(k, Complex64::new(0.0, -0.5));
            m.insert(-k, Complex64::new(0.0, 0.5));
        } else {
            m.insert(k, Complex64::new(0.5, 0.0));
            m.insert(-k, Complex64::new(0.5, 0.0));
        }
        Self::from_map(&m)
    }

    /// Fourier coefficients of uniformly spaced real samples `x_j = ρ(2πj/N)`.
    ///
    /// For even `N` the Nyquist coefficient is split evenly between `±N/2`, so
    /// the result interpolates the samples and is real on the circle.
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        assert!(n >= 2, "need at least two samples");
        let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let scale = 1.0 / n as f64;
        let degree = n / 2;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * degree + 1];
        for (k, c) in buf.iter().enumerate() {
            let c = c * scale;
            if n.is_multiple_of(2) && k == n / 2 {
                coeffs[degree + degree] += c * 0.5;
                coeffs[0] += c * 0.5;
            } else if k <= degree {
                coeffs[degree + k] += c;
            } else {
                coeffs[degree + k - n] += c;
            }
        }
        TrigPoly { coeffs, degree }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Coefficient `c_k` (zero outside the support).
    pub fn coeff(&self, k: i64) -> Complex64 {
        if k.unsigned_abs() as usize > self.degree {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(k + self.degree as i64) as usize]
        }
    }

    /// Value at angle `theta` (the real part; expressions are real-valued).
    pub fn eval(&self, theta: f64) -> f64 {
        let e = Complex64::from_polar(1.0, theta);
        let mut acc = self.coeff(0);
        let mut p = Complex64::new(1.0, 0.0);
        for k in 1..=self.degree as i64 {
            p *= e;
            acc += self.coeff(k) * p + self.coeff(-k) * p.conj();
        }
        acc.re
    }

    pub fn scale(&self, s: f64) -> Self {
        TrigPoly { coeffs: self.coeffs.iter().map(|c| c * s).collect(), degree: self.degree }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut m = self.to_map();
        for (k, c) in other.to_map() {
            *m.entry(k).or_default() += c;
        }
        Self::from_map(&m)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.degree + other.degree > MAX_DEGREE {
            return Err(Error::InvalidMeasure(format!("density degree exceeds {MAX_DEGREE}")));
        }
        let a = self.to_map();
        let b = other.to_map();
        let mut m: BTreeMap<i64, Complex64> = BTreeMap::new();
        for (ka, ca) in &a {
            for (kb, cb) in &b {
                *m.entry(ka + kb).or_default() += ca * cb;
            }
        }
        Ok(Self::from_map(&m))
    }

    pub fn pow(&self, n: u32) -> Result<Self> {
        let mut acc = TrigPoly::constant(1.0);
        for _ in 0..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Power-series evaluation `Σ_{k ≥ start} c_k z^{k - start}` (Horner).
    pub(crate) fn analytic_series(&self, z: Complex64, start: i64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in (start.max(-(self.degree as i64))..=self.degree as i64).rev() {
            acc = acc * z + self.coeff(k);
        }
        acc
    }
}

/// A density on the circle: either an exact trigonometric polynomial or an
/// arbitrary real function of the angle (integrated by quadrature).
#[derive(Clone)]
pub enum Density {
    Trig { poly: TrigPoly, source: Option<String> },
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for Density {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Density::Trig { poly, source } => {
                f.debug_struct("Trig").field("degree", &poly.degree()).field("source", source).finish()
            }
            Density::Function(_) => f.write_str("Function(..)"),
        }
    }
}

impl Density {
    pub fn parse(src: &str) -> Result<Self> {
        let poly = parse_expression(src)?;
        Ok(Density::Trig { poly, source: Some(src.trim().to_string()) })
    }

    pub fn trig(poly: TrigPoly) -> Self {
        Density::Trig { poly, source: None }
    }

    pub fn function<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Density::Function(Arc::new(f))
    }

    pub fn eval(&self, theta: f64) -> f64 {
        match self {
            Density::Trig { poly, .. } => poly.eval(theta),
            Density::Function(f) => f(theta),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        match self {
            Density::Trig { poly, .. } => Density::trig(poly.scale(s)),
            Density::Function(f) => {
                let f = f.clone();
                Density::function(move |t| s * f(t))
            }
        }
    }

    pub fn add(&self, other: &Density) -> Self {
        match (self, other) {
            (Density::Trig { poly: a, .. }, Density::Trig { poly: b, .. }) => Density::trig(a.add(b)),
            _ => {
                let (a, b) = (self.clone(), other.clone());
                Density::function(move |t| a.eval(t) + b.eval(t))
            }
        }
    }
}

/// Parse a density expression into its Fourier spectrum.
pub fn parse_expression(src: &str) -> Result<TrigPoly> {
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let poly = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(syntax(format!("unexpected `{}`", p.tokens[p.pos])));
    }
    Ok(poly)
}

fn syntax(message: String) -> Error {
    Error::InvalidMeasure(format!("density expression: {message}"))
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Num(x) => write!(f, "{x}"),
            Tok::Ident(s) => write!(f, "{s}"),
            Tok::Sym(c) => write!(f, "{c}"),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let save = i;
                i += 1;
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    i += 1;
                }
                if i < chars.len() && chars[i].is_ascii_digit() {
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                } else {
                    i = save;
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v = s.parse::<f64>().map_err(|_| syntax(format!("bad number `{s}`")))?;
            out.push(Tok::Num(v));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*^()".contains(c) {
            out.push(Tok::Sym(c));
            i += 1;
        } else {
            return Err(syntax(format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<()> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            Err(syntax(format!("expected `{c}`")))
        }
    }

    fn expr(&mut self) -> Result<TrigPoly> {
        let mut acc = self.term()?;
        loop {
            if self.eat_sym('+') {
                acc = acc.add(&self.term()?);
            } else if self.eat_sym('-') {
                acc = acc.add(&self.term()?.scale(-1.0));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<TrigPoly> {
        let mut acc = self.power()?;
        while self.eat_sym('*') {
            acc = acc.mul(&self.power()?)?;
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<TrigPoly> {
        let base = self.unary()?;
        if self.eat_sym('^') {
            match self.tokens.get(self.pos).cloned() {
                Some(Tok::Num(n)) if n >= 0.0 && n.fract() == 0.0 && n <= 64.0 => {
                    self.pos += 1;
                    base.pow(n as u32)
                }
                _ => Err(syntax("exponent must be an integer in 0..=64".into())),
            }
        } else {
            Ok(base)
        }
    }

    fn unary(&mut self) -> Result<TrigPoly> {
        if self.eat_sym('-') {
            Ok(self.unary()?.scale(-1.0))
        } else {
            self.primary()
        }
    }

    fn primary(&mut self) -> Result<TrigPoly> {
        match self.tokens.get(self.pos).cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(TrigPoly::constant(v))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "const" => {
                        self.expect_sym('(')?;
                        let neg = self.eat_sym('-');
                        let v = match self.tokens.get(self.pos).cloned() {
                            Some(Tok::Num(v)) => v,
                            _ => return Err(syntax("const() takes a number".into())),
                        };
                        self.pos += 1;
                        self.expect_sym(')')?;
                        Ok(TrigPoly::constant(if neg { -v } else { v }))
                    }
                    "cos" | "sin" => {
                        self.expect_sym('(')?;
                        let mut k = 1u32;
                        if let Some(Tok::Num(v)) = self.peek().cloned() {
                            if v.fract() != 0.0 || v < 0.0 || v as usize > MAX_DEGREE {
                                return Err(syntax("harmonic multiplier must be a nonnegative integer".into()));
                            }
                            k = v as u32;
                            self.pos += 1;
                            self.expect_sym('*')?;
                        }
                        match self.peek() {
                            Some(Tok::Ident(t)) if t == "theta" => self.pos += 1,
                            _ => return Err(syntax(format!("{name}() argument must be `k*theta`"))),
                        }
                        self.expect_sym(')')?;
                        Ok(TrigPoly::harmonic(k, name == "sin"))
                    }
                    "theta" => Err(syntax("bare `theta` is not periodic; use cos/sin".into())),
                    other => Err(syntax(format!("unknown identifier `{other}`"))),
                }
            }
            Some(t) => Err(syntax(format!("unexpected `{t}`"))),
            None => Err(syntax("unexpected end of expression".into())),
        }
    }
}
