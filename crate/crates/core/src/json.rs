//! JSON documents read and written by the command line front-end.
//!
//! Numbers in descriptors may be JSON numbers or strings such as `"1/3"` or
//! `"0.25"`. In exact mode a JSON number is read as its shortest decimal
//! literal, so `0.1` means `1/10`.

use num_traits::{One, Signed};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::constructors::{HausdorffMeasure, PFParams, PiecewiseDensity};
use crate::phi::{PhiDecomposition, PhiSpec, PosPart};
use crate::scalar::{parse_rational, Rational, Scalar};
use crate::sequence::FiniteSeq;

/// Where a document went wrong.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Location {
    Position { line: usize, column: usize },
    Field { path: String },
}

impl std::fmt::Display for Location {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Location::Position { line, column } => write!(f, "line {line}, column {column}"),
            Location::Field { path } => write!(f, "field `{path}`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{location}: {message}")]
pub struct JsonError {
    pub location: Location,
    pub message: String,
}

impl JsonError {
    fn field(path: impl Into<String>, message: impl Into<String>) -> Self {
        JsonError {
            location: Location::Field { path: path.into() },
            message: message.into(),
        }
    }
}

impl From<serde_json::Error> for JsonError {
    fn from(e: serde_json::Error) -> Self {
        let text = e.to_string();
        // serde_json appends " at line L column C"; the location is kept separately.
        let message = match text.rfind(" at line ") {
            Some(i) => text[..i].to_string(),
            None => text,
        };
        JsonError {
            location: Location::Position {
                line: e.line(),
                column: e.column(),
            },
            message,
        }
    }
}

/// Parses any document, reporting syntax and type errors by position.
pub fn parse<D: DeserializeOwned>(text: &str) -> Result<D, JsonError> {
    Ok(serde_json::from_str(text)?)
}

/// A number written either as a JSON number or as a string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Float(f64),
    Text(String),
}

impl Default for Num {
    fn default() -> Self {
        Num::Float(0.0)
    }
}

/// Backends that can be read from a [`Num`].
pub trait FromNum: Scalar {
    fn from_num(n: &Num) -> crate::Result<Self>;
}

impl FromNum for f64 {
    fn from_num(n: &Num) -> crate::Result<Self> {
        match n {
            Num::Float(v) => Ok(*v),
            Num::Text(t) => Ok(parse_rational(t)?.approx()),
        }
    }
}

impl FromNum for Rational {
    fn from_num(n: &Num) -> crate::Result<Self> {
        match n {
            Num::Float(v) if v.is_finite() => parse_rational(&format!("{v}")),
            Num::Float(v) => Err(crate::Error::Domain(format!("{v} is not finite"))),
            Num::Text(t) => parse_rational(t),
        }
    }
}

fn num<T: FromNum>(n: &Num, path: &str) -> Result<T, JsonError> {
    T::from_num(n).map_err(|e| JsonError::field(path, e.to_string()))
}

fn nums<T: FromNum>(v: &[Num], path: &str) -> Result<Vec<T>, JsonError> {
    v.iter()
        .enumerate()
        .map(|(i, n)| num(n, &format!("{path}[{i}]")))
        .collect()
}

pub fn pf_params<T: FromNum>(d: &PFParams<Num>) -> Result<PFParams<T>, JsonError> {
    Ok(PFParams {
        b: num(&d.b, "b")?,
        c: num(&d.c, "c")?,
        p: nums(&d.p, "p")?,
        q: nums(&d.q, "q")?,
    })
}

pub fn measure<T: FromNum>(d: &HausdorffMeasure<Num>) -> Result<HausdorffMeasure<T>, JsonError> {
    let atoms = d
        .atoms
        .iter()
        .enumerate()
        .map(|(i, (s, w))| Ok((num(s, &format!("atoms[{i}][0]"))?, num(w, &format!("atoms[{i}][1]"))?)))
        .collect::<Result<Vec<_>, JsonError>>()?;
    let density = match &d.density {
        Some(p) => Some(PiecewiseDensity {
            breaks: nums(&p.breaks, "density.breaks")?,
            levels: nums(&p.levels, "density.levels")?,
        }),
        None => None,
    };
    Ok(HausdorffMeasure { atoms, density })
}

fn pos_part<T: FromNum>(d: &PosPart<Num>, path: &str) -> Result<PosPart<T>, JsonError> {
    Ok(match d {
        PosPart::Steps { w } => PosPart::Steps {
            w: nums(w, &format!("{path}.w"))?,
        },
        PosPart::PowerLaw { lambda, nu } => PosPart::PowerLaw {
            lambda: num(lambda, &format!("{path}.lambda"))?,
            nu: num(nu, &format!("{path}.nu"))?,
        },
        PosPart::Piecewise { breaks, levels } => PosPart::Piecewise {
            breaks: nums(breaks, &format!("{path}.breaks"))?,
            levels: nums(levels, &format!("{path}.levels"))?,
        },
        PosPart::Residual { base, minus } => PosPart::Residual {
            base: Box::new(pos_part(base, &format!("{path}.base"))?),
            minus: nums(minus, &format!("{path}.minus"))?,
        },
    })
}

pub fn phi_spec<T: FromNum>(d: &PhiSpec<Num>) -> Result<PhiSpec<T>, JsonError> {
    Ok(PhiSpec {
        b: num(&d.b, "b")?,
        c: num(&d.c, "c")?,
        neg_thresholds: nums(&d.neg_thresholds, "neg_thresholds")?,
        pos_part: pos_part(&d.pos_part, "pos_part")?,
        declared_points_of_increase: nums(&d.declared_points_of_increase, "declared_points_of_increase")?,
    })
}

/// Backends that can be written as a [`Num`]: floats as numbers, rationals as `"p/q"`.
pub trait ToNum {
    fn to_num(&self) -> Num;
}

impl ToNum for f64 {
    fn to_num(&self) -> Num {
        Num::Float(*self)
    }
}

impl ToNum for Rational {
    fn to_num(&self) -> Num {
        Num::Text(self.to_string())
    }
}

fn out_vec<T: ToNum>(v: &[T]) -> Vec<Num> {
    v.iter().map(ToNum::to_num).collect()
}

pub fn pf_params_out<T: ToNum>(d: &PFParams<T>) -> PFParams<Num> {
    PFParams {
        b: d.b.to_num(),
        c: d.c.to_num(),
        p: out_vec(&d.p),
        q: out_vec(&d.q),
    }
}

pub fn pos_part_out<T: ToNum>(d: &PosPart<T>) -> PosPart<Num> {
    match d {
        PosPart::Steps { w } => PosPart::Steps { w: out_vec(w) },
        PosPart::PowerLaw { lambda, nu } => PosPart::PowerLaw {
            lambda: lambda.to_num(),
            nu: nu.to_num(),
        },
        PosPart::Piecewise { breaks, levels } => PosPart::Piecewise {
            breaks: out_vec(breaks),
            levels: out_vec(levels),
        },
        PosPart::Residual { base, minus } => PosPart::Residual {
            base: Box::new(pos_part_out(base)),
            minus: out_vec(minus),
        },
    }
}

pub fn decomposition_out<T: ToNum>(d: &PhiDecomposition<T>) -> PhiDecomposition<Num> {
    PhiDecomposition {
        pf: pf_params_out(&d.pf),
        steps: out_vec(&d.steps),
        phi2: pos_part_out(&d.phi2),
        shifted: d.shifted,
        truncated_at: d.truncated_at,
    }
}

pub fn read_pf<T: FromNum>(text: &str) -> Result<PFParams<T>, JsonError> {
    pf_params(&parse(text)?)
}

pub fn read_measure<T: FromNum>(text: &str) -> Result<HausdorffMeasure<T>, JsonError> {
    measure(&parse(text)?)
}

pub fn read_phi<T: FromNum>(text: &str) -> Result<PhiSpec<T>, JsonError> {
    phi_spec(&parse(text)?)
}

/// On-disk form of a [`FiniteSeq`].
///
/// `terms` always holds floats; exact sequences add `rationals` as
/// `[numerator, denominator]` string pairs, which take precedence on reading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeqDocument {
    pub terms: Vec<f64>,
    #[serde(default)]
    pub exact: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rationals: Option<Vec<[String; 2]>>,
    #[serde(default)]
    pub seed: u64,
    /// How the sequence was produced; free-form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<serde_json::Value>,
}

impl SeqDocument {
    pub fn from_float(seq: &FiniteSeq, seed: u64, source: Option<serde_json::Value>) -> Self {
        SeqDocument {
            terms: seq.terms().to_vec(),
            exact: false,
            rationals: None,
            seed,
            source,
        }
    }

    pub fn from_exact(seq: &FiniteSeq<Rational>, seed: u64, source: Option<serde_json::Value>) -> Self {
        SeqDocument {
            terms: seq.terms().iter().map(Scalar::approx).collect(),
            exact: true,
            rationals: Some(
                seq.terms()
                    .iter()
                    .map(|r| [r.numer().to_string(), r.denom().to_string()])
                    .collect(),
            ),
            seed,
            source,
        }
    }

    fn check(&self) -> Result<(), JsonError> {
        if self.terms.is_empty() {
            return Err(JsonError::field("terms", "sequence window is empty"));
        }
        match &self.rationals {
            Some(r) if r.len() != self.terms.len() => Err(JsonError::field(
                "rationals",
                format!("{} entries for {} terms", r.len(), self.terms.len()),
            )),
            None if self.exact => Err(JsonError::field("rationals", "required when `exact` is true")),
            _ => Ok(()),
        }
    }

    pub fn to_float(&self) -> Result<FiniteSeq, JsonError> {
        self.check()?;
        let terms = match &self.rationals {
            Some(_) => self.to_exact()?.terms().iter().map(Scalar::approx).collect(),
            None => self.terms.clone(),
        };
        FiniteSeq::new(terms).map_err(|e| JsonError::field("terms", e.to_string()))
    }

    /// Exact terms: `rationals` if present, otherwise the decimal reading of `terms`.
    pub fn to_exact(&self) -> Result<FiniteSeq<Rational>, JsonError> {
        self.check()?;
        let terms = match &self.rationals {
            Some(pairs) => pairs
                .iter()
                .enumerate()
                .map(|(i, [n, d])| {
                    let path = format!("rationals[{i}]");
                    let n = parse_rational(n).map_err(|e| JsonError::field(&path, e.to_string()))?;
                    let d = parse_rational(d).map_err(|e| JsonError::field(&path, e.to_string()))?;
                    if !d.is_positive() || !d.is_integer() || !n.is_integer() {
                        return Err(JsonError::field(path, "expected integer numerator and positive integer denominator"));
                    }
                    Ok(if d.is_one() { n } else { n / d })
                })
                .collect::<Result<Vec<_>, _>>()?,
            None => self
                .terms
                .iter()
                .enumerate()
                .map(|(i, v)| num(&Num::Float(*v), &format!("terms[{i}]")))
                .collect::<Result<Vec<_>, _>>()?,
        };
        FiniteSeq::new(terms).map_err(|e| JsonError::field("rationals", e.to_string()))
    }
}

pub fn read_seq(text: &str) -> Result<SeqDocument, JsonError> {
    let doc: SeqDocument = parse(text)?;
    doc.check()?;
    Ok(doc)
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty<S: Serialize>(value: &S) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}
