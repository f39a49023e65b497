//! JSON and text file formats: populations, decks, polynomials and traces.

use std::fs;
use std::path::Path;

use deckrec_core::arith::{fmt_rational, log2_abs, parse_rational, Q};
use deckrec_core::channel::TraceBatch;
use deckrec_core::deck::{Deck, DeckEntries};
use deckrec_core::poly::MultiPoly;
use deckrec_core::{BitString, Population};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{CliError, Result};

/// Significant digits in decimal renderings of exact values.
pub const SIGNIFICANT_DIGITS: usize = 12;

fn pow10(e: i64) -> Q {
    let p = num_traits::pow(BigInt::from(10u32), e.unsigned_abs() as usize);
    if e >= 0 {
        Q::from_integer(p)
    } else {
        Q::new(BigInt::one(), p)
    }
}

/// Renders `v` with twelve significant digits, rounding half up on the
/// magnitude. Positional notation is used for exponents in `[-5, 12)`.
pub fn decimal(v: &Q) -> String {
    if v.is_zero() {
        return "0".to_string();
    }
    let a = v.abs();
    let mut e = (log2_abs(&a) * std::f64::consts::LOG10_2).floor() as i64;
    let ten = Q::from_integer(BigInt::from(10u32));
    let mut m = &a / pow10(e);
    while m >= ten {
        e += 1;
        m = &a / pow10(e);
    }
    while m < Q::one() {
        e -= 1;
        m = &a / pow10(e);
    }
    let half = Q::new(BigInt::one(), BigInt::from(2u32));
    let mut digits = (m * pow10(SIGNIFICANT_DIGITS as i64 - 1) + half).floor().to_integer();
    if digits >= num_traits::pow(BigInt::from(10u32), SIGNIFICANT_DIGITS) {
        digits /= 10u32;
        e += 1;
    }
    let s = digits.to_string();
    let sign = if v.is_negative() { "-" } else { "" };
    let body = if (-5..SIGNIFICANT_DIGITS as i64).contains(&e) {
        if e >= 0 {
            let (int, frac) = s.split_at(e as usize + 1);
            join_fraction(int, frac)
        } else {
            let frac = format!("{}{s}", "0".repeat((-e - 1) as usize));
            join_fraction("0", &frac)
        }
    } else {
        let (lead, rest) = s.split_at(1);
        format!("{}e{e}", join_fraction(lead, rest))
    };
    format!("{sign}{body}")
}

fn join_fraction(int: &str, frac: &str) -> String {
    let frac = frac.trim_end_matches('0');
    if frac.is_empty() {
        int.to_string()
    } else {
        format!("{int}.{frac}")
    }
}

/// Twelve-digit rendering of a float, through its exact binary value.
pub fn decimal_f64(x: f64) -> String {
    match Q::from_float(x) {
        Some(v) => decimal(&v),
        None if x.is_nan() => "NaN".to_string(),
        None if x > 0.0 => "inf".to_string(),
        None => "-inf".to_string(),
    }
}

/// `{"exact": "p/q", "decimal": "..."}`.
pub fn rational(v: &Q) -> Value {
    json!({ "exact": fmt_rational(v), "decimal": decimal(v) })
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Writes `text` to `path`.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Parses JSON text, reporting the line of a syntax error.
pub fn parse_json(text: &str, path: &Path) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| CliError::parse(path, Some(e.line()), e.to_string()))
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialise");
    s.push('\n');
    s
}

fn from_value<T: for<'de> Deserialize<'de>>(v: &Value, path: &Path) -> Result<T> {
    T::deserialize(v).map_err(|e| CliError::parse(path, None, e.to_string()))
}

fn core_err(path: &Path, e: deckrec_core::Error) -> CliError {
    CliError::parse(path, None, e.to_string())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SupportEntry {
    string: String,
    weight: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PopulationDoc {
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ell: Option<usize>,
    support: Vec<SupportEntry>,
}

/// Population document `{"n", "ell", "support": [{"string", "weight"}]}`.
pub fn population_to_json(p: &Population) -> Value {
    let doc = PopulationDoc {
        n: p.n(),
        ell: Some(p.ell()),
        support: p
            .support()
            .iter()
            .map(|(s, w)| SupportEntry { string: s.to_string(), weight: fmt_rational(w) })
            .collect(),
    };
    serde_json::to_value(doc).expect("population document serialises")
}

/// Validates a population document. `ell` defaults to the support size.
pub fn population_from_json(v: &Value, path: &Path) -> Result<Population> {
    let doc: PopulationDoc = from_value(v, path)?;
    let support = doc
        .support
        .iter()
        .map(|e| Ok((BitString::parse(&e.string)?, parse_rational(&e.weight)?)))
        .collect::<deckrec_core::Result<Vec<_>>>()
        .map_err(|e| core_err(path, e))?;
    let ell = doc.ell.unwrap_or(support.len());
    Population::new(doc.n, ell, support).map_err(|e| core_err(path, e))
}

/// Reads a population file.
pub fn read_population(path: &Path) -> Result<Population> {
    population_from_json(&parse_json(&read_text(path)?, path)?, path)
}

fn pattern_string(z: usize, k: usize) -> String {
    (0..k).map(|j| if (z >> (k - 1 - j)) & 1 == 1 { '1' } else { '0' }).collect()
}

/// Deck document; zero entries are omitted.
pub fn deck_to_json(deck: &Deck) -> Value {
    let mut entries = Map::new();
    let mut doc = json!({ "k": deck.k, "n": deck.n });
    match &deck.entries {
        DeckEntries::Exact(values) => {
            for (z, v) in values.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
                entries.insert(pattern_string(z, deck.k), json!(fmt_rational(v)));
            }
            doc["kind"] = json!("exact");
        }
        DeckEntries::Estimated { values, raw_sum, traces } => {
            for (z, v) in values.iter().enumerate().filter(|(_, v)| **v != 0.0) {
                entries.insert(pattern_string(z, deck.k), json!(v.to_string()));
            }
            doc["kind"] = json!("estimated");
            doc["traces"] = json!(traces);
            doc["raw_sum"] = json!(raw_sum.to_string());
        }
    }
    doc["entries"] = Value::Object(entries);
    doc
}

fn entry_text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(x) => Some(x.to_string()),
        _ => None,
    }
}

/// Parses a deck document. Exact decks must sum to one.
pub fn deck_from_json(v: &Value, path: &Path) -> Result<Deck> {
    let bad = |m: String| CliError::parse(path, None, m);
    let obj = v.as_object().ok_or_else(|| bad("deck must be a JSON object".into()))?;
    let uint =
        |key: &str| obj.get(key).and_then(Value::as_u64).ok_or_else(|| bad(format!("missing integer \"{key}\"")));
    let k = uint("k")? as usize;
    if k == 0 || k > deckrec_core::deck::MAX_K {
        return Err(bad(format!("k = {k} outside [1, {}]", deckrec_core::deck::MAX_K)));
    }
    let n = match obj.get("n") {
        Some(x) => x.as_u64().ok_or_else(|| bad("\"n\" must be an integer".into()))? as usize,
        None => k,
    };
    let entries =
        obj.get("entries").and_then(Value::as_object).ok_or_else(|| bad("missing object \"entries\"".into()))?;
    let mut pairs = Vec::with_capacity(entries.len());
    for (key, value) in entries {
        let s = BitString::parse(key).map_err(|e| core_err(path, e))?;
        if s.len() != k {
            return Err(bad(format!("entry {key} does not have length k = {k}")));
        }
        let text = entry_text(value).ok_or_else(|| bad(format!("entry {key} must be a string or number")))?;
        pairs.push((s.to_index() as usize, text));
    }
    let kind = obj.get("kind").and_then(Value::as_str).ok_or_else(|| bad("missing string \"kind\"".into()))?;
    let entries = match kind {
        "exact" => {
            let mut values = vec![Q::zero(); 1 << k];
            for (z, text) in pairs {
                values[z] = parse_rational(&text).map_err(|e| core_err(path, e))?;
            }
            let total = values.iter().fold(Q::zero(), |acc, v| acc + v);
            if values.iter().any(Signed::is_negative) || !total.is_one() {
                return Err(bad(format!(
                    "exact deck entries must be non-negative and sum to 1, got {}",
                    fmt_rational(&total)
                )));
            }
            DeckEntries::Exact(values)
        }
        "estimated" => {
            let mut values = vec![0.0; 1 << k];
            for (z, text) in pairs {
                values[z] = text.parse::<f64>().map_err(|_| bad(format!("bad decimal {text}")))?;
            }
            let raw_sum = match obj.get("raw_sum").and_then(entry_text) {
                Some(t) => t.parse::<f64>().map_err(|_| bad(format!("bad decimal {t}")))?,
                None => values.iter().sum(),
            };
            let traces = obj.get("traces").and_then(Value::as_u64).unwrap_or(0);
            DeckEntries::Estimated { values, raw_sum, traces }
        }
        other => return Err(bad(format!("unknown deck kind {other}"))),
    };
    Ok(Deck { k, n, entries })
}

/// Reads a deck file.
pub fn read_deck(path: &Path) -> Result<Deck> {
    deck_from_json(&parse_json(&read_text(path)?, path)?, path)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermDoc {
    exps: Vec<u32>,
    coef: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyDoc {
    vars: usize,
    terms: Vec<TermDoc>,
}

/// Polynomial document `{"vars", "terms": [{"exps", "coef"}]}`.
pub fn poly_to_json(p: &MultiPoly) -> Value {
    let doc = PolyDoc {
        vars: p.vars(),
        terms: p.terms().map(|(e, c)| TermDoc { exps: e.clone(), coef: fmt_rational(c) }).collect(),
    };
    serde_json::to_value(doc).expect("polynomial document serialises")
}

/// Parses a polynomial document.
pub fn poly_from_json(v: &Value, path: &Path) -> Result<MultiPoly> {
    let doc: PolyDoc = from_value(v, path)?;
    let terms = doc
        .terms
        .iter()
        .map(|t| Ok((t.exps.clone(), parse_rational(&t.coef)?)))
        .collect::<deckrec_core::Result<Vec<_>>>()
        .map_err(|e| core_err(path, e))?;
    MultiPoly::from_terms(doc.vars, terms).map_err(|e| core_err(path, e))
}

/// Reads a polynomial file.
pub fn read_poly(path: &Path) -> Result<MultiPoly> {
    poly_from_json(&parse_json(&read_text(path)?, path)?, path)
}

const TRACE_MAGIC: &str = "#deckrec-traces";

/// Trace file text: a header line, then one trace per line.
pub fn traces_to_string(batch: &TraceBatch) -> String {
    let body: usize = batch.traces.iter().map(|t| t.len() + 1).sum();
    let mut out = String::with_capacity(body + 80);
    out.push_str(&format!(
        "{TRACE_MAGIC} n={} delta={} seed={} count={}\n",
        batch.n,
        batch.delta,
        batch.seed,
        batch.traces.len()
    ));
    for t in &batch.traces {
        out.extend(t.iter().map(|&b| if b == 1 { '1' } else { '0' }));
        out.push('\n');
    }
    out
}

/// Parses trace file text; errors carry the offending line number.
pub fn traces_from_str(text: &str, path: &Path) -> Result<TraceBatch> {
    let mut lines = text.split('\n');
    let header = lines.next().unwrap_or_default();
    let bad_header = |m: &str| CliError::parse(path, Some(1), m.to_string());
    let mut fields = header.split_whitespace();
    if fields.next() != Some(TRACE_MAGIC) {
        return Err(bad_header("missing #deckrec-traces header"));
    }
    let mut n = None;
    let mut delta = None;
    let mut seed = None;
    let mut count = None;
    for field in fields {
        let (key, value) = field.split_once('=').ok_or_else(|| bad_header("header fields must be key=value"))?;
        let slot_err = || bad_header(&format!("bad value for {key}"));
        match key {
            "n" => n = Some(value.parse::<usize>().map_err(|_| slot_err())?),
            "delta" => delta = Some(value.parse::<f64>().map_err(|_| slot_err())?),
            "seed" => seed = Some(value.parse::<u64>().map_err(|_| slot_err())?),
            "count" => count = Some(value.parse::<usize>().map_err(|_| slot_err())?),
            _ => return Err(bad_header(&format!("unknown header field {key}"))),
        }
    }
    let (Some(n), Some(delta), Some(seed), Some(count)) = (n, delta, seed, count) else {
        return Err(bad_header("header needs n, delta, seed and count"));
    };
    if !(0.0..=1.0).contains(&delta) {
        return Err(bad_header("delta must lie in [0, 1]"));
    }
    let rest: Vec<&str> = lines.collect();
    if rest.last() != Some(&"") {
        return Err(CliError::parse(path, Some(rest.len() + 1), "file must end with a newline"));
    }
    let body = &rest[..rest.len() - 1];
    if body.len() != count {
        return Err(CliError::parse(
            path,
            Some(body.len() + 1),
            format!("header declares {count} traces, found {}", body.len()),
        ));
    }
    let mut traces = Vec::with_capacity(count);
    for (i, line) in body.iter().enumerate() {
        let line_no = i + 2;
        if line.len() > n {
            return Err(CliError::parse(path, Some(line_no), format!("trace longer than n = {n}")));
        }
        let bits = line
            .bytes()
            .map(|b| match b {
                b'0' => Ok(0u8),
                b'1' => Ok(1u8),
                _ => Err(CliError::parse(path, Some(line_no), format!("invalid character {:?}", b as char))),
            })
            .collect::<Result<Vec<u8>>>()?;
        traces.push(bits);
    }
    Ok(TraceBatch { n, delta, seed, traces })
}

/// Reads a trace file.
pub fn read_traces(path: &Path) -> Result<TraceBatch> {
    traces_from_str(&read_text(path)?, path)
}

/// Mean trace length as an exact rational, `None` for an empty batch.
pub fn mean_length(batch: &TraceBatch) -> Option<Q> {
    if batch.traces.is_empty() {
        return None;
    }
    let total: u64 = batch.traces.iter().map(|t| t.len() as u64).sum();
    Some(Q::new(BigInt::from(total), BigInt::from(batch.traces.len())))
}

/// `f64` view of an exact value, for CSV columns.
pub fn approx(v: &Q) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}
