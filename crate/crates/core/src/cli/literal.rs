//! Parsing of function literals given on the command line.

use crate::error::{Error, Result};
use crate::funcmodel::FnLiteral;

/// Parse a JSON literal, or the shorthand `1`, `t`, `t^p`, `c*t^p`,
/// `exp(r*t)`, `c*exp(r*t)` and `+`/`-` joined sums of power terms.
pub fn parse_fn_literal(src: &str) -> Result<FnLiteral> {
    let s = src.trim();
    if s.starts_with('{') {
        return serde_json::from_str(s).map_err(|e| Error::InvalidParams(format!("function literal: {e}")));
    }
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(Error::InvalidParams("empty function literal".into()));
    }
    if let Some(lit) = parse_exp(&compact)? {
        return Ok(lit);
    }
    let mut terms = Vec::new();
    for (sign, body) in split_terms(&compact) {
        let (c, e) = parse_power_term(body).ok_or_else(|| Error::InvalidParams(format!("cannot read term '{body}' in '{s}'")))?;
        terms.push((sign * c, e));
    }
    Ok(FnLiteral::PowerSum { base: 0.0, terms })
}

fn bad(s: &str) -> Error {
    Error::InvalidParams(format!("cannot read function literal '{s}'"))
}

fn number(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|x| x.is_finite())
}

fn parse_exp(s: &str) -> Result<Option<FnLiteral>> {
    let Some(open) = s.find("exp(") else {
        return Ok(None);
    };
    let scale = match &s[..open] {
        "" => 1.0,
        "-" => -1.0,
        pre => number(pre.strip_suffix('*').ok_or_else(|| bad(s))?).ok_or_else(|| bad(s))?,
    };
    let inner = s[open + 4..].strip_suffix(')').ok_or_else(|| bad(s))?;
    let rate = match inner {
        "t" => 1.0,
        "-t" => -1.0,
        _ => inner.strip_suffix("*t").or_else(|| inner.strip_suffix('t')).and_then(number).ok_or_else(|| bad(s))?,
    };
    Ok(Some(FnLiteral::Exp { rate, scale }))
}

/// Split at top-level '+'/'-' that are not part of an exponent like `1e-3`.
fn split_terms(s: &str) -> Vec<(f64, &str)> {
    let bytes = s.as_bytes();
    let mut out = Vec::new();
    let mut start = 0;
    let mut sign = 1.0;
    for i in 0..bytes.len() {
        let c = bytes[i];
        if (c == b'+' || c == b'-') && i > 0 && !matches!(bytes[i - 1], b'e' | b'E' | b'^' | b'*') {
            out.push((sign, &s[start..i]));
            sign = if c == b'-' { -1.0 } else { 1.0 };
            start = i + 1;
        } else if (c == b'+' || c == b'-') && i == 0 {
            sign = if c == b'-' { -1.0 } else { 1.0 };
            start = 1;
        }
    }
    out.push((sign, &s[start..]));
    out
}

fn parse_power_term(s: &str) -> Option<(f64, f64)> {
    if let Some(c) = number(s) {
        return Some((c, 0.0));
    }
    let (coef, rest) = match s.find('t') {
        Some(0) => (1.0, s),
        Some(i) => (number(s[..i].strip_suffix('*')?)?, &s[i..]),
        None => return None,
    };
    let expo = match rest {
        "t" => 1.0,
        _ => number(rest.strip_prefix("t^")?.trim_start_matches('(').trim_end_matches(')'))?,
    };
    Some((coef, expo))
}
