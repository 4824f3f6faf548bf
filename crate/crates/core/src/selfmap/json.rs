//! JSON map definitions.
//!
//! ```json
//! {"type":"lft","a":"1/1","b":"0/1","c":"-1/1","d":"2/1"}
//! {"type":"rational","num":["0","0","1"],"den":["2","0","-1"]}
//! {"type":"compose","outer":{...},"inner":{...}}
//! ```
//!
//! Strings are exact Gaussian rationals; JSON numbers and `[re, im]` pairs
//! are double precision.

use serde_json::{json, Value};

use super::{FlatMap, SelfMap, MAX_COMPOSITE_DEPTH};
use crate::error::{Error, Result};
use crate::number::Number;

pub fn number_from_value(v: &Value) -> Result<Number> {
    match v {
        Value::String(s) => Number::parse(s),
        Value::Number(x) => Ok(Number::from(x.as_f64().ok_or_else(|| Error::Parse(format!("bad number {x}")))?)),
        Value::Array(p) if p.len() == 2 => {
            let re = p[0].as_f64().ok_or_else(|| Error::Parse("complex pair needs numbers".into()))?;
            let im = p[1].as_f64().ok_or_else(|| Error::Parse("complex pair needs numbers".into()))?;
            Ok(Number::float(re, im))
        }
        other => Err(Error::Parse(format!("expected a number, string or [re, im], got {other}"))),
    }
}

pub fn number_to_value(x: &Number) -> Value {
    serde_json::to_value(x).expect("numbers serialize")
}

fn field<'a>(obj: &'a Value, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| Error::MalformedMap(format!("missing field {key:?}")))
}

fn number_list(v: &Value, key: &str) -> Result<Vec<Number>> {
    field(v, key)?
        .as_array()
        .ok_or_else(|| Error::MalformedMap(format!("{key:?} must be an array")))?
        .iter()
        .map(number_from_value)
        .collect()
}

fn from_value_at(v: &Value, depth: usize) -> Result<SelfMap> {
    if depth > MAX_COMPOSITE_DEPTH {
        return Err(Error::CompositeTooDeep(MAX_COMPOSITE_DEPTH));
    }
    let kind = field(v, "type")?.as_str().ok_or_else(|| Error::MalformedMap("\"type\" must be a string".into()))?;
    match kind {
        "lft" => {
            let g = |k| number_from_value(field(v, k)?);
            SelfMap::lft(g("a")?, g("b")?, g("c")?, g("d")?)
        }
        "rational" => SelfMap::rational(number_list(v, "num")?, number_list(v, "den")?),
        "compose" => {
            let outer = from_value_at(field(v, "outer")?, depth + 1)?;
            let inner = from_value_at(field(v, "inner")?, depth + 1)?;
            SelfMap::compose(outer, inner)
        }
        other => Err(Error::MalformedMap(format!("unknown map type {other:?}"))),
    }
}

pub fn map_from_value(v: &Value) -> Result<SelfMap> {
    from_value_at(v, 0)
}

/// Parses JSON text, reporting syntax errors with line and column.
pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::ParseAt { line: e.line(), column: e.column(), message: e.to_string() })
}

pub fn map_from_json(text: &str) -> Result<SelfMap> {
    map_from_value(&parse_json(text)?)
}

pub fn map_to_value(m: &SelfMap) -> Value {
    match m {
        SelfMap::Lft(l) => json!({
            "type": "lft",
            "a": number_to_value(&l.a),
            "b": number_to_value(&l.b),
            "c": number_to_value(&l.c),
            "d": number_to_value(&l.d),
        }),
        SelfMap::Rational(r) => json!({
            "type": "rational",
            "num": r.num.coeffs().iter().map(number_to_value).collect::<Vec<_>>(),
            "den": r.den.coeffs().iter().map(number_to_value).collect::<Vec<_>>(),
        }),
        SelfMap::Composite { outer, inner } => json!({
            "type": "compose",
            "outer": map_to_value(outer),
            "inner": map_to_value(inner),
        }),
    }
}

pub fn flat_to_value(m: &FlatMap) -> Value {
    match m {
        FlatMap::Lft(l) => map_to_value(&SelfMap::Lft(l.clone())),
        FlatMap::Rational(r) => map_to_value(&SelfMap::Rational(r.clone())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lft_example() {
        let m = map_from_json(r#"{"type":"lft","a":"1/1","b":"0/1","c":"-1/1","d":"2/1"}"#).unwrap();
        assert_eq!(m, SelfMap::lft_ints(1, 0, -1, 2));
        let back = map_from_value(&map_to_value(&m)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn parses_rational_and_compose() {
        let m = map_from_json(
            r#"{"type":"compose","outer":{"type":"rational","num":["0","0","1"],"den":["2","0","-1"]},
                 "inner":{"type":"lft","a":"1","b":"0","c":"0","d":"1"}}"#,
        )
        .unwrap();
        assert_eq!(m.depth(), 1);
        let f = map_from_json(r#"{"type":"rational","num":[0.0,0.5],"den":[1.0]}"#).unwrap();
        assert_eq!(f.mode(), crate::number::Mode::Float);
    }

    #[test]
    fn reports_syntax_position() {
        match map_from_json("{\n  \"type\": \"lft\",\n  \"a\": }") {
            Err(Error::ParseAt { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(map_from_json(r#"{"type":"lft","a":"1"}"#), Err(Error::MalformedMap(_))));
        assert!(matches!(map_from_json(r#"{"type":"blob"}"#), Err(Error::MalformedMap(_))));
    }
}
