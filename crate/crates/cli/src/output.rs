use anyhow::Result;
use serde_json::{Map, Number, Value};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use theta_rough::fmt_f64;

pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write + Send>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

/// Rewrite every non-integer number with 17 significant digits.
pub fn precise(v: Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => match n.as_f64() {
            Some(x) => Value::Number(fmt_f64(x).parse::<Number>().expect("formatted float is a JSON number")),
            None => Value::Number(n),
        },
        Value::Array(a) => Value::Array(a.into_iter().map(precise).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, precise(v))).collect::<Map<_, _>>()),
        other => other,
    }
}

/// Report envelope: tool name, version, command and parameter echo.
pub fn report(command: &str, parameters: Value, body: Value) -> Value {
    let mut o = Map::new();
    o.insert("tool".into(), "theta-rough".into());
    o.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    o.insert("command".into(), command.into());
    o.insert("parameters".into(), parameters);
    if let Value::Object(b) = body {
        o.extend(b);
    }
    Value::Object(o)
}

pub fn write_json(out: &mut dyn Write, v: Value) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, &precise(v))?;
    writeln!(out)?;
    Ok(())
}

pub fn c(z: num_complex::Complex64) -> Value {
    serde_json::json!([z.re, z.im])
}

pub fn m2(m: &nalgebra::Matrix2<f64>) -> Value {
    serde_json::json!([[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]])
}
