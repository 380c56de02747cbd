//! The output document and a serde_json formatter that writes every float
//! with 17 significant digits.

use durfee_core::numerics::C64;
use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};
use serde_json::{json, Map, Value};
use std::io::{self, Write};

#[derive(Default)]
pub struct Document {
    pub inputs: Map<String, Value>,
    pub outputs: Map<String, Value>,
    pub residuals: Map<String, Value>,
    pub errors: Vec<String>,
}

impl Document {
    pub fn input(&mut self, key: &str, v: impl Serialize) {
        self.inputs.insert(key.into(), to_value(v));
    }

    pub fn output(&mut self, key: &str, v: impl Serialize) {
        self.outputs.insert(key.into(), to_value(v));
    }

    pub fn residual(&mut self, key: &str, value: f64, tol: f64) {
        self.residuals.insert(
            key.into(),
            json!({"value": finite(value), "tol": tol, "ok": value <= tol}),
        );
    }

    /// Every residual within its tolerance and no errors.
    pub fn ok(&self) -> bool {
        self.errors.is_empty()
            && self
                .residuals
                .values()
                .all(|r| r.get("ok").and_then(Value::as_bool).unwrap_or(false))
    }

    pub fn render(self, command: &str, timing_ms: f64, pretty: bool) -> io::Result<Vec<u8>> {
        let doc = json!({
            "command": command,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "residuals": self.residuals,
            "errors": self.errors,
            "timing_ms": timing_ms,
        });
        let mut buf = Vec::new();
        if pretty {
            let mut ser = serde_json::Serializer::with_formatter(
                &mut buf,
                Digits17(PrettyFormatter::with_indent(b"  ")),
            );
            doc.serialize(&mut ser)?;
        } else {
            let mut ser =
                serde_json::Serializer::with_formatter(&mut buf, Digits17(CompactFormatter));
            doc.serialize(&mut ser)?;
        }
        buf.push(b'\n');
        Ok(buf)
    }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).unwrap_or_else(|e| Value::String(format!("unserializable: {e}")))
}

/// Non-finite floats become `null`.
pub fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

pub fn complex(z: C64) -> Value {
    json!({"re": finite(z.re), "im": finite(z.im)})
}

struct Digits17<F>(F);

impl<F: Formatter> Formatter for Digits17<F> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn end_object_key<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_key(w)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}
