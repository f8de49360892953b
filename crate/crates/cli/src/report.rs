use std::io;

use serde::Serialize;
use serde_json::{json, Map, Value};

use qms_core::numerics::c64;
use qms_core::operators::Subspace;

pub const SCHEMA_VERSION: u32 = 1;

/// Writes floats with 17 significant digits so that reports round-trip exactly.
struct SigDigits;

impl serde_json::ser::Formatter for SigDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value == 0.0 {
            writer.write_all(b"0.0")
        } else {
            write!(writer, "{value:.16e}")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Pretty-printed, key-sorted JSON with 17-significant-digit floats.
pub fn to_json_string(value: &Value) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Pretty::default());
    value.serialize(&mut ser).expect("serializing a Value cannot fail");
    out.push(b'\n');
    String::from_utf8(out).expect("JSON is UTF-8")
}

/// serde_json's pretty layout with [`SigDigits`] number output.
#[derive(Default)]
struct Pretty {
    inner: serde_json::ser::PrettyFormatter<'static>,
}

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.inner.$name(w $(, $arg)*)
        })*
    };
}

impl serde_json::ser::Formatter for Pretty {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        SigDigits.write_f64(writer, value)
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        SigDigits.write_f32(writer, value)
    }

    delegate! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }
}

/// serde_json turns non-finite floats into null.
pub fn to_value<T: Serialize + ?Sized>(x: &T) -> Value {
    serde_json::to_value(x).expect("report values serialize")
}

pub fn num(x: f64) -> Value {
    to_value(&x)
}

pub fn complex(z: c64) -> Value {
    json!({ "re": num(z.re), "im": num(z.im) })
}

pub fn complex_list(zs: &[c64]) -> Value {
    Value::Array(zs.iter().map(|z| complex(*z)).collect())
}

/// Dimension and coordinate indices; the basis is included when the subspace is not spanned
/// by standard basis vectors.
pub fn subspace(v: &Subspace) -> Value {
    let mut o = Map::new();
    o.insert("dim".into(), json!(v.dim()));
    match v.coordinate_indices() {
        Some(idx) => {
            o.insert("coordinate_indices".into(), json!(idx));
        }
        None => {
            o.insert("coordinate_indices".into(), Value::Null);
            let cols: Vec<Value> = (0..v.dim()).map(|j| complex_list(&v.basis().column(j))).collect();
            o.insert("basis_columns".into(), Value::Array(cols));
        }
    }
    Value::Object(o)
}

#[derive(Debug, Clone, Serialize)]
pub struct Warning {
    pub kind: &'static str,
    pub message: String,
}

impl Warning {
    pub fn new(kind: &'static str, message: impl Into<String>) -> Self {
        Self { kind, message: message.into() }
    }
}
