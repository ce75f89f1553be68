use std::fmt::Write as _;
use std::io;

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, Serializer};

/// Compact JSON with every float written to 17 significant digits, so a
/// value read back is bit-identical.
struct RoundTrip;

impl Formatter for RoundTrip {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        CompactFormatter.write_f32(writer, value)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, RoundTrip);
    value.serialize(&mut ser).expect("serializing to memory cannot fail");
    let mut out = String::from_utf8(buf).expect("serde_json writes UTF-8");
    out.push('\n');
    out
}

pub fn matrix(out: &mut String, name: &str, rows: &[Vec<f64>]) {
    let _ = writeln!(out, "{name} =");
    for row in rows {
        out.push_str("  [");
        for (k, x) in row.iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{x:>10.6}");
        }
        out.push_str(" ]\n");
    }
}

pub fn field(out: &mut String, name: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "{name:<28} {value}");
}
