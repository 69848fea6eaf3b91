//! On-disk formats.
//!
//! JSON documents render every double with 17 significant digits
//! (`{:.16e}`), so parse → serialize is byte-stable. Arrays of scalars are
//! kept on one line; everything else is indented. Complex numbers are
//! `[re, im]` pairs and matrices are row-major nested arrays.
//!
//! Confusion tables are CSV: a header of true-PDE names, then one row per
//! candidate, cells with 9 significant digits.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::chebyshev::BasisSpec;
use crate::error::{Error, Result};
use crate::experiment::ConfusionMatrix;
use crate::koopman::SpectralDecomposition;
use crate::linalg::{from_rows, to_rows};
use crate::operators::{KoopmanMatrix, Provenance};
use crate::simulate::Trajectory;
use faer::c64;

#[derive(Clone, Copy, PartialEq)]
enum ArrayMode {
    Undecided,
    Inline,
    Block,
}

/// Pretty printer that keeps scalar arrays on one line and writes doubles
/// with 17 significant digits.
#[derive(Default)]
pub struct StableFormatter {
    indent: usize,
    arrays: Vec<ArrayMode>,
    pending: Option<bool>,
}

impl StableFormatter {
    fn newline<W: ?Sized + Write>(&self, w: &mut W) -> io::Result<()> {
        w.write_all(b"\n")?;
        for _ in 0..self.indent {
            w.write_all(b"  ")?;
        }
        Ok(())
    }

    /// Emits the separator owed to the enclosing array before a value starts.
    fn value_start<W: ?Sized + Write>(&mut self, w: &mut W, scalar: bool) -> io::Result<()> {
        let Some(first) = self.pending.take() else {
            return Ok(());
        };
        let mode = self.arrays.last_mut().expect("pending implies an open array");
        if *mode == ArrayMode::Undecided {
            *mode = if scalar {
                ArrayMode::Inline
            } else {
                ArrayMode::Block
            };
        }
        match *mode {
            ArrayMode::Inline => {
                if !first {
                    w.write_all(b", ")?;
                }
            }
            _ => {
                if !first {
                    w.write_all(b",")?;
                }
                self.newline(w)?;
            }
        }
        Ok(())
    }
}

macro_rules! scalar_hook {
    ($name:ident, $ty:ty) => {
        fn $name<W: ?Sized + Write>(&mut self, w: &mut W, value: $ty) -> io::Result<()> {
            self.value_start(w, true)?;
            write!(w, "{value}")
        }
    };
}

impl Formatter for StableFormatter {
    fn write_null<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.value_start(w, true)?;
        w.write_all(b"null")
    }

    fn write_bool<W: ?Sized + Write>(&mut self, w: &mut W, value: bool) -> io::Result<()> {
        self.value_start(w, true)?;
        w.write_all(if value { b"true" } else { b"false" })
    }

    scalar_hook!(write_i8, i8);
    scalar_hook!(write_i16, i16);
    scalar_hook!(write_i32, i32);
    scalar_hook!(write_i64, i64);
    scalar_hook!(write_i128, i128);
    scalar_hook!(write_u8, u8);
    scalar_hook!(write_u16, u16);
    scalar_hook!(write_u32, u32);
    scalar_hook!(write_u64, u64);
    scalar_hook!(write_u128, u128);

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        self.value_start(w, true)?;
        write!(w, "{value:.16e}")
    }

    fn write_number_str<W: ?Sized + Write>(&mut self, w: &mut W, value: &str) -> io::Result<()> {
        self.value_start(w, true)?;
        w.write_all(value.as_bytes())
    }

    fn begin_string<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.value_start(w, true)?;
        w.write_all(b"\"")
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.value_start(w, false)?;
        self.arrays.push(ArrayMode::Undecided);
        self.indent += 1;
        w.write_all(b"[")
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.indent -= 1;
        if self.arrays.pop() == Some(ArrayMode::Block) {
            self.newline(w)?;
        }
        w.write_all(b"]")
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, _w: &mut W, first: bool) -> io::Result<()> {
        self.pending = Some(first);
        Ok(())
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, _w: &mut W) -> io::Result<()> {
        Ok(())
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.value_start(w, false)?;
        self.indent += 1;
        w.write_all(b"{")
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.indent -= 1;
        self.newline(w)?;
        w.write_all(b"}")
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        if !first {
            w.write_all(b",")?;
        }
        self.newline(w)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        w.write_all(b": ")
    }
}

/// Serializes with [`StableFormatter`], ending in a newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, StableFormatter::default());
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn write_json<T: Serialize + ?Sized>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    fs::write(path, to_json_string(value)?)?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Serialize, Deserialize)]
struct TrajectoryWire {
    basis: BasisSpec,
    dt: f64,
    pde_name: String,
    snapshots: Vec<Vec<f64>>,
}

impl Serialize for Trajectory {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TrajectoryWire {
            basis: self.basis.clone(),
            dt: self.dt,
            pde_name: self.pde_name.clone(),
            snapshots: self.snapshots.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Trajectory {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = TrajectoryWire::deserialize(d)?;
        Trajectory::new(w.basis, w.dt, w.pde_name, w.snapshots).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct KoopmanWire {
    basis: BasisSpec,
    dt: f64,
    provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    entries: Vec<Vec<f64>>,
}

impl Serialize for KoopmanMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        KoopmanWire {
            basis: self.basis.clone(),
            dt: self.dt,
            provenance: self.provenance,
            label: self.label.clone(),
            entries: to_rows(&self.entries),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for KoopmanMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let w = KoopmanWire::deserialize(d)?;
        let entries = from_rows(&w.entries).ok_or_else(|| D::Error::custom("ragged matrix rows"))?;
        KoopmanMatrix::new(w.basis, w.dt, entries, w.provenance, w.label).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct SpectrumWire {
    eigenvalues: Vec<[f64; 2]>,
    eigenvectors: Vec<Vec<[f64; 2]>>,
    residuals: Vec<f64>,
}

fn pair(z: &c64) -> [f64; 2] {
    [z.re, z.im]
}

impl Serialize for SpectralDecomposition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SpectrumWire {
            eigenvalues: self.eigenvalues.iter().map(pair).collect(),
            eigenvectors: self
                .eigenvectors
                .iter()
                .map(|v| v.iter().map(pair).collect())
                .collect(),
            residuals: self.residuals.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SpectralDecomposition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = SpectrumWire::deserialize(d)?;
        let z = |p: &[f64; 2]| c64::new(p[0], p[1]);
        Ok(SpectralDecomposition {
            eigenvalues: w.eigenvalues.iter().map(z).collect(),
            eigenvectors: w.eigenvectors.iter().map(|v| v.iter().map(z).collect()).collect(),
            residuals: w.residuals,
        })
    }
}

/// `x` with 9 significant digits in positional notation.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.8e}");
    let exponent: i32 = sci
        .rsplit('e')
        .next()
        .and_then(|e| e.parse().ok())
        .expect("scientific notation has an exponent");
    if !(-6..=15).contains(&exponent) {
        return sci;
    }
    let decimals = (8 - exponent).max(0) as usize;
    format!("{x:.decimals$}")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl ConfusionMatrix {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("candidate");
        for name in &self.true_names {
            out.push(',');
            out.push_str(&csv_field(name));
        }
        out.push('\n');
        for (name, row) in self.candidate_names.iter().zip(&self.values) {
            out.push_str(&csv_field(name));
            for v in row {
                out.push(',');
                out.push_str(&format_sig9(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(Error::from)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::Metric;
    use crate::operators::PdeSpec;
    use faer::Mat;

    #[test]
    fn doubles_use_seventeen_digits() {
        let s = to_json_string(&vec![0.1, -2.5e-300, 0.0]).unwrap();
        assert_eq!(
            s,
            "[1.0000000000000001e-1, -2.5000000000000000e-300, 0.0000000000000000e0]\n"
        );
    }

    #[test]
    fn nested_layout() {
        let b = BasisSpec::uniform(1, 2).unwrap();
        let k = KoopmanMatrix::new(
            b,
            0.5,
            Mat::identity(2, 2),
            Provenance::EquationDriven,
            Some("x".into()),
        )
        .unwrap();
        let s = to_json_string(&k).unwrap();
        let expected = "{\n  \"basis\": {\n    \"dims\": 1,\n    \"sizes\": [2]\n  },\n  \"dt\": 5.0000000000000000e-1,\n  \
                        \"provenance\": \"equation_driven\",\n  \"label\": \"x\",\n  \"entries\": [\n    \
                        [1.0000000000000000e0, 0.0000000000000000e0],\n    [0.0000000000000000e0, 1.0000000000000000e0]\n  ]\n}\n";
        assert_eq!(s, expected);
        let back: KoopmanMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, k);
        assert_eq!(to_json_string(&back).unwrap(), s);
    }

    #[test]
    fn empty_containers() {
        let s = to_json_string(&serde_json::json!({"a": [], "b": {}})).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v, serde_json::json!({"a": [], "b": {}}));
    }

    #[test]
    fn pde_spec_schema() {
        let spec: PdeSpec = serde_json::from_str(
            r#"{"name": "adv", "dims": 2, "terms": [{"coeff": -1.0, "orders": [1, 0]}]}"#,
        )
        .unwrap();
        assert_eq!(spec.terms[0].orders, vec![1, 0]);
    }

    #[test]
    fn rejects_bad_documents() {
        let ragged = r#"{"basis": {"dims": 1, "sizes": [2]}, "dt": 0.1, "provenance": "data_driven",
                         "entries": [[1.0, 0.0], [1.0]]}"#;
        assert!(serde_json::from_str::<KoopmanMatrix>(ragged).is_err());
        let wrong_dims = r#"{"basis": {"dims": 2, "sizes": [2]}, "dt": 0.1, "pde_name": "x",
                             "snapshots": [[1.0, 0.0], [1.0, 0.0]]}"#;
        assert!(serde_json::from_str::<Trajectory>(wrong_dims).is_err());
        let one =
            r#"{"basis": {"dims": 1, "sizes": [2]}, "dt": 0.1, "pde_name": "x", "snapshots": [[1.0, 0.0]]}"#;
        assert!(serde_json::from_str::<Trajectory>(one).is_err());
    }

    #[test]
    fn sig9_formatting() {
        assert_eq!(format_sig9(0.931800001234), "0.931800001");
        assert_eq!(format_sig9(7.4835212345), "7.48352123");
        assert_eq!(format_sig9(-123.456), "-123.456000");
        assert_eq!(format_sig9(0.0), "0");
        assert_eq!(format_sig9(1.5e-9), "1.50000000e-9");
        assert_eq!(format_sig9(0.99999999999), "1.00000000");
    }

    #[test]
    fn csv_layout() {
        let m = ConfusionMatrix {
            metric: Metric::S,
            candidate_names: vec!["a".into(), "b,c".into()],
            true_names: vec!["a".into(), "b,c".into()],
            values: vec![vec![0.5, 0.25], vec![0.125, 1.0]],
        };
        assert_eq!(
            m.to_csv(),
            "candidate,a,\"b,c\"\na,0.500000000,0.250000000\n\"b,c\",0.125000000,1.00000000\n"
        );
    }
}
