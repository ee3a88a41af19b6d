//! JSON specs for tables and paths, CSV and JSON writers, and the binary grid format.

use std::f64::consts::TAU;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::de::{self, DeserializeOwned};
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::{Map, Value};

use crate::curves::{build_fourier_table, disc_table, FourierSupportSpec, TableCurve};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::homotopy::{normal_perturbation_path, support_interp_path, translation_path, TablePath};
use crate::persistence::GridFunction;
use crate::smoothing::{family_with_width, positive_curvature_lift, PolygonSpec, SmoothingFamily, SmoothingRestriction};

/// A table description as read from JSON, tagged by `type`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TableSpec {
    Disc,
    FourierSupport(FourierSupportSpec),
    SmoothedPolygon(SmoothedPolygonSpec),
}

/// A polygon rescaled to perimeter 1 and smoothed at scale `scale`; `mark` is the arc-length
/// fraction from vertex 0 of the marked point. A positive `lift` blends in a circle so the
/// table becomes strictly convex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothedPolygonSpec {
    pub vertices: Vec<[f64; 2]>,
    #[serde(default)]
    pub profile_width: Option<f64>,
    pub scale: f64,
    pub mark: f64,
    #[serde(default)]
    pub lift: Option<f64>,
}

/// Marker that prefixes nested field paths inside error messages.
const PATH_MARK: char = '\u{1}';

/// Splits off the `type` tag and deserializes the remaining fields, keeping field paths of
/// nested errors in the message.
fn tagged_fields<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<(String, Value), D::Error> {
    let mut map = Map::<String, Value>::deserialize(d)?;
    match map.remove("type") {
        Some(Value::String(kind)) => Ok((kind, Value::Object(map))),
        Some(other) => Err(de::Error::custom(format!("`type` must be a string, got {other}"))),
        None => Err(de::Error::missing_field("type")),
    }
}

fn variant<T: DeserializeOwned, E: de::Error>(fields: Value) -> std::result::Result<T, E> {
    serde_path_to_error::deserialize(fields).map_err(|e| {
        let path = e.path().to_string();
        E::custom(format!("{PATH_MARK}{path}{PATH_MARK}{}", e.into_inner()))
    })
}

impl<'de> Deserialize<'de> for TableSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (kind, fields) = tagged_fields(d)?;
        match kind.as_str() {
            "disc" => match &fields {
                Value::Object(m) if m.is_empty() => Ok(TableSpec::Disc),
                _ => Err(de::Error::custom("a disc takes no fields")),
            },
            "fourier_support" => Ok(TableSpec::FourierSupport(variant(fields)?)),
            "smoothed_polygon" => Ok(TableSpec::SmoothedPolygon(variant(fields)?)),
            other => Err(de::Error::unknown_variant(other, &["disc", "fourier_support", "smoothed_polygon"])),
        }
    }
}

impl TableSpec {
    pub fn build(&self) -> Result<TableCurve> {
        match self {
            TableSpec::Disc => Ok(disc_table()),
            TableSpec::FourierSupport(f) => build_fourier_table(f),
            TableSpec::SmoothedPolygon(p) => {
                let scale = p.scale;
                if !(scale > 0.0 && scale <= 1.0) {
                    return Err(Error::InvalidSpec(format!("scale must lie in (0, 1], got {scale}")));
                }
                let fam = self.family()?;
                match p.lift {
                    Some(eps) if eps > 0.0 => Ok(positive_curvature_lift(&fam, scale, eps)?.table),
                    _ => Ok(fam.table(scale)),
                }
            }
        }
    }

    /// The smoothing family of a `smoothed_polygon` spec.
    pub fn family(&self) -> Result<SmoothingFamily> {
        match self {
            TableSpec::SmoothedPolygon(s) => {
                let p = PolygonSpec::normalized(s.vertices.iter().map(|v| Vec2::new(v[0], v[1])).collect(), s.mark)?;
                family_with_width(&p, s.profile_width.unwrap_or_else(|| p.default_width()))
            }
            _ => Err(Error::InvalidSpec("a smoothed_polygon table is required".into())),
        }
    }

    pub fn fourier(&self) -> Result<FourierSupportSpec> {
        match self {
            TableSpec::Disc => Ok(FourierSupportSpec::circle(1.0)),
            TableSpec::FourierSupport(f) => Ok(f.clone()),
            _ => Err(Error::InvalidSpec("a support-function table is required".into())),
        }
    }
}

/// A path of tables as read from JSON, tagged by `type`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PathSpec {
    /// `γ_s = γ + s·v`.
    Translation(TranslationSpec),
    /// Linear interpolation between two support functions (`disc` or `fourier_support`).
    SupportInterp(SupportInterpSpec),
    /// `γ_s = γ + s·f·n` with `f(u) = Σ cos[k-1]·cos 2πku + sin[k-1]·sin 2πku`.
    NormalPerturbation(NormalPerturbationSpec),
    /// The smoothing family of a polygon restricted to `[s_a, s_b]`.
    SmoothingRestriction(RestrictionSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranslationSpec {
    pub table: TableSpec,
    pub v: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportInterpSpec {
    pub from: TableSpec,
    pub to: TableSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalPerturbationSpec {
    pub table: TableSpec,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RestrictionSpec {
    pub table: TableSpec,
    pub s_a: f64,
    pub s_b: f64,
}

fn default_samples() -> usize {
    512
}

impl<'de> Deserialize<'de> for PathSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (kind, fields) = tagged_fields(d)?;
        match kind.as_str() {
            "translation" => Ok(PathSpec::Translation(variant(fields)?)),
            "support_interp" => Ok(PathSpec::SupportInterp(variant(fields)?)),
            "normal_perturbation" => Ok(PathSpec::NormalPerturbation(variant(fields)?)),
            "smoothing_restriction" => Ok(PathSpec::SmoothingRestriction(variant(fields)?)),
            other => Err(de::Error::unknown_variant(
                other,
                &["translation", "support_interp", "normal_perturbation", "smoothing_restriction"],
            )),
        }
    }
}

impl PathSpec {
    pub fn build(&self) -> Result<Box<dyn TablePath>> {
        match self {
            PathSpec::Translation(t) => Ok(Box::new(translation_path(&t.table.build()?, Vec2::new(t.v[0], t.v[1])))),
            PathSpec::SupportInterp(p) => Ok(Box::new(support_interp_path(&p.from.fourier()?, &p.to.fourier()?)?)),
            PathSpec::NormalPerturbation(p) => {
                let n = p.samples;
                let f: Vec<f64> = (0..n)
                    .map(|i| {
                        let u = i as f64 / n as f64;
                        let c: f64 = p.cos.iter().enumerate().map(|(k, a)| a * (TAU * (k + 1) as f64 * u).cos()).sum();
                        let s: f64 = p.sin.iter().enumerate().map(|(k, b)| b * (TAU * (k + 1) as f64 * u).sin()).sum();
                        c + s
                    })
                    .collect();
                Ok(Box::new(normal_perturbation_path(&p.table.build()?, &f)?.0))
            }
            PathSpec::SmoothingRestriction(r) => {
                let path = SmoothingRestriction::new(&r.table.family()?, r.s_a, r.s_b)?;
                let lift = match &r.table {
                    TableSpec::SmoothedPolygon(p) => p.lift.unwrap_or(0.0),
                    _ => 0.0,
                };
                Ok(Box::new(path.with_lift(lift)))
            }
        }
    }
}

/// Joins an outer field path with the nested paths carried in `msg`.
fn full_path(outer: &str, mut msg: &str) -> (String, String) {
    let mut parts: Vec<String> = Vec::new();
    if outer != "." {
        parts.push(outer.to_string());
    }
    while let Some(rest) = msg.strip_prefix(PATH_MARK) {
        let Some((inner, tail)) = rest.split_once(PATH_MARK) else { break };
        if inner != "." {
            parts.push(inner.to_string());
        }
        msg = tail;
    }
    let path = if parts.is_empty() { ".".to_string() } else { parts.join(".") };
    // Positions inside the intermediate value carry no information about the input text.
    let msg = msg.split(" at line ").next().unwrap_or(msg);
    (path, msg.to_string())
}

/// Parses JSON, reporting the path of the offending field on failure.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let (path, msg) = full_path(&e.path().to_string(), &e.into_inner().to_string());
        Error::InvalidSpec(format!("at `{path}`: {msg}"))
    })
}

/// Reads a JSON value from a file, or parses the argument itself when it starts with `{`.
pub fn load_json<T: DeserializeOwned>(arg: &str) -> Result<T> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| Error::Io(format!("{arg}: {e}")))?
    };
    parse_json(&text)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Writes numeric rows under a header line.
pub fn write_csv<'a>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = &'a [f64]>) -> Result<()> {
    let io_err = |e: csv::Error| Error::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io_err)?;
    w.write_record(header).map_err(io_err)?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(io_err)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

#[derive(Serialize, Deserialize)]
struct GridHeader {
    n: usize,
    m: usize,
    dtype: String,
    order: String,
}

/// One JSON header line followed by `mⁿ` little-endian doubles in row-major order.
pub fn write_grid(path: &Path, g: &GridFunction) -> Result<()> {
    let header = GridHeader {
        n: g.n,
        m: g.m,
        dtype: "f64le".into(),
        order: "row-major".into(),
    };
    let mut out = serde_json::to_vec(&header).map_err(|e| Error::Io(e.to_string()))?;
    out.push(b'\n');
    for v in &g.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let mut f = fs::File::create(path)?;
    f.write_all(&out)?;
    Ok(())
}

pub fn read_grid(path: &Path) -> Result<GridFunction> {
    let mut r = BufReader::new(fs::File::open(path)?);
    let mut line = String::new();
    r.read_line(&mut line)?;
    let h: GridHeader = parse_json(&line)?;
    if h.dtype != "f64le" || h.order != "row-major" {
        return Err(Error::InvalidInput(format!("unsupported grid layout {} / {}", h.dtype, h.order)));
    }
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::InvalidInput("grid payload is not a whole number of doubles".into()));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    GridFunction::new(h.n, h.m, values)
}
