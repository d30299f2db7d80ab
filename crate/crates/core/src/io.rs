//! JSON file formats.
//!
//! Point set files look like
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "feature_variant": "minutia",
//!   "unit": "px",
//!   "label": "subject-3/ref-0",
//!   "points": [
//!     { "x": 10.5, "y": -2.0, "feature": { "angle_deg": 45.0, "kind": "termination" } }
//!   ]
//! }
//! ```
//!
//! or, for descriptor features, `"feature": { "values": [0.6, 0.8] }`.
//! Angles are stored in degrees and held in radians once loaded. All other
//! documents are plain serde encodings; infinite distances are written as
//! the string `"inf"`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::Error;
use crate::model::{Feature, FeatureVariant, MinutiaKind, Point2, PointSet};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid value at {path}: {message}")]
    Validation { path: String, message: String },
    #[error(transparent)]
    Model(#[from] Error),
}

pub type IoResult<T> = std::result::Result<T, IoError>;

fn invalid(path: impl Into<String>, message: impl Into<String>) -> IoError {
    IoError::Validation { path: path.into(), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    #[default]
    Px,
    Cm,
}

impl Unit {
    pub fn as_str(&self) -> &'static str {
        match self {
            Unit::Px => "px",
            Unit::Cm => "cm",
        }
    }
}

/// A loaded point set file.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSetDocument {
    pub set: PointSet,
    pub unit: Unit,
}

pub fn read_file(path: &Path) -> IoResult<String> {
    fs::read_to_string(path).map_err(|source| IoError::Io { path: path.to_path_buf(), source })
}

pub fn write_file(path: &Path, contents: &str) -> IoResult<()> {
    fs::write(path, contents).map_err(|source| IoError::Io { path: path.to_path_buf(), source })
}

pub fn load_point_set(path: &Path) -> IoResult<PointSet> {
    parse_point_set(&read_file(path)?).map(|d| d.set)
}

pub fn save_point_set(path: &Path, set: &PointSet, unit: Unit) -> IoResult<()> {
    write_file(path, &point_set_to_json(set, unit))
}

pub fn parse_point_set(text: &str) -> IoResult<PointSetDocument> {
    let root: Value = serde_json::from_str(text).map_err(|e| IoError::Parse(e.to_string()))?;
    let obj = root.as_object().ok_or_else(|| invalid("$", "expected an object"))?;
    warn_unknown(obj, "$", &["schema_version", "feature_variant", "unit", "label", "order_index", "points"]);

    if let Some(v) = obj.get("schema_version") {
        match v.as_u64() {
            Some(SCHEMA_VERSION) => {}
            _ => return Err(invalid("$.schema_version", format!("unsupported schema version {v}"))),
        }
    }
    let variant = match obj.get("feature_variant").and_then(Value::as_str) {
        Some("minutia") => FeatureVariant::Minutia,
        Some("vector") => FeatureVariant::Vector,
        Some(other) => return Err(invalid("$.feature_variant", format!("unknown variant {other:?}"))),
        None => return Err(invalid("$.feature_variant", "missing or not a string")),
    };
    let unit = match obj.get("unit") {
        None => Unit::Px,
        Some(v) => match v.as_str() {
            Some("px") => Unit::Px,
            Some("cm") => Unit::Cm,
            _ => return Err(invalid("$.unit", format!("expected \"px\" or \"cm\", got {v}"))),
        },
    };
    let label = match obj.get("label") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(v) => return Err(invalid("$.label", format!("expected a string, got {v}"))),
    };
    let order_index = match obj.get("order_index") {
        None | Some(Value::Null) => None,
        Some(v) => Some(v.as_i64().ok_or_else(|| invalid("$.order_index", format!("expected an integer, got {v}")))?),
    };
    let raw_points =
        obj.get("points").and_then(Value::as_array).ok_or_else(|| invalid("$.points", "missing or not an array"))?;

    let mut points = Vec::with_capacity(raw_points.len());
    let mut features = Vec::with_capacity(raw_points.len());
    for (i, p) in raw_points.iter().enumerate() {
        let path = format!("$.points[{i}]");
        let po = p.as_object().ok_or_else(|| invalid(&path, "expected an object"))?;
        warn_unknown(po, &path, &["x", "y", "feature"]);
        let x = finite_number(po.get("x"), &format!("{path}.x"))?;
        let y = finite_number(po.get("y"), &format!("{path}.y"))?;
        let fpath = format!("{path}.feature");
        let fo = po.get("feature").and_then(Value::as_object).ok_or_else(|| invalid(&fpath, "missing or not an object"))?;
        let feature = match variant {
            FeatureVariant::Minutia => parse_minutia(fo, &fpath)?,
            FeatureVariant::Vector => parse_vector(fo, &fpath)?,
        };
        points.push(Point2::new(x, y));
        features.push(feature);
    }

    let mut set = PointSet::new(points, features).map_err(|e| invalid("$.points", e.to_string()))?;
    set.label = label;
    set.order_index = order_index;
    Ok(PointSetDocument { set, unit })
}

fn parse_minutia(fo: &Map<String, Value>, path: &str) -> IoResult<Feature> {
    warn_unknown(fo, path, &["angle_deg", "kind"]);
    let deg = finite_number(fo.get("angle_deg"), &format!("{path}.angle_deg"))?;
    if !(0.0..360.0).contains(&deg) {
        return Err(invalid(format!("{path}.angle_deg"), format!("{deg} is outside [0, 360)")));
    }
    let kind = match fo.get("kind").and_then(Value::as_str) {
        Some("termination") => MinutiaKind::Termination,
        Some("bifurcation") => MinutiaKind::Bifurcation,
        _ => return Err(invalid(format!("{path}.kind"), "expected \"termination\" or \"bifurcation\"")),
    };
    Ok(Feature::minutia(deg.to_radians(), kind))
}

fn parse_vector(fo: &Map<String, Value>, path: &str) -> IoResult<Feature> {
    warn_unknown(fo, path, &["values"]);
    let vpath = format!("{path}.values");
    let raw = fo.get("values").and_then(Value::as_array).ok_or_else(|| invalid(&vpath, "missing or not an array"))?;
    if raw.is_empty() {
        return Err(invalid(&vpath, "empty vector"));
    }
    let values = raw
        .iter()
        .enumerate()
        .map(|(k, v)| finite_number(Some(v), &format!("{vpath}[{k}]")))
        .collect::<IoResult<Vec<f64>>>()?;
    if values.iter().all(|v| *v == 0.0) {
        log::warn!("{vpath} is the zero vector; kept as zero");
    }
    Ok(Feature::vector(values))
}

fn finite_number(v: Option<&Value>, path: &str) -> IoResult<f64> {
    match v.and_then(Value::as_f64) {
        Some(x) if x.is_finite() => Ok(x),
        Some(x) => Err(invalid(path, format!("{x} is not finite"))),
        None => Err(invalid(path, "missing or not a number")),
    }
}

fn warn_unknown(obj: &Map<String, Value>, path: &str, known: &[&str]) {
    for key in obj.keys().filter(|k| !known.contains(&k.as_str())) {
        log::warn!("ignoring unknown field {path}.{key}");
    }
}

pub fn point_set_to_json(set: &PointSet, unit: Unit) -> String {
    let variant = set.variant().unwrap_or(FeatureVariant::Minutia);
    let points: Vec<Value> = set
        .points()
        .iter()
        .zip(set.features())
        .map(|(p, f)| {
            let feature = match f {
                Feature::Minutia { angle, kind } => {
                    let mut deg = angle.to_degrees();
                    if deg >= 360.0 {
                        deg = 0.0;
                    }
                    json!({ "angle_deg": deg, "kind": kind.as_str() })
                }
                Feature::Vector { values } => json!({ "values": values }),
            };
            json!({ "x": p.x, "y": p.y, "feature": feature })
        })
        .collect();
    let mut doc = Map::new();
    doc.insert("schema_version".into(), json!(SCHEMA_VERSION));
    doc.insert("feature_variant".into(), json!(variant.as_str()));
    doc.insert("unit".into(), json!(unit.as_str()));
    if let Some(label) = &set.label {
        doc.insert("label".into(), json!(label));
    }
    if let Some(idx) = set.order_index {
        doc.insert("order_index".into(), json!(idx));
    }
    doc.insert("points".into(), Value::Array(points));
    serde_json::to_string_pretty(&Value::Object(doc)).expect("JSON values always serialize")
}

/// Serializes any document type as pretty JSON.
pub fn to_json<T: Serialize>(doc: &T) -> IoResult<String> {
    serde_json::to_string_pretty(doc).map_err(|e| IoError::Parse(e.to_string()))
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> IoResult<T> {
    serde_json::from_str(text).map_err(|e| IoError::Parse(e.to_string()))
}

pub fn save_json<T: Serialize>(path: &Path, doc: &T) -> IoResult<()> {
    write_file(path, &to_json(doc)?)
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> IoResult<T> {
    from_json(&read_file(path)?)
}

/// Serde adapter writing non-finite floats as `"inf"`, `"-inf"` or `"nan"`.
pub mod float_or_inf {
    use serde::de::{self, Deserializer, Visitor};
    use serde::Serializer;
    use std::fmt;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        struct FloatVisitor;

        impl Visitor<'_> for FloatVisitor {
            type Value = f64;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
                Ok(v)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
                Ok(v as f64)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
                Ok(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
                match v {
                    "inf" => Ok(f64::INFINITY),
                    "-inf" => Ok(f64::NEG_INFINITY),
                    "nan" => Ok(f64::NAN),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }

        d.deserialize_any(FloatVisitor)
    }
}

/// [`float_or_inf`] for vectors and matrices.
pub mod floats_or_inf {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct F(#[serde(with = "super::float_or_inf")] f64);

    pub fn serialize<S: Serializer>(v: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<F>> = v.iter().map(|r| r.iter().map(|x| F(*x)).collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
        let rows: Vec<Vec<F>> = Vec::deserialize(d)?;
        Ok(rows.into_iter().map(|r| r.into_iter().map(|x| x.0).collect()).collect())
    }
}
