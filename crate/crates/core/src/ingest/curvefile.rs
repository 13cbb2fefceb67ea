//! Curve and band documents.
//!
//! Delimited layout: `# key: value` metadata lines, then a header of
//! `depth,value` (curves) or `depth,q<level>,...` (bands), then one row per
//! depth. The structured layout is a single JSON object with the same
//! content. Reals are written in shortest round-trip form.

use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::{json, Map, Value};

use super::{sniff_delimiter, split_metadata, ParseError};
use crate::agreement::AgreementMetric;
use crate::curve::DepthCurve;
use crate::nullref::{Hypothesis, ReferenceBand};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?} (expected csv or json)")),
        }
    }
}

/// Run information carried alongside a curve or band.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Metadata {
    /// What the values are: `sra`, `average-overlap`, `p-value`, ...
    pub statistic: Option<String>,
    pub metric: Option<AgreementMetric>,
    pub seed: Option<u64>,
    /// Monte-Carlo realizations behind the values.
    pub permutations: Option<usize>,
    pub fill_permutations: Option<usize>,
    pub lists: Option<usize>,
    pub universe_size: Option<usize>,
    /// Depths past this one are flagged as extrapolated.
    pub reliable_depth: Option<usize>,
    pub ties_broken: Option<usize>,
    pub method: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveDocument<S> {
    pub metadata: Metadata,
    pub curve: DepthCurve<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandDocument<S> {
    pub metadata: Metadata,
    pub band: ReferenceBand<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Document<S> {
    Curve(CurveDocument<S>),
    Band(BandDocument<S>),
}

impl<S: Scalar> Document<S> {
    pub fn metadata(&self) -> &Metadata {
        match self {
            Document::Curve(d) => &d.metadata,
            Document::Band(d) => &d.metadata,
        }
    }

    pub fn max_depth(&self) -> usize {
        match self {
            Document::Curve(d) => d.curve.max_depth(),
            Document::Band(d) => d.band.max_depth(),
        }
    }
}

fn flagged_range(reliable: Option<usize>, depth: usize) -> Option<(usize, usize)> {
    reliable.filter(|&r| r < depth).map(|r| (r + 1, depth))
}

fn metadata_pairs(meta: &Metadata, depth: usize) -> Vec<(&'static str, String)> {
    let mut out = Vec::new();
    let mut push = |k: &'static str, v: Option<String>| {
        if let Some(v) = v {
            out.push((k, v));
        }
    };
    push("statistic", meta.statistic.clone());
    push("method", meta.method.clone());
    push("metric", meta.metric.map(|m| m.to_string()));
    push("seed", meta.seed.map(|v| v.to_string()));
    push("B", meta.permutations.map(|v| v.to_string()));
    push("fill_B", meta.fill_permutations.map(|v| v.to_string()));
    push("lists", meta.lists.map(|v| v.to_string()));
    push("universe_size", meta.universe_size.map(|v| v.to_string()));
    push("ties_broken", meta.ties_broken.map(|v| v.to_string()));
    push("flagged_depths", flagged_range(meta.reliable_depth, depth).map(|(a, b)| format!("{a}-{b}")));
    out
}

fn metadata_json(meta: &Metadata, depth: usize) -> Value {
    let mut map = Map::new();
    if let Some(v) = &meta.statistic {
        map.insert("statistic".into(), json!(v));
    }
    if let Some(v) = &meta.method {
        map.insert("method".into(), json!(v));
    }
    if let Some(v) = meta.metric {
        map.insert("metric".into(), json!(v));
    }
    if let Some(v) = meta.seed {
        map.insert("seed".into(), json!(v));
    }
    if let Some(v) = meta.permutations {
        map.insert("B".into(), json!(v));
    }
    if let Some(v) = meta.fill_permutations {
        map.insert("fill_B".into(), json!(v));
    }
    if let Some(v) = meta.lists {
        map.insert("lists".into(), json!(v));
    }
    if let Some(v) = meta.universe_size {
        map.insert("universe_size".into(), json!(v));
    }
    if let Some(v) = meta.ties_broken {
        map.insert("ties_broken".into(), json!(v));
    }
    let flagged: Vec<[usize; 2]> = flagged_range(meta.reliable_depth, depth).map(|(a, b)| [a, b]).into_iter().collect();
    map.insert("flagged_depths".into(), json!(flagged));
    Value::Object(map)
}

fn to_json_number<S: Scalar>(v: S) -> Value {
    json!(v.to_f64().expect("finite scalar"))
}

/// Serialize a curve with its metadata.
pub fn emit_curve<S: Scalar>(doc: &CurveDocument<S>, format: Format) -> String {
    let depth = doc.curve.max_depth();
    match format {
        Format::Csv => {
            let mut out = String::new();
            for (k, v) in metadata_pairs(&doc.metadata, depth) {
                let _ = writeln!(out, "# {k}: {v}");
            }
            out.push_str("depth,value\n");
            for (d, v) in doc.curve.iter() {
                let _ = writeln!(out, "{d},{v}");
            }
            out
        }
        Format::Json => {
            let value = json!({
                "kind": "curve",
                "metadata": metadata_json(&doc.metadata, depth),
                "depths": (1..=depth).collect::<Vec<_>>(),
                "values": doc.curve.values().iter().map(|&v| to_json_number(v)).collect::<Vec<_>>(),
            });
            let mut s = serde_json::to_string_pretty(&value).expect("json serialization");
            s.push('\n');
            s
        }
    }
}

/// Serialize a band with its metadata. The band's own hypothesis tag and
/// number of null curves are always written.
pub fn emit_band<S: Scalar>(doc: &BandDocument<S>, format: Format) -> String {
    let band = &doc.band;
    let depth = band.max_depth();
    let mut meta = doc.metadata.clone();
    if band.reliable_depth().is_some() {
        meta.reliable_depth = band.reliable_depth();
    }
    match format {
        Format::Csv => {
            let mut out = String::new();
            let _ = writeln!(out, "# hypothesis_tag: {}", band.hypothesis());
            let _ = writeln!(out, "# B_used: {}", band.permutations());
            for (k, v) in metadata_pairs(&meta, depth) {
                let _ = writeln!(out, "# {k}: {v}");
            }
            out.push_str("depth");
            for q in band.quantiles() {
                let _ = write!(out, ",q{q}");
            }
            out.push('\n');
            for d in 0..depth {
                let _ = write!(out, "{}", d + 1);
                for level in band.levels() {
                    let _ = write!(out, ",{}", level[d]);
                }
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let value = json!({
                "kind": "band",
                "hypothesis_tag": band.hypothesis(),
                "B_used": band.permutations(),
                "metadata": metadata_json(&meta, depth),
                "quantiles": band.quantiles(),
                "depths": (1..=depth).collect::<Vec<_>>(),
                "values": band.levels().iter()
                    .map(|row| row.iter().map(|&v| to_json_number(v)).collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
            });
            let mut s = serde_json::to_string_pretty(&value).expect("json serialization");
            s.push('\n');
            s
        }
    }
}

/// Parse either layout; the format is recognized from the first character.
pub fn parse_document<S: Scalar>(text: &str) -> Result<Document<S>, ParseError> {
    if text.trim_start().starts_with('{') {
        parse_json(text)
    } else {
        parse_csv(text)
    }
}

fn invalid(what: &'static str, detail: impl ToString) -> ParseError {
    ParseError::Invalid { what, detail: detail.to_string() }
}

fn parse_num<T: FromStr>(what: &'static str, s: &str) -> Result<T, ParseError> {
    s.trim().parse().map_err(|_| invalid(what, format!("{s:?}")))
}

fn parse_range(s: &str) -> Result<usize, ParseError> {
    let (a, _) = s.split_once('-').ok_or_else(|| invalid("flagged_depths", s))?;
    let start: usize = parse_num("flagged_depths", a)?;
    start.checked_sub(1).ok_or_else(|| invalid("flagged_depths", s))
}

fn apply_pair(meta: &mut Metadata, key: &str, value: &str) -> Result<(), ParseError> {
    match key {
        "statistic" => meta.statistic = Some(value.to_string()),
        "method" => meta.method = Some(value.to_string()),
        "metric" => meta.metric = Some(value.parse().map_err(|e| invalid("metric", e))?),
        "seed" => meta.seed = Some(parse_num("seed", value)?),
        "B" => meta.permutations = Some(parse_num("B", value)?),
        "fill_B" => meta.fill_permutations = Some(parse_num("fill_B", value)?),
        "lists" => meta.lists = Some(parse_num("lists", value)?),
        "universe_size" => meta.universe_size = Some(parse_num("universe_size", value)?),
        "ties_broken" => meta.ties_broken = Some(parse_num("ties_broken", value)?),
        "flagged_depths" => meta.reliable_depth = Some(parse_range(value)?),
        // unknown keys are tolerated so that hand-annotated files still load
        _ => {}
    }
    Ok(())
}

fn check_depth_column(depths: impl Iterator<Item = usize>) -> Result<(), ParseError> {
    for (i, d) in depths.enumerate() {
        if d != i + 1 {
            return Err(invalid("depth column", format!("expected depth {}, found {d}", i + 1)));
        }
    }
    Ok(())
}

fn parse_csv<S: Scalar>(text: &str) -> Result<Document<S>, ParseError> {
    let (pairs, body) = split_metadata(text)?;
    let mut meta = Metadata::default();
    let mut hypothesis = None;
    let mut used = None;
    for (k, v) in &pairs {
        match k.as_str() {
            "hypothesis_tag" => hypothesis = Some(v.parse::<Hypothesis>().map_err(|e| invalid("hypothesis_tag", e))?),
            "B_used" => used = Some(parse_num::<usize>("B_used", v)?),
            _ => apply_pair(&mut meta, k, v)?,
        }
    }
    let mut reader =
        csv::ReaderBuilder::new().delimiter(sniff_delimiter(body)).trim(csv::Trim::All).from_reader(body.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.first().map(String::as_str) != Some("depth") || header.len() < 2 {
        return Err(ParseError::UnknownLayout(header.join(",")));
    }
    let mut depths = Vec::new();
    let mut columns: Vec<Vec<S>> = vec![Vec::new(); header.len() - 1];
    for record in reader.records() {
        let record = record?;
        depths.push(parse_num::<usize>("depth", &record[0])?);
        for (col, cell) in columns.iter_mut().zip(record.iter().skip(1)) {
            col.push(parse_num::<S>("value", cell)?);
        }
    }
    check_depth_column(depths.into_iter())?;
    if header.len() == 2 && header[1] == "value" {
        let curve = DepthCurve::new(columns.pop().unwrap_or_default()).map_err(|e| invalid("curve", e))?;
        return Ok(Document::Curve(CurveDocument { metadata: meta, curve }));
    }
    let quantiles = header[1..]
        .iter()
        .map(|h| {
            h.strip_prefix('q')
                .ok_or_else(|| ParseError::UnknownLayout(header.join(",")))
                .and_then(|q| parse_num::<f64>("quantile level", q))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let hypothesis = hypothesis.ok_or(ParseError::MissingField("hypothesis_tag"))?;
    let used = used.ok_or(ParseError::MissingField("B_used"))?;
    let band = ReferenceBand::new(quantiles, columns, used, hypothesis)
        .map_err(|e| invalid("band", e))?
        .with_reliable_depth(meta.reliable_depth);
    Ok(Document::Band(BandDocument { metadata: meta, band }))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &'static str) -> Result<&'a Value, ParseError> {
    obj.get(key).ok_or(ParseError::MissingField(key))
}

fn json_scalars<S: Scalar>(value: &Value) -> Result<Vec<S>, ParseError> {
    value
        .as_array()
        .ok_or_else(|| invalid("values", "expected an array"))?
        .iter()
        .map(|v| v.as_f64().and_then(S::from_f64).ok_or_else(|| invalid("value", v)))
        .collect()
}

fn parse_json_metadata(value: Option<&Value>) -> Result<Metadata, ParseError> {
    let mut meta = Metadata::default();
    let Some(obj) = value.and_then(Value::as_object) else {
        return Ok(meta);
    };
    for (k, v) in obj {
        if k == "flagged_depths" {
            let first = v.as_array().and_then(|a| a.first());
            if let Some(range) = first {
                let start = range.get(0).and_then(Value::as_u64).ok_or_else(|| invalid("flagged_depths", range))?;
                meta.reliable_depth =
                    Some((start as usize).checked_sub(1).ok_or_else(|| invalid("flagged_depths", range))?);
            }
            continue;
        }
        let text = match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        apply_pair(&mut meta, k, &text)?;
    }
    Ok(meta)
}

fn parse_json<S: Scalar>(text: &str) -> Result<Document<S>, ParseError> {
    let root: Value = serde_json::from_str(text)?;
    let obj = root.as_object().ok_or_else(|| invalid("record", "expected an object"))?;
    let meta = parse_json_metadata(obj.get("metadata"))?;
    let depths: Vec<usize> = serde_json::from_value(field(obj, "depths")?.clone())?;
    check_depth_column(depths.iter().copied())?;
    match field(obj, "kind")?.as_str() {
        Some("curve") => {
            let values = json_scalars(field(obj, "values")?)?;
            if values.len() != depths.len() {
                return Err(invalid("curve", "depths and values differ in length"));
            }
            let curve = DepthCurve::new(values).map_err(|e| invalid("curve", e))?;
            Ok(Document::Curve(CurveDocument { metadata: meta, curve }))
        }
        Some("band") => {
            let hypothesis: Hypothesis = serde_json::from_value(field(obj, "hypothesis_tag")?.clone())?;
            let used: usize = serde_json::from_value(field(obj, "B_used")?.clone())?;
            let quantiles: Vec<f64> = serde_json::from_value(field(obj, "quantiles")?.clone())?;
            let rows = field(obj, "values")?
                .as_array()
                .ok_or_else(|| invalid("values", "expected an array of arrays"))?
                .iter()
                .map(json_scalars)
                .collect::<Result<Vec<Vec<S>>, _>>()?;
            if rows.iter().any(|r| r.len() != depths.len()) {
                return Err(invalid("band", "depths and values differ in length"));
            }
            let band = ReferenceBand::new(quantiles, rows, used, hypothesis)
                .map_err(|e| invalid("band", e))?
                .with_reliable_depth(meta.reliable_depth);
            Ok(Document::Band(BandDocument { metadata: meta, band }))
        }
        _ => Err(invalid("kind", "expected \"curve\" or \"band\"")),
    }
}
