//! Election configuration and its JSON form.
//!
//! ```json
//! {
//!   "num_classes": 16,
//!   "num_views": 3,
//!   "fps": 30,
//!   "weights": [[0.5, 0.25, 0.25], ...],
//!   "thresholds": [0.4, ...],
//!   "merge_gap_s": 0.5,
//!   "fallback": "argmax_peak"
//! }
//! ```
//!
//! Only `num_classes` and `num_views` are required. `thresholds` may be a
//! single number, broadcast to every class. A `scenario` key is tolerated so
//! that scenario files can share the same document.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::formats::{read_to_string, write_atomic};
use crate::model::{TimeBase, DEFAULT_FPS};

pub const DEFAULT_THRESHOLD: f64 = 0.5;
pub const DEFAULT_MERGE_GAP_S: f64 = 0.5;

/// Rows whose sum is already this close to one are kept bit-for-bit, so that
/// loading a written config reproduces it exactly.
const NORMALIZED_SLACK: f64 = 1e-12;

/// What `select` emits for a class without any super-threshold run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fallback {
    None,
    #[default]
    ArgmaxPeak,
}

impl Fallback {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(Fallback::None),
            "argmax_peak" => Some(Fallback::ArgmaxPeak),
            _ => None,
        }
    }
}

/// Per-class view weights, each row normalized to sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewWeights {
    classes: usize,
    views: usize,
    values: Vec<f64>,
}

impl ViewWeights {
    /// Normalizes each row. Rejects negative or non-finite entries and rows
    /// that sum to zero.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let classes = rows.len();
        let views = rows.first().map_or(0, Vec::len);
        if classes == 0 || views == 0 {
            return Err(Error::Shape("view weights must be a non-empty K x M matrix".into()));
        }
        let mut values = Vec::with_capacity(classes * views);
        for (c, row) in rows.into_iter().enumerate() {
            if row.len() != views {
                return Err(Error::Shape(format!(
                    "weight row {c} has {} entries, expected {views}",
                    row.len()
                )));
            }
            if let Some(w) = row.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
                return Err(Error::Invalid(format!(
                    "weight row {c} contains {w}; weights must be finite and non-negative"
                )));
            }
            let sum: f64 = row.iter().sum();
            if sum <= 0.0 {
                return Err(Error::Invalid(format!("weight row {c} sums to zero")));
            }
            if (sum - 1.0).abs() <= NORMALIZED_SLACK {
                values.extend_from_slice(&row);
            } else {
                values.extend(row.iter().map(|w| w / sum));
            }
        }
        Ok(Self {
            classes,
            views,
            values,
        })
    }

    /// Every row `1/M`: the plain average over views.
    pub fn uniform(classes: usize, views: usize) -> Self {
        Self {
            classes,
            views,
            values: vec![1.0 / views as f64; classes * views],
        }
    }

    pub fn num_classes(&self) -> usize {
        self.classes
    }

    pub fn num_views(&self) -> usize {
        self.views
    }

    pub fn row(&self, c: usize) -> &[f64] {
        &self.values[c * self.views..(c + 1) * self.views]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.views).map(<[f64]>::to_vec).collect()
    }

    /// Replaces row `c`, normalizing it.
    pub fn set_row(&mut self, c: usize, row: &[f64]) -> Result<()> {
        let normalized = ViewWeights::new(vec![row.to_vec()])?;
        if normalized.views != self.views {
            return Err(Error::Shape(format!(
                "row has {} entries, expected {}",
                normalized.views, self.views
            )));
        }
        self.values[c * self.views..(c + 1) * self.views].copy_from_slice(&normalized.values);
        Ok(())
    }

    /// Same weights with the view axis reordered (new view `i` = old `order[i]`).
    pub fn permute_views(&self, order: &[usize]) -> Result<Self> {
        crate::model::check_permutation(order, self.views)?;
        let rows = (0..self.classes)
            .map(|c| order.iter().map(|&m| self.row(c)[m]).collect())
            .collect();
        Ok(Self {
            classes: self.classes,
            views: self.views,
            values: ViewWeights::flatten(rows),
        })
    }

    fn flatten(rows: Vec<Vec<f64>>) -> Vec<f64> {
        rows.into_iter().flatten().collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElectionConfig {
    pub time_base: TimeBase,
    pub weights: ViewWeights,
    pub thresholds: Vec<f64>,
    pub merge_gap_s: f64,
    pub fallback: Fallback,
}

impl ElectionConfig {
    /// Uniform weights, threshold 0.5 for every class, 0.5 s merge gap,
    /// 30 fps and the argmax-peak fallback.
    pub fn new(num_classes: usize, num_views: usize) -> Result<Self> {
        if num_classes == 0 || num_views == 0 {
            return Err(Error::Shape("num_classes and num_views must be positive".into()));
        }
        Ok(Self {
            time_base: TimeBase::default(),
            weights: ViewWeights::uniform(num_classes, num_views),
            thresholds: vec![DEFAULT_THRESHOLD; num_classes],
            merge_gap_s: DEFAULT_MERGE_GAP_S,
            fallback: Fallback::default(),
        })
    }

    pub fn num_classes(&self) -> usize {
        self.weights.num_classes()
    }

    pub fn num_views(&self) -> usize {
        self.weights.num_views()
    }

    /// Merge gap converted to whole frames.
    pub fn gap_frames(&self) -> usize {
        self.time_base.seconds_to_frames(self.merge_gap_s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.thresholds.len() != self.num_classes() {
            return Err(Error::config(
                "thresholds",
                format!(
                    "{} thresholds for {} classes",
                    self.thresholds.len(),
                    self.num_classes()
                ),
            ));
        }
        if let Some(t) = self.thresholds.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
            return Err(Error::config("thresholds", format!("{t} is not in (0, 1)")));
        }
        if !(self.merge_gap_s.is_finite() && self.merge_gap_s >= 0.0) {
            return Err(Error::config(
                "merge_gap_s",
                format!("{} must be a non-negative number", self.merge_gap_s),
            ));
        }
        Ok(())
    }
}

pub fn read_config(path: impl AsRef<Path>) -> Result<ElectionConfig> {
    parse_config_str(&read_to_string(path.as_ref())?)
}

pub fn write_config(cfg: &ElectionConfig, path: impl AsRef<Path>) -> Result<()> {
    let text = render_config(cfg)?;
    write_atomic(path.as_ref(), |w| Ok(w.write_all(text.as_bytes())?))
}

#[derive(Serialize)]
struct ConfigDoc<'a> {
    num_classes: usize,
    num_views: usize,
    fps: f64,
    weights: Vec<Vec<f64>>,
    thresholds: &'a [f64],
    merge_gap_s: f64,
    fallback: Fallback,
}

/// Canonical pretty-printed JSON with every field explicit.
pub fn render_config(cfg: &ElectionConfig) -> Result<String> {
    cfg.validate()?;
    let doc = ConfigDoc {
        num_classes: cfg.num_classes(),
        num_views: cfg.num_views(),
        fps: cfg.time_base.fps(),
        weights: cfg.weights.rows(),
        thresholds: &cfg.thresholds,
        merge_gap_s: cfg.merge_gap_s,
        fallback: cfg.fallback,
    };
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Invalid(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

const KNOWN_KEYS: [&str; 8] = [
    "num_classes",
    "num_views",
    "fps",
    "weights",
    "thresholds",
    "merge_gap_s",
    "fallback",
    "scenario",
];

pub fn parse_config_str(text: &str) -> Result<ElectionConfig> {
    let doc: Value =
        serde_json::from_str(text).map_err(|e| Error::config("<document>", e.to_string()))?;
    let obj = doc
        .as_object()
        .ok_or_else(|| Error::config("<document>", "expected a JSON object"))?;
    config_from_object(obj)
}

pub(crate) fn config_from_object(obj: &Map<String, Value>) -> Result<ElectionConfig> {
    if let Some(key) = obj.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
        return Err(Error::config(key.clone(), "unknown key"));
    }
    let k = required_count(obj, "num_classes")?;
    let m = required_count(obj, "num_views")?;
    let mut cfg = ElectionConfig::new(k, m)?;

    if let Some(v) = obj.get("fps") {
        let fps = number(v, "fps")?;
        cfg.time_base = TimeBase::new(fps).map_err(|e| Error::config("fps", e.to_string()))?;
    } else {
        cfg.time_base = TimeBase::new(DEFAULT_FPS)?;
    }

    if let Some(v) = obj.get("weights") {
        let rows = v
            .as_array()
            .ok_or_else(|| Error::config("weights", "expected a K x M array"))?;
        if rows.len() != k {
            return Err(Error::config(
                "weights",
                format!("expected {k} rows, got {}", rows.len()),
            ));
        }
        let mut matrix = Vec::with_capacity(k);
        for (c, row) in rows.iter().enumerate() {
            let key = format!("weights[{c}]");
            let row = row
                .as_array()
                .ok_or_else(|| Error::config(&key, "expected an array"))?;
            if row.len() != m {
                return Err(Error::config(&key, format!("expected {m} entries, got {}", row.len())));
            }
            let mut parsed = Vec::with_capacity(m);
            for (j, w) in row.iter().enumerate() {
                let key = format!("weights[{c}][{j}]");
                let w = number(w, &key)?;
                if w < 0.0 {
                    return Err(Error::config(key, format!("negative weight {w}")));
                }
                parsed.push(w);
            }
            matrix.push(parsed);
        }
        cfg.weights =
            ViewWeights::new(matrix).map_err(|e| Error::config("weights", e.to_string()))?;
    }

    if let Some(v) = obj.get("thresholds") {
        cfg.thresholds = match v {
            Value::Array(items) => {
                if items.len() != k {
                    return Err(Error::config(
                        "thresholds",
                        format!("expected {k} thresholds, got {}", items.len()),
                    ));
                }
                items
                    .iter()
                    .enumerate()
                    .map(|(c, t)| number(t, &format!("thresholds[{c}]")))
                    .collect::<Result<_>>()?
            }
            other => vec![number(other, "thresholds")?; k],
        };
    }

    if let Some(v) = obj.get("merge_gap_s") {
        cfg.merge_gap_s = number(v, "merge_gap_s")?;
    }

    if let Some(v) = obj.get("fallback") {
        cfg.fallback = v
            .as_str()
            .and_then(Fallback::parse)
            .ok_or_else(|| Error::config("fallback", "expected \"none\" or \"argmax_peak\""))?;
    }

    cfg.validate()?;
    Ok(cfg)
}

pub(crate) fn required_count(obj: &Map<String, Value>, key: &str) -> Result<usize> {
    let v = obj
        .get(key)
        .ok_or_else(|| Error::config(key, "missing required key"))?;
    match v.as_u64() {
        Some(n) if n >= 1 => Ok(n as usize),
        _ => Err(Error::config(key, "expected a positive integer")),
    }
}

pub(crate) fn number(v: &Value, key: &str) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::config(key, format!("expected a number, got {v}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = parse_config_str(r#"{"num_classes": 2, "num_views": 4}"#).unwrap();
        assert_eq!(cfg.thresholds, vec![0.5, 0.5]);
        assert_eq!(cfg.weights.row(1), &[0.25; 4]);
        assert_eq!(cfg.merge_gap_s, 0.5);
        assert_eq!(cfg.time_base.fps(), 30.0);
        assert_eq!(cfg.fallback, Fallback::ArgmaxPeak);
        assert_eq!(cfg.gap_frames(), 15);
    }

    #[test]
    fn weight_rows_are_normalized() {
        let cfg = parse_config_str(
            r#"{"num_classes": 1, "num_views": 3, "weights": [[2, 1, 1]]}"#,
        )
        .unwrap();
        assert_eq!(cfg.weights.row(0), &[0.5, 0.25, 0.25]);
    }

    #[test]
    fn errors_name_the_key() {
        let cases = [
            (r#"{"num_classes": 1, "num_views": 1, "thresholds": 1.5}"#, "thresholds"),
            (r#"{"num_classes": 1, "num_views": 2, "weights": [[1, -1]]}"#, "weights[0][1]"),
            (r#"{"num_classes": 1, "num_views": 1, "bogus": 1}"#, "bogus"),
            (r#"{"num_views": 1}"#, "num_classes"),
            (r#"{"num_classes": 1, "num_views": 1, "fps": "x"}"#, "fps"),
            (r#"{"num_classes": 1, "num_views": 1, "fallback": "maybe"}"#, "fallback"),
            (r#"{"num_classes": 1, "num_views": 1, "merge_gap_s": -1}"#, "merge_gap_s"),
            (r#"{"num_classes": 2, "num_views": 1, "thresholds": [0.5]}"#, "thresholds"),
            (r#"{"num_classes": 1, "num_views": 2, "weights": [[0, 0]]}"#, "weights"),
            (r#"{"num_classes": 0, "num_views": 1}"#, "num_classes"),
        ];
        for (text, key) in cases {
            match parse_config_str(text) {
                Err(Error::Config { key: got, .. }) => assert_eq!(got, key, "{text}"),
                other => panic!("{text}: expected config error, got {other:?}"),
            }
        }
    }

    #[test]
    fn scenario_key_is_tolerated() {
        assert!(parse_config_str(r#"{"num_classes": 1, "num_views": 1, "scenario": {}}"#).is_ok());
    }

    #[test]
    fn rendered_config_parses_back() {
        let mut cfg = ElectionConfig::new(2, 3).unwrap();
        cfg.weights.set_row(0, &[1.0, 0.0, 0.0]).unwrap();
        cfg.thresholds = vec![0.3, 0.7];
        cfg.fallback = Fallback::None;
        let text = render_config(&cfg).unwrap();
        assert_eq!(parse_config_str(&text).unwrap(), cfg);
    }

    #[test]
    fn permuting_weights() {
        let w = ViewWeights::new(vec![vec![0.5, 0.3, 0.2]]).unwrap();
        assert_eq!(w.permute_views(&[2, 0, 1]).unwrap().row(0), &[0.2, 0.5, 0.3]);
    }

    fn config_strategy() -> impl Strategy<Value = ElectionConfig> {
        (1usize..5, 1usize..4).prop_flat_map(|(k, m)| {
            (
                prop::collection::vec(prop::collection::vec(0.01..10.0f64, m), k),
                prop::collection::vec(0.001..0.999f64, k),
                0.0..5.0f64,
                1.0..120.0f64,
                any::<bool>(),
            )
                .prop_map(move |(w, t, gap, fps, fb)| ElectionConfig {
                    time_base: TimeBase::new(fps).unwrap(),
                    weights: ViewWeights::new(w).unwrap(),
                    thresholds: t,
                    merge_gap_s: gap,
                    fallback: if fb { Fallback::None } else { Fallback::ArgmaxPeak },
                })
        })
    }

    proptest! {
        #[test]
        fn write_read_write_is_stable(cfg in config_strategy()) {
            let first = render_config(&cfg).unwrap();
            let back = parse_config_str(&first).unwrap();
            prop_assert_eq!(render_config(&back).unwrap(), first);
            for c in 0..back.num_classes() {
                let s: f64 = back.weights.row(c).iter().sum();
                prop_assert!((s - 1.0).abs() < 1e-9);
            }
        }
    }
}
