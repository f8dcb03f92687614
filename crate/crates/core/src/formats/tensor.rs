//! Tensor CSV: header `frame,view,p0,...,p{K-1}`, then one row per
//! `(frame, view)` in ascending frame-then-view order.
//!
//! Floats are written with Rust's `Display` for `f64`, which is the shortest
//! decimal string that parses back to the same bits (`1.0` prints as `1`).

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::formats::{read_to_string, write_atomic};
use crate::model::{is_probability, ProbabilityTensor};

pub fn read_tensor_csv(
    path: impl AsRef<Path>,
    expected_classes: usize,
    expected_views: usize,
) -> Result<ProbabilityTensor> {
    let text = read_to_string(path.as_ref())?;
    parse_tensor(&text, expected_classes, expected_views)
}

pub fn write_tensor_csv(tensor: &ProbabilityTensor, path: impl AsRef<Path>) -> Result<()> {
    let text = render_tensor(tensor);
    write_atomic(path.as_ref(), |w| Ok(w.write_all(text.as_bytes())?))
}

fn header(classes: usize) -> String {
    let mut h = String::from("frame,view");
    for c in 0..classes {
        let _ = write!(h, ",p{c}");
    }
    h
}

pub fn render_tensor(tensor: &ProbabilityTensor) -> String {
    let (frames, classes, views) = (tensor.num_frames(), tensor.num_classes(), tensor.num_views());
    let mut out = String::with_capacity(frames * views * (8 + 12 * classes));
    out.push_str(&header(classes));
    out.push('\n');
    for t in 0..frames {
        for m in 0..views {
            let _ = write!(out, "{t},{m}");
            for c in 0..classes {
                let _ = write!(out, ",{}", tensor.get(t, c, m));
            }
            out.push('\n');
        }
    }
    out
}

pub fn parse_tensor(
    text: &str,
    expected_classes: usize,
    expected_views: usize,
) -> Result<ProbabilityTensor> {
    if expected_classes == 0 || expected_views == 0 {
        return Err(Error::Shape("expected K and M must be positive".into()));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = rdr.records();

    let expected_header = header(expected_classes);
    match records.next() {
        None => return Err(Error::format(1, "missing header")),
        Some(rec) => {
            let rec = rec.map_err(csv_error)?;
            let got = rec.iter().collect::<Vec<_>>().join(",");
            if got != expected_header {
                return Err(Error::format(
                    1,
                    format!("expected header `{expected_header}`, got `{got}`"),
                ));
            }
        }
    }

    let width = 2 + expected_classes;
    // rows arrive view-major within a frame; store as (t, c, m)
    let mut row_values: Vec<f64> = Vec::new();
    let mut rows = 0usize;
    for rec in records {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != width {
            return Err(Error::format(
                line,
                format!("expected {width} fields, got {}", rec.len()),
            ));
        }
        let frame: usize = parse_index(&rec[0], "frame", line)?;
        let view: usize = parse_index(&rec[1], "view", line)?;
        let (want_frame, want_view) = (rows / expected_views, rows % expected_views);
        if view >= expected_views {
            return Err(Error::format(
                line,
                format!("view {view} out of range for M={expected_views}"),
            ));
        }
        if (frame, view) != (want_frame, want_view) {
            return Err(Error::format(
                line,
                format!(
                    "expected row for frame {want_frame} view {want_view}, got frame {frame} view {view} \
                     (rows must cover every (frame, view) pair in ascending order)"
                ),
            ));
        }
        for (c, field) in rec.iter().skip(2).enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::format(line, format!("p{c}: `{field}` is not a number"))
            })?;
            if !is_probability(v) {
                return Err(Error::format(
                    line,
                    format!("p{c}: {v} is not a probability in [0, 1]"),
                ));
            }
            row_values.push(v);
        }
        rows += 1;
    }

    if rows == 0 {
        return Err(Error::format(2, "tensor has no rows"));
    }
    if !rows.is_multiple_of(expected_views) {
        return Err(Error::format(
            rows as u64 + 2,
            format!(
                "missing row for frame {} view {}",
                rows / expected_views,
                rows % expected_views
            ),
        ));
    }
    let frames = rows / expected_views;
    let (k, m_count) = (expected_classes, expected_views);
    let mut values = vec![0.0; frames * k * m_count];
    for t in 0..frames {
        for m in 0..m_count {
            let row = &row_values[(t * m_count + m) * k..(t * m_count + m + 1) * k];
            for (c, v) in row.iter().enumerate() {
                values[(t * k + c) * m_count + m] = *v;
            }
        }
    }
    ProbabilityTensor::new(frames, k, m_count, values)
}

fn parse_index(field: &str, name: &str, line: u64) -> Result<usize> {
    field
        .parse()
        .map_err(|_| Error::format(line, format!("{name}: `{field}` is not a non-negative integer")))
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::format(line, e.to_string())
}
