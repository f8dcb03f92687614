//! Segments CSV: header `video_id,class_id,start_s,end_s`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::formats::tensor::csv_error;
use crate::formats::{read_to_string, write_atomic};
use crate::model::{ActionSegment, LabelSet, SegmentSet};

const HEADER: [&str; 4] = ["video_id", "class_id", "start_s", "end_s"];

/// Reads a segments file, grouping rows by `video_id` in order of first
/// appearance. When `labels` is given, class ids outside it are rejected.
pub fn read_segments_csv(
    path: impl AsRef<Path>,
    labels: Option<&LabelSet>,
) -> Result<Vec<SegmentSet>> {
    let text = read_to_string(path.as_ref())?;
    parse_segments(&text, labels)
}

pub fn write_segments_csv(sets: &[SegmentSet], path: impl AsRef<Path>) -> Result<()> {
    let text = render_segments(sets)?;
    write_atomic(path.as_ref(), |w| Ok(w.write_all(text.as_bytes())?))
}

/// An empty (zero-byte) document is read as an empty segment list.
pub fn parse_segments(text: &str, labels: Option<&LabelSet>) -> Result<Vec<SegmentSet>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = rdr.records();

    if let Some(rec) = records.next() {
        let rec = rec.map_err(csv_error)?;
        if rec.iter().ne(HEADER.iter().copied()) {
            return Err(Error::format(
                1,
                format!(
                    "expected header `{}`, got `{}`",
                    HEADER.join(","),
                    rec.iter().collect::<Vec<_>>().join(",")
                ),
            ));
        }
    }

    let mut sets: Vec<SegmentSet> = Vec::new();
    for rec in records {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 4 {
            return Err(Error::format(line, format!("expected 4 fields, got {}", rec.len())));
        }
        let video_id = &rec[0];
        if video_id.is_empty() {
            return Err(Error::format(line, "empty video_id"));
        }
        let class_id: usize = rec[1]
            .trim()
            .parse()
            .map_err(|_| Error::format(line, format!("class_id: `{}` is not an integer", &rec[1])))?;
        if let Some(labels) = labels {
            if !labels.contains(class_id) {
                return Err(Error::format(
                    line,
                    format!("unknown class_id {class_id} (label set has {} classes)", labels.len()),
                ));
            }
        }
        let start = parse_seconds(&rec[2], "start_s", line)?;
        let end = parse_seconds(&rec[3], "end_s", line)?;
        let segment = ActionSegment::new(class_id, start, end)
            .map_err(|e| Error::format(line, e.to_string()))?;

        match sets.iter_mut().find(|s| s.video_id == video_id) {
            Some(set) => set.segments.push(segment),
            None => sets.push(SegmentSet::new(video_id, vec![segment])),
        }
    }
    Ok(sets)
}

fn parse_seconds(field: &str, name: &str, line: u64) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::format(line, format!("{name}: `{field}` is not a number")))
}

/// Canonical rendering: rows sorted by `(video_id, start_s, class_id, end_s)`.
pub fn render_segments(sets: &[SegmentSet]) -> Result<String> {
    let mut rows: Vec<(&str, &ActionSegment)> = sets
        .iter()
        .flat_map(|s| s.segments.iter().map(move |seg| (s.video_id.as_str(), seg)))
        .collect();
    rows.sort_by(|a, b| {
        a.0.cmp(b.0)
            .then(a.1.start_s.total_cmp(&b.1.start_s))
            .then(a.1.class_id.cmp(&b.1.class_id))
            .then(a.1.end_s.total_cmp(&b.1.end_s))
    });

    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(HEADER).map_err(csv_error)?;
    for (video_id, seg) in rows {
        w.write_record([
            video_id.to_string(),
            seg.class_id.to_string(),
            seg.start_s.to_string(),
            seg.end_s.to_string(),
        ])
        .map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output of UTF-8 fields is UTF-8"))
}
