//! CSV point-cloud ingestion.
//!
//! One point per row, comma-separated reals, optional header row. Dynamic
//! clouds carry a leading `t` column; rows sharing a `t` form one frame.

use std::io::Read;
use std::path::Path;

use flamelets_core::geometry::Frame;
use flamelets_core::{DynamicPointCloud, PointCloud};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum IngestMode {
    Static,
    Dynamic,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Ingested {
    Static(PointCloud),
    Dynamic(DynamicPointCloud),
}

pub fn ingest_csv(path: &Path, mode: IngestMode) -> CliResult<Ingested> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    parse_csv(file, path, mode, false)
}

pub fn read_points(path: &Path) -> CliResult<PointCloud> {
    match ingest_csv(path, IngestMode::Static)? {
        Ingested::Static(c) => Ok(c),
        Ingested::Dynamic(_) => unreachable!("static mode"),
    }
}

/// Dynamic cloud from `path`; with `rescale_time` the frame times are mapped
/// affinely onto `[0, 1]`, otherwise they must already lie there.
pub fn read_dynamic(path: &Path, rescale_time: bool) -> CliResult<DynamicPointCloud> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    match parse_csv(file, path, IngestMode::Dynamic, rescale_time)? {
        Ingested::Dynamic(c) => Ok(c),
        Ingested::Static(_) => unreachable!("dynamic mode"),
    }
}

/// Parses CSV text from any reader; `path` only labels diagnostics.
pub fn parse_csv(
    reader: impl Read,
    path: &Path,
    mode: IngestMode,
    rescale_time: bool,
) -> CliResult<Ingested> {
    let rows = numeric_rows(reader, path)?;
    let width = rows[0].1.len();
    match mode {
        IngestMode::Static => {
            let coords = rows.into_iter().flat_map(|(_, r)| r).collect();
            Ok(Ingested::Static(PointCloud::new(coords, width)?))
        }
        IngestMode::Dynamic => {
            if width < 2 {
                return Err(CliError::Parse {
                    path: path.into(),
                    line: rows[0].0,
                    msg: "dynamic rows need a time column followed by coordinates".into(),
                });
            }
            let mut rows: Vec<Vec<f64>> = rows.into_iter().map(|(_, r)| r).collect();
            rows.sort_by(|a, b| a[0].total_cmp(&b[0]));
            if rescale_time {
                let (t0, t1) = (rows[0][0], rows[rows.len() - 1][0]);
                if t1 > t0 {
                    for r in &mut rows {
                        r[0] = (r[0] - t0) / (t1 - t0);
                    }
                }
            }
            let mut frames: Vec<(f64, Vec<f64>)> = Vec::new();
            for r in rows {
                match frames.last_mut() {
                    Some((t, coords)) if *t == r[0] => coords.extend_from_slice(&r[1..]),
                    _ => frames.push((r[0], r[1..].to_vec())),
                }
            }
            let frames = frames
                .into_iter()
                .map(|(t, coords)| {
                    Ok(Frame {
                        t,
                        cloud: PointCloud::new(coords, width - 1)?,
                    })
                })
                .collect::<flamelets_core::Result<Vec<_>>>()?;
            Ok(Ingested::Dynamic(DynamicPointCloud::new(frames)?))
        }
    }
}

/// Data rows with their 1-based line numbers. A first row that does not
/// parse as numbers is taken to be a header.
fn numeric_rows(reader: impl Read, path: &Path) -> CliResult<Vec<(u64, Vec<f64>)>> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows: Vec<(u64, Vec<f64>)> = Vec::new();
    let mut header_width = None;
    for (i, record) in csv.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::Parse {
                path: path.into(),
                line,
                msg: e.to_string(),
            }
        })?;
        let line = record.position().map_or(i as u64 + 1, |p| p.line());
        let parse_err = |msg: String| CliError::Parse {
            path: path.into(),
            line,
            msg,
        };
        let parsed: Result<Vec<f64>, String> = record
            .iter()
            .enumerate()
            .map(|(col, field)| match field.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                Ok(_) => Err(format!("column {}: non-finite value {field:?}", col + 1)),
                Err(_) => Err(format!("column {}: non-numeric field {field:?}", col + 1)),
            })
            .collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if i == 0 => {
                header_width = Some(record.len());
                continue;
            }
            Err(msg) => return Err(parse_err(msg)),
        };
        let expected = rows.first().map(|(_, r)| r.len()).or(header_width);
        if let Some(expected) = expected {
            if values.len() != expected {
                return Err(parse_err(format!(
                    "expected {expected} fields, found {}",
                    values.len()
                )));
            }
        }
        rows.push((line, values));
    }
    if rows.is_empty() {
        return Err(CliError::format(path, "no data rows"));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, mode: IngestMode) -> CliResult<Ingested> {
        parse_csv(text.as_bytes(), Path::new("test.csv"), mode, false)
    }

    #[test]
    fn static_rows() {
        let Ingested::Static(c) = parse("0,0\n1,1", IngestMode::Static).unwrap() else {
            panic!("static expected")
        };
        assert_eq!((c.len(), c.dim()), (2, 2));
        assert_eq!(c.point(1), &[1.0, 1.0]);
    }

    #[test]
    fn header_is_skipped() {
        let Ingested::Static(c) = parse("x,y\n0,0\n1,2\n", IngestMode::Static).unwrap() else {
            panic!("static expected")
        };
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn dynamic_groups_by_time() {
        let Ingested::Dynamic(d) = parse("0.0,1\n0.0,2\n1.0,3", IngestMode::Dynamic).unwrap()
        else {
            panic!("dynamic expected")
        };
        assert_eq!(d.frames().len(), 2);
        assert_eq!(d.frames()[0].cloud.len(), 2);
        assert_eq!(d.frames()[1].cloud.point(0), &[3.0]);
    }

    #[test]
    fn rescaled_times() {
        let d = parse_csv(
            "10,1\n20,2\n30,3".as_bytes(),
            Path::new("t.csv"),
            IngestMode::Dynamic,
            true,
        )
        .unwrap();
        let Ingested::Dynamic(d) = d else {
            panic!("dynamic expected")
        };
        assert_eq!(d.times(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        match parse("0,0\n1,1,1\n", IngestMode::Static) {
            Err(CliError::Parse { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match parse("0,0\n1,abc\n", IngestMode::Static) {
            Err(CliError::Parse { line: 2, msg, .. }) => assert!(msg.contains("non-numeric")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse("", IngestMode::Static),
            Err(CliError::Format { .. })
        ));
        assert!(matches!(
            parse("x,y\n", IngestMode::Static),
            Err(CliError::Format { .. })
        ));
    }
}
