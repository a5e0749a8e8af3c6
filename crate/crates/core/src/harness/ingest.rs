//! Wide-format curve CSV: one row per curve, one column per grid point or
//! coefficient, an optional header row, and optionally one label column.

use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::curves::{Curve, FunctionalSample, GridSpec, Labels, Quadrature, ReprKind};
use crate::error::{Error, Result};

/// How the first row is treated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum HeaderMode {
    /// A header if any cell is non-numeric or, for grid data, if the row is
    /// numeric and strictly increasing (grid abscissae).
    #[default]
    Auto,
    Present,
    Absent,
}

impl FromStr for HeaderMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(HeaderMode::Auto),
            "yes" | "true" => Ok(HeaderMode::Present),
            "no" | "false" => Ok(HeaderMode::Absent),
            other => Err(Error::invalid(format!("unknown header mode `{other}`"))),
        }
    }
}

/// Curves read from one file.
#[derive(Debug, Clone)]
pub struct CurveSet {
    pub curves: Vec<Curve>,
    /// Grid for grid data: the explicit one, else the header abscissae,
    /// else equispaced on [0, 1].
    pub grid: Option<GridSpec>,
    /// Label column values, when a label column was requested.
    pub labels: Option<Vec<String>>,
    /// Rows dropped for having a missing cell.
    pub dropped: usize,
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub sample: FunctionalSample,
    pub dropped: usize,
    /// Label values of the first and second group (file names for pairs).
    pub groups: [String; 2],
}

pub fn ingest_csv(
    path: &Path,
    repr: ReprKind,
    grid: Option<&GridSpec>,
    header: HeaderMode,
) -> Result<CurveSet> {
    read_table(path, repr, grid, header, None)
}

/// One file holding both groups, told apart by the label column
/// (0-based). The first label value met becomes the first group.
pub fn ingest_labelled(
    path: &Path,
    repr: ReprKind,
    grid: Option<&GridSpec>,
    header: HeaderMode,
    label_column: usize,
) -> Result<Ingested> {
    let set = read_table(path, repr, grid, header, Some(label_column))?;
    let labels = set.labels.expect("label column requested");
    let first = labels[0].clone();
    let second = match labels.iter().find(|l| **l != first) {
        Some(l) => l.clone(),
        None => return Err(malformed(path, "label column holds a single group")),
    };
    if let Some(third) = labels.iter().find(|l| **l != first && **l != second) {
        return Err(malformed(
            path,
            format!("label column holds more than two groups ({first}, {second}, {third})"),
        ));
    }
    let is_first = labels.iter().map(|l| *l == first).collect();
    let sample = FunctionalSample::new(set.curves, Labels::new(is_first)?, set.grid)?;
    Ok(Ingested {
        sample,
        dropped: set.dropped,
        groups: [first, second],
    })
}

/// One file per group.
pub fn ingest_pair(
    x_path: &Path,
    y_path: &Path,
    repr: ReprKind,
    grid: Option<&GridSpec>,
    header: HeaderMode,
) -> Result<Ingested> {
    let x = read_table(x_path, repr, grid, header, None)?;
    let y = read_table(y_path, repr, grid, header, None)?;
    if let (Some(gx), Some(gy)) = (&x.grid, &y.grid) {
        if gx.points() != gy.points() {
            return Err(Error::InvalidGrid(format!(
                "{} and {} are on different grids",
                x_path.display(),
                y_path.display()
            )));
        }
    }
    let dropped = x.dropped + y.dropped;
    let grid = x.grid.clone();
    let sample = FunctionalSample::from_groups(x.curves, y.curves, grid)?;
    Ok(Ingested {
        sample,
        dropped,
        groups: [x_path.display().to_string(), y_path.display().to_string()],
    })
}

/// Abscissae from a one-line file, separated by commas or whitespace.
pub fn read_grid_file(path: &Path, quadrature: Quadrature) -> Result<GridSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let points = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| malformed(path, format!("grid value `{s}` is not a number")))
        })
        .collect::<Result<Vec<_>>>()?;
    GridSpec::new(points, quadrature)
}

/// Writes curves in the format [`ingest_csv`] reads back: a header of grid
/// abscissae (or `c1, c2, ...` for coefficients), then one row per curve.
pub fn write_curves_csv<W: Write>(out: W, curves: &[Curve], grid: Option<&GridSpec>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let dim = curves.first().map_or(0, Curve::dim);
    match (curves.first().map(Curve::kind), grid) {
        (Some(ReprKind::Grid), Some(g)) => {
            w.write_record(g.points().iter().map(|t| t.to_string()))?;
        }
        _ => w.write_record((1..=dim).map(|k| format!("c{k}")))?,
    }
    for c in curves {
        w.write_record(c.values().iter().map(|v| v.to_string()))?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

fn malformed(path: &Path, reason: impl Into<String>) -> Error {
    Error::MalformedCsv {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn is_missing(cell: &str) -> bool {
    matches!(cell, "" | "NA" | "na" | "NaN" | "nan")
}

fn read_table(
    path: &Path,
    repr: ReprKind,
    grid: Option<&GridSpec>,
    header: HeaderMode,
    label_column: Option<usize>,
) -> Result<CurveSet> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let records = reader
        .records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| malformed(path, e.to_string()))?;
    let Some(first) = records.first() else {
        return Err(Error::NoUsableRows(path.to_path_buf()));
    };
    let width = first.len();
    if let Some(col) = label_column {
        if col >= width {
            return Err(malformed(
                path,
                format!("label column {col} is out of range for {width} columns"),
            ));
        }
    }
    let values_of = |rec: &csv::StringRecord| -> Vec<String> {
        rec.iter()
            .enumerate()
            .filter(|(j, _)| Some(*j) != label_column)
            .map(|(_, s)| s.to_string())
            .collect()
    };

    let first_cells = values_of(first);
    let parsed: Option<Vec<f64>> = first_cells.iter().map(|s| s.parse().ok()).collect();
    let has_header = match header {
        HeaderMode::Present => true,
        HeaderMode::Absent => false,
        HeaderMode::Auto => match &parsed {
            None => !first_cells.iter().all(|s| is_missing(s) || s.parse::<f64>().is_ok()),
            Some(v) => {
                repr == ReprKind::Grid && v.len() >= 2 && v.windows(2).all(|w| w[0] < w[1])
            }
        },
    };
    let header_grid = match (has_header, repr, parsed) {
        (true, ReprKind::Grid, Some(points)) => Some(points),
        _ => None,
    };

    let mut curves = Vec::new();
    let mut labels = Vec::new();
    let mut dropped = 0;
    for (row, rec) in records.iter().enumerate().skip(usize::from(has_header)) {
        if rec.len() != width {
            return Err(malformed(
                path,
                format!("row {} has {} columns, expected {width}", row + 1, rec.len()),
            ));
        }
        let cells = values_of(rec);
        let label = label_column.map(|c| rec[c].to_string());
        if cells.iter().any(|s| is_missing(s)) || label.as_deref().is_some_and(is_missing) {
            dropped += 1;
            continue;
        }
        let values = cells
            .iter()
            .map(|s| {
                s.parse::<f64>().map_err(|_| {
                    malformed(path, format!("row {}: `{s}` is not a number", row + 1))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        curves.push(match repr {
            ReprKind::Grid => Curve::Grid(values),
            ReprKind::Coeff => Curve::Coeff(values),
        });
        labels.extend(label);
    }
    if curves.is_empty() {
        return Err(Error::NoUsableRows(path.to_path_buf()));
    }

    let dim = curves[0].dim();
    let grid = match repr {
        ReprKind::Coeff => None,
        ReprKind::Grid => Some(match (grid, header_grid) {
            (Some(g), _) => g.clone(),
            (None, Some(points)) => GridSpec::new(points, Quadrature::default())?,
            (None, None) => GridSpec::unit_interval(dim)?,
        }),
    };
    if let Some(g) = &grid {
        if g.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: g.len(),
                actual: dim,
            });
        }
    }
    Ok(CurveSet {
        curves,
        grid,
        labels: label_column.map(|_| labels),
        dropped,
    })
}
