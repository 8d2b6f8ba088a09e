//! CSV dataset ingestion and matrix files.
//!
//! Matrix files hold one header line followed by one CSV row per matrix row:
//!
//! ```text
//! # p=2,kind=factor,method=mband,class=M
//! 1.0000000000000000e0,0.0000000000000000e0
//! 6.9999999999999996e-1,7.1414284285428498e-1
//! ```
//!
//! Entries carry 17 significant digits, so a write/read cycle is lossless.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{DataSample, DenseMatrix, Labels};

/// Which column, if any, holds class labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LabelColumn {
    Index(usize),
    Last,
    /// Header name; requires a header row.
    Name(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CsvOptions {
    pub has_header: bool,
    pub label_column: Option<LabelColumn>,
}

/// Reads a numeric CSV dataset, keeping the column order.
pub fn ingest_csv(path: impl AsRef<Path>, options: &CsvOptions) -> Result<DataSample> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(&bytes, options)
}

/// Parses dataset bytes (UTF-8, comma separated). Blank lines are skipped.
pub fn parse_dataset(input: &[u8], options: &CsvOptions) -> Result<DataSample> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(options.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);

    let header_width = if options.has_header {
        let h = reader.headers().map_err(csv_error)?;
        Some((
            h.iter().map(str::to_owned).collect::<Vec<_>>(),
            h.position().map_or(1, |p| p.line()),
        ))
    } else {
        None
    };
    let mut width = header_width.as_ref().map(|(h, _)| h.len());

    let mut label_index: Option<usize> = match (&options.label_column, &header_width) {
        (None, _) => None,
        (Some(LabelColumn::Index(i)), _) => Some(*i),
        (Some(LabelColumn::Last), Some((h, _))) => h.len().checked_sub(1),
        (Some(LabelColumn::Last), None) => None, // resolved from the first row
        (Some(LabelColumn::Name(name)), Some((h, _))) => Some(
            h.iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::InvalidConfig(format!("no column named {name:?}")))?,
        ),
        (Some(LabelColumn::Name(name)), None) => {
            return Err(Error::InvalidConfig(format!(
                "label column {name:?} given by name but the file has no header"
            )))
        }
    };

    let mut values = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut rows = 0usize;
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(Error::RaggedRows {
                line,
                expected: w,
                found: record.len(),
            });
        }
        if matches!(options.label_column, Some(LabelColumn::Last)) && label_index.is_none() {
            label_index = w.checked_sub(1);
        }
        if let Some(li) = label_index {
            if li >= w {
                return Err(Error::InvalidConfig(format!(
                    "label column {li} out of range for {w} columns"
                )));
            }
        }
        for (col, field) in record.iter().enumerate() {
            if Some(col) == label_index {
                names.push(field.to_owned());
                continue;
            }
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                column: col + 1,
                message: format!("{field:?} is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    column: col + 1,
                    message: format!("{field:?} is not finite"),
                });
            }
            values.push(v);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::EmptySample);
    }
    let p = values.len() / rows;
    if p == 0 {
        return Err(Error::InvalidConfig("no numeric columns".into()));
    }
    let sample = DataSample::new(DenseMatrix::from_row_major(rows, p, values)?);
    if label_index.is_some() {
        sample.with_labels(Labels::from_names(&names))
    } else {
        Ok(sample)
    }
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io("<csv input>", io),
        csv::ErrorKind::Utf8 { err, .. } => Error::Parse {
            line,
            column: err.field() + 1,
            message: "invalid UTF-8".into(),
        },
        other => Error::Parse {
            line,
            column: 0,
            message: format!("{other:?}"),
        },
    }
}

/// Metadata line of a matrix file.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct MatrixHeader {
    pub p: usize,
    /// What the matrix is, e.g. `factor` or `sigma`.
    pub kind: String,
    pub method: String,
    pub class: String,
}

impl MatrixHeader {
    pub fn new(p: usize, kind: &str, method: &str, class: &str) -> Self {
        MatrixHeader {
            p,
            kind: kind.to_owned(),
            method: method.to_owned(),
            class: class.to_owned(),
        }
    }
}

fn clean(field: &str) -> String {
    field.replace([',', '=', '\n', '\r'], "_")
}

/// Renders the header line plus one row per matrix row.
pub fn format_matrix(m: &DenseMatrix, header: &MatrixHeader) -> String {
    let mut out = format!(
        "# p={},kind={},method={},class={}\n",
        header.p,
        clean(&header.kind),
        clean(&header.method),
        clean(&header.class)
    );
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn emit_matrix(m: &DenseMatrix, header: &MatrixHeader, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(format_matrix(m, header).as_bytes())
        .map_err(|e| Error::io(path, e))
}

/// Parses a matrix file produced by [`format_matrix`].
pub fn parse_matrix(text: &str) -> Result<(MatrixHeader, DenseMatrix)> {
    let mut lines = text.lines().enumerate();
    let (_, first) = lines.next().ok_or(Error::Parse {
        line: 1,
        column: 0,
        message: "empty matrix file".into(),
    })?;
    let meta = first.strip_prefix('#').ok_or(Error::Parse {
        line: 1,
        column: 1,
        message: "missing '#' header line".into(),
    })?;
    let mut header = MatrixHeader::default();
    let mut saw_p = false;
    for (idx, pair) in meta.trim().split(',').enumerate() {
        let (key, value) = pair.split_once('=').ok_or_else(|| Error::Parse {
            line: 1,
            column: idx + 1,
            message: format!("expected key=value, found {pair:?}"),
        })?;
        match key.trim() {
            "p" => {
                header.p = value.trim().parse().map_err(|_| Error::Parse {
                    line: 1,
                    column: idx + 1,
                    message: format!("bad dimension {value:?}"),
                })?;
                saw_p = true;
            }
            "kind" => header.kind = value.to_owned(),
            "method" => header.method = value.to_owned(),
            "class" => header.class = value.to_owned(),
            _ => {}
        }
    }
    if !saw_p {
        return Err(Error::Parse {
            line: 1,
            column: 0,
            message: "header lacks p=".into(),
        });
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .enumerate()
            .map(|(col, f)| {
                f.trim().parse::<f64>().map_err(|_| Error::Parse {
                    line: idx as u64 + 1,
                    column: col + 1,
                    message: format!("{f:?} is not a number"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::RaggedRows {
                    line: idx as u64 + 1,
                    expected: first.len(),
                    found: row.len(),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptySample);
    }
    let m = DenseMatrix::from_rows(&rows)?;
    if m.cols() != header.p {
        return Err(Error::dims(
            format!("{} columns from header", header.p),
            m.cols(),
        ));
    }
    Ok((header, m))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<(MatrixHeader, DenseMatrix)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labelled_dataset_with_header() {
        let text = b"a,b,label\n1,2,R\n3.5,-1e-3,M\n\n0,0,R\n";
        let opts = CsvOptions {
            has_header: true,
            label_column: Some(LabelColumn::Name("label".into())),
        };
        let d = parse_dataset(text, &opts).unwrap();
        assert_eq!((d.n(), d.p()), (3, 2));
        assert_eq!(d.row(1), &[3.5, -1e-3]);
        let l = d.labels().unwrap();
        assert_eq!(l.classes(), &["M".to_string(), "R".to_string()]);
        assert_eq!(l.ids(), &[1, 0, 1]);
    }

    #[test]
    fn last_column_labels_without_header() {
        let opts = CsvOptions {
            has_header: false,
            label_column: Some(LabelColumn::Last),
        };
        let d = parse_dataset(b"0.1,0.2,Move-Forward\n0.3,0.4,Sharp-Right-Turn\n", &opts).unwrap();
        assert_eq!(d.p(), 2);
        assert_eq!(d.labels().unwrap().n_classes(), 2);
    }

    #[test]
    fn ragged_rows_report_line() {
        let err = parse_dataset(b"1,2\n3,4\n5\n", &CsvOptions::default()).unwrap_err();
        assert!(matches!(
            err,
            Error::RaggedRows {
                line: 3,
                expected: 2,
                found: 1
            }
        ));
    }

    #[test]
    fn non_numeric_field_reports_position() {
        let err = parse_dataset(b"1,2\n3,x\n", &CsvOptions::default()).unwrap_err();
        assert!(
            matches!(
                err,
                Error::Parse {
                    line: 2,
                    column: 2,
                    ..
                }
            ),
            "{err:?}"
        );
    }

    #[test]
    fn missing_label_name_is_config_error() {
        let opts = CsvOptions {
            has_header: true,
            label_column: Some(LabelColumn::Name("class".into())),
        };
        assert!(matches!(
            parse_dataset(b"a,b\n1,2\n", &opts),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn two_by_two_matrix_file_has_three_lines() {
        let m = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.7, 0.51f64.sqrt()]]).unwrap();
        let text = format_matrix(&m, &MatrixHeader::new(2, "factor", "mband", "M"));
        assert_eq!(text.lines().count(), 3);
        let (h, back) = parse_matrix(&text).unwrap();
        assert_eq!(h, MatrixHeader::new(2, "factor", "mband", "M"));
        assert_eq!(back, m);
    }

    #[test]
    fn missing_directory_is_io_error() {
        let m = DenseMatrix::identity(2);
        let err = emit_matrix(
            &m,
            &MatrixHeader::new(2, "sigma", "", ""),
            "/nonexistent/dir/m.csv",
        );
        assert!(matches!(err, Err(Error::Io { .. })));
    }
}
