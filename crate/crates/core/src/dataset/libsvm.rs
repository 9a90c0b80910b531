use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;

use super::{Dataset, DatasetError, LabelKind};

/// Options controlling how a LIBSVM stream is turned into a [`Dataset`].
#[derive(Debug, Clone, Copy)]
pub struct ParseOptions {
    /// Feature dimension; defaults to the largest index seen.
    pub dim: Option<usize>,
    pub label_kind: LabelKind,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self {
            dim: None,
            label_kind: LabelKind::Binary01,
        }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> DatasetError {
    DatasetError::Parse {
        line,
        message: message.into(),
    }
}

/// Parses `label idx:val idx:val ...` lines with 1-based, strictly increasing
/// feature indices. Blank lines and `#` comments are skipped.
pub fn parse_libsvm<R: BufRead>(reader: R, opts: ParseOptions) -> Result<Dataset, DatasetError> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut lines_of_rows = Vec::new();
    let mut max_index = 0usize;

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let content = match line.find('#') {
            Some(pos) => &line[..pos],
            None => &line[..],
        };
        let mut tokens = content.split_whitespace();
        let Some(label_tok) = tokens.next() else {
            continue;
        };
        let label: f64 = label_tok
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad label {label_tok:?}")))?;
        if !label.is_finite() {
            return Err(parse_err(lineno, "non-finite label"));
        }
        let mut row = Vec::new();
        let mut last = 0usize;
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(lineno, format!("malformed token {tok:?}")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad feature index {idx:?}")))?;
            let val: f64 = val
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad feature value {val:?}")))?;
            if idx == 0 {
                return Err(parse_err(lineno, "feature indices are 1-based"));
            }
            if idx <= last {
                return Err(parse_err(
                    lineno,
                    format!("feature index {idx} does not increase (previous {last})"),
                ));
            }
            if !val.is_finite() {
                return Err(parse_err(
                    lineno,
                    format!("non-finite value at index {idx}"),
                ));
            }
            last = idx;
            row.push((idx - 1, val));
        }
        max_index = max_index.max(last);
        rows.push(row);
        labels.push(label);
        lines_of_rows.push(lineno);
    }

    let dim = match opts.dim {
        Some(d) if d < max_index => {
            return Err(parse_err(
                0,
                format!("dimension override {d} below largest index {max_index}"),
            ));
        }
        Some(d) => d,
        None => max_index,
    };
    let labels = normalize_labels(labels, opts.label_kind, &lines_of_rows)?;
    Dataset::from_rows(dim, rows, labels, opts.label_kind)
}

fn normalize_labels(
    labels: Vec<f64>,
    kind: LabelKind,
    lines: &[usize],
) -> Result<Vec<f64>, DatasetError> {
    if kind == LabelKind::Real {
        return Ok(labels);
    }
    let all_in = |set: &[f64]| labels.iter().all(|y| set.contains(y));
    if all_in(&[0.0, 1.0]) {
        Ok(labels)
    } else if all_in(&[-1.0, 1.0]) {
        Ok(labels
            .into_iter()
            .map(|y| if y > 0.0 { 1.0 } else { 0.0 })
            .collect())
    } else if all_in(&[1.0, 2.0]) {
        Ok(labels.into_iter().map(|y| y - 1.0).collect())
    } else {
        let pos = labels
            .iter()
            .position(|y| ![-1.0, 0.0, 1.0, 2.0].contains(y))
            .unwrap_or(0);
        Err(parse_err(
            lines.get(pos).copied().unwrap_or(0),
            "labels are not a recognized binary encoding ({0,1}, {-1,+1} or {1,2})",
        ))
    }
}

/// Reads a LIBSVM file, honouring an optional `<path>.meta` sidecar of
/// `key=value` lines (`d`, `label_kind`). Explicit `opts` win over the sidecar
/// only where the sidecar is silent.
pub fn load_libsvm(path: &Path, opts: ParseOptions) -> Result<Dataset, DatasetError> {
    let mut opts = opts;
    let mut meta = path.as_os_str().to_owned();
    meta.push(".meta");
    let meta = Path::new(&meta);
    if meta.exists() {
        for line in fs::read_to_string(meta)?.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                DatasetError::Metadata(format!("expected key=value, got {line:?}"))
            })?;
            match k.trim() {
                "d" => {
                    let d = v
                        .trim()
                        .parse()
                        .map_err(|_| DatasetError::Metadata(format!("bad d {v:?}")))?;
                    opts.dim = Some(d);
                }
                "label_kind" => opts.label_kind = v.parse()?,
                other => return Err(DatasetError::Metadata(format!("unknown key {other:?}"))),
            }
        }
    }
    let file = fs::File::open(path)?;
    parse_libsvm(std::io::BufReader::new(file), opts)
}

/// Writes the dataset back in LIBSVM format with 1-based indices and
/// round-trip exact numbers.
pub fn write_libsvm<W: Write>(ds: &Dataset, mut out: W) -> std::io::Result<()> {
    for i in 0..ds.len() {
        write!(out, "{:e}", ds.labels()[i])?;
        let (idx, val) = ds.row(i);
        for (j, v) in idx.iter().zip(val) {
            write!(out, " {}:{:e}", j + 1, v)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Dataset, DatasetError> {
        parse_libsvm(text.as_bytes(), ParseOptions::default())
    }

    #[test]
    fn single_line() {
        let ds = parse("+1 2:0.5 4:-1.25\n").unwrap();
        assert_eq!((ds.len(), ds.dim()), (1, 4));
        assert_eq!(ds.row(0), (&[1usize, 3][..], &[0.5, -1.25][..]));
        assert_eq!(ds.labels(), &[1.0]);
    }

    #[test]
    fn rejects_decreasing_index() {
        match parse("1 3:1 2:1") {
            Err(DatasetError::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn reports_line_of_bad_value() {
        match parse("1 1:1\n\n-1 1:x\n") {
            Err(DatasetError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn skips_comments_and_blank_lines() {
        let ds = parse("# header\n\n-1 1:2 # trailing\n+1 3:1\n").unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.dim(), 3);
        assert_eq!(ds.labels(), &[0.0, 1.0]);
    }

    #[test]
    fn covtype_labels_map_to_binary() {
        let ds = parse("1 1:1\n2 1:1\n").unwrap();
        assert_eq!(ds.labels(), &[0.0, 1.0]);
    }

    #[test]
    fn real_labels_pass_through() {
        let opts = ParseOptions {
            dim: Some(5),
            label_kind: LabelKind::Real,
        };
        let ds = parse_libsvm("3.25 1:1\n".as_bytes(), opts).unwrap();
        assert_eq!(ds.labels(), &[3.25]);
        assert_eq!(ds.dim(), 5);
    }

    #[test]
    fn malformed_token() {
        assert!(matches!(
            parse("1 2=3"),
            Err(DatasetError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse("1 0:3"),
            Err(DatasetError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn unknown_binary_encoding_is_an_error() {
        assert!(parse("3 1:1\n").is_err());
    }

    #[test]
    fn empty_input() {
        let ds = parse("").unwrap();
        assert_eq!((ds.len(), ds.dim()), (0, 0));
    }
}
