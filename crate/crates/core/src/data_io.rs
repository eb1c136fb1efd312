//! Labeled delimited-text matrices, sample alignment, and variance filters.
//!
//! File layout: the first line holds a corner cell followed by column IDs;
//! every following line holds a row ID followed by numeric cells. Both `\n`
//! and `\r\n` are accepted; output always uses `\n`. Values are written in the
//! shortest decimal form that parses back to the identical `f64`.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{AimeError, Result};
use crate::matrix::{column_stats, Matrix};

/// Corner cell written in the header row.
pub const CORNER_LABEL: &str = "sample_id";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Delimiter {
    #[default]
    Tab,
    Comma,
}

impl Delimiter {
    pub fn as_char(self) -> char {
        match self {
            Delimiter::Tab => '\t',
            Delimiter::Comma => ',',
        }
    }
}

impl FromStr for Delimiter {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "tab" | "tsv" | "\t" => Ok(Delimiter::Tab),
            "comma" | "csv" | "," => Ok(Delimiter::Comma),
            _ => Err(format!("unknown delimiter '{s}' (expected tab or comma)")),
        }
    }
}

impl std::fmt::Display for Delimiter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Delimiter::Tab => "tab",
            Delimiter::Comma => "comma",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    #[default]
    SamplesInRows,
    FeaturesInRows,
}

impl FromStr for Orientation {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "samples_in_rows" | "samples" => Ok(Orientation::SamplesInRows),
            "features_in_rows" | "features" => Ok(Orientation::FeaturesInRows),
            _ => Err(format!(
                "unknown orientation '{s}' (expected samples_in_rows or features_in_rows)"
            )),
        }
    }
}

impl std::fmt::Display for Orientation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Orientation::SamplesInRows => "samples_in_rows",
            Orientation::FeaturesInRows => "features_in_rows",
        })
    }
}

/// A matrix with samples as rows plus unique sample and feature IDs.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMatrix {
    matrix: Matrix,
    sample_ids: Vec<String>,
    feature_ids: Vec<String>,
}

fn check_unique(ids: &[String], what: &str) -> Result<()> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(AimeError::Validation(format!("duplicate {what} ID '{id}'")));
        }
    }
    Ok(())
}

impl LabeledMatrix {
    pub fn new(matrix: Matrix, sample_ids: Vec<String>, feature_ids: Vec<String>) -> Result<Self> {
        if sample_ids.len() != matrix.rows() || feature_ids.len() != matrix.cols() {
            return Err(AimeError::Validation(format!(
                "{} sample and {} feature IDs for a {}x{} matrix",
                sample_ids.len(),
                feature_ids.len(),
                matrix.rows(),
                matrix.cols()
            )));
        }
        check_unique(&sample_ids, "sample")?;
        check_unique(&feature_ids, "feature")?;
        Ok(Self {
            matrix,
            sample_ids,
            feature_ids,
        })
    }

    /// Labels rows `{sample_prefix}{i}` and columns `{feature_prefix}{j}`.
    pub fn with_generated_ids(matrix: Matrix, sample_prefix: &str, feature_prefix: &str) -> Self {
        let sample_ids = (0..matrix.rows()).map(|i| format!("{sample_prefix}{i}")).collect();
        let feature_ids = (0..matrix.cols()).map(|j| format!("{feature_prefix}{j}")).collect();
        Self {
            matrix,
            sample_ids,
            feature_ids,
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn feature_ids(&self) -> &[String] {
        &self.feature_ids
    }

    pub fn into_parts(self) -> (Matrix, Vec<String>, Vec<String>) {
        (self.matrix, self.sample_ids, self.feature_ids)
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self {
            matrix: self.matrix.select_rows(idx),
            sample_ids: idx.iter().map(|&i| self.sample_ids[i].clone()).collect(),
            feature_ids: self.feature_ids.clone(),
        }
    }

    pub fn select_columns(&self, idx: &[usize]) -> Self {
        Self {
            matrix: self.matrix.select_columns(idx),
            sample_ids: self.sample_ids.clone(),
            feature_ids: idx.iter().map(|&j| self.feature_ids[j].clone()).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            matrix: self.matrix.transpose(),
            sample_ids: self.feature_ids.clone(),
            feature_ids: self.sample_ids.clone(),
        }
    }
}

/// Shortest decimal representation that parses back to the same bits.
pub fn format_value(v: f64) -> String {
    format!("{v:?}")
}

fn parse_value(cell: &str) -> Option<f64> {
    let v: f64 = cell.trim().parse().ok()?;
    v.is_finite().then_some(v)
}

/// Parses a labeled matrix from text.
pub fn parse_labeled(text: &str, delimiter: Delimiter, orientation: Orientation) -> Result<LabeledMatrix> {
    let sep = delimiter.as_char();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    // drop trailing blank lines only
    let mut all: Vec<(usize, &str)> = lines.by_ref().collect();
    while all.last().is_some_and(|(_, l)| l.is_empty()) {
        all.pop();
    }
    let Some(((_, header), body)) = all.split_first() else {
        return Err(AimeError::Parse {
            line: 1,
            column: None,
            msg: "empty file".into(),
        });
    };
    let col_ids: Vec<String> = header.split(sep).skip(1).map(|s| s.trim().to_string()).collect();
    let width = col_ids.len() + 1;
    let mut row_ids = Vec::with_capacity(body.len());
    let mut values = Vec::with_capacity(body.len() * col_ids.len());
    for &(line_no, line) in body {
        let cells: Vec<&str> = line.split(sep).collect();
        if cells.len() != width {
            return Err(AimeError::Parse {
                line: line_no,
                column: None,
                msg: format!("expected {width} fields, found {}", cells.len()),
            });
        }
        row_ids.push(cells[0].trim().to_string());
        for (c, cell) in cells.iter().enumerate().skip(1) {
            let v = parse_value(cell).ok_or_else(|| AimeError::Parse {
                line: line_no,
                column: Some(c + 1),
                msg: format!(
                    "non-numeric value '{}' (row '{}', column '{}')",
                    cell,
                    cells[0].trim(),
                    col_ids[c - 1]
                ),
            })?;
            values.push(v);
        }
    }
    let m = Matrix::from_vec(row_ids.len(), col_ids.len(), values)?;
    let lm = LabeledMatrix::new(m, row_ids, col_ids)?;
    Ok(match orientation {
        Orientation::SamplesInRows => lm,
        Orientation::FeaturesInRows => lm.transpose(),
    })
}

pub fn read_labeled(
    path: impl AsRef<Path>,
    delimiter: Delimiter,
    orientation: Orientation,
) -> Result<LabeledMatrix> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| AimeError::io(path, e))?;
    parse_labeled(&text, delimiter, orientation)
}

/// Renders samples-in-rows text with canonical value formatting.
pub fn labeled_to_string(m: &LabeledMatrix, delimiter: Delimiter) -> String {
    let sep = delimiter.as_char();
    let mut out = String::new();
    out.push_str(CORNER_LABEL);
    for id in &m.feature_ids {
        out.push(sep);
        out.push_str(id);
    }
    out.push('\n');
    for (i, id) in m.sample_ids.iter().enumerate() {
        out.push_str(id);
        for v in m.matrix.row(i) {
            out.push(sep);
            let _ = write!(out, "{}", format_value(*v));
        }
        out.push('\n');
    }
    out
}

pub fn write_labeled(m: &LabeledMatrix, path: impl AsRef<Path>, delimiter: Delimiter) -> Result<()> {
    write_atomic(path.as_ref(), labeled_to_string(m, delimiter).as_bytes())
}

/// Writes to a sibling temp file then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| AimeError::Validation(format!("'{}' is not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    std::fs::write(&tmp, bytes).map_err(|e| AimeError::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        AimeError::io(path, e)
    })
}

/// Restricts both matrices to their shared sample IDs, in `a`'s order.
pub fn align_samples(a: &LabeledMatrix, b: &LabeledMatrix) -> Result<(LabeledMatrix, LabeledMatrix)> {
    let b_index: HashMap<&str, usize> = b
        .sample_ids
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let (ia, ib): (Vec<usize>, Vec<usize>) = a
        .sample_ids
        .iter()
        .enumerate()
        .filter_map(|(i, s)| b_index.get(s.as_str()).map(|&j| (i, j)))
        .unzip();
    if ia.is_empty() {
        let show = |ids: &[String]| ids.iter().take(3).cloned().collect::<Vec<_>>().join(", ");
        return Err(AimeError::Alignment(format!(
            "no shared sample IDs (first side: {}; second side: {})",
            show(&a.sample_ids),
            show(&b.sample_ids)
        )));
    }
    Ok((a.select_rows(&ia), b.select_rows(&ib)))
}

/// Result of a feature filter.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutcome {
    pub matrix: LabeledMatrix,
    /// Indices (into the input) of the surviving features, ascending.
    pub kept: Vec<usize>,
    pub dropped: usize,
    /// Features dropped because the criterion was undefined (CV with ~0 mean).
    pub undefined: usize,
}

/// Means below this magnitude leave the coefficient of variation undefined.
pub const CV_MEAN_FLOOR: f64 = 1e-12;

/// Keeps features whose coefficient of variation `sd/|mean|` exceeds
/// `threshold`. Features with `|mean| < 1e-12` are dropped and counted in
/// [`FilterOutcome::undefined`].
pub fn cv_filter(m: &LabeledMatrix, threshold: f64) -> Result<FilterOutcome> {
    let stats = column_stats(&m.matrix)?;
    let mut kept = Vec::new();
    let mut undefined = 0;
    for (j, (mean, sd)) in stats.means.iter().zip(&stats.sds).enumerate() {
        if mean.abs() < CV_MEAN_FLOOR {
            undefined += 1;
        } else if sd / mean.abs() > threshold {
            kept.push(j);
        }
    }
    Ok(outcome(m, kept, undefined))
}

/// Keeps features whose sample standard deviation exceeds `threshold`.
pub fn sd_filter(m: &LabeledMatrix, threshold: f64) -> Result<FilterOutcome> {
    let stats = column_stats(&m.matrix)?;
    let kept = stats
        .sds
        .iter()
        .enumerate()
        .filter(|(_, sd)| **sd > threshold)
        .map(|(j, _)| j)
        .collect();
    Ok(outcome(m, kept, 0))
}

fn outcome(m: &LabeledMatrix, kept: Vec<usize>, undefined: usize) -> FilterOutcome {
    FilterOutcome {
        matrix: m.select_columns(&kept),
        dropped: m.matrix.cols() - kept.len(),
        kept,
        undefined,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn lm(rows: &[[f64; 2]]) -> LabeledMatrix {
        LabeledMatrix::with_generated_ids(Matrix::from_rows(rows), "s", "f")
    }

    #[test]
    fn two_by_two_round_trip() {
        let text = "sample_id\tg1\tg2\nA\t0.1\t-2.5\nB\t1e-7\t3.0\n";
        let m = parse_labeled(text, Delimiter::Tab, Orientation::SamplesInRows).unwrap();
        assert_eq!(m.matrix()[(1, 0)], 1e-7);
        assert_eq!(labeled_to_string(&m, Delimiter::Tab), text);
    }

    #[test]
    fn features_in_rows_transposes() {
        let text = "id,s1,s2,s3\ng1,1,2,3\ng2,4,5,6\n";
        let by_feat = parse_labeled(text, Delimiter::Comma, Orientation::FeaturesInRows).unwrap();
        let by_samp = parse_labeled(text, Delimiter::Comma, Orientation::SamplesInRows).unwrap();
        assert_eq!(by_feat, by_samp.transpose());
        assert_eq!(by_feat.sample_ids(), ["s1", "s2", "s3"]);
        assert_eq!(by_feat.matrix().row(2), [3.0, 6.0]);
    }

    #[test]
    fn crlf_accepted() {
        let text = "x\ta\r\nr1\t1.5\r\nr2\t2\r\n";
        let m = parse_labeled(text, Delimiter::Tab, Orientation::SamplesInRows).unwrap();
        assert_eq!(m.matrix().column(0), vec![1.5, 2.0]);
    }

    #[test]
    fn na_cell_rejected_with_coordinates() {
        let text = "id\ta\tb\nr1\t1\t2\nr2\tNA\t3\n";
        match parse_labeled(text, Delimiter::Tab, Orientation::SamplesInRows) {
            Err(AimeError::Parse { line, column, msg }) => {
                assert_eq!(line, 3);
                assert_eq!(column, Some(2));
                assert!(msg.contains("r2") && msg.contains("'a'"), "{msg}");
            }
            other => panic!("{other:?}"),
        }
        let nan = "id\ta\nr1\tNaN\nr2\t1\n";
        assert!(parse_labeled(nan, Delimiter::Tab, Orientation::SamplesInRows).is_err());
    }

    #[test]
    fn ragged_row_rejected() {
        let text = "id\ta\tb\nr1\t1\t2\nr2\t3\n";
        assert!(matches!(
            parse_labeled(text, Delimiter::Tab, Orientation::SamplesInRows),
            Err(AimeError::Parse { line: 3, column: None, .. })
        ));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let text = "id\ta\ta\nr1\t1\t2\n";
        assert!(matches!(
            parse_labeled(text, Delimiter::Tab, Orientation::SamplesInRows),
            Err(AimeError::Validation(_))
        ));
        let text = "id\ta\nr1\t1\nr1\t2\n";
        assert!(matches!(
            parse_labeled(text, Delimiter::Tab, Orientation::SamplesInRows),
            Err(AimeError::Validation(_))
        ));
    }

    fn ids(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn align_reorders_to_first() {
        let a = LabeledMatrix::new(Matrix::from_rows(&[[1.0], [2.0], [3.0]]), ids(&["x", "y", "z"]), ids(&["f"])).unwrap();
        let b = LabeledMatrix::new(Matrix::from_rows(&[[30.0], [10.0], [20.0]]), ids(&["z", "x", "y"]), ids(&["g"])).unwrap();
        let (a2, b2) = align_samples(&a, &b).unwrap();
        assert_eq!(a2, a);
        assert_eq!(b2.sample_ids(), a.sample_ids());
        assert_eq!(b2.matrix().column(0), vec![10.0, 20.0, 30.0]);
        // idempotent
        let (a3, b3) = align_samples(&a2, &b2).unwrap();
        assert_eq!((a3, b3), (a2, b2));
    }

    #[test]
    fn align_partial_overlap() {
        let a = LabeledMatrix::new(Matrix::from_fn(5, 1, |i, _| i as f64), ids(&["a", "b", "c", "d", "e"]), ids(&["f"])).unwrap();
        let b = LabeledMatrix::new(Matrix::from_fn(4, 1, |i, _| 10.0 + i as f64), ids(&["e", "q", "b", "d"]), ids(&["g"])).unwrap();
        let (a2, b2) = align_samples(&a, &b).unwrap();
        assert_eq!(a2.sample_ids(), ["b", "d", "e"]);
        assert_eq!(b2.sample_ids(), ["b", "d", "e"]);
        assert_eq!(b2.matrix().column(0), vec![12.0, 13.0, 10.0]);
    }

    #[test]
    fn align_disjoint_fails() {
        let a = LabeledMatrix::new(Matrix::zeros(2, 1), ids(&["a", "b"]), ids(&["f"])).unwrap();
        let b = LabeledMatrix::new(Matrix::zeros(2, 1), ids(&["c", "d"]), ids(&["f"])).unwrap();
        let err = align_samples(&a, &b).unwrap_err();
        assert!(matches!(err, AimeError::Alignment(_)));
        let msg = err.to_string();
        assert!(msg.contains('a') && msg.contains('c'));
    }

    #[test]
    fn cv_filter_cases() {
        // f0: constant 10 -> CV 0; f1: mean 10, sd 1 -> CV 0.1
        let m = lm(&[[10.0, 9.0], [10.0, 10.0], [10.0, 11.0]]);
        let out = cv_filter(&m, 0.05).unwrap();
        assert_eq!(out.kept, vec![1]);
        assert_eq!(out.dropped, 1);
        assert_eq!(out.matrix.feature_ids(), ["f1"]);
    }

    #[test]
    fn cv_filter_zero_mean_counted() {
        let m = lm(&[[-1.0, 1.0], [1.0, 2.0]]);
        let out = cv_filter(&m, 0.05).unwrap();
        assert_eq!(out.kept, vec![1]);
        assert_eq!(out.undefined, 1);
    }

    #[test]
    fn sd_filter_cases() {
        let m = lm(&[[0.0, 3.0], [2.5, 3.0]]);
        let out = sd_filter(&m, 1.25).unwrap();
        assert_eq!(out.kept, vec![0]);
        let out = sd_filter(&m, 1e-9).unwrap();
        assert_eq!(out.kept, vec![0]);
    }

    #[test]
    fn filters_need_two_rows() {
        let m = LabeledMatrix::with_generated_ids(Matrix::zeros(1, 3), "s", "f");
        assert!(cv_filter(&m, 0.05).is_err());
        assert!(sd_filter(&m, 1.0).is_err());
    }

    #[test]
    fn filters_match_loop_oracle() {
        let mut rng = RngStream::new(21, 0);
        let n = 12;
        let mat = Matrix::from_fn(n, 100, |_, j| {
            let scale = (j % 7) as f64 * 0.4;
            5.0 + (j % 3) as f64 + scale * rng.normal()
        });
        let m = LabeledMatrix::with_generated_ids(mat.clone(), "s", "g");
        let mut cv_expect = Vec::new();
        let mut sd_expect = Vec::new();
        for j in 0..100 {
            let col = mat.column(j);
            let mean = col.iter().sum::<f64>() / n as f64;
            let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
            if sd / mean.abs() > 0.05 {
                cv_expect.push(j);
            }
            if sd > 1.25 {
                sd_expect.push(j);
            }
        }
        assert_eq!(cv_filter(&m, 0.05).unwrap().kept, cv_expect);
        assert_eq!(sd_filter(&m, 1.25).unwrap().kept, sd_expect);
    }
}
