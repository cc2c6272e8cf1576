//! Dataset loading, row normalization and k-fold splitting.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use flate2::read::GzDecoder;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Target column name used by PMLB files.
pub const DEFAULT_TARGET: &str = "target";

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub x: Matrix,
    pub y: Vec<f64>,
    pub feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, x: Matrix, y: Vec<f64>, feature_names: Vec<String>) -> Result<Self> {
        if x.rows() == 0 {
            return Err(Error::EmptyInput("dataset has no rows"));
        }
        if x.rows() != y.len() {
            return Err(Error::LengthMismatch {
                what: "rows of X vs length of y",
                left: x.rows(),
                right: y.len(),
            });
        }
        if feature_names.len() != x.cols() {
            return Err(Error::LengthMismatch {
                what: "feature names vs columns",
                left: feature_names.len(),
                right: x.cols(),
            });
        }
        Ok(Self {
            name: name.into(),
            x,
            y,
            feature_names,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.x.rows()
    }

    pub fn n_features(&self) -> usize {
        self.x.cols()
    }

    /// Copy with every feature row scaled to unit L2 norm; `y` is untouched.
    pub fn normalized(&self) -> Self {
        Self {
            x: l2_normalize_rows(&self.x),
            ..self.clone()
        }
    }

    pub fn subset(&self, indices: &[usize]) -> (Matrix, Vec<f64>) {
        (self.x.select_rows(indices), indices.iter().map(|&i| self.y[i]).collect())
    }
}

/// A parsed delimited table: header plus numeric rows.
#[derive(Clone, Debug)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

fn open_text(path: &Path) -> Result<Box<dyn BufRead>> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::open(path).map_err(io)?;
    let reader: Box<dyn Read> = if path.extension().is_some_and(|e| e == "gz") {
        Box::new(GzDecoder::new(file))
    } else {
        Box::new(file)
    };
    Ok(Box::new(BufReader::new(reader)))
}

/// Reads a tab- or comma-separated numeric table with a header row. The
/// delimiter is tab if the header contains one, comma otherwise. A `.gz`
/// extension is decompressed transparently.
pub fn read_table(path: &Path) -> Result<Table> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut lines = open_text(path)?.lines();
    let header_line = loop {
        match lines.next() {
            None => return Err(Error::EmptyFile { path: path.to_path_buf() }),
            Some(line) => {
                let line = line.map_err(io)?;
                if !line.trim().is_empty() {
                    break line;
                }
            }
        }
    };
    let delim = if header_line.contains('\t') { '\t' } else { ',' };
    let header: Vec<String> = header_line.split(delim).map(|s| s.trim().to_string()).collect();

    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 2;
        let fields: Vec<&str> = line.split(delim).collect();
        if fields.len() != header.len() {
            return Err(Error::RaggedRow {
                path: path.to_path_buf(),
                line: lineno,
                expected: header.len(),
                found: fields.len(),
            });
        }
        let row = fields
            .iter()
            .zip(&header)
            .map(|(f, col)| {
                let f = f.trim();
                f.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::NonNumeric {
                    path: path.to_path_buf(),
                    line: lineno,
                    column: col.clone(),
                    value: f.to_string(),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}

fn dataset_name(path: &Path) -> String {
    let file = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let mut name = file.as_str();
    for ext in [".gz", ".tsv", ".csv", ".txt"] {
        name = name.strip_suffix(ext).unwrap_or(name);
    }
    name.to_string()
}

/// Loads a raw (un-normalized) dataset. Features are all non-target columns
/// in file order.
pub fn load_dataset(path: &Path, target_column: &str) -> Result<Dataset> {
    let table = read_table(path)?;
    let Some(t) = table.header.iter().position(|h| h == target_column) else {
        return Err(Error::MissingTarget {
            path: path.to_path_buf(),
            column: target_column.to_string(),
        });
    };
    if table.header.len() < 2 {
        return Err(Error::NoFeatures {
            path: path.to_path_buf(),
            column: target_column.to_string(),
        });
    }
    if table.rows.is_empty() {
        return Err(Error::NoRows { path: path.to_path_buf() });
    }
    let feature_names: Vec<String> = table
        .header
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != t)
        .map(|(_, h)| h.clone())
        .collect();
    let mut data = Vec::with_capacity(table.rows.len() * feature_names.len());
    let mut y = Vec::with_capacity(table.rows.len());
    for row in &table.rows {
        for (j, v) in row.iter().enumerate() {
            if j == t {
                y.push(*v);
            } else {
                data.push(*v);
            }
        }
    }
    let x = Matrix::new(table.rows.len(), feature_names.len(), data)?;
    Dataset::new(dataset_name(path), x, y, feature_names)
}

/// Loads a feature matrix for prediction. If `target_column` is present it is
/// split off and returned as well; otherwise every column is a feature.
pub fn load_features(path: &Path, target_column: &str) -> Result<(Matrix, Option<Vec<f64>>)> {
    let table = read_table(path)?;
    if table.header.iter().any(|h| h == target_column) {
        let ds = load_dataset(path, target_column)?;
        return Ok((ds.x, Some(ds.y)));
    }
    let x = Matrix::from_rows(&table.rows)?;
    Ok((x, None))
}

/// Scales each row to unit L2 norm; all-zero rows are left as they are.
pub fn l2_normalize_rows(x: &Matrix) -> Matrix {
    let mut out = x.clone();
    for i in 0..out.rows() {
        let row = out.row_mut(i);
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for v in row.iter_mut() {
                *v /= norm;
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldSplit {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Shuffles `0..n_rows` once and cuts it into `k` contiguous blocks whose
/// sizes differ by at most one (the first `n_rows % k` blocks are larger).
/// Fold `i` tests on block `i` and trains on the rest; both index lists are
/// returned sorted.
pub fn kfold<R: Rng + ?Sized>(n_rows: usize, k: usize, rng: &mut R) -> Result<Vec<FoldSplit>> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!("k-fold needs k >= 2, got {k}")));
    }
    if n_rows < k {
        return Err(Error::InvalidConfig(format!("cannot split {n_rows} rows into {k} folds")));
    }
    let mut idx: Vec<usize> = (0..n_rows).collect();
    idx.shuffle(rng);
    let base = n_rows / k;
    let extra = n_rows % k;
    let mut bounds = Vec::with_capacity(k + 1);
    bounds.push(0);
    for i in 0..k {
        bounds.push(bounds[i] + base + usize::from(i < extra));
    }
    Ok((0..k)
        .map(|i| {
            let mut test = idx[bounds[i]..bounds[i + 1]].to_vec();
            let mut train: Vec<usize> = idx[..bounds[i]].iter().chain(&idx[bounds[i + 1]..]).copied().collect();
            test.sort_unstable();
            train.sort_unstable();
            FoldSplit { train, test }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;
    use proptest::prelude::*;
    use std::io::Write;

    fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn loads_tsv() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "toy.tsv", "a\tb\ttarget\n1\t2\t3\n4\t5\t6\n");
        let ds = load_dataset(&p, DEFAULT_TARGET).unwrap();
        assert_eq!(ds.name, "toy");
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.feature_names, vec!["a", "b"]);
        assert_eq!(ds.y, vec![3.0, 6.0]);
        assert_eq!(ds.x.row(1), &[4.0, 5.0]);
    }

    #[test]
    fn loads_csv_with_target_first_and_custom_name() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "toy.csv", "price,a,b\n1.5,2,3\n");
        let ds = load_dataset(&p, "price").unwrap();
        assert_eq!(ds.y, vec![1.5]);
        assert_eq!(ds.x.row(0), &[2.0, 3.0]);
    }

    #[test]
    fn loads_gzip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("z.tsv.gz");
        let mut enc = flate2::write::GzEncoder::new(File::create(&p).unwrap(), flate2::Compression::default());
        enc.write_all(b"x\ttarget\n1\t2\n").unwrap();
        enc.finish().unwrap();
        let ds = load_dataset(&p, DEFAULT_TARGET).unwrap();
        assert_eq!(ds.name, "z");
        assert_eq!(ds.y, vec![2.0]);
    }

    #[test]
    fn load_errors() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("nope.tsv");
        assert!(matches!(load_dataset(&missing, "target"), Err(Error::Io { .. })));
        let only = write(&dir, "only.tsv", "target\n1\n2\n");
        assert!(matches!(load_dataset(&only, "target"), Err(Error::NoFeatures { .. })));
        let empty = write(&dir, "empty.tsv", "");
        assert!(matches!(load_dataset(&empty, "target"), Err(Error::EmptyFile { .. })));
        let no_target = write(&dir, "nt.tsv", "a\tb\n1\t2\n");
        assert!(matches!(load_dataset(&no_target, "target"), Err(Error::MissingTarget { .. })));
        let text = write(&dir, "txt.tsv", "a\ttarget\n1\t2\nfoo\t3\n");
        match load_dataset(&text, "target") {
            Err(Error::NonNumeric { line, column, value, .. }) => {
                assert_eq!((line, column.as_str(), value.as_str()), (3, "a", "foo"));
            }
            other => panic!("{other:?}"),
        }
        let ragged = write(&dir, "r.tsv", "a\ttarget\n1\n");
        assert!(matches!(load_dataset(&ragged, "target"), Err(Error::RaggedRow { .. })));
        let header_only = write(&dir, "h.tsv", "a\ttarget\n");
        assert!(matches!(load_dataset(&header_only, "target"), Err(Error::NoRows { .. })));
    }

    #[test]
    fn features_without_target() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "f.tsv", "a\tb\n1\t2\n");
        let (x, y) = load_features(&p, "target").unwrap();
        assert_eq!(x.row(0), &[1.0, 2.0]);
        assert!(y.is_none());
    }

    #[test]
    fn normalization_examples() {
        let x = Matrix::from_rows(&[[3.0, 4.0], [0.0, 0.0]]).unwrap();
        let n = l2_normalize_rows(&x);
        assert!((n.get(0, 0) - 0.6).abs() < 1e-15 && (n.get(0, 1) - 0.8).abs() < 1e-15);
        assert_eq!(n.row(1), &[0.0, 0.0]);
        let x = Matrix::from_rows(&[[1.0], [-2.0]]).unwrap();
        assert_eq!(l2_normalize_rows(&x).as_slice(), &[1.0, -1.0]);
    }

    #[test]
    fn kfold_sizes() {
        let mut rng = rng_from_seed(0);
        let f = kfold(10, 5, &mut rng).unwrap();
        assert!(f.iter().all(|s| s.test.len() == 2 && s.train.len() == 8));
        let f = kfold(11, 5, &mut rng).unwrap();
        let mut sizes: Vec<usize> = f.iter().map(|s| s.test.len()).collect();
        sizes.sort();
        assert_eq!(sizes, vec![2, 2, 2, 2, 3]);
        assert_eq!(
            kfold(30, 3, &mut rng_from_seed(9)).unwrap(),
            kfold(30, 3, &mut rng_from_seed(9)).unwrap()
        );
        assert!(kfold(3, 5, &mut rng).is_err());
        assert!(kfold(10, 1, &mut rng).is_err());
    }

    proptest! {
        #[test]
        fn normalization_idempotent(rows in prop::collection::vec(prop::collection::vec(-1e6..1e6f64, 3), 1..20)) {
            let x = Matrix::from_rows(&rows).unwrap();
            let once = l2_normalize_rows(&x);
            let twice = l2_normalize_rows(&once);
            for (a, b) in once.as_slice().iter().zip(twice.as_slice()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
            for r in once.iter_rows() {
                let n: f64 = r.iter().map(|v| v * v).sum::<f64>().sqrt();
                prop_assert!(n == 0.0 || (n - 1.0).abs() <= 1e-9);
            }
        }
    }
}
