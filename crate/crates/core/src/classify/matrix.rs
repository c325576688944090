use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureVector;

/// Rectangular table of per-network features with optional labels `1..=c`.
///
/// Missing values are stored as NaN until [`FeatureMatrix::impute`] fills
/// them; classifiers reject matrices that still contain them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    names: Vec<String>,
    ids: Vec<String>,
    data: Vec<f64>,
    labels: Option<Vec<u32>>,
    n_classes: usize,
}

impl FeatureMatrix {
    pub fn new(names: Vec<String>, ids: Vec<String>, rows: Vec<Vec<f64>>, labels: Option<Vec<u32>>) -> Result<Self> {
        let p = names.len();
        if rows.len() != ids.len() {
            return Err(Error::Shape(format!("{} rows but {} ids", rows.len(), ids.len())));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != p) {
            return Err(Error::Shape(format!("row {bad} has {} values, expected {p}", rows[bad].len())));
        }
        let mut sorted = names.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Shape("feature names must be unique".into()));
        }
        if rows.iter().flatten().any(|x| x.is_infinite()) {
            return Err(Error::Domain("feature values must be finite or missing".into()));
        }
        let n_classes = match &labels {
            Some(l) => {
                if l.len() != rows.len() {
                    return Err(Error::Shape(format!("{} labels for {} rows", l.len(), rows.len())));
                }
                if l.contains(&0) {
                    return Err(Error::Domain("class labels start at 1".into()));
                }
                l.iter().copied().max().unwrap_or(0) as usize
            }
            None => 0,
        };
        Ok(Self {
            names,
            ids,
            data: rows.concat(),
            labels,
            n_classes,
        })
    }

    /// Unlabeled matrix with generated ids, mostly for tests and PCA inputs.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        let names = (1..=p).map(|j| format!("x{j}")).collect();
        let ids = (0..rows.len()).map(|i| i.to_string()).collect();
        Self::new(names, ids, rows, None)
    }

    pub fn from_labeled_rows(rows: Vec<Vec<f64>>, labels: Vec<u32>) -> Result<Self> {
        Self::from_rows(rows)?.with_labels(labels)
    }

    /// Assembles vectors that share one feature schema.
    pub fn from_vectors(vectors: &[FeatureVector], labels: Option<Vec<u32>>) -> Result<Self> {
        let names = vectors.first().map(|v| v.names.clone()).unwrap_or_default();
        if vectors.iter().any(|v| v.names != names) {
            return Err(Error::Shape("feature vectors disagree on feature names".into()));
        }
        let ids = vectors.iter().map(|v| v.graph_id.clone()).collect();
        let rows = vectors.iter().map(|v| v.values.clone()).collect();
        Self::new(names, ids, rows, labels)
    }

    pub fn with_labels(self, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != self.n_rows() {
            return Err(Error::Shape(format!("{} labels for {} rows", labels.len(), self.n_rows())));
        }
        if labels.contains(&0) {
            return Err(Error::Domain("class labels start at 1".into()));
        }
        let max = labels.iter().copied().max().unwrap_or(0) as usize;
        Ok(Self {
            n_classes: self.n_classes.max(max),
            labels: Some(labels),
            ..self
        })
    }

    /// Declares the number of classes when some never occur in this matrix
    /// (e.g. a cross-validation training fold).
    pub fn with_n_classes(mut self, n_classes: usize) -> Self {
        self.n_classes = self.n_classes.max(n_classes);
        self
    }

    pub fn n_rows(&self) -> usize {
        self.ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.n_cols();
        &self.data[i * p..(i + 1) * p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n_rows()).map(move |i| self.row(i))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols() + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    pub fn require_labels(&self) -> Result<&[u32]> {
        self.labels().ok_or_else(|| Error::Config("this operation needs class labels".into()))
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn has_missing(&self) -> bool {
        self.data.iter().any(|x| x.is_nan())
    }

    pub(crate) fn require_complete(&self) -> Result<()> {
        if self.n_rows() == 0 {
            return Err(Error::Param("feature matrix has no rows".into()));
        }
        if self.has_missing() {
            return Err(Error::Domain("feature matrix has missing values; impute first".into()));
        }
        Ok(())
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            names: self.names.clone(),
            ids: rows.iter().map(|&i| self.ids[i].clone()).collect(),
            data: rows.iter().flat_map(|&i| self.row(i).iter().copied()).collect(),
            labels: self.labels.as_ref().map(|l| rows.iter().map(|&i| l[i]).collect()),
            n_classes: self.n_classes,
        }
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        Self {
            names: cols.iter().map(|&j| self.names[j].clone()).collect(),
            ids: self.ids.clone(),
            data: self.rows().flat_map(|r| cols.iter().map(move |&j| r[j])).collect(),
            labels: self.labels.clone(),
            n_classes: self.n_classes,
        }
    }

    /// Appends columns given column-major.
    pub fn append_columns(&self, names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if columns.iter().any(|c| c.len() != self.n_rows()) || names.len() != columns.len() {
            return Err(Error::Shape("appended columns do not match the matrix".into()));
        }
        let mut all_names = self.names.clone();
        all_names.extend(names);
        let rows = (0..self.n_rows())
            .map(|i| {
                let mut r = self.row(i).to_vec();
                r.extend(columns.iter().map(|c| c[i]));
                r
            })
            .collect();
        Ok(Self::new(all_names, self.ids.clone(), rows, self.labels.clone())?.with_n_classes(self.n_classes))
    }

    /// Per-column median over `rows`, skipping missing values. Columns with
    /// no observed value get 0.
    pub fn column_medians(&self, rows: &[usize]) -> Vec<f64> {
        (0..self.n_cols())
            .map(|j| {
                let mut v: Vec<f64> = rows.iter().map(|&i| self.get(i, j)).filter(|x| !x.is_nan()).collect();
                median(&mut v).unwrap_or(0.0)
            })
            .collect()
    }

    /// Replaces missing values with the given per-column fill values.
    pub fn impute(&self, fill: &[f64]) -> Self {
        let p = self.n_cols();
        let mut out = self.clone();
        for (k, x) in out.data.iter_mut().enumerate() {
            if x.is_nan() {
                *x = fill[k % p];
            }
        }
        out
    }

    /// CSV with header `graph_id,label,<features...>`; missing values are `NA`
    /// and an unlabeled matrix leaves the label column empty.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["graph_id".to_owned(), "label".to_owned()];
        header.extend(self.names.iter().cloned());
        out.write_record(&header)?;
        for i in 0..self.n_rows() {
            let mut record = vec![
                self.ids[i].clone(),
                self.labels.as_ref().map_or_else(String::new, |l| l[i].to_string()),
            ];
            record.extend(self.row(i).iter().map(|x| if x.is_nan() { "NA".to_owned() } else { x.to_string() }));
            out.write_record(&record)?;
        }
        out.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let header = reader.headers()?.clone();
        if header.len() < 2 || &header[0] != "graph_id" || &header[1] != "label" {
            return Err(Error::Parse {
                line: 1,
                message: "expected header graph_id,label,<features...>".into(),
            });
        }
        let names: Vec<String> = header.iter().skip(2).map(str::to_owned).collect();
        let (mut ids, mut rows, mut labels) = (Vec::new(), Vec::new(), Vec::new());
        for (i, record) in reader.records().enumerate() {
            let line = i + 2;
            let record = record.map_err(|e| Error::Parse { line, message: e.to_string() })?;
            ids.push(record[0].to_owned());
            labels.push(if record[1].is_empty() {
                None
            } else {
                Some(record[1].parse::<u32>().map_err(|_| Error::Parse {
                    line,
                    message: format!("label {:?} is not a positive integer", &record[1]),
                })?)
            });
            let row = record
                .iter()
                .skip(2)
                .map(|cell| {
                    if cell.eq_ignore_ascii_case("na") || cell.is_empty() {
                        Ok(f64::NAN)
                    } else {
                        cell.parse::<f64>().map_err(|_| Error::Parse {
                            line,
                            message: format!("{cell:?} is not a number"),
                        })
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        let labels = if labels.iter().all(Option::is_some) && !labels.is_empty() {
            Some(labels.into_iter().map(Option::unwrap).collect())
        } else if labels.iter().all(Option::is_none) {
            None
        } else {
            return Err(Error::Format("either every row or no row may carry a label".into()));
        };
        Self::new(names, ids, rows, labels)
    }
}

pub(crate) fn median(v: &mut [f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians_skip_missing_and_impute() {
        let m = FeatureMatrix::from_rows(vec![vec![1.0, f64::NAN], vec![3.0, 4.0], vec![f64::NAN, f64::NAN], vec![10.0, 6.0]]).unwrap();
        assert!(m.has_missing());
        let med = m.column_medians(&[0, 1, 2]);
        assert_eq!(med, vec![2.0, 4.0]);
        let filled = m.impute(&med);
        assert!(!filled.has_missing());
        assert_eq!(filled.row(2), &[2.0, 4.0]);
        assert_eq!(filled.row(0), &[1.0, 4.0]);
    }

    #[test]
    fn csv_roundtrip_keeps_missing() {
        let m = FeatureMatrix::new(
            vec!["a".into(), "b".into()],
            vec!["g1".into(), "g2".into()],
            vec![vec![1.5, f64::NAN], vec![-2.0, 0.25]],
            Some(vec![2, 1]),
        )
        .unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "graph_id,label,a,b\ng1,2,1.5,NA\ng2,1,-2,0.25\n");
        let back = FeatureMatrix::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.labels(), Some(&[2, 1][..]));
        assert!(back.get(0, 1).is_nan());
        assert_eq!(back.get(1, 1), 0.25);
    }

    #[test]
    fn shape_errors() {
        assert!(FeatureMatrix::from_rows(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(FeatureMatrix::from_labeled_rows(vec![vec![1.0]], vec![0]).is_err());
        assert!(FeatureMatrix::new(vec!["a".into(), "a".into()], vec!["g".into()], vec![vec![1.0, 2.0]], None).is_err());
    }

    #[test]
    fn row_and_column_selection() {
        let m = FeatureMatrix::from_labeled_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]], vec![1, 2, 3]).unwrap();
        let s = m.select_rows(&[2, 0]);
        assert_eq!(s.row(0), &[5.0, 6.0]);
        assert_eq!(s.labels(), Some(&[3, 1][..]));
        assert_eq!(s.n_classes(), 3);
        let c = m.select_columns(&[1]);
        assert_eq!(c.column(0), vec![2.0, 4.0, 6.0]);
    }
}
