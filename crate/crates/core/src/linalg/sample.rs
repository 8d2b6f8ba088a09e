use std::collections::BTreeSet;

use crate::error::{Error, Result};

use super::DenseMatrix;

/// Class labels: sorted class names plus a class index per row.
///
/// Class ids are positions in the sorted name list, so "smallest class id"
/// means lexicographically first name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labels {
    classes: Vec<String>,
    ids: Vec<usize>,
}

impl Labels {
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Self {
        let classes: Vec<String> = names
            .iter()
            .map(|s| s.as_ref().to_owned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let ids = names
            .iter()
            .map(|s| {
                classes
                    .binary_search_by(|c| c.as_str().cmp(s.as_ref()))
                    .unwrap()
            })
            .collect();
        Labels { classes, ids }
    }

    pub fn new(classes: Vec<String>, ids: Vec<usize>) -> Result<Self> {
        if let Some(&bad) = ids.iter().find(|&&id| id >= classes.len()) {
            return Err(Error::LabelMismatch(format!("class id {bad}")));
        }
        Ok(Labels { classes, ids })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn class_name(&self, id: usize) -> &str {
        &self.classes[id]
    }

    fn select(&self, rows: &[usize]) -> Labels {
        Labels {
            classes: self.classes.clone(),
            ids: rows.iter().map(|&r| self.ids[r]).collect(),
        }
    }
}

/// `n x p` observations, optionally labelled.
#[derive(Clone, Debug, PartialEq)]
pub struct DataSample {
    values: DenseMatrix,
    labels: Option<Labels>,
    standardized: bool,
}

impl DataSample {
    pub fn new(values: DenseMatrix) -> Self {
        DataSample {
            values,
            labels: None,
            standardized: false,
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptySample);
        }
        Ok(Self::new(DenseMatrix::from_rows(rows)?))
    }

    pub fn with_labels(mut self, labels: Labels) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(Error::dims(format!("{} labels", self.n()), labels.len()));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.values.rows()
    }

    pub fn p(&self) -> usize {
        self.values.cols()
    }

    pub fn values(&self) -> &DenseMatrix {
        &self.values
    }

    pub fn labels(&self) -> Option<&Labels> {
        self.labels.as_ref()
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.values.row(i)
    }

    /// Rows at the given indices, in order. Labels follow; the standardized
    /// flag does not, since a subset is generally not standardized.
    pub fn select_rows(&self, rows: &[usize]) -> Result<DataSample> {
        if rows.is_empty() {
            return Err(Error::EmptySample);
        }
        let p = self.p();
        let mut data = Vec::with_capacity(rows.len() * p);
        for &r in rows {
            data.extend_from_slice(self.values.row(r));
        }
        Ok(DataSample {
            values: DenseMatrix::from_row_major(rows.len(), p, data)?,
            labels: self.labels.as_ref().map(|l| l.select(rows)),
            standardized: false,
        })
    }

    pub fn column_means(&self) -> Vec<f64> {
        let n = self.n() as f64;
        let mut means = vec![0.0; self.p()];
        for i in 0..self.n() {
            for (m, v) in means.iter_mut().zip(self.values.row(i)) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        means
    }

    /// Subtracts `offset` from every row.
    pub fn shifted(&self, offset: &[f64]) -> Result<DataSample> {
        if offset.len() != self.p() {
            return Err(Error::dims(
                format!("offset of length {}", self.p()),
                offset.len(),
            ));
        }
        let mut out = self.clone();
        let p = self.p();
        for row in out.values.as_mut_slice().chunks_mut(p) {
            for (v, m) in row.iter_mut().zip(offset) {
                *v -= m;
            }
        }
        out.standardized = false;
        Ok(out)
    }

    /// Columns centered at their sample means.
    pub fn centered(&self) -> DataSample {
        self.shifted(&self.column_means())
            .expect("offset length equals p")
    }

    /// Standardizes every column to mean 0 and (1/N) variance 1.
    pub fn standardize(&self) -> Result<DataSample> {
        Standardization::fit(self)?.apply(self)
    }
}

/// Column means and (1/N) standard deviations, fitted on one sample and
/// applicable to another (e.g. train statistics applied to test rows).
#[derive(Clone, Debug, PartialEq)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardization {
    pub fn fit(data: &DataSample) -> Result<Self> {
        let means = data.column_means();
        let n = data.n() as f64;
        let mut vars = vec![0.0; data.p()];
        for i in 0..data.n() {
            for ((v, x), m) in vars.iter_mut().zip(data.row(i)).zip(&means) {
                *v += (x - m) * (x - m);
            }
        }
        let mut scales = Vec::with_capacity(data.p());
        for (j, (v, m)) in vars.iter().zip(&means).enumerate() {
            let sd = (v / n).sqrt();
            if !(sd > 1e-12 * (1.0 + m.abs())) {
                return Err(Error::ZeroVariance(j));
            }
            scales.push(sd);
        }
        Ok(Standardization { means, scales })
    }

    pub fn apply(&self, data: &DataSample) -> Result<DataSample> {
        let mut out = data.shifted(&self.means)?;
        let p = out.p();
        for row in out.values.as_mut_slice().chunks_mut(p) {
            for (v, s) in row.iter_mut().zip(&self.scales) {
                *v /= s;
            }
        }
        out.standardized = true;
        Ok(out)
    }
}

/// How observations are centered before forming the covariance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Centering {
    /// Subtract the column sample means.
    Mean,
    /// Treat the mean as known to be zero: `(1/N) sum x_n x_n^t`.
    Zero,
}

/// Sample covariance with the 1/N divisor.
pub fn sample_covariance(data: &DataSample, centering: Centering) -> DenseMatrix {
    let p = data.p();
    let means = match centering {
        Centering::Mean => data.column_means(),
        Centering::Zero => vec![0.0; p],
    };
    let mut out = DenseMatrix::zeros(p, p);
    let mut dev = vec![0.0; p];
    for n in 0..data.n() {
        for ((d, x), m) in dev.iter_mut().zip(data.row(n)).zip(&means) {
            *d = x - m;
        }
        for i in 0..p {
            let di = dev[i];
            if di == 0.0 {
                continue;
            }
            for j in 0..=i {
                out[(i, j)] += di * dev[j];
            }
        }
    }
    let inv_n = 1.0 / data.n() as f64;
    for i in 0..p {
        for j in 0..=i {
            let v = out[(i, j)] * inv_n;
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}
