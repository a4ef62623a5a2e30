use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;

/// Observations grouped by factor level: level `x` holds an `n_x × p` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileDataset<T> {
    levels: Vec<String>,
    vertices: Vec<String>,
    data: Vec<Matrix<T>>,
}

impl<T: Real> ProfileDataset<T> {
    pub fn new(levels: Vec<String>, vertices: Vec<String>, data: Vec<Matrix<T>>) -> Result<Self> {
        let p = vertices.len();
        if levels.is_empty() || p == 0 {
            return Err(Error::input("a dataset needs at least one level and one column"));
        }
        if data.len() != levels.len() {
            return Err(Error::input(format!("{} data blocks for {} levels", data.len(), levels.len())));
        }
        for (level, m) in levels.iter().zip(&data) {
            if m.rows() == 0 {
                return Err(Error::input(format!("level `{level}` has no observations")));
            }
            if m.cols() != p {
                return Err(Error::input(format!("level `{level}` has {} columns, expected {p}", m.cols())));
            }
            if !m.is_finite() {
                return Err(Error::input(format!("level `{level}` contains non-finite values")));
            }
        }
        Ok(Self { levels, vertices, data })
    }

    pub fn p(&self) -> usize {
        self.vertices.len()
    }

    pub fn q(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[String] {
        &self.levels
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn n(&self, x: usize) -> usize {
        self.data[x].rows()
    }

    pub fn total_n(&self) -> usize {
        self.data.iter().map(Matrix::rows).sum()
    }

    pub fn level(&self, x: usize) -> &Matrix<T> {
        &self.data[x]
    }

    pub fn column_sums(&self, x: usize) -> Vec<T> {
        let m = &self.data[x];
        let mut s = vec![T::zero(); m.cols()];
        for k in 0..m.rows() {
            for (acc, &v) in s.iter_mut().zip(m.row(k)) {
                *acc = *acc + v;
            }
        }
        s
    }

    /// Column means over all levels together.
    pub fn pooled_means(&self) -> Vec<T> {
        let mut s = vec![T::zero(); self.p()];
        for x in 0..self.q() {
            for (acc, v) in s.iter_mut().zip(self.column_sums(x)) {
                *acc = *acc + v;
            }
        }
        let n = T::of(self.total_n() as f64);
        s.into_iter().map(|v| v / n).collect()
    }

    /// Subtracts the pooled column means; returns the centred data and the means.
    pub fn centered(&self) -> (Self, Vec<T>) {
        let mean = self.pooled_means();
        let data = self
            .data
            .iter()
            .map(|m| Matrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)] - mean[j]))
            .collect();
        (Self { levels: self.levels.clone(), vertices: self.vertices.clone(), data }, mean)
    }

    /// `(1/n_x) Σ_k (y_k − c)(y_k − c)ᵀ`.
    pub fn scatter(&self, x: usize, center: &[T]) -> Matrix<T> {
        let m = &self.data[x];
        let p = m.cols();
        let mut s = Matrix::zeros(p, p);
        let mut d = vec![T::zero(); p];
        for k in 0..m.rows() {
            for (j, dj) in d.iter_mut().enumerate() {
                *dj = m[(k, j)] - center[j];
            }
            for i in 0..p {
                for j in i..p {
                    s[(i, j)] = s[(i, j)] + d[i] * d[j];
                }
            }
        }
        let n = T::of(m.rows() as f64);
        for i in 0..p {
            for j in i..p {
                let v = s[(i, j)] / n;
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        s
    }

    /// Keeps only the listed rows of each level.
    pub fn select_rows(&self, keep: &[Vec<usize>]) -> Result<Self> {
        if keep.len() != self.q() {
            return Err(Error::input("row selection must list every level"));
        }
        let data = self
            .data
            .iter()
            .zip(keep)
            .map(|(m, rows)| {
                let picked: Vec<Vec<T>> = rows.iter().map(|&r| m.row(r).to_vec()).collect();
                Matrix::from_rows(&picked).unwrap_or_else(|| Matrix::zeros(0, m.cols()))
            })
            .collect();
        Self::new(self.levels.clone(), self.vertices.clone(), data)
    }

    pub fn cast<U: Real>(&self) -> ProfileDataset<U> {
        ProfileDataset {
            levels: self.levels.clone(),
            vertices: self.vertices.clone(),
            data: self.data.iter().map(Matrix::cast).collect(),
        }
    }
}
