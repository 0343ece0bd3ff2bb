use std::collections::HashSet;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColumnKind {
    Continuous,
    /// Integer codes, fed to the kernels unchanged.
    Discrete,
}

/// An `n × d` table of finite samples, one column per variable.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: DMatrix<f64>,
    names: Vec<String>,
    kinds: Vec<ColumnKind>,
}

impl DataMatrix {
    pub fn new(values: DMatrix<f64>, names: Vec<String>, kinds: Vec<ColumnKind>) -> Result<Self> {
        let (n, d) = values.shape();
        if n < 2 {
            return Err(Error::InvalidData(format!("need at least 2 rows, got {n}")));
        }
        if d < 1 {
            return Err(Error::InvalidData("need at least 1 column".into()));
        }
        if names.len() != d || kinds.len() != d {
            return Err(Error::InvalidData(format!(
                "{d} columns but {} names and {} kinds",
                names.len(),
                kinds.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite value at row {}, column {}",
                pos % n,
                pos / n
            )));
        }
        let mut seen = HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidData(format!("duplicate column name `{name}`")));
            }
        }
        Ok(Self { values, names, kinds })
    }

    /// Continuous columns with generated names `X0, X1, ...`.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let names = (0..columns.len()).map(|j| format!("X{j}")).collect();
        Self::from_named_columns(columns, names)
    }

    pub fn from_named_columns(columns: &[Vec<f64>], names: Vec<String>) -> Result<Self> {
        let d = columns.len();
        let n = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidData("columns have different lengths".into()));
        }
        let values = DMatrix::from_fn(n, d, |i, j| columns[j][i]);
        Self::new(values, names, vec![ColumnKind::Continuous; d])
    }

    pub fn n_samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_vars(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn column(&self, j: usize) -> &[f64] {
        let n = self.n_samples();
        &self.values.as_slice()[j * n..(j + 1) * n]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn kinds(&self) -> &[ColumnKind] {
        &self.kinds
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub(crate) fn check_columns(&self, columns: &[usize]) -> Result<()> {
        if columns.is_empty() {
            return Err(Error::EmptySubset);
        }
        let d = self.n_vars();
        match columns.iter().find(|&&j| j >= d) {
            Some(&index) => Err(Error::BadColumn { index, columns: d }),
            None => Ok(()),
        }
    }

    pub(crate) fn check_target(&self, target: usize) -> Result<()> {
        if target >= self.n_vars() {
            return Err(Error::BadTarget { target, columns: self.n_vars() });
        }
        Ok(())
    }

    /// A copy with rows reordered so that row `i` of the result is row `perm[i]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n_samples();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidArgument("row permutation is not a permutation".into()));
        }
        let values = DMatrix::from_fn(n, self.n_vars(), |i, j| self.values[(perm[i], j)]);
        Ok(Self { values, names: self.names.clone(), kinds: self.kinds.clone() })
    }
}
