//! Gram matrices over subsets of variables.
//!
//! A subset of columns is treated as one joint input vector per sample, so
//! a Gram matrix over `{a, b}` is built from the concatenated row vectors
//! `(x_a, x_b)` rather than from a product of per-variable kernels.

use nalgebra::DMatrix;

use crate::data::DataMatrix;
use crate::error::{Error, Result};

pub const DEFAULT_EPSILON: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    Linear,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    Fixed(f64),
    /// Median of the positive pairwise distances over the columns in use.
    MedianHeuristic,
}

/// Kernel family, bandwidth policy and the ridge `ε` shared by all measures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    bandwidth: Bandwidth,
    epsilon: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, bandwidth: Bandwidth, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidKernel(format!("epsilon must be positive, got {epsilon}")));
        }
        if let Bandwidth::Fixed(sigma) = bandwidth {
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(Error::InvalidKernel(format!("sigma must be positive, got {sigma}")));
            }
        }
        Ok(Self { family, bandwidth, epsilon })
    }

    pub fn linear() -> Self {
        Self { family: KernelFamily::Linear, bandwidth: Bandwidth::MedianHeuristic, epsilon: DEFAULT_EPSILON }
    }

    pub fn gaussian_median() -> Self {
        Self { family: KernelFamily::Gaussian, bandwidth: Bandwidth::MedianHeuristic, epsilon: DEFAULT_EPSILON }
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::new(KernelFamily::Gaussian, Bandwidth::Fixed(sigma), DEFAULT_EPSILON)
    }

    pub fn with_epsilon(self, epsilon: f64) -> Result<Self> {
        Self::new(self.family, self.bandwidth, epsilon)
    }

    pub fn with_bandwidth(self, bandwidth: Bandwidth) -> Result<Self> {
        Self::new(self.family, bandwidth, self.epsilon)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn bandwidth(&self) -> Bandwidth {
        self.bandwidth
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Pins a median-heuristic bandwidth to the value it takes on `columns`.
    /// Linear kernels and fixed bandwidths are returned unchanged.
    pub fn resolved_for(&self, data: &DataMatrix, columns: &[usize]) -> Result<Self> {
        match (self.family, self.bandwidth) {
            (KernelFamily::Gaussian, Bandwidth::MedianHeuristic) => {
                let sigma = median_bandwidth(data, columns)?;
                Ok(Self { bandwidth: Bandwidth::Fixed(sigma), ..*self })
            }
            _ => Ok(*self),
        }
    }
}

/// Symmetric `n × n` kernel matrix, tagged with whether it has been centered.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: DMatrix<f64>,
    centered: bool,
}

impl GramMatrix {
    /// Wraps a hand-built matrix, checking symmetry and, when `centered` is
    /// set, that every row sums to zero.
    pub fn from_matrix(entries: DMatrix<f64>, centered: bool) -> Result<Self> {
        let (r, c) = entries.shape();
        if r != c {
            return Err(Error::DimensionMismatch(r, c));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite gram entry".into()));
        }
        let scale = entries.amax();
        for i in 0..r {
            for j in 0..i {
                if (entries[(i, j)] - entries[(j, i)]).abs() > 1e-10 * scale {
                    return Err(Error::InvalidData(format!("gram matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        if centered {
            let tol = 1e-8 * r as f64 * scale;
            if entries.row_iter().any(|row| row.sum().abs() > tol) {
                return Err(Error::NotCentered);
            }
        }
        Ok(Self { entries, centered })
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    pub fn into_entries(self) -> DMatrix<f64> {
        self.entries
    }
}

fn canonical_columns(columns: &[usize]) -> Vec<usize> {
    let mut cols = columns.to_vec();
    cols.sort_unstable();
    cols.dedup();
    cols
}

fn squared_distances(data: &DataMatrix, columns: &[usize]) -> DMatrix<f64> {
    let n = data.n_samples();
    let mut d2 = DMatrix::zeros(n, n);
    for &c in columns {
        let x = data.column(c);
        for j in 0..n {
            for i in (j + 1)..n {
                let diff = x[i] - x[j];
                d2[(i, j)] += diff * diff;
            }
        }
    }
    for j in 0..n {
        for i in (j + 1)..n {
            d2[(j, i)] = d2[(i, j)];
        }
    }
    d2
}

/// Uncentered Gram matrix `K[i][j] = k(x_i, x_j)` over the joint vectors
/// restricted to `columns`. Column order and duplicates do not matter.
pub fn compute_gram(data: &DataMatrix, columns: &[usize], spec: &KernelSpec) -> Result<GramMatrix> {
    data.check_columns(columns)?;
    let cols = canonical_columns(columns);
    let n = data.n_samples();
    let entries = match spec.family {
        KernelFamily::Linear => {
            let x = DMatrix::from_fn(n, cols.len(), |i, j| data.column(cols[j])[i]);
            let mut k = &x * x.transpose();
            // gemm may round the two triangles differently
            for j in 0..n {
                for i in (j + 1)..n {
                    k[(j, i)] = k[(i, j)];
                }
            }
            k
        }
        KernelFamily::Gaussian => {
            let sigma = match spec.bandwidth {
                Bandwidth::Fixed(s) => s,
                Bandwidth::MedianHeuristic => median_bandwidth(data, &cols)?,
            };
            let scale = -1.0 / (2.0 * sigma * sigma);
            squared_distances(data, &cols).map(|d| (d * scale).exp())
        }
    };
    Ok(GramMatrix { entries, centered: false })
}

/// `H K H` with `H = I − (1/n)·11ᵀ`, computed from row means in `O(n²)`.
pub fn center(gram: &GramMatrix) -> Result<GramMatrix> {
    if gram.centered {
        return Err(Error::AlreadyCentered);
    }
    Ok(GramMatrix { entries: center_values(&gram.entries), centered: true })
}

pub(crate) fn center_values(k: &DMatrix<f64>) -> DMatrix<f64> {
    let n = k.nrows();
    let nf = n as f64;
    let means: Vec<f64> = k.column_iter().map(|c| c.sum() / nf).collect();
    let grand = means.iter().sum::<f64>() / nf;
    let mut g = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in j..n {
            let v = k[(i, j)] - means[i] - means[j] + grand;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

/// Median of the strictly positive pairwise Euclidean distances over
/// `columns`; falls back to `1.0` when every pair of rows coincides.
pub fn median_bandwidth(data: &DataMatrix, columns: &[usize]) -> Result<f64> {
    data.check_columns(columns)?;
    let cols = canonical_columns(columns);
    let n = data.n_samples();
    let d2 = squared_distances(data, &cols);
    let mut dists: Vec<f64> = Vec::with_capacity(n * (n - 1) / 2);
    for j in 0..n {
        for i in (j + 1)..n {
            let v = d2[(i, j)];
            if v > 0.0 {
                dists.push(v.sqrt());
            }
        }
    }
    if dists.is_empty() {
        return Ok(1.0);
    }
    dists.sort_unstable_by(f64::total_cmp);
    let m = dists.len();
    let median = if m % 2 == 1 { dists[m / 2] } else { 0.5 * (dists[m / 2 - 1] + dists[m / 2]) };
    Ok(median)
}
