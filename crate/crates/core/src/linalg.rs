use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::error::{Error, Result};

/// Low-rank factor `R` (`n × r`) with `R Rᵀ ≈ G` for a symmetric positive
/// semidefinite `G`, by diagonally pivoted Cholesky. Stops once every
/// remaining residual diagonal is at most `rel_tol · max diag(G)`.
pub(crate) fn pivoted_cholesky(g: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let n = g.nrows();
    let mut diag: Vec<f64> = g.diagonal().iter().copied().collect();
    let max_diag = diag.iter().copied().fold(0.0f64, f64::max);
    if max_diag <= 0.0 {
        return DMatrix::zeros(n, 0);
    }
    let threshold = rel_tol * max_diag;
    let mut pivoted = vec![false; n];
    let mut cols: Vec<Vec<f64>> = Vec::new();
    while cols.len() < n {
        let (p, &dp) = diag
            .iter()
            .enumerate()
            .filter(|(i, _)| !pivoted[*i])
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("unpivoted index exists");
        if dp <= threshold {
            break;
        }
        let root = dp.sqrt();
        let mut col = vec![0.0; n];
        for i in 0..n {
            if pivoted[i] {
                continue;
            }
            let mut v = g[(i, p)];
            for prev in &cols {
                v -= prev[i] * prev[p];
            }
            col[i] = v / root;
        }
        col[p] = root;
        pivoted[p] = true;
        diag[p] = 0.0;
        for i in 0..n {
            if !pivoted[i] {
                diag[i] -= col[i] * col[i];
            }
        }
        cols.push(col);
    }
    let r = cols.len();
    DMatrix::from_fn(n, r, |i, k| cols[k][i])
}

/// Cholesky factorization of `g + ridge · I`.
pub(crate) fn ridge_cholesky(g: &DMatrix<f64>, ridge: f64) -> Result<Cholesky<f64, Dyn>> {
    let mut a = g.clone();
    for i in 0..a.nrows() {
        a[(i, i)] += ridge;
    }
    Cholesky::new(a).ok_or(Error::NotPositiveDefinite)
}
