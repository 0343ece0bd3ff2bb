//! Kernel dependence measures between a target and a set of variables.
//!
//! Conditional measures (lower is more conditionally independent):
//!
//! - `M1 = tr(G_Y (G_S + nεI)⁻¹)`
//! - `M2 = tr(T G_Y T)` with `T = ε (G_S + εI)⁻¹`
//!
//! and the unconditional `HSIC = tr(G_S G_Y) / (n − 1)²` (higher is more
//! dependent). All Gram matrices are centered. An empty variable set is
//! read as `G_S = 0`, giving `tr(G_Y)/(nε)` for M1, `tr(G_Y)` for M2 and
//! `0` for HSIC.
//!
//! The target Gram is factored once as `G_Y = R Rᵀ`, after which both
//! conditional traces reduce to triangular solves against `R`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::kernel::{center, center_values, compute_gram, GramMatrix, KernelSpec};
use crate::linalg::{pivoted_cholesky, ridge_cholesky};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasureKind {
    M1,
    M2,
    Hsic,
}

impl MeasureKind {
    pub fn is_conditional(self) -> bool {
        !matches!(self, MeasureKind::Hsic)
    }

    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::M1 => "m1",
            MeasureKind::M2 => "m2",
            MeasureKind::Hsic => "hsic",
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    /// Accepts `f`/`m1`, `z`/`m2` and `hsic`.
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "f" | "m1" => Ok(MeasureKind::M1),
            "z" | "m2" => Ok(MeasureKind::M2),
            "hsic" => Ok(MeasureKind::Hsic),
            other => Err(Error::InvalidArgument(format!("unknown measure `{other}`"))),
        }
    }
}

/// Relative cutoff of the pivoted Cholesky of `G_Y`, scaled by `n` so the
/// discarded residual stays at rounding level.
fn factor_tolerance(n: usize) -> f64 {
    n as f64 * f64::EPSILON
}

/// The centered target Gram matrix together with a low-rank factor of it.
#[derive(Debug, Clone)]
pub struct TargetFactor {
    factor: DMatrix<f64>,
    trace: f64,
    n: usize,
}

impl TargetFactor {
    pub fn new(g_y: &GramMatrix) -> Result<Self> {
        if !g_y.is_centered() {
            return Err(Error::NotCentered);
        }
        Ok(Self::from_centered(g_y.entries()))
    }

    fn from_centered(g_y: &DMatrix<f64>) -> Self {
        Self { factor: pivoted_cholesky(g_y, factor_tolerance(g_y.nrows())), trace: g_y.trace(), n: g_y.nrows() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.factor.ncols()
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    fn check(&self, g_s: Option<&DMatrix<f64>>) -> Result<()> {
        match g_s {
            Some(g) if g.nrows() != self.n => Err(Error::DimensionMismatch(self.n, g.nrows())),
            _ => Ok(()),
        }
    }

    fn m1(&self, g_s: Option<&DMatrix<f64>>, epsilon: f64) -> Result<f64> {
        self.check(g_s)?;
        let ridge = self.n as f64 * epsilon;
        let Some(g) = g_s else {
            return Ok(self.trace / ridge);
        };
        if self.rank() == 0 {
            return Ok(0.0);
        }
        // tr(R Rᵀ (L Lᵀ)⁻¹) = ‖L⁻¹ R‖²_F
        let chol = ridge_cholesky(g, ridge)?;
        let z = chol
            .l()
            .solve_lower_triangular(&self.factor)
            .ok_or(Error::NotPositiveDefinite)?;
        Ok(z.norm_squared())
    }

    fn m2(&self, g_s: Option<&DMatrix<f64>>, epsilon: f64) -> Result<f64> {
        self.check(g_s)?;
        let Some(g) = g_s else {
            return Ok(self.trace);
        };
        if self.rank() == 0 {
            return Ok(0.0);
        }
        // tr(T R Rᵀ T) = ‖T R‖²_F with T = ε (G + εI)⁻¹
        let chol = ridge_cholesky(g, epsilon)?;
        let w = chol.solve(&self.factor);
        Ok(epsilon * epsilon * w.norm_squared())
    }
}

fn hsic_values(g_x: &DMatrix<f64>, g_y: &DMatrix<f64>) -> f64 {
    let n = g_x.nrows() as f64;
    g_x.dot(g_y) / ((n - 1.0) * (n - 1.0))
}

fn require_centered(g: &GramMatrix) -> Result<()> {
    if g.is_centered() {
        Ok(())
    } else {
        Err(Error::NotCentered)
    }
}

fn conditioning_entries<'a>(g_y: &GramMatrix, g_s: Option<&'a GramMatrix>) -> Result<Option<&'a DMatrix<f64>>> {
    require_centered(g_y)?;
    match g_s {
        None => Ok(None),
        Some(g) => {
            require_centered(g)?;
            if g.n() != g_y.n() {
                return Err(Error::DimensionMismatch(g_y.n(), g.n()));
            }
            Ok(Some(g.entries()))
        }
    }
}

/// `tr(G_Y (G_S + nεI)⁻¹)`; `g_s = None` is the empty conditioning set.
pub fn m1(g_y: &GramMatrix, g_s: Option<&GramMatrix>, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    let g_s = conditioning_entries(g_y, g_s)?;
    TargetFactor::new(g_y)?.m1(g_s, epsilon)
}

/// `tr(T G_Y T)` with `T = ε(G_S + εI)⁻¹`; `g_s = None` gives `T = I`.
pub fn m2(g_y: &GramMatrix, g_s: Option<&GramMatrix>, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    let g_s = conditioning_entries(g_y, g_s)?;
    TargetFactor::new(g_y)?.m2(g_s, epsilon)
}

/// Biased HSIC estimate `tr(G_X G_Y) / (n − 1)²` from centered Grams.
pub fn hsic(g_x: &GramMatrix, g_y: &GramMatrix) -> Result<f64> {
    require_centered(g_x)?;
    require_centered(g_y)?;
    if g_x.n() != g_y.n() {
        return Err(Error::DimensionMismatch(g_x.n(), g_y.n()));
    }
    Ok(hsic_values(g_x.entries(), g_y.entries()))
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidKernel(format!("epsilon must be positive, got {epsilon}")))
    }
}

/// Measure evaluation against a fixed target. The target Gram and its
/// factor are built once, so repeated evaluations over different variable
/// sets only pay for the conditioning side.
#[derive(Debug, Clone)]
pub struct MeasureContext<'a> {
    data: &'a DataMatrix,
    target: usize,
    kind: MeasureKind,
    spec: KernelSpec,
    g_y: DMatrix<f64>,
    factor: Option<TargetFactor>,
}

impl<'a> MeasureContext<'a> {
    pub fn new(data: &'a DataMatrix, target: usize, kind: MeasureKind, spec: &KernelSpec) -> Result<Self> {
        data.check_target(target)?;
        let g_y = center(&compute_gram(data, &[target], spec)?)?.into_entries();
        let factor = kind.is_conditional().then(|| TargetFactor::from_centered(&g_y));
        Ok(Self { data, target, kind, spec: *spec, g_y, factor })
    }

    pub fn kind(&self) -> MeasureKind {
        self.kind
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn data(&self) -> &'a DataMatrix {
        self.data
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    /// Measure value for `variables`, using `spec` for their Gram matrix.
    pub fn value_with(&self, variables: &[usize], spec: &KernelSpec) -> Result<f64> {
        if variables.contains(&self.target) {
            return Err(Error::TargetInConditioning(self.target));
        }
        let g_s = if variables.is_empty() {
            None
        } else {
            Some(center_values(compute_gram(self.data, variables, spec)?.entries()))
        };
        let epsilon = self.spec.epsilon();
        match (self.kind, &self.factor) {
            (MeasureKind::M1, Some(f)) => f.m1(g_s.as_ref(), epsilon),
            (MeasureKind::M2, Some(f)) => f.m2(g_s.as_ref(), epsilon),
            _ => Ok(g_s.map_or(0.0, |g| hsic_values(&g, &self.g_y))),
        }
    }

    pub fn value(&self, variables: &[usize]) -> Result<f64> {
        self.value_with(variables, &self.spec)
    }
}

/// Composes Gram construction, centering and the selected measure. For
/// HSIC, `conditioning` is the feature set paired against the target.
pub fn evaluate(
    kind: MeasureKind,
    data: &DataMatrix,
    target: usize,
    conditioning: &[usize],
    spec: &KernelSpec,
) -> Result<f64> {
    MeasureContext::new(data, target, kind, spec)?.value(conditioning)
}

/// Wraps a centered Gram built elsewhere, e.g. by hand in tests.
pub fn centered_gram(entries: DMatrix<f64>) -> Result<GramMatrix> {
    GramMatrix::from_matrix(entries, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn two_point() -> GramMatrix {
        centered_gram(DMatrix::from_row_slice(2, 2, &[0.25, -0.25, -0.25, 0.25])).unwrap()
    }

    // Independent oracles via explicit inverses.
    fn m1_explicit(g_y: &DMatrix<f64>, g_s: &DMatrix<f64>, eps: f64) -> f64 {
        let n = g_y.nrows();
        let a = g_s + DMatrix::identity(n, n) * (n as f64 * eps);
        (g_y * a.try_inverse().unwrap()).trace()
    }

    fn m2_explicit(g_y: &DMatrix<f64>, g_s: &DMatrix<f64>, eps: f64) -> f64 {
        let n = g_y.nrows();
        let t = (g_s + DMatrix::identity(n, n) * eps).try_inverse().unwrap() * eps;
        (&t * g_y * &t).trace()
    }

    #[test]
    fn m1_examples() {
        let g = two_point();
        let zero = centered_gram(DMatrix::zeros(2, 2)).unwrap();
        assert_eq!(m1(&zero, Some(&g), 1e-3).unwrap(), 0.0);
        assert_relative_eq!(m1(&g, None, 1e-3).unwrap(), 250.0, max_relative = 1e-12);
        let v = m1(&g, Some(&g), 1e-3).unwrap();
        assert_relative_eq!(v, 0.5 / 0.502, max_relative = 1e-10);
        assert_relative_eq!(v, m1_explicit(g.entries(), g.entries(), 1e-3), max_relative = 1e-8);
    }

    #[test]
    fn m2_examples() {
        let g = two_point();
        let zero = centered_gram(DMatrix::zeros(2, 2)).unwrap();
        assert_eq!(m2(&g, None, 1e-3).unwrap(), 0.5);
        assert_eq!(m2(&zero, Some(&g), 1e-3).unwrap(), 0.0);
        let v = m2(&g, Some(&g), 1e-3).unwrap();
        assert_relative_eq!(v, 0.5 * (0.001f64 / 0.501).powi(2), max_relative = 1e-9);
        assert_relative_eq!(v, m2_explicit(g.entries(), g.entries(), 1e-3), max_relative = 1e-8);
    }

    #[test]
    fn hsic_examples() {
        let g = two_point();
        let zero = centered_gram(DMatrix::zeros(2, 2)).unwrap();
        assert_eq!(hsic(&zero, &g).unwrap(), 0.0);
        assert_relative_eq!(hsic(&g, &g).unwrap(), 0.25, max_relative = 1e-15);
    }

    #[test]
    fn errors() {
        let g = two_point();
        let big = center(&GramMatrix::from_matrix(DMatrix::identity(3, 3), false).unwrap()).unwrap();
        assert_eq!(m1(&g, Some(&big), 1e-3).unwrap_err(), Error::DimensionMismatch(2, 3));
        assert_eq!(m2(&g, Some(&big), 1e-3).unwrap_err(), Error::DimensionMismatch(2, 3));
        assert_eq!(hsic(&g, &big).unwrap_err(), Error::DimensionMismatch(2, 3));
        let raw = GramMatrix::from_matrix(DMatrix::identity(2, 2), false).unwrap();
        assert_eq!(m1(&raw, Some(&g), 1e-3).unwrap_err(), Error::NotCentered);
        assert_eq!(m2(&g, Some(&raw), 1e-3).unwrap_err(), Error::NotCentered);
        assert_eq!(hsic(&raw, &g).unwrap_err(), Error::NotCentered);
        assert!(m1(&g, None, 0.0).is_err());
    }

    #[test]
    fn evaluate_examples() {
        let data = DataMatrix::from_columns(&[vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let lin = KernelSpec::linear();
        assert_eq!(evaluate(MeasureKind::M2, &data, 1, &[], &lin).unwrap(), 0.5);
        assert_relative_eq!(evaluate(MeasureKind::M1, &data, 1, &[0], &lin).unwrap(), 0.5 / 0.502, max_relative = 1e-10);

        let constant = DataMatrix::from_columns(&[vec![0.3, 1.0, 2.0], vec![5.0, 5.0, 5.0]]).unwrap();
        assert_eq!(evaluate(MeasureKind::Hsic, &constant, 1, &[0], &lin).unwrap(), 0.0);
        assert_eq!(
            evaluate(MeasureKind::M1, &data, 1, &[1], &lin).unwrap_err(),
            Error::TargetInConditioning(1)
        );
    }

    #[test]
    fn measure_kind_parsing() {
        assert_eq!("f".parse::<MeasureKind>().unwrap(), MeasureKind::M1);
        assert_eq!("Z".parse::<MeasureKind>().unwrap(), MeasureKind::M2);
        assert_eq!("hsic".parse::<MeasureKind>().unwrap(), MeasureKind::Hsic);
        assert!("q".parse::<MeasureKind>().is_err());
    }
}
