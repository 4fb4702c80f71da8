use serde::{Deserialize, Serialize};

use super::FracError;

/// Uniform partition of `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_max: f64,
    n_steps: usize,
    step: f64,
}

impl TimeGrid {
    pub fn new(t_max: f64, n_steps: usize) -> Result<Self, FracError> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(FracError::InvalidGrid(format!(
                "final time must be positive and finite, got {t_max}"
            )));
        }
        if n_steps < 2 {
            return Err(FracError::InvalidGrid(format!(
                "at least 2 intervals required, got {n_steps}"
            )));
        }
        Ok(Self {
            t_max,
            n_steps,
            step: t_max / n_steps as f64,
        })
    }

    #[inline]
    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    #[inline]
    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of nodes, `n_steps + 1`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn step(&self) -> f64 {
        self.step
    }

    /// `t_i = i·τ`, with the last node pinned to `T`.
    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i <= self.n_steps);
        if i == self.n_steps {
            self.t_max
        } else {
            i as f64 * self.step
        }
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_steps + 1).map(move |i| self.node(i))
    }

    /// Same interval with `factor` times as many steps.
    pub fn refined(&self, factor: usize) -> Result<Self, FracError> {
        Self::new(self.t_max, self.n_steps * factor)
    }
}

/// Fractional order of an integral or derivative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FracOrder(f64);

impl FracOrder {
    /// Order for integral use: any finite `γ ≥ 0` (`γ = 0` is the identity).
    pub fn new(gamma: f64) -> Result<Self, FracError> {
        if gamma.is_finite() && gamma >= 0.0 {
            Ok(Self(gamma))
        } else {
            Err(FracError::InvalidOrder(gamma))
        }
    }

    /// Order for derivative use: `0 < γ ≤ 2`.
    pub fn derivative(gamma: f64) -> Result<Self, FracError> {
        if gamma.is_finite() && gamma > 0.0 && gamma <= 2.0 {
            Ok(Self(gamma))
        } else {
            Err(FracError::InvalidOrder(gamma))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

/// A `dim`-dimensional trajectory sampled at every node of a [`TimeGrid`].
///
/// Values are stored node-major: component `j` at node `i` lives at
/// `values[i * dim + j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledPath {
    grid: TimeGrid,
    dim: usize,
    values: Vec<f64>,
}

impl SampledPath {
    pub fn new(grid: TimeGrid, dim: usize, values: Vec<f64>) -> Result<Self, FracError> {
        if dim == 0 {
            return Err(FracError::InvalidArgument("path dimension must be >= 1".into()));
        }
        if values.len() != grid.len() * dim {
            return Err(FracError::DimensionMismatch {
                expected: grid.len() * dim,
                found: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(FracError::NonFinite {
                node: pos / dim,
                component: pos % dim,
            });
        }
        Ok(Self { grid, dim, values })
    }

    pub fn zeros(grid: TimeGrid, dim: usize) -> Self {
        assert!(dim >= 1, "path dimension must be >= 1");
        Self {
            grid,
            dim,
            values: vec![0.0; grid.len() * dim],
        }
    }

    /// Scalar path sampled from `f(t)`.
    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Result<Self, FracError> {
        let values = grid.nodes().map(f).collect();
        Self::new(grid, 1, values)
    }

    /// Vector path; `f(t, out)` fills the `dim` components at time `t`.
    pub fn from_fn_vec(
        grid: TimeGrid,
        dim: usize,
        mut f: impl FnMut(f64, &mut [f64]),
    ) -> Result<Self, FracError> {
        let mut values = vec![0.0; grid.len() * dim.max(1)];
        if dim > 0 {
            for (i, chunk) in values.chunks_exact_mut(dim).enumerate() {
                f(grid.node(i), chunk);
            }
        }
        Self::new(grid, dim, values)
    }

    /// Stacks scalar component series into one path.
    pub fn from_components(grid: TimeGrid, components: &[Vec<f64>]) -> Result<Self, FracError> {
        let dim = components.len();
        if dim == 0 {
            return Err(FracError::InvalidArgument("no components supplied".into()));
        }
        let mut values = vec![0.0; grid.len() * dim];
        for (j, comp) in components.iter().enumerate() {
            if comp.len() != grid.len() {
                return Err(FracError::DimensionMismatch {
                    expected: grid.len(),
                    found: comp.len(),
                });
            }
            for (i, &v) in comp.iter().enumerate() {
                values[i * dim + j] = v;
            }
        }
        Self::new(grid, dim, values)
    }

    #[inline]
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// The `dim` components at node `i`.
    #[inline]
    pub fn at(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.dim + j]
    }

    pub fn component(&self, j: usize) -> Vec<f64> {
        self.values.iter().skip(j).step_by(self.dim).copied().collect()
    }

    /// `max_{i,j} |u_j(t_i)|`.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Euclidean norm of the state at each node.
    pub fn pointwise_norms(&self) -> Vec<f64> {
        self.values
            .chunks_exact(self.dim)
            .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            dim: self.dim,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    /// Componentwise `self - other`; grids and dimensions must agree.
    pub fn sub(&self, other: &Self) -> Result<Self, FracError> {
        self.check_compatible(other)?;
        Ok(Self {
            grid: self.grid,
            dim: self.dim,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self, FracError> {
        self.check_compatible(other)?;
        Ok(Self {
            grid: self.grid,
            dim: self.dim,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    fn check_compatible(&self, other: &Self) -> Result<(), FracError> {
        if self.grid != other.grid {
            return Err(FracError::GridMismatch);
        }
        if self.dim != other.dim {
            return Err(FracError::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_nodes_are_uniform_and_pinned() {
        let g = TimeGrid::new(0.7, 1000).unwrap();
        assert_eq!(g.node(0), 0.0);
        assert_eq!(g.node(1000), 0.7);
        let tol = 4.0 * f64::EPSILON * g.t_max();
        for i in 0..1000 {
            let dt = g.node(i + 1) - g.node(i);
            assert!(dt > 0.0);
            assert!((dt - g.step()).abs() <= tol);
        }
    }

    #[test]
    fn grid_rejects_degenerate_input() {
        assert!(TimeGrid::new(1.0, 1).is_err());
        assert!(TimeGrid::new(0.0, 10).is_err());
        assert!(TimeGrid::new(f64::NAN, 10).is_err());
    }

    #[test]
    fn order_ranges() {
        assert!(FracOrder::new(0.0).is_ok());
        assert!(FracOrder::new(-0.1).is_err());
        assert!(FracOrder::derivative(2.0).is_ok());
        assert!(FracOrder::derivative(2.01).is_err());
        assert!(FracOrder::derivative(0.0).is_err());
    }

    #[test]
    fn path_validates_shape_and_finiteness() {
        let g = TimeGrid::new(1.0, 4).unwrap();
        assert!(SampledPath::new(g, 2, vec![0.0; 9]).is_err());
        let mut v = vec![0.0; 10];
        v[7] = f64::INFINITY;
        match SampledPath::new(g, 2, v) {
            Err(FracError::NonFinite { node, component }) => assert_eq!((node, component), (3, 1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn components_round_trip() {
        let g = TimeGrid::new(1.0, 3).unwrap();
        let a = vec![1.0, 2.0, 3.0, 4.0];
        let b = vec![5.0, 6.0, 7.0, 8.0];
        let p = SampledPath::from_components(g, &[a.clone(), b.clone()]).unwrap();
        assert_eq!(p.component(0), a);
        assert_eq!(p.component(1), b);
        assert_eq!(p.at(2), &[3.0, 7.0]);
    }
}
