use std::sync::Arc;

use super::grid::Grid;
use crate::error::{PmcError, Result};
use crate::problems::PMCProblem;

/// A scalar field on the nodes of a grid. Boundary nodes of Dirichlet layouts
/// carry the boundary data.
#[derive(Clone, Debug)]
pub struct Field {
    pub grid: Arc<Grid>,
    pub values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.n_nodes();
        Field { grid, values: vec![0.0; n] }
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = grid.coords.iter().map(|x| f(x)).collect();
        Field { grid, values }
    }

    pub fn from_values(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(PmcError::LayoutMismatch(format!("{} values for {} nodes", values.len(), grid.n_nodes())));
        }
        Ok(Field { grid, values })
    }

    /// Overwrites boundary nodes with ψ.
    pub fn pin_boundary(&mut self, problem: &PMCProblem) {
        for (p, b) in self.grid.boundary.iter().enumerate() {
            if *b {
                self.values[p] = problem.psi_at(&self.grid.coords[p]);
            }
        }
    }

    pub fn with_boundary(mut self, problem: &PMCProblem) -> Self {
        self.pin_boundary(problem);
        self
    }

    /// Largest deviation of the boundary nodes from ψ.
    pub fn boundary_mismatch(&self, problem: &PMCProblem) -> f64 {
        self.grid
            .boundary
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(p, _)| (self.values[p] - problem.psi_at(&self.grid.coords[p])).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(PmcError::DivergedField)
        }
    }

    pub fn unknowns(&self) -> Vec<f64> {
        self.grid.unknowns.iter().map(|&p| self.values[p]).collect()
    }

    pub fn set_unknowns(&mut self, x: &[f64]) {
        for (k, &p) in self.grid.unknowns.iter().enumerate() {
            self.values[p] = x[k];
        }
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn same_layout(&self, other: &Field) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid.layout == other.grid.layout
    }
}
