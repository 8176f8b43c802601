use super::coloring::distance2_coloring;
use super::field::Field;
use super::grid::Grid;
use super::local::{mean_curvature, node_jet};
use super::sparse::SparseMatrix;
use crate::error::{PmcError, Result};
use crate::exec::Exec;
use crate::problems::PMCProblem;

/// Residual, Jacobian and stencil metadata at a state u.
#[derive(Clone, Debug)]
pub struct ResidualSystem {
    pub residual: Field,
    /// Rows and columns indexed by unknown number (`Grid::unknowns`).
    pub jacobian: SparseMatrix,
    pub n_colors: usize,
    pub bandwidth: usize,
    /// ∂/∂u of the zeroth-order term (φ + t·u)/ω at each unknown.
    pub zeroth_order_diag: Vec<f64>,
    /// Every zeroth-order diagonal entry is ≥ t·min(1/ω) − tol.
    pub diag_monotone: bool,
}

/// Value of the residual operator at node p (zero at boundary nodes).
pub fn node_residual(problem: &PMCProblem, grid: &Grid, u: &[f64], p: usize) -> f64 {
    if grid.boundary[p] {
        return 0.0;
    }
    let h = mean_curvature(grid, u, p);
    let jet = node_jet(grid, u, p);
    let x = &grid.coords[p];
    let xv = jet.x_vec();
    let r = 1.0 / jet.omega;
    let z = u[p];
    -h - (problem.big_f)(x, &xv, r) + ((problem.phi)(x, z, &xv, r) + problem.t * z) * r
}

fn check_layout(problem: &PMCProblem, u: &Field) -> Result<()> {
    u.check_finite()?;
    if u.grid.domain.has_boundary() && problem.psi.is_none() {
        return Err(PmcError::Invalid(format!("problem {} has no boundary data", problem.name)));
    }
    Ok(())
}

pub fn assemble_residual(problem: &PMCProblem, u: &Field) -> Result<Field> {
    assemble_residual_with(problem, u, Exec::default())
}

pub fn assemble_residual_with(problem: &PMCProblem, u: &Field, exec: Exec) -> Result<Field> {
    check_layout(problem, u)?;
    let grid = &u.grid;
    let values = exec.map(grid.n_nodes(), |p| node_residual(problem, grid, &u.values, p));
    let r = Field { grid: grid.clone(), values };
    r.check_finite()?;
    Ok(r)
}

/// Sparsity of the residual in unknown numbering: row k lists the unknown
/// columns its stencil touches.
pub(crate) fn pattern(grid: &Grid) -> Vec<Vec<usize>> {
    grid.unknowns
        .iter()
        .map(|&p| grid.dependencies(p).into_iter().filter_map(|q| grid.unknown_of[q]).collect())
        .collect()
}

pub fn assemble_jacobian(problem: &PMCProblem, u: &Field) -> Result<ResidualSystem> {
    assemble_jacobian_with(problem, u, Exec::default())
}

/// Jacobian by colored forward differences of the residual, one color per sweep.
pub fn assemble_jacobian_with(problem: &PMCProblem, u: &Field, exec: Exec) -> Result<ResidualSystem> {
    let residual = assemble_residual_with(problem, u, exec)?;
    let grid = &u.grid;
    if grid.radial.is_some() {
        return radial_jacobian(problem, u, residual, exec);
    }
    let n = grid.n_unknowns();
    let rows = pattern(grid);
    let (color, n_colors) = distance2_coloring(n, &rows);
    let mut rows_of_col = vec![Vec::new(); n];
    for (i, r) in rows.iter().enumerate() {
        for &j in r {
            rows_of_col[j].push(i);
        }
    }
    let mut by_color = vec![Vec::new(); n_colors];
    for (j, &c) in color.iter().enumerate() {
        by_color[c].push(j);
    }
    let step = |j: usize| 1e-7 * (1.0 + u.values[grid.unknowns[j]].abs());
    // each color yields (row, col, value) entries; colors are independent
    let sweeps: Vec<Vec<(usize, usize, f64)>> = exec.map_items(&by_color, |cols| {
        let mut up = u.values.clone();
        for &j in cols {
            up[grid.unknowns[j]] += step(j);
        }
        let mut out = Vec::new();
        for &j in cols {
            for &i in &rows_of_col[j] {
                let p = grid.unknowns[i];
                let v = (node_residual(problem, grid, &up, p) - residual.values[p]) / step(j);
                out.push((i, j, v));
            }
        }
        out
    });
    let mut row_entries: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for sweep in sweeps {
        for (i, j, v) in sweep {
            row_entries[i].push((j, v));
        }
    }
    let jacobian = SparseMatrix::from_rows(row_entries);
    if jacobian.values.iter().any(|v| !v.is_finite()) {
        return Err(PmcError::DivergedField);
    }
    let (zeroth_order_diag, diag_monotone) = zeroth_order(problem, u, exec);
    let bandwidth = jacobian.bandwidth();
    Ok(ResidualSystem { residual, jacobian, n_colors, bandwidth, zeroth_order_diag, diag_monotone })
}

/// Zeroth-order part Z(z, g) = −F + (φ + t·z)/ω of a radial node as a
/// function of the value z and the centered slope g.
fn radial_zeroth(problem: &PMCProblem, x: &[f64], z: f64, g: f64) -> f64 {
    let omega = (1.0 + g * g).sqrt();
    let mut xv = vec![0.0; x.len()];
    xv[0] = -g / omega;
    let r = 1.0 / omega;
    -(problem.big_f)(x, &xv, r) + ((problem.phi)(x, z, &xv, r) + problem.t * z) * r
}

/// Exact tridiagonal Jacobian of the radial flux scheme. The divergence part
/// is differentiated in closed form: forward differences lose the row sums of
/// −Δ_h on the very fine meshes that resolve near-vertical graphs.
fn radial_jacobian(problem: &PMCProblem, u: &Field, residual: Field, exec: Exec) -> Result<ResidualSystem> {
    let grid = &u.grid;
    let rd = grid.radial.as_ref().expect("radial layout");
    let nr = rd.j_node.len() - 1;
    let dr = rd.dr;
    let v = &u.values;
    // d(flux)/d(slope) at face i+½
    let dflux = |i: usize| {
        let g = (v[i + 1] - v[i]) / dr;
        rd.j_face[i] / (1.0 + g * g).powf(1.5)
    };
    let rows: Vec<Vec<(usize, f64)>> = exec.map(nr, |i| {
        let x = &grid.coords[i];
        let z = v[i];
        let g = if i == 0 { 0.0 } else { (v[i + 1] - v[i - 1]) / (2.0 * dr) };
        let ez = 1e-7 * (1.0 + z.abs());
        let zz = (radial_zeroth(problem, x, z + ez, g) - radial_zeroth(problem, x, z - ez, g)) / (2.0 * ez);
        let mut row = Vec::with_capacity(3);
        if i == 0 {
            let c = dflux(0) / (dr * rd.pole_volume);
            row.push((0, c + zz));
            if nr > 1 {
                row.push((1, -c));
            }
            return row;
        }
        let eg = 1e-7 * (1.0 + g.abs());
        let zg = (radial_zeroth(problem, x, z, g + eg) - radial_zeroth(problem, x, z, g - eg)) / (2.0 * eg);
        let scale = dr * dr * rd.j_node[i];
        let (fp, fm) = (dflux(i), dflux(i - 1));
        row.push((i - 1, -fm / scale - zg / (2.0 * dr)));
        row.push((i, (fp + fm) / scale + zz));
        if i + 1 < nr {
            row.push((i + 1, -fp / scale + zg / (2.0 * dr)));
        }
        row
    });
    let jacobian = SparseMatrix::from_rows(rows);
    if jacobian.values.iter().any(|x| !x.is_finite()) {
        return Err(PmcError::DivergedField);
    }
    let (zeroth_order_diag, diag_monotone) = zeroth_order(problem, u, exec);
    let bandwidth = jacobian.bandwidth();
    Ok(ResidualSystem { residual, jacobian, n_colors: 3, bandwidth, zeroth_order_diag, diag_monotone })
}

/// (∂φ/∂z + t)/ω per unknown with gradient frozen, and the monotonicity flag.
fn zeroth_order(problem: &PMCProblem, u: &Field, exec: Exec) -> (Vec<f64>, bool) {
    let grid = &u.grid;
    let entries: Vec<(f64, f64)> = exec.map_items(&grid.unknowns, |&p| {
        let jet = node_jet(grid, &u.values, p);
        let x = &grid.coords[p];
        let xv = jet.x_vec();
        let r = 1.0 / jet.omega;
        let z = u.values[p];
        let e = 1e-7 * (1.0 + z.abs());
        let dphi = ((problem.phi)(x, z + e, &xv, r) - (problem.phi)(x, z - e, &xv, r)) / (2.0 * e);
        ((dphi + problem.t) * r, r)
    });
    let min_r = entries.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
    let floor = problem.t * min_r - 1e-8;
    let diag: Vec<f64> = entries.iter().map(|e| e.0).collect();
    let ok = diag.iter().all(|&d| d >= floor);
    (diag, ok)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::geometry::ChartMetric;
    use crate::problems::{make_cmc, make_custom, DomainChart, Shape};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn torus(n: usize) -> Arc<Grid> {
        Arc::new(Grid::periodic(DomainChart::new(ChartMetric::euclidean(2), Shape::BoxPeriodic { length: 1.0 }), n).unwrap())
    }

    fn disk(nr: usize) -> Arc<Grid> {
        Arc::new(Grid::polar(DomainChart::new(ChartMetric::euclidean(2), Shape::disk(1.0)), nr, 2 * nr).unwrap())
    }

    #[test]
    fn constants_solve_minimal_equation() {
        let g = disk(8);
        let p = make_cmc(0.0).with_constant_psi(1.7);
        let u = Field::from_fn(g, |_| 1.7);
        assert!(assemble_residual(&p, &u).unwrap().sup_abs() < 1e-14);
    }

    #[test]
    fn torus_constant_gives_tu() {
        let p = make_cmc(0.0).with_t(1.0);
        let u = Field::from_fn(torus(12), |_| 0.3);
        let r = assemble_residual(&p, &u).unwrap();
        assert!(r.values.iter().all(|v| (v - 0.3).abs() < 1e-15));
    }

    #[test]
    fn zero_state_is_minus_laplacian() {
        let g = torus(10);
        let c = 0.7;
        let p = make_cmc(c);
        let u = Field::zeros(g.clone());
        let sys = assemble_jacobian(&p, &u).unwrap();
        // residual = c everywhere (div(Du/ω) = c is the target, H = 0 here)
        assert!(sys.residual.values.iter().all(|v| (v - c).abs() < 1e-15));
        let h2 = g.h() * g.h();
        for i in 0..g.n_unknowns() {
            assert!((sys.jacobian.get(i, i) - 4.0 / h2).abs() < 1e-5 * 4.0 / h2);
            let e = g.stencils[g.unknowns[i]].as_ref().unwrap().nbr[0];
            assert!((sys.jacobian.get(i, g.unknown_of[e].unwrap()) + 1.0 / h2).abs() < 1e-5 * 4.0 / h2);
        }
    }

    #[test]
    fn linear_regime_symmetric_part_is_positive() {
        let g = torus(9);
        let p = make_custom(0.0, 0.0, Arc::new(|_| 0.0)).with_t(1.0);
        let sys = assemble_jacobian(&p, &Field::zeros(g.clone())).unwrap();
        let a = sys.jacobian.to_dense();
        let n = a.len();
        let sym = nalgebra::DMatrix::from_fn(n, n, |i, j| 0.5 * (a[i][j] + a[j][i]));
        let min = sym.symmetric_eigenvalues().min();
        assert!((min - 1.0).abs() < 1e-4, "min eigenvalue {min}");
        assert!(sys.diag_monotone);
    }

    #[test]
    fn jacobian_matches_directional_derivative() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = disk(8);
        let p = make_custom(0.5, 1.0, Arc::new(|x: &[f64]| x[0])).with_t(0.1).with_psi(|x| 0.2 * x[1]);
        for _ in 0..5 {
            let vals: Vec<f64> = (0..g.n_nodes()).map(|_| rng.gen_range(-0.3..0.3)).collect();
            let mut u = Field::from_values(g.clone(), vals).unwrap();
            u.pin_boundary(&p);
            let sys = assemble_jacobian(&p, &u).unwrap();
            let delta: Vec<f64> = (0..g.n_unknowns()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let jd = sys.jacobian.mul_vec(&delta);
            let eps = 1e-6;
            let mut v = u.clone();
            let shifted: Vec<f64> = u.unknowns().iter().zip(&delta).map(|(a, d)| a + eps * d).collect();
            v.set_unknowns(&shifted);
            let r1 = assemble_residual(&p, &v).unwrap();
            let fd: Vec<f64> = g.unknowns.iter().map(|&q| (r1.values[q] - sys.residual.values[q]) / eps).collect();
            let num = jd.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let den = fd.iter().map(|b| b * b).sum::<f64>().sqrt();
            assert!(num / den < 1e-5, "relative error {}", num / den);
        }
    }

    #[test]
    fn radial_jacobian_matches_directional_derivative() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let c = crate::problems::counterexample_problem(1.0, 2);
        let g = Arc::new(Grid::radial(c.domain.clone(), 50).unwrap());
        let p = c.problem.clone().with_t(0.2);
        let vals: Vec<f64> = (0..g.n_nodes()).map(|i| -(1.0 - i as f64 / 50.0) * rng.gen_range(0.5..1.5)).collect();
        let u = Field::from_values(g.clone(), vals).unwrap().with_boundary(&p);
        let sys = assemble_jacobian(&p, &u).unwrap();
        let delta: Vec<f64> = (0..g.n_unknowns()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let jd = sys.jacobian.mul_vec(&delta);
        // centered, so the O(ε) curvature term of a one-sided quotient drops out
        let eps = 1e-6;
        let shifted = |s: f64| {
            let mut v = u.clone();
            v.set_unknowns(&u.unknowns().iter().zip(&delta).map(|(a, d)| a + s * d).collect::<Vec<_>>());
            assemble_residual(&p, &v).unwrap()
        };
        let (rp, rm) = (shifted(eps), shifted(-eps));
        let fd: Vec<f64> = g.unknowns.iter().map(|&q| (rp.values[q] - rm.values[q]) / (2.0 * eps)).collect();
        let num = jd.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let den = fd.iter().map(|b| b * b).sum::<f64>().sqrt();
        assert!(num / den < 1e-5, "relative error {}", num / den);
    }

    #[test]
    fn sequential_and_parallel_agree_bitwise() {
        let g = disk(8);
        let p = make_cmc(1.0).with_t(0.05).with_constant_psi(0.0);
        let u = Field::from_fn(g, |x| 0.1 * x[0] * x[1]).with_boundary(&p);
        let a = assemble_jacobian_with(&p, &u, Exec::Sequential).unwrap();
        let b = assemble_jacobian_with(&p, &u, Exec::Parallel).unwrap();
        assert_eq!(a.jacobian, b.jacobian);
        assert_eq!(a.residual.values, b.residual.values);
    }

    #[test]
    fn non_finite_field_is_diverged() {
        let g = torus(9);
        let mut u = Field::zeros(g);
        u.values[3] = f64::NAN;
        assert_eq!(assemble_residual(&make_cmc(0.0), &u).unwrap_err(), PmcError::DivergedField);
    }
}
