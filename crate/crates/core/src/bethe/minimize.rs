use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::coords::BetheCoordinates;
use super::spa::{sum_product, SpaOptions};
use crate::beta::Beta;
use crate::error::{Error, Result};
use crate::linalg::AffineSubspace;
use crate::lp::solve_standard_form;
use crate::nfg::Nfg;

/// Free-energy values closer than this count as ties.
pub const TIE_TOLERANCE: f64 = 1e-9;
/// Minimizers closer than this in max-norm count as the same point.
const DISTINCT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeOptions {
    /// Number of seeded interior starts; the first is the analytic center.
    pub starts: usize,
    pub seed: u64,
    pub max_iters: usize,
    /// Stop once the projected gradient norm is at most this.
    pub tol: f64,
    /// Also start from sum-product beliefs when they are strictly interior.
    pub spa_start: bool,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions { starts: 8, seed: 0, max_iters: 500, tol: 1e-10, spa_start: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetheMinimum {
    pub beta: Beta,
    pub f_min: f64,
    pub temperature: f64,
    /// `exp(-f_min / T)` for `T > 0`.
    pub z_bethe: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub grad_norm: f64,
    /// Distinct minimizers whose free energy is within [`TIE_TOLERANCE`] of the best.
    pub minimizers: Vec<Beta>,
    pub tie: bool,
}

/// Minimizes `F_B` over the local marginal polytope.
///
/// `T = 0` is solved as a linear program. For `T > 0` each start is an interior point of the
/// polytope, refined by a modified Newton method on the affine hull of the constraints.
pub fn minimize_bethe(nfg: &Nfg, t: f64, opts: &MinimizeOptions) -> Result<BetheMinimum> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("temperature must be non-negative, got {t}")));
    }
    let coords = BetheCoordinates::pruned(nfg);
    if coords.factor_vars.iter().any(Vec::is_empty) {
        return Err(Error::EmptyCode);
    }
    if t == 0.0 {
        return minimize_linear(nfg, &coords);
    }
    let coords = interior_coordinates(nfg, coords)?;
    let (a, b) = coords.constraints(nfg);
    let space = AffineSubspace::new(&a, &b);

    let mut starts: Vec<DVector<f64>> = (0..opts.starts.max(1))
        .into_par_iter()
        .filter_map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(k as u64);
            let w = DVector::from_fn(coords.len(), |_, _| if k == 0 { 1.0 } else { rng.random_range(0.5..2.0) });
            analytic_center(&space, &w)
        })
        .collect();
    if opts.spa_start {
        let spa = sum_product(nfg, &SpaOptions { temperature: t, ..SpaOptions::default() })?;
        let x = DVector::from_vec(coords.flatten(nfg, &spa.beliefs));
        if x.iter().all(|&v| v > 0.0) && space.residual(&x) < 1e-9 {
            starts.push(x);
        }
    }
    if starts.is_empty() {
        return Err(Error::LpFailure("no strictly interior starting point found".into()));
    }

    let runs: Vec<Descent> = starts.into_par_iter().map(|x| descend(&coords, &space, x, t, opts)).collect();
    let best = runs
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| (!a.converged, a.f).partial_cmp(&(!b.converged, b.f)).unwrap())
        .map(|(i, _)| i)
        .expect("at least one start");
    let f_min = runs[best].f;
    let mut minimizers: Vec<Beta> = Vec::new();
    for run in std::iter::once(&runs[best]).chain(&runs) {
        if run.converged && (run.f - f_min).abs() <= TIE_TOLERANCE {
            let beta = coords.unflatten(nfg, run.x.as_slice());
            if minimizers.iter().all(|m| m.max_abs_diff(&beta) > DISTINCT) {
                minimizers.push(beta);
            }
        }
    }
    let run = &runs[best];
    Ok(BetheMinimum {
        beta: coords.unflatten(nfg, run.x.as_slice()),
        f_min,
        temperature: t,
        z_bethe: Some((-f_min / t).exp()),
        converged: run.converged,
        iterations: run.iterations,
        grad_norm: run.grad_norm,
        tie: minimizers.len() > 1,
        minimizers,
    })
}

fn minimize_linear(nfg: &Nfg, coords: &BetheCoordinates) -> Result<BetheMinimum> {
    let (a, b) = coords.constraints(nfg);
    let rows = dense_rows(&a);
    let sol = solve_standard_form(&coords.costs, &rows, b.as_slice())?;
    let beta = coords.unflatten(nfg, &sol.x);
    Ok(BetheMinimum {
        minimizers: vec![beta.clone()],
        beta,
        f_min: sol.objective,
        temperature: 0.0,
        z_bethe: None,
        converged: true,
        iterations: sol.pivots,
        grad_norm: 0.0,
        tie: false,
    })
}

fn dense_rows(a: &DMatrix<f64>) -> Vec<Vec<f64>> {
    a.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Drops variables that vanish on the whole polytope so that a strictly positive point exists.
fn interior_coordinates(nfg: &Nfg, coords: BetheCoordinates) -> Result<BetheCoordinates> {
    let (a, b) = coords.constraints(nfg);
    let space = AffineSubspace::new(&a, &b);
    if analytic_center(&space, &DVector::from_element(coords.len(), 1.0)).is_some() {
        return Ok(coords);
    }
    let rows = dense_rows(&a);
    let keep = (0..coords.len())
        .into_par_iter()
        .map(|v| {
            let mut c = vec![0.0; coords.len()];
            c[v] = -1.0;
            solve_standard_form(&c, &rows, b.as_slice()).map(|sol| -sol.objective > 1e-9)
        })
        .collect::<Result<Vec<bool>>>()?;
    let reduced = coords.restrict(nfg, &keep);
    if reduced.factor_vars.iter().any(Vec::is_empty) {
        return Err(Error::EmptyCode);
    }
    Ok(reduced)
}

/// Largest step in `(0, 1]` keeping `x + alpha dx` strictly positive.
fn step_to_boundary(x: &DVector<f64>, dx: &DVector<f64>, fraction: f64) -> f64 {
    x.iter()
        .zip(dx.iter())
        .filter(|(_, &d)| d < 0.0)
        .map(|(&v, &d)| -fraction * v / d)
        .fold(1.0, f64::min)
}

/// Minimizer of `-sum w_i log x_i` on the affine set, by infeasible-start Newton.
fn analytic_center(space: &AffineSubspace, w: &DVector<f64>) -> Option<DVector<f64>> {
    let n = w.len();
    let z = &space.null;
    let mut x = DVector::from_element(n, 1.0);
    let barrier = |x: &DVector<f64>| -> f64 { -w.iter().zip(x.iter()).map(|(wi, xi)| wi * xi.ln()).sum::<f64>() };
    for _ in 0..300 {
        let residual = &space.rows * &x - &space.rhs;
        let feasible = residual.norm() <= 1e-13 * (1.0 + space.rhs.norm());
        let dp = if feasible { DVector::zeros(n) } else { -space.rows.tr_mul(&residual) };
        let grad = DVector::from_fn(n, |i, _| -w[i] / x[i]);
        let hess = DVector::from_fn(n, |i, _| w[i] / (x[i] * x[i]));
        let dx = if z.ncols() == 0 {
            dp
        } else {
            let hz = DMatrix::from_fn(n, z.ncols(), |r, c| hess[r] * z[(r, c)]);
            let reduced_h = z.tr_mul(&hz);
            let rhs = -z.tr_mul(&(&grad + hess.component_mul(&dp)));
            let dy = reduced_h.cholesky()?.solve(&rhs);
            dp + z * dy
        };
        let decrement = dx.dot(&hess.component_mul(&dx));
        if feasible && decrement <= 1e-18 {
            return Some(x);
        }
        let mut alpha = step_to_boundary(&x, &dx, 0.99);
        if feasible {
            let f0 = barrier(&x);
            let slope = grad.dot(&dx);
            while barrier(&(&x + alpha * &dx)) > f0 + 1e-4 * alpha * slope && alpha > 1e-12 {
                alpha *= 0.5;
            }
        }
        x += alpha * dx;
        if x.iter().any(|&v| !(v > 1e-200)) {
            return None;
        }
    }
    let residual = (&space.rows * &x - &space.rhs).norm();
    (residual <= 1e-10 * (1.0 + space.rhs.norm())).then_some(x)
}

struct Descent {
    x: DVector<f64>,
    f: f64,
    converged: bool,
    iterations: usize,
    grad_norm: f64,
}

fn descend(coords: &BetheCoordinates, space: &AffineSubspace, mut x: DVector<f64>, t: f64, opts: &MinimizeOptions) -> Descent {
    let z = &space.null;
    let n = coords.len();
    let energy = |x: &DVector<f64>| coords.free_energy(x.as_slice(), t);
    let mut f = energy(&x);
    let mut grad_norm = f64::INFINITY;
    for iter in 0..opts.max_iters {
        if z.ncols() == 0 {
            return Descent { x, f, converged: true, iterations: iter, grad_norm: 0.0 };
        }
        let grad = DVector::from_vec(coords.gradient(x.as_slice(), t));
        let rg = z.tr_mul(&grad);
        grad_norm = rg.norm();
        let diag = coords.hessian_diag(x.as_slice(), t);
        let hz = DMatrix::from_fn(n, z.ncols(), |r, c| diag[r] * z[(r, c)]);
        let reduced_h = z.tr_mul(&hz);
        let eig = reduced_h.symmetric_eigen();
        let scale = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        let (min_idx, min_eig) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
        let saddle = min_eig < -1e-8 * scale;
        if grad_norm <= opts.tol && !saddle {
            return Descent { x, f, converged: true, iterations: iter, grad_norm };
        }
        let floor = 1e-10 * scale;
        let coeffs = eig.eigenvectors.tr_mul(&rg);
        let scaled = DVector::from_fn(coeffs.len(), |i, _| -coeffs[i] / eig.eigenvalues[i].abs().max(floor));
        let mut dx = z * (&eig.eigenvectors * scaled);
        if saddle && grad_norm <= 1e-6 {
            let v = eig.eigenvectors.column(min_idx).into_owned();
            let v = if v.dot(&rg) > 0.0 { -v } else { v };
            dx += z * v * (1.0 + grad_norm).min(1.0);
        }
        let slope = grad.dot(&dx);
        let mut alpha = step_to_boundary(&x, &dx, 0.995);
        let mut accepted = None;
        for _ in 0..80 {
            let candidate = &x + alpha * &dx;
            let fc = energy(&candidate);
            if fc <= f + 1e-4 * alpha * slope.min(0.0) && fc.is_finite() {
                accepted = Some((candidate, fc));
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((candidate, fc)) if fc < f || grad_norm > opts.tol => {
                x = candidate;
                f = fc;
            }
            _ => {
                // No representable decrease is left.
                let converged = grad_norm <= 1e-7 && !saddle;
                return Descent { x, f, converged, iterations: iter, grad_norm };
            }
        }
    }
    Descent { x, f, converged: grad_norm <= opts.tol, iterations: opts.max_iters, grad_norm }
}
