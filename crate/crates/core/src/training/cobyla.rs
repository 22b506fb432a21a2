//! Powell's COBYLA for unconstrained problems.
//!
//! The method keeps a simplex of `n + 1` evaluated points, fits the linear
//! interpolant through them and steps to the minimizer of that model inside
//! a ball of radius `rho`. Simplex geometry is repaired when a vertex drifts
//! too far from the best vertex or the simplex becomes too flat, and `rho`
//! is halved when neither a trust-region step nor a geometry step helps.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

// Powell's constants.
const ALPHA: f64 = 0.25;
const BETA: f64 = 2.1;
const GAMMA: f64 = 0.5;
const DELTA: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CobylaStatus {
    /// `rho` reached the final trust-region radius.
    Converged,
    /// The evaluation budget was exhausted.
    MaxEvals,
    /// The objective returned NaN or infinity; the best finite point is kept.
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CobylaResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub status: CobylaStatus,
}

struct Stop(CobylaStatus);

struct Counter<F> {
    f: F,
    evals: usize,
    max_evals: usize,
    best_x: Vec<f64>,
    best_f: f64,
}

impl<F: FnMut(&[f64]) -> f64> Counter<F> {
    fn eval(&mut self, x: &[f64]) -> std::result::Result<f64, Stop> {
        if self.evals >= self.max_evals {
            return Err(Stop(CobylaStatus::MaxEvals));
        }
        self.evals += 1;
        let v = (self.f)(x);
        if !v.is_finite() {
            if self.best_x.is_empty() {
                self.best_x = x.to_vec();
                self.best_f = v;
            }
            return Err(Stop(CobylaStatus::NonFinite));
        }
        if self.best_x.is_empty() || v < self.best_f {
            self.best_x = x.to_vec();
            self.best_f = v;
        }
        Ok(v)
    }
}

struct Simplex {
    base: Vec<f64>,
    f_base: f64,
    /// Displacements of the other vertices from `base`.
    dirs: Vec<Vec<f64>>,
    fvals: Vec<f64>,
}

impl Simplex {
    /// Makes vertex `k` the base vertex.
    fn pivot(&mut self, k: usize) {
        let dk = self.dirs[k].clone();
        for (b, d) in self.base.iter_mut().zip(&dk) {
            *b += d;
        }
        for (j, dj) in self.dirs.iter_mut().enumerate() {
            if j == k {
                dj.iter_mut().for_each(|x| *x = -*x);
            } else {
                for (x, d) in dj.iter_mut().zip(&dk) {
                    *x -= d;
                }
            }
        }
        std::mem::swap(&mut self.f_base, &mut self.fvals[k]);
    }

    fn point(&self, dx: &[f64]) -> Vec<f64> {
        self.base.iter().zip(dx).map(|(b, d)| b + d).collect()
    }

    /// Rows of the inverse displacement matrix: `rows[j] . dirs[i] = delta_ij`.
    fn inverse_rows(&self) -> Option<Vec<Vec<f64>>> {
        let n = self.dirs.len();
        let m = DMatrix::from_fn(n, n, |i, j| self.dirs[i][j]);
        let inv = m.try_inverse()?;
        // (M^-1) columns are the dual vectors; return them as rows.
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|j| inv.column(j).iter().copied().collect())
            .collect();
        rows.iter().flatten().all(|x| x.is_finite()).then_some(rows)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Minimizes `f` from `x0` without derivatives.
///
/// `rho_begin` is the initial trust-region radius (and initial simplex edge),
/// `rho_end` the final one. At most `max_evals` evaluations are made. The
/// returned point is the best one evaluated, so `f` never exceeds `f(x0)`.
pub fn cobyla_minimize<F: FnMut(&[f64]) -> f64>(
    f: F,
    x0: &[f64],
    rho_begin: f64,
    rho_end: f64,
    max_evals: usize,
) -> Result<CobylaResult> {
    let n = x0.len();
    if n == 0 {
        return Err(Error::Training("COBYLA needs at least one variable".into()));
    }
    if max_evals < n + 2 {
        return Err(Error::Training(format!(
            "COBYLA needs at least {} evaluations for {n} variables, got {max_evals}",
            n + 2
        )));
    }
    if !(rho_begin > 0.0) || !(rho_end > 0.0) || rho_end > rho_begin {
        return Err(Error::Training(format!(
            "trust-region radii must satisfy 0 < rho_end <= rho_begin (got {rho_begin}, {rho_end})"
        )));
    }
    let mut counter = Counter {
        f,
        evals: 0,
        max_evals,
        best_x: Vec::new(),
        best_f: f64::INFINITY,
    };
    let status = match run(&mut counter, x0, rho_begin, rho_end) {
        Ok(()) => CobylaStatus::Converged,
        Err(Stop(s)) => s,
    };
    Ok(CobylaResult {
        x: counter.best_x,
        f: counter.best_f,
        evals: counter.evals,
        status,
    })
}

fn initial_simplex<F: FnMut(&[f64]) -> f64>(
    counter: &mut Counter<F>,
    x0: &[f64],
    rho: f64,
) -> std::result::Result<Simplex, Stop> {
    let n = x0.len();
    let f0 = counter.eval(x0)?;
    let mut simplex = Simplex {
        base: x0.to_vec(),
        f_base: f0,
        dirs: Vec::with_capacity(n),
        fvals: Vec::with_capacity(n),
    };
    for j in 0..n {
        let mut d = vec![0.0; n];
        d[j] = rho;
        let fj = counter.eval(&simplex.point(&d))?;
        simplex.dirs.push(d);
        simplex.fvals.push(fj);
        if fj < simplex.f_base {
            simplex.pivot(j);
        }
    }
    Ok(simplex)
}

fn run<F: FnMut(&[f64]) -> f64>(
    counter: &mut Counter<F>,
    x0: &[f64],
    rho_begin: f64,
    rho_end: f64,
) -> std::result::Result<(), Stop> {
    let n = x0.len();
    let mut rho = rho_begin;
    let mut simplex = initial_simplex(counter, x0, rho)?;
    let mut allow_geometry = true;

    loop {
        // Best vertex first.
        if let Some((k, &fk)) = simplex
            .fvals
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
        {
            if fk < simplex.f_base {
                simplex.pivot(k);
            }
        }

        let Some(inv) = simplex.inverse_rows() else {
            // Degenerate simplex: rebuild it around the best point.
            let base = simplex.base.clone();
            simplex = initial_simplex(counter, &base, rho)?;
            continue;
        };
        let diffs: Vec<f64> = simplex.fvals.iter().map(|fj| fj - simplex.f_base).collect();
        // Model gradient g solves dirs[j] . g = f_j - f_base.
        let mut grad = vec![0.0; n];
        for (row, df) in inv.iter().zip(&diffs) {
            for (g, r) in grad.iter_mut().zip(row) {
                *g += r * df;
            }
        }

        let parsig = ALPHA * rho;
        let pareta = BETA * rho;
        let vsig: Vec<f64> = inv.iter().map(|r| 1.0 / norm(r)).collect();
        let veta: Vec<f64> = simplex.dirs.iter().map(|d| norm(d)).collect();
        let acceptable = vsig.iter().all(|&s| s >= parsig) && veta.iter().all(|&e| e <= pareta);

        if !acceptable && allow_geometry {
            let far = veta
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > pareta)
                .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
                .map(|(j, _)| j);
            let flat = || {
                vsig.iter()
                    .enumerate()
                    .filter(|(_, &s)| s < parsig)
                    .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
                    .map(|(j, _)| j)
            };
            if let Some(jdrop) = far.or_else(flat) {
                let scale = GAMMA * rho * vsig[jdrop];
                let mut dx: Vec<f64> = inv[jdrop].iter().map(|x| scale * x).collect();
                if dot(&grad, &dx) > 0.0 {
                    dx.iter_mut().for_each(|x| *x = -*x);
                }
                let fnew = counter.eval(&simplex.point(&dx))?;
                simplex.dirs[jdrop] = dx;
                simplex.fvals[jdrop] = fnew;
                allow_geometry = false;
                continue;
            }
        }

        // Trust-region step on the linear model.
        let gnorm = norm(&grad);
        let mut improved = false;
        if gnorm > 0.0 && gnorm.is_finite() {
            let dx: Vec<f64> = grad.iter().map(|g| -rho * g / gnorm).collect();
            let predicted = rho * gnorm;
            let fnew = counter.eval(&simplex.point(&dx))?;
            let actual = simplex.f_base - fnew;

            let mut ratio = if actual <= 0.0 { 1.0 } else { 0.0 };
            let mut jdrop = None;
            let mut sigbar = vec![0.0; n];
            for j in 0..n {
                let t = dot(&inv[j], &dx).abs();
                if t > ratio {
                    jdrop = Some(j);
                    ratio = t;
                }
                sigbar[j] = t * vsig[j];
            }
            let mut edgmax = DELTA * rho;
            let mut far = None;
            for j in 0..n {
                if sigbar[j] >= parsig || sigbar[j] >= vsig[j] {
                    let dist = if actual > 0.0 {
                        norm(
                            &dx.iter()
                                .zip(&simplex.dirs[j])
                                .map(|(a, b)| a - b)
                                .collect::<Vec<_>>(),
                        )
                    } else {
                        veta[j]
                    };
                    if dist > edgmax {
                        far = Some(j);
                        edgmax = dist;
                    }
                }
            }
            if let Some(j) = far.or(jdrop) {
                simplex.dirs[j] = dx;
                simplex.fvals[j] = fnew;
                improved = actual > 0.0 && actual >= 0.1 * predicted;
            }
        }
        if improved {
            allow_geometry = false;
            continue;
        }
        if !acceptable {
            allow_geometry = true;
            continue;
        }
        if rho <= rho_end {
            return Ok(());
        }
        rho *= 0.5;
        if rho <= 1.5 * rho_end {
            rho = rho_end;
        }
        allow_geometry = false;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_quadratic() {
        let r = cobyla_minimize(|x| (x[0] - 2.0).powi(2), &[0.0], 1.0, 2e-4, 50).unwrap();
        assert!((r.x[0] - 2.0).abs() <= 0.01, "{r:?}");
        assert!(r.evals <= 50);
    }

    #[test]
    fn sphere() {
        let r =
            cobyla_minimize(|x| x[0] * x[0] + x[1] * x[1], &[3.0, 4.0], 1.0, 2e-4, 200).unwrap();
        assert!(r.f <= 1e-3, "{r:?}");
    }

    #[test]
    fn budget_is_exact() {
        let mut calls = 0;
        let r = cobyla_minimize(
            |x| {
                calls += 1;
                x.iter().map(|v| (v - 1.0).powi(2)).sum()
            },
            &[0.0, 0.0, 0.0],
            1.0,
            1e-8,
            5,
        )
        .unwrap();
        assert_eq!(r.evals, 5);
        assert_eq!(calls, 5);
        assert_eq!(r.status, CobylaStatus::MaxEvals);
    }

    #[test]
    fn non_finite_value_aborts_with_best_point() {
        let r = cobyla_minimize(
            |x| {
                if x[0] > 0.5 {
                    f64::NAN
                } else {
                    (x[0] + 1.0).powi(2)
                }
            },
            &[0.0],
            1.0,
            1e-4,
            100,
        )
        .unwrap();
        assert_eq!(r.status, CobylaStatus::NonFinite);
        assert_eq!(r.x, vec![0.0]);
        assert_eq!(r.f, 1.0);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(cobyla_minimize(|_| 0.0, &[], 1.0, 1e-4, 10).is_err());
        assert!(cobyla_minimize(|_| 0.0, &[0.0, 0.0], 1.0, 1e-4, 3).is_err());
        assert!(cobyla_minimize(|_| 0.0, &[0.0], 1e-4, 1.0, 10).is_err());
    }

    #[test]
    fn converges_on_rosenbrock_like_valley() {
        let r = cobyla_minimize(
            |x| (1.0 - x[0]).powi(2) + 10.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.0, 1.0],
            0.5,
            1e-6,
            2000,
        )
        .unwrap();
        assert!(r.f < 1e-4, "{r:?}");
    }
}
