//! Derivative-free simplex descent.
//!
//! Standard coefficients: reflection 1, expansion 2, inside/outside
//! contraction 1/2, shrink 1/2. Vertices are kept sorted by objective value;
//! ties keep their previous order, so a run is fully deterministic.

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

#[derive(Debug, Clone)]
pub(crate) struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub iters: usize,
    pub converged: bool,
}

/// Minimizes `f` from an axis-aligned initial simplex `x0 + step_i e_i`.
///
/// Stops once the spread of objective values across the simplex is at most
/// `tol · (|f_best| + tol)`, or after `max_iters` iterations.
pub(crate) fn minimize<F>(f: F, x0: &[f64], steps: &[f64], max_iters: usize, tol: f64) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += steps[i];
        let fv = f(&v);
        simplex.push((v, fv));
    }
    sort(&mut simplex);

    let mut iters = 0;
    let mut converged = false;
    let mut centroid = vec![0.0; n];
    while iters < max_iters {
        let (best, worst) = (simplex[0].1, simplex[n].1);
        if worst - best <= tol * (best.abs() + tol) {
            converged = true;
            break;
        }
        iters += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for (v, _) in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(REFLECT);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = along(EXPAND);
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = along(REFLECT * CONTRACT);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = along(-CONTRACT);
                let fc = f(&xc);
                (xc, fc)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let anchor = simplex[0].0.clone();
                for (v, fv) in simplex.iter_mut().skip(1) {
                    for (x, a) in v.iter_mut().zip(&anchor) {
                        *x = a + SHRINK * (*x - a);
                    }
                    *fv = f(v);
                }
            }
        }
        sort(&mut simplex);
    }
    let (x, f) = simplex.swap_remove(0);
    Minimum {
        x,
        f,
        iters,
        converged,
    }
}

fn sort(simplex: &mut [(Vec<f64>, f64)]) {
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
}
