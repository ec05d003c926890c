//! Box-constrained quasi-Newton minimization (projected L-BFGS).
//!
//! Built for low-dimensional hyperparameter searches where objective and
//! gradient evaluations dominate cost: the line search only needs values,
//! gradients are requested at accepted iterates.

/// Objective with separate value and value+gradient entry points.
pub trait Objective {
    fn value(&self, x: &[f64]) -> f64;
    fn value_grad(&self, x: &[f64]) -> (f64, Vec<f64>);
}

impl<V, G> Objective for (V, G)
where
    V: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> (f64, Vec<f64>),
{
    fn value(&self, x: &[f64]) -> f64 {
        (self.0)(x)
    }
    fn value_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (self.1)(x)
    }
}

/// Outcome of a minimization run.
#[derive(Clone, Debug)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn project(x: &mut [f64], lo: &[f64], hi: &[f64]) {
    for i in 0..x.len() {
        x[i] = x[i].clamp(lo[i], hi[i]);
    }
}

/// Sup-norm of the projected gradient: zero exactly at a box-constrained
/// stationary point.
fn projected_grad_norm(x: &[f64], g: &[f64], lo: &[f64], hi: &[f64]) -> f64 {
    let mut norm = 0.0f64;
    for i in 0..x.len() {
        let step = (x[i] - g[i]).clamp(lo[i], hi[i]) - x[i];
        norm = norm.max(step.abs());
    }
    norm
}

/// Minimize `f` over the box `[lo, hi]` starting from `x0`.
///
/// L-BFGS two-loop recursion (memory 8) with Armijo backtracking; iterates
/// are projected onto the box and curvature pairs are only stored when they
/// keep the implicit Hessian positive. Stops when the projected-gradient
/// sup-norm drops below `tol` or the objective stalls.
pub fn minimize<O: Objective>(
    f: &O,
    x0: &[f64],
    lo: &[f64],
    hi: &[f64],
    max_iters: usize,
    tol: f64,
) -> OptimResult {
    let n = x0.len();
    assert_eq!(lo.len(), n);
    assert_eq!(hi.len(), n);
    let mut x = x0.to_vec();
    project(&mut x, lo, hi);

    let (mut fx, mut g) = f.value_grad(&x);
    if !fx.is_finite() {
        return OptimResult {
            x,
            value: fx,
            iterations: 0,
            converged: false,
        };
    }

    const MEMORY: usize = 8;
    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut rho_hist: Vec<f64> = Vec::new();
    let mut stalls = 0usize;

    for iter in 0..max_iters {
        if projected_grad_norm(&x, &g, lo, hi) < tol {
            return OptimResult {
                x,
                value: fx,
                iterations: iter,
                converged: true,
            };
        }

        // Two-loop recursion for the search direction d = -H g.
        let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
        let m = s_hist.len();
        let mut alphas = vec![0.0f64; m];
        for i in (0..m).rev() {
            let a = rho_hist[i] * dot(&s_hist[i], &d);
            alphas[i] = a;
            axpy(-a, &y_hist[i], &mut d);
        }
        if m > 0 {
            let last = m - 1;
            let gamma = dot(&s_hist[last], &y_hist[last]) / dot(&y_hist[last], &y_hist[last]);
            if gamma.is_finite() && gamma > 0.0 {
                d.iter_mut().for_each(|v| *v *= gamma);
            }
        }
        for i in 0..m {
            let b = rho_hist[i] * dot(&y_hist[i], &d);
            axpy(alphas[i] - b, &s_hist[i], &mut d);
        }
        // Fall back to steepest descent when the direction is not a descent.
        if dot(&d, &g) >= 0.0 {
            d = g.iter().map(|v| -v).collect();
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
        }

        // Line search. When the unit step stays inside the box, a weak Wolfe
        // search keeps the curvature pairs healthy; when it would leave the
        // box, fall back to Armijo backtracking on the projected path.
        let unit_in_box = (0..n).all(|i| {
            let v = x[i] + d[i];
            v >= lo[i] && v <= hi[i]
        });
        let accepted = if unit_in_box {
            wolfe_search(f, &x, &d, fx, &g)
        } else {
            armijo_projected(f, &x, &d, fx, &g, lo, hi)
        };
        let Some((xt, ft, gt)) = accepted else {
            // No progress possible along this direction; treat as converged
            // to the box/line-search resolution.
            let converged = projected_grad_norm(&x, &g, lo, hi) < tol.max(1e-6);
            return OptimResult {
                x,
                value: fx,
                iterations: iter,
                converged,
            };
        };

        let s: Vec<f64> = (0..n).map(|i| xt[i] - x[i]).collect();
        let y: Vec<f64> = (0..n).map(|i| gt[i] - g[i]).collect();
        let sy = dot(&s, &y);
        if sy > 1e-10 * norm2(&s).sqrt() * norm2(&y).sqrt() {
            s_hist.push(s);
            y_hist.push(y);
            rho_hist.push(1.0 / sy);
            if s_hist.len() > MEMORY {
                s_hist.remove(0);
                y_hist.remove(0);
                rho_hist.remove(0);
            }
        }

        let rel_drop = (fx - ft).abs() / fx.abs().max(1.0);
        x = xt;
        fx = ft;
        g = gt;
        if rel_drop < 1e-13 {
            stalls += 1;
            if stalls >= 2 {
                return OptimResult {
                    x,
                    value: fx,
                    iterations: iter + 1,
                    converged: true,
                };
            }
        } else {
            stalls = 0;
        }
    }

    let converged = projected_grad_norm(&x, &g, lo, hi) < tol;
    OptimResult {
        x,
        value: fx,
        iterations: max_iters,
        converged,
    }
}

const C1: f64 = 1e-4;
const C2: f64 = 0.9;

// Weak Wolfe search (sufficient decrease + curvature) by bracketing.
// Returns the accepted point with its value and gradient, or the best
// Armijo-acceptable point seen if curvature never holds.
fn wolfe_search<O: Objective>(
    f: &O,
    x: &[f64],
    d: &[f64],
    fx: f64,
    g: &[f64],
) -> Option<(Vec<f64>, f64, Vec<f64>)> {
    let g0d = dot(g, d);
    if g0d >= 0.0 {
        return None;
    }
    let mut t = 1.0f64;
    let (mut t_lo, mut t_hi) = (0.0f64, f64::INFINITY);
    let mut fallback: Option<(Vec<f64>, f64, Vec<f64>)> = None;
    for _ in 0..30 {
        let xt: Vec<f64> = (0..x.len()).map(|i| x[i] + t * d[i]).collect();
        let (ft, gt) = f.value_grad(&xt);
        if !ft.is_finite() || ft > fx + C1 * t * g0d {
            t_hi = t;
            t = 0.5 * (t_lo + t_hi);
        } else if dot(&gt, d) < C2 * g0d {
            fallback = Some((xt, ft, gt));
            t_lo = t;
            t = if t_hi.is_finite() {
                0.5 * (t_lo + t_hi)
            } else {
                2.0 * t
            };
        } else {
            return Some((xt, ft, gt));
        }
    }
    fallback
}

// Armijo backtracking along the projected path x -> P(x + t d).
fn armijo_projected<O: Objective>(
    f: &O,
    x: &[f64],
    d: &[f64],
    fx: f64,
    g: &[f64],
    lo: &[f64],
    hi: &[f64],
) -> Option<(Vec<f64>, f64, Vec<f64>)> {
    let n = x.len();
    let mut t = 1.0f64;
    for _ in 0..40 {
        let mut xt: Vec<f64> = (0..n).map(|i| x[i] + t * d[i]).collect();
        project(&mut xt, lo, hi);
        let displacement: Vec<f64> = (0..n).map(|i| xt[i] - x[i]).collect();
        let decrease = dot(g, &displacement);
        if decrease < 0.0 {
            let ft = f.value(&xt);
            if ft.is_finite() && ft <= fx + C1 * decrease {
                let (ft2, gt) = f.value_grad(&xt);
                return Some((xt, ft2.min(ft), gt));
            }
        }
        t *= 0.5;
    }
    None
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a)
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for i in 0..y.len() {
        y[i] += a * x[i];
    }
}
