//! Nelder–Mead simplex search with dimension-adaptive coefficients.

#[derive(Debug, Clone, Copy)]
pub struct NmOptions {
    pub max_evals: usize,
    /// Stop once the simplex diameter falls below this.
    pub diameter_tol: f64,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
    /// After convergence, rebuild a fresh simplex around the best point up to
    /// this many times; collapsed simplices are common on flat valleys.
    pub rebuilds: usize,
}

impl Default for NmOptions {
    fn default() -> Self {
        NmOptions { max_evals: 50_000, diameter_tol: 1e-8, initial_step: 0.1, rebuilds: 3 }
    }
}

#[derive(Debug, Clone)]
pub struct NmResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Best value after each iteration.
    pub trace: Vec<f64>,
}

pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &NmOptions) -> NmResult {
    let n = x0.len();
    assert!(n > 0, "empty parameter vector");
    let nf = n as f64;
    let (alpha, gamma) = (1.0, 1.0 + 2.0 / nf);
    let (rho, sigma) = (0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);

    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut best: (Vec<f64>, f64) = (x0.to_vec(), eval(x0, &mut evals));
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    for round in 0..=opts.rebuilds {
        let step = opts.initial_step * 0.5f64.powi(round as i32);
        let mut simplex: Vec<(Vec<f64>, f64)> = vec![best.clone()];
        for i in 0..n {
            let mut x = best.0.clone();
            x[i] += step;
            let v = eval(&x, &mut evals);
            simplex.push((x, v));
        }
        converged = false;
        while evals < opts.max_evals {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            iterations += 1;
            trace.push(simplex[0].1);
            if diameter(&simplex) < opts.diameter_tol {
                converged = true;
                break;
            }
            let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|p| p.0[j]).sum::<f64>() / nf).collect();
            let worst = simplex[n].clone();
            let along = |t: f64| -> Vec<f64> { (0..n).map(|j| centroid[j] + t * (centroid[j] - worst.0[j])).collect() };
            let xr = along(alpha);
            let fr = eval(&xr, &mut evals);
            if fr < simplex[0].1 {
                let xe = along(gamma);
                let fe = eval(&xe, &mut evals);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
            } else {
                let (xc, fc) = if fr < worst.1 {
                    let xc = along(rho * alpha);
                    let fc = eval(&xc, &mut evals);
                    (xc, fc)
                } else {
                    let xc = along(-rho);
                    let fc = eval(&xc, &mut evals);
                    (xc, fc)
                };
                if fc < fr.min(worst.1) {
                    simplex[n] = (xc, fc);
                } else {
                    let x_best = simplex[0].0.clone();
                    for p in simplex.iter_mut().skip(1) {
                        let x: Vec<f64> = (0..n).map(|j| x_best[j] + sigma * (p.0[j] - x_best[j])).collect();
                        let v = eval(&x, &mut evals);
                        *p = (x, v);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let improved = simplex[0].1 < best.1;
        if simplex[0].1 <= best.1 {
            best = simplex[0].clone();
        }
        if evals >= opts.max_evals || (round > 0 && !improved) {
            break;
        }
    }
    NmResult { x: best.0, value: best.1, evals, iterations, converged, trace }
}

fn diameter(simplex: &[(Vec<f64>, f64)]) -> f64 {
    let x0 = &simplex[0].0;
    simplex[1..].iter().map(|p| p.0.iter().zip(x0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = nelder_mead(f, &[-1.2, 1.0], &NmOptions::default());
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6, "{:?}", r.x);
    }

    #[test]
    fn respects_budget_and_trace_is_monotone() {
        let f = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let opts = NmOptions { max_evals: 200, ..NmOptions::default() };
        let r = nelder_mead(f, &[1.0; 6], &opts);
        assert!(r.evals <= 200 + 7);
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn quadratic_in_eight_dimensions() {
        let f = |x: &[f64]| x.iter().enumerate().map(|(i, v)| (i + 1) as f64 * (v - 0.5).powi(2)).sum::<f64>();
        let r = nelder_mead(f, &[0.0; 8], &NmOptions::default());
        assert!(r.value < 1e-12, "{}", r.value);
    }
}
