//! Classical divided-difference stencils on a uniform grid.
//!
//! Central windows in the interior, one-sided windows at the ends. An
//! even-order derivative at node k uses the single window centered there;
//! an odd-order one averages the two adjacent windows, which reproduces the
//! familiar central formulas over 2h. Every window is a plain j-th forward
//! difference, so the result is exact on polynomials of degree <= j.

use super::TranscriptionError;

/// C(j, l) as f64; j stays small here so the product form is exact.
pub(crate) fn binomial(j: usize, l: usize) -> f64 {
    let mut c = 1.0f64;
    for i in 0..l {
        c = c * (j - i) as f64 / (i + 1) as f64;
    }
    c
}

/// j-th forward difference of the window starting at s, divided by h^j.
fn window(samples: &[Vec<f64>], s: usize, j: usize, h: f64) -> Vec<f64> {
    let n = samples[0].len();
    let mut out = vec![0.0; n];
    for l in 0..=j {
        let w = if (j - l) % 2 == 0 { binomial(j, l) } else { -binomial(j, l) };
        for (o, v) in out.iter_mut().zip(&samples[s + l]) {
            *o += w * v;
        }
    }
    let hj = h.powi(j as i32);
    for o in out.iter_mut() {
        *o /= hj;
    }
    out
}

/// Per-node j-th derivative estimates for per-node samples with step h.
pub fn finite_difference(
    samples: &[Vec<f64>],
    order: usize,
    h: f64,
) -> Result<Vec<Vec<f64>>, TranscriptionError> {
    if samples.is_empty() {
        return Err(TranscriptionError::Shape("no samples".into()));
    }
    if order == 0 {
        return Ok(samples.to_vec());
    }
    let steps = samples.len() - 1;
    if steps < order + 1 {
        return Err(TranscriptionError::GridTooShort { steps, order });
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(TranscriptionError::Shape("step size must be positive".into()));
    }
    let n = samples[0].len();
    if samples.iter().any(|s| s.len() != n) {
        return Err(TranscriptionError::Shape("ragged sample vectors".into()));
    }
    let last_start = steps - order;
    let mut out = Vec::with_capacity(samples.len());
    for k in 0..=steps {
        if order % 2 == 0 {
            let s = (k as isize - (order / 2) as isize).clamp(0, last_start as isize) as usize;
            out.push(window(samples, s, order, h));
        } else {
            let lo = k as isize - ((order + 1) / 2) as isize;
            let hi = k as isize - ((order - 1) / 2) as isize;
            if lo >= 0 && hi as usize <= last_start {
                let a = window(samples, lo as usize, order, h);
                let b = window(samples, hi as usize, order, h);
                out.push(a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect());
            } else {
                let s = lo.clamp(0, last_start as isize) as usize;
                out.push(window(samples, s, order, h));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nodes(n_steps: usize) -> Vec<f64> {
        (0..=n_steps).map(|k| k as f64 / n_steps as f64).collect()
    }

    #[test]
    fn constant_samples_have_zero_slope() {
        let samples: Vec<Vec<f64>> = (0..=8).map(|_| vec![3.7]).collect();
        let d = finite_difference(&samples, 1, 0.125).unwrap();
        for v in d {
            assert!(v[0].abs() < 1e-12);
        }
    }

    #[test]
    fn exact_on_quadratics_at_second_order() {
        let n = 10;
        let h = 1.0 / n as f64;
        let samples: Vec<Vec<f64>> = nodes(n).iter().map(|t| vec![t * t]).collect();
        let d = finite_difference(&samples, 2, h).unwrap();
        for v in &d {
            assert!((v[0] - 2.0).abs() < 1e-9, "got {}", v[0]);
        }
    }

    #[test]
    fn cubic_second_derivative_at_interior_nodes() {
        let n = 8;
        let h = 1.0 / n as f64;
        let ts = nodes(n);
        let samples: Vec<Vec<f64>> = ts.iter().map(|t| vec![t * t * t]).collect();
        let d = finite_difference(&samples, 2, h).unwrap();
        for k in 1..n {
            assert!((d[k][0] - 6.0 * ts[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn first_derivative_is_central_in_the_interior() {
        let n = 6;
        let h = 1.0 / n as f64;
        let samples: Vec<Vec<f64>> = nodes(n).iter().map(|t| vec![t * t]).collect();
        let d = finite_difference(&samples, 1, h).unwrap();
        for k in 1..n {
            let central = (samples[k + 1][0] - samples[k - 1][0]) / (2.0 * h);
            assert!((d[k][0] - central).abs() < 1e-12);
        }
        // One-sided ends are still exact on linears, and first order here.
        assert!((d[0][0] - h).abs() < 1e-12);
    }

    #[test]
    fn exactness_up_to_the_stencil_order() {
        let n = 9;
        let h = 0.2;
        let ts: Vec<f64> = (0..=n).map(|k| k as f64 * h).collect();
        let poly = |t: f64| 1.0 - 2.0 * t + 0.5 * t * t * t;
        let samples: Vec<Vec<f64>> = ts.iter().map(|t| vec![poly(*t)]).collect();
        let d3 = finite_difference(&samples, 3, h).unwrap();
        for v in &d3 {
            assert!((v[0] - 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn short_grid_is_rejected() {
        let samples: Vec<Vec<f64>> = (0..=2).map(|k| vec![k as f64]).collect();
        let err = finite_difference(&samples, 2, 0.5).unwrap_err();
        assert!(matches!(err, TranscriptionError::GridTooShort { .. }));
    }
}
