//! Finite differences with one Richardson step.
//!
//! Probes return `None` outside the admissible set; stencils then fall back to
//! one-sided formulas of the same order.

/// Default step pair `(h, h/2)` for flux derivatives.
pub const STEP: f64 = 1e-3;

/// First derivative of `f` at `x`.
pub fn d1(f: &dyn Fn(f64) -> Option<f64>, x: f64, h: f64) -> Option<f64> {
    let est = |h: f64| -> Option<f64> {
        match (f(x + h), f(x - h)) {
            (Some(p), Some(m)) => Some((p - m) / (2.0 * h)),
            _ => {
                let s = if f(x + 2.0 * h).is_some() { 1.0 } else { -1.0 };
                let f0 = f(x)?;
                let f1 = f(x + s * h)?;
                let f2 = f(x + 2.0 * s * h)?;
                Some(s * (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h))
            }
        }
    };
    let a = est(h)?;
    let b = est(h / 2.0)?;
    Some((4.0 * b - a) / 3.0)
}

/// Second derivative of `f` at `x`.
pub fn d2(f: &dyn Fn(f64) -> Option<f64>, x: f64, h: f64) -> Option<f64> {
    let est = |h: f64| -> Option<f64> {
        let f0 = f(x)?;
        match (f(x + h), f(x - h)) {
            (Some(p), Some(m)) => Some((p - 2.0 * f0 + m) / (h * h)),
            _ => {
                let s = if f(x + 3.0 * h).is_some() { 1.0 } else { -1.0 };
                let f1 = f(x + s * h)?;
                let f2 = f(x + 2.0 * s * h)?;
                let f3 = f(x + 3.0 * s * h)?;
                Some((2.0 * f0 - 5.0 * f1 + 4.0 * f2 - f3) / (h * h))
            }
        }
    };
    let a = est(h)?;
    let b = est(h / 2.0)?;
    Some((4.0 * b - a) / 3.0)
}

/// Value at 0 of the quadratic through three samples `(x_i, y_i)`.
pub fn extrapolate_to_zero(xs: [f64; 3], ys: [f64; 3]) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        let mut w = 1.0;
        for j in 0..3 {
            if i != j {
                w *= (0.0 - xs[j]) / (xs[i] - xs[j]);
            }
        }
        acc += w * ys[i];
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_of_smooth_functions() {
        let f = |x: f64| Some(x.sin() * x.exp());
        let x = 0.4_f64;
        let exact1 = x.exp() * (x.sin() + x.cos());
        let exact2 = 2.0 * x.exp() * x.cos();
        assert!((d1(&f, x, STEP).unwrap() - exact1).abs() < 1e-11);
        assert!((d2(&f, x, STEP).unwrap() - exact2).abs() < 1e-7);
    }

    #[test]
    fn one_sided_near_boundary() {
        let f = |x: f64| if x >= 0.0 { Some(x * x * x + x) } else { None };
        let x = 2e-4;
        assert!((d1(&f, x, STEP).unwrap() - (3.0 * x * x + 1.0)).abs() < 1e-8);
        assert!((d2(&f, x, STEP).unwrap() - 6.0 * x).abs() < 1e-5);
    }

    #[test]
    fn quadratic_extrapolation_is_exact_on_quadratics() {
        let q = |x: f64| 1.5 - 2.0 * x + 0.25 * x * x;
        let xs = [0.1, 0.05, 0.025];
        let v = extrapolate_to_zero(xs, xs.map(q));
        assert!((v - 1.5).abs() < 1e-13);
    }
}
