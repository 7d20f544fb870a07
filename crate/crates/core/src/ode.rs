//! Explicit integrators for the small ODE systems that appear in the
//! profile and kernel computations (traveling-wave reduction, characteristic
//! and dissipative flows, eigenvector transport).

use nalgebra::DVector;

use crate::{Error, Result};

/// One classical fourth-order Runge-Kutta step.
pub fn rk4_step<F>(f: &F, t: f64, y: &DVector<f64>, h: f64) -> DVector<f64>
where
    F: Fn(f64, &DVector<f64>) -> DVector<f64>,
{
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &(y + &k1 * (0.5 * h)));
    let k3 = f(t + 0.5 * h, &(y + &k2 * (0.5 * h)));
    let k4 = f(t + h, &(y + &k3 * h));
    y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Adaptive Cash-Karp 4(5) integration from `t0` to `t1`.
///
/// Step size is controlled against `tol` (mixed absolute/relative); fails if
/// the step collapses below `1e-14 * |t1 - t0|`.
pub fn integrate_adaptive<F>(
    f: &F,
    t0: f64,
    y0: &DVector<f64>,
    t1: f64,
    tol: f64,
) -> Result<DVector<f64>>
where
    F: Fn(f64, &DVector<f64>) -> DVector<f64>,
{
    const A: [f64; 6] = [0.0, 0.2, 0.3, 0.6, 1.0, 0.875];
    const B: [[f64; 5]; 6] = [
        [0.0, 0.0, 0.0, 0.0, 0.0],
        [0.2, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0],
        [0.3, -0.9, 1.2, 0.0, 0.0],
        [-11.0 / 54.0, 2.5, -70.0 / 27.0, 35.0 / 27.0, 0.0],
        [
            1631.0 / 55296.0,
            175.0 / 512.0,
            575.0 / 13824.0,
            44275.0 / 110592.0,
            253.0 / 4096.0,
        ],
    ];
    const C5: [f64; 6] = [
        37.0 / 378.0,
        0.0,
        250.0 / 621.0,
        125.0 / 594.0,
        0.0,
        512.0 / 1771.0,
    ];
    const C4: [f64; 6] = [
        2825.0 / 27648.0,
        0.0,
        18575.0 / 48384.0,
        13525.0 / 55296.0,
        277.0 / 14336.0,
        0.25,
    ];

    let span = t1 - t0;
    if span == 0.0 {
        return Ok(y0.clone());
    }
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0.clone();
    let mut h = span / 16.0;
    let h_min = 1e-14 * span.abs();

    while (t1 - t) * dir > 0.0 {
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        let mut k: Vec<DVector<f64>> = Vec::with_capacity(6);
        for s in 0..6 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate() {
                ys += kj * (B[s][j] * h);
            }
            k.push(f(t + A[s] * h, &ys));
        }
        let mut y5 = y.clone();
        let mut y4 = y.clone();
        for s in 0..6 {
            y5 += &k[s] * (C5[s] * h);
            y4 += &k[s] * (C4[s] * h);
        }
        let scale = tol * (1.0 + y.amax());
        let err = (&y5 - &y4).amax();
        if err <= scale || h.abs() <= h_min {
            t += h;
            y = y5;
        }
        let safety = if err > 0.0 {
            0.9 * (scale / err).powf(0.2)
        } else {
            5.0
        };
        h *= safety.clamp(0.1, 5.0);
        if h.abs() < h_min {
            if err > scale {
                return Err(Error::ProfileFailure(format!(
                    "adaptive step collapsed at t = {t:.6e} (error {err:.3e})"
                )));
            }
            h = h_min * dir;
        }
    }
    if !y.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFiniteEvaluation {
            context: "adaptive ODE integration".into(),
        });
    }
    Ok(y)
}

/// Integrate along a monotone sequence of output points, returning the state
/// at each of them (the first entry is `y0` at `points[0]`).
pub fn integrate_along<F>(
    f: &F,
    points: &[f64],
    y0: &DVector<f64>,
    tol: f64,
) -> Result<Vec<DVector<f64>>>
where
    F: Fn(f64, &DVector<f64>) -> DVector<f64>,
{
    let mut out = Vec::with_capacity(points.len());
    let mut y = y0.clone();
    out.push(y.clone());
    for w in points.windows(2) {
        y = integrate_adaptive(f, w[0], &y, w[1], tol)?;
        out.push(y.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::dvector;

    #[test]
    fn adaptive_integrates_exponential() {
        let f = |_t: f64, y: &DVector<f64>| -y.clone();
        let y = integrate_adaptive(&f, 0.0, &dvector![1.0], 2.0, 1e-11).unwrap();
        assert_relative_eq!(y[0], (-2.0_f64).exp(), epsilon = 1e-9);
    }

    #[test]
    fn adaptive_handles_backward_time() {
        let f = |t: f64, _y: &DVector<f64>| dvector![t.cos()];
        let y = integrate_adaptive(&f, 1.0, &dvector![1.0_f64.sin()], 0.0, 1e-12).unwrap();
        assert_relative_eq!(y[0], 0.0, epsilon = 1e-10);
    }

    #[test]
    fn rk4_fourth_order() {
        let f = |t: f64, _y: &DVector<f64>| dvector![(2.0 * t).exp()];
        let exact = |t: f64| 0.5 * ((2.0 * t_f(t)).exp() - 1.0);
        fn t_f(t: f64) -> f64 {
            t
        }
        let mut coarse = dvector![0.0];
        for i in 0..10 {
            coarse = rk4_step(&f, i as f64 * 0.1, &coarse, 0.1);
        }
        let mut fine = dvector![0.0];
        for i in 0..20 {
            fine = rk4_step(&f, i as f64 * 0.05, &fine, 0.05);
        }
        let e_c = (coarse[0] - exact(1.0)).abs();
        let e_f = (fine[0] - exact(1.0)).abs();
        assert!(e_c / e_f > 12.0, "expected ~16x error drop, got {}", e_c / e_f);
    }
}
