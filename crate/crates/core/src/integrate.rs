//! Embedded Dormand–Prince 5(4) integrator with PI step control, plus a
//! fixed-step classical RK4 fallback for debugging.
//!
//! Steps are clipped so that requested grid times are hit exactly; a
//! caller-supplied hook runs after every accepted step (used by law
//! integrators to clamp tiny negative entries and renormalize).

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

/// 5th-order weights (identical to the last A row: FSAL).
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];

/// 4th-order embedded weights.
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Debug, Clone)]
pub struct OdeOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub h_init: Option<f64>,
    pub h_min: f64,
    pub max_steps: usize,
    /// Fixed-step classical RK4 with the given step, bypassing adaptivity.
    pub fixed_step: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            abs_tol: 1e-8,
            rel_tol: 1e-6,
            h_init: None,
            h_min: 1e-13,
            max_steps: 10_000_000,
            fixed_step: None,
        }
    }
}

/// Integrates `dy/dt = rhs(t, y)` from `t0` to the last grid point,
/// recording the solution at every grid time. `grid` must be strictly
/// increasing with `grid[0] >= t0`.
pub fn solve<F, P>(
    mut rhs: F,
    y0: &[f64],
    t0: f64,
    grid: &[f64],
    opts: &OdeOptions,
    mut post_step: P,
) -> Result<Vec<(f64, Vec<f64>)>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    P: FnMut(&mut [f64]),
{
    if grid.is_empty() {
        return Ok(Vec::new());
    }
    if let Some(h) = opts.fixed_step {
        return solve_rk4(rhs, y0, t0, grid, h, post_step);
    }

    let n = y0.len();
    let t_end = *grid.last().unwrap();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut out = Vec::with_capacity(grid.len());
    let mut gi = 0;
    while gi < grid.len() && grid[gi] <= t + 1e-14 {
        out.push((grid[gi], y.clone()));
        gi += 1;
    }

    let mut k = vec![vec![0.0; n]; 7];
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];

    let mut h = opts.h_init.unwrap_or_else(|| {
        let span = t_end - t0;
        (span / 100.0).min(0.1).max(opts.h_min)
    });
    let mut err_old: f64 = 1e-4;
    let mut k0_stale = true;

    for _step in 0..opts.max_steps {
        if t >= t_end - 1e-14 {
            return Ok(out);
        }
        // Clip to the next grid point so outputs land exactly on it.
        let t_stop = grid[gi.min(grid.len() - 1)];
        let mut clipped = false;
        if t + h >= t_stop - 1e-14 {
            h = t_stop - t;
            clipped = true;
        }
        if h < opts.h_min {
            return Err(Error::Integrator(format!(
                "step size underflow at t = {t} (h = {h:.3e})"
            )));
        }

        if k0_stale {
            rhs(t, &y, &mut k[0]);
            k0_stale = false;
        }
        for s in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                ytmp[i] = y[i] + h * acc;
            }
            rhs(t + C[s] * h, &ytmp, &mut k[s]);
        }
        let mut err: f64 = 0.0;
        for i in 0..n {
            let mut acc5 = 0.0;
            let mut acc4 = 0.0;
            for (s, ks) in k.iter().enumerate() {
                acc5 += B[s] * ks[i];
                acc4 += B4[s] * ks[i];
            }
            ynew[i] = y[i] + h * acc5;
            let scale = opts.abs_tol + opts.rel_tol * y[i].abs().max(ynew[i].abs());
            let e = h * (acc5 - acc4) / scale;
            err += e * e;
        }
        err = (err / n as f64).sqrt();

        if err.is_finite() && err <= 1.0 {
            // accept
            t += h;
            y.copy_from_slice(&ynew);
            post_step(&mut y);
            k0_stale = true;
            while gi < grid.len() && grid[gi] <= t + 1e-12 {
                out.push((grid[gi], y.clone()));
                gi += 1;
            }
            if gi >= grid.len() {
                return Ok(out);
            }
            // PI controller.
            let e1 = err.max(1e-10);
            let fac = 0.9 * e1.powf(-0.7 / 5.0) * err_old.powf(0.4 / 5.0);
            err_old = e1;
            h *= fac.clamp(0.2, 10.0);
            if clipped {
                h = h.max(1e-6 * (t_end - t0));
            }
        } else {
            let fac = if err.is_finite() {
                (0.9 * err.powf(-0.2)).clamp(0.1, 1.0)
            } else {
                0.1
            };
            h *= fac;
        }
    }
    Err(Error::Integrator("max step count exceeded".into()))
}

fn solve_rk4<F, P>(
    mut rhs: F,
    y0: &[f64],
    t0: f64,
    grid: &[f64],
    h: f64,
    mut post_step: P,
) -> Result<Vec<(f64, Vec<f64>)>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    P: FnMut(&mut [f64]),
{
    if h <= 0.0 {
        return Err(Error::Integrator("fixed step must be positive".into()));
    }
    let n = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut out = Vec::with_capacity(grid.len());
    let mut gi = 0;
    while gi < grid.len() && grid[gi] <= t + 1e-14 {
        out.push((grid[gi], y.clone()));
        gi += 1;
    }
    let (mut k1, mut k2, mut k3, mut k4) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut ytmp = vec![0.0; n];
    while gi < grid.len() {
        let step = h.min(grid[gi] - t);
        rhs(t, &y, &mut k1);
        for i in 0..n {
            ytmp[i] = y[i] + 0.5 * step * k1[i];
        }
        rhs(t + 0.5 * step, &ytmp, &mut k2);
        for i in 0..n {
            ytmp[i] = y[i] + 0.5 * step * k2[i];
        }
        rhs(t + 0.5 * step, &ytmp, &mut k3);
        for i in 0..n {
            ytmp[i] = y[i] + step * k3[i];
        }
        rhs(t + step, &ytmp, &mut k4);
        for i in 0..n {
            y[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t += step;
        post_step(&mut y);
        while gi < grid.len() && grid[gi] <= t + 1e-12 {
            out.push((grid[gi], y.clone()));
            gi += 1;
        }
    }
    Ok(out)
}

/// Uniform grid `t0, t0 + step, ..., t_end` (always includes `t_end`).
pub fn uniform_grid(t0: f64, t_end: f64, step: f64) -> Vec<f64> {
    assert!(step > 0.0 && t_end > t0);
    let n = ((t_end - t0) / step).round() as usize;
    let mut grid: Vec<f64> = (0..=n).map(|i| t0 + i as f64 * step).collect();
    if (grid.last().copied().unwrap() - t_end).abs() > 1e-12 {
        grid.push(t_end);
    } else {
        *grid.last_mut().unwrap() = t_end;
    }
    grid
}
