//! Dormand–Prince 5(4) with PI step control, terminal events and
//! domain-exit handling.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-10,
            h_init: 1e-3,
            h_max: f64::INFINITY,
            h_min: 1e-14,
            max_steps: 1_000_000,
        }
    }
}

impl OdeOptions {
    pub fn tol(tol: f64) -> Self {
        OdeOptions {
            rtol: tol,
            atol: tol,
            ..Default::default()
        }
    }
}

/// Why an integration stopped.
#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    /// reached `t_end`
    Completed,
    /// the event function crossed zero; the last sample sits on the root
    Event,
    /// the monitor asked to stop after the last accepted step
    Stopped(String),
    /// the right-hand side failed and the step could not be shrunk further
    DomainExit(Error),
}

#[derive(Debug, Clone)]
pub struct OdeOutput {
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub termination: Termination,
}

impl OdeOutput {
    pub fn last(&self) -> (&f64, &Vec<f64>) {
        (self.t.last().unwrap(), self.y.last().unwrap())
    }
}

/// Monitor verdict after an accepted step.
pub enum Control {
    Continue,
    Stop(String),
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// One Dormand–Prince step of size `h`. Returns the fifth-order solution and
/// the embedded error estimate (componentwise).
pub fn dopri_step<F>(f: &mut F, t: f64, y: &[f64], h: f64) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = y.len();
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    f(t, y, &mut k[0])?;
    let stage = |coef: &[f64], k: &[Vec<f64>], tmp: &mut [f64]| {
        for i in 0..n {
            let mut s = 0.0;
            for (c, kk) in coef.iter().zip(k) {
                s += c * kk[i];
            }
            tmp[i] = y[i] + h * s;
        }
    };
    stage(&[A21], &k[..1], &mut tmp);
    f(t + C2 * h, &tmp, &mut k[1])?;
    stage(&[A31, A32], &k[..2], &mut tmp);
    f(t + C3 * h, &tmp, &mut k[2])?;
    stage(&[A41, A42, A43], &k[..3], &mut tmp);
    f(t + C4 * h, &tmp, &mut k[3])?;
    stage(&[A51, A52, A53, A54], &k[..4], &mut tmp);
    f(t + C5 * h, &tmp, &mut k[4])?;
    stage(&[A61, A62, A63, A64, A65], &k[..5], &mut tmp);
    f(t + h, &tmp, &mut k[5])?;
    let mut y1 = vec![0.0; n];
    for i in 0..n {
        y1[i] = y[i] + h * (B1 * k[0][i] + B3 * k[2][i] + B4 * k[3][i] + B5 * k[4][i] + B6 * k[5][i]);
    }
    f(t + h, &y1, &mut k[6])?;
    let err = (0..n)
        .map(|i| {
            h * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i])
        })
        .collect();
    Ok((y1, err))
}

fn err_norm(y0: &[f64], y1: &[f64], err: &[f64], o: &OdeOptions) -> f64 {
    let n = y0.len() as f64;
    (y0.iter()
        .zip(y1)
        .zip(err)
        .map(|((a, b), e)| {
            let sc = o.atol + o.rtol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum::<f64>()
        / n)
        .sqrt()
}

/// Adaptive integration from `t0` towards `t_end` (either direction).
///
/// * `event`: terminal scalar event; when it changes sign over an accepted
///   step the root is located by re-stepping from the step start.
/// * `monitor`: called after every accepted step; may stop the run.
/// * right-hand-side errors shrink the step; below `h_min` the run ends with
///   [`Termination::DomainExit`].
pub fn solve<F, M>(
    mut f: F,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    opts: &OdeOptions,
    event: Option<&dyn Fn(f64, &[f64]) -> f64>,
    mut monitor: M,
) -> Result<OdeOutput>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    M: FnMut(f64, &[f64]) -> Control,
{
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut out = OdeOutput {
        t: vec![t0],
        y: vec![y0.to_vec()],
        termination: Termination::Completed,
    };
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut h = opts.h_init.min(opts.h_max).min((t_end - t0).abs());
    if h <= 0.0 {
        return Ok(out);
    }
    let mut err_prev: f64 = 1e-4;
    let mut g_prev = event.map(|e| e(t, &y));
    for _ in 0..opts.max_steps {
        let remaining = (t_end - t).abs();
        if remaining <= 1e-14 * (1.0 + t.abs()) {
            return Ok(out);
        }
        let step = h.min(remaining);
        match dopri_step(&mut f, t, &y, dir * step) {
            Err(e) => {
                h = 0.5 * step;
                if h < opts.h_min {
                    out.termination = Termination::DomainExit(e);
                    return Ok(out);
                }
                continue;
            }
            Ok((y1, err)) => {
                let en = err_norm(&y, &y1, &err, opts);
                if !en.is_finite() {
                    h = 0.5 * step;
                    if h < opts.h_min {
                        return Err(Error::StepUnderflow { s: t, h });
                    }
                    continue;
                }
                if en > 1.0 {
                    h = step * (0.9 * en.powf(-0.2)).max(0.2);
                    if h < opts.h_min {
                        return Err(Error::StepUnderflow { s: t, h });
                    }
                    continue;
                }
                // accepted
                let fac = if en == 0.0 {
                    5.0
                } else {
                    (0.9 * en.powf(-0.17) * err_prev.powf(0.04)).clamp(0.2, 5.0)
                };
                err_prev = en.max(1e-4);
                let t1 = t + dir * step;
                if let (Some(ev), Some(gp)) = (event, g_prev) {
                    let g1 = ev(t1, &y1);
                    if gp != 0.0 && (g1 == 0.0 || (g1 < 0.0) != (gp < 0.0)) {
                        let (tr, yr) = locate_event(&mut f, ev, t, &y, dir * step, gp, g1)?;
                        out.t.push(tr);
                        out.y.push(yr);
                        out.termination = Termination::Event;
                        return Ok(out);
                    }
                    g_prev = Some(g1);
                }
                t = t1;
                y = y1;
                out.t.push(t);
                out.y.push(y.clone());
                h = (step * fac).min(opts.h_max);
                if let Control::Stop(why) = monitor(t, &y) {
                    out.termination = Termination::Stopped(why);
                    return Ok(out);
                }
            }
        }
    }
    Err(Error::StepUnderflow { s: t, h })
}

/// Root of the event along the step `t → t + h`, by Illinois iteration on the
/// sub-step length (every trial re-steps from `(t, y)`).
fn locate_event<F>(
    f: &mut F,
    ev: &dyn Fn(f64, &[f64]) -> f64,
    t: f64,
    y: &[f64],
    h: f64,
    g0: f64,
    g1: f64,
) -> Result<(f64, Vec<f64>)>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let (mut a, mut b, mut fa, mut fb) = (0.0, 1.0, g0, g1);
    let mut best = (1.0, dopri_step(f, t, y, h)?.0);
    if fb == 0.0 {
        return Ok((t + h, best.1));
    }
    let mut side = 0;
    for _ in 0..100 {
        let s = (a * fb - b * fa) / (fb - fa);
        let ys = dopri_step(f, t, y, s * h)?.0;
        let gs = ev(t + s * h, &ys);
        best = (s, ys);
        if gs == 0.0 || (b - a) < 1e-15 || gs.abs() < 1e-15 {
            break;
        }
        if (gs < 0.0) == (fa < 0.0) {
            a = s;
            fa = gs;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = s;
            fb = gs;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    Ok((t + best.0 * h, best.1))
}

/// Fixed-step integration with `n` equal steps (convergence studies).
pub fn solve_fixed<F>(mut f: F, t0: f64, y0: &[f64], t_end: f64, n: usize) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let h = (t_end - t0) / n as f64;
    let mut y = y0.to_vec();
    for k in 0..n {
        y = dopri_step(&mut f, t0 + k as f64 * h, &y, h)?.0;
    }
    Ok(y)
}
