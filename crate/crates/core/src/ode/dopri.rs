//! Dormand–Prince 5(4) with FSAL, adaptive step size and cubic Hermite
//! dense output.

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// autonomous right-hand sides only; E = b5 − b4, b5 being the last row of A
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

/// One accepted step, enough to interpolate anywhere in `[t0, t1]`.
#[derive(Debug, Clone)]
pub struct Step {
    pub t0: f64,
    pub t1: f64,
    pub y0: Vec<f64>,
    pub y1: Vec<f64>,
    pub f0: Vec<f64>,
    pub f1: Vec<f64>,
}

impl Step {
    pub fn interpolate(&self, t: f64, out: &mut [f64]) {
        let h = self.t1 - self.t0;
        let s = if h > 0.0 { (t - self.t0) / h } else { 1.0 };
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        for i in 0..out.len() {
            out[i] = h00 * self.y0[i] + h10 * h * self.f0[i] + h01 * self.y1[i] + h11 * h * self.f1[i];
        }
    }
}

/// Why the integrator gave up.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure<E> {
    /// The right-hand side refused the current state.
    Rhs(E),
    /// The step size fell below the floor.
    Underflow,
}

/// Adaptive integrator state. Drive it with [`Dopri5::step`].
pub struct Dopri5<F> {
    rhs: F,
    tol: Tolerances,
    t: f64,
    y: Vec<f64>,
    f: Vec<f64>,
    h: f64,
    k: [Vec<f64>; 7],
    scratch: Vec<f64>,
    pub accepted: usize,
    pub rejected: usize,
}

impl<F, E> Dopri5<F>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<(), E>,
{
    pub fn new(mut rhs: F, t0: f64, y0: Vec<f64>, tol: Tolerances) -> Result<Self, Failure<E>> {
        let n = y0.len();
        let mut f = vec![0.0; n];
        rhs(&y0, &mut f).map_err(Failure::Rhs)?;
        // initial step from the derivative scale
        let d0 = rms(&y0, &y0, tol);
        let d1 = rms(&f, &y0, tol);
        let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        Ok(Dopri5 {
            rhs,
            tol,
            t: t0,
            y: y0,
            f,
            h: h.min(0.1),
            k: std::array::from_fn(|_| vec![0.0; n]),
            scratch: vec![0.0; n],
            accepted: 0,
            rejected: 0,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Advances by one accepted step, not past `t_max`.
    pub fn step(&mut self, t_max: f64) -> Result<Step, Failure<E>> {
        let n = self.y.len();
        let h_min = 1e-14 * self.t.abs().max(1.0);
        loop {
            let mut h = self.h.min(t_max - self.t);
            if h < h_min {
                if t_max - self.t < h_min {
                    h = t_max - self.t;
                } else {
                    return Err(Failure::Underflow);
                }
            }
            self.k[0].copy_from_slice(&self.f);
            let mut stage_failed = None;
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = self.y[i];
                    for j in 0..s {
                        acc += h * A[s][j] * self.k[j][i];
                    }
                    self.scratch[i] = acc;
                }
                if let Err(e) = (self.rhs)(&self.scratch, &mut self.k[s]) {
                    stage_failed = Some(e);
                    break;
                }
            }
            if let Some(e) = stage_failed {
                // a trial point left the admissible region; retry smaller
                self.rejected += 1;
                self.h = h * 0.25;
                if self.h < h_min {
                    return Err(Failure::Rhs(e));
                }
                continue;
            }
            // scratch now holds the fifth-order solution (stage 7 point)
            let mut err = 0.0;
            for i in 0..n {
                let mut e = 0.0;
                for s in 0..7 {
                    e += E[s] * self.k[s][i];
                }
                let scale = self.tol.abs + self.tol.rel * self.y[i].abs().max(self.scratch[i].abs());
                let r = h * e / scale;
                err += r * r;
            }
            let err = (err / n as f64).sqrt();
            if err <= 1.0 {
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                let step = Step {
                    t0: self.t,
                    t1: self.t + h,
                    y0: self.y.clone(),
                    y1: self.scratch.clone(),
                    f0: self.f.clone(),
                    f1: self.k[6].clone(),
                };
                self.t += h;
                self.y.copy_from_slice(&self.scratch);
                self.f.copy_from_slice(&self.k[6]);
                self.h = h * factor;
                self.accepted += 1;
                return Ok(step);
            }
            self.rejected += 1;
            self.h = h * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
        }
    }
}

fn rms(v: &[f64], y: &[f64], tol: Tolerances) -> f64 {
    let s: f64 = v
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = a / (tol.abs + tol.rel * b.abs());
            r * r
        })
        .sum();
    (s / v.len() as f64).sqrt()
}
