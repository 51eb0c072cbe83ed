//! Dormand–Prince 5(4) integrator with continuous (dense) output.

/// First-order system `dy/dt = f(t, y)`.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    /// Fills `dy`; an `Err` marks a state where the field cannot be evaluated
    /// (for instance a point outside the chart domain).
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), RhsFailure>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RhsFailure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Reached the requested end time.
    Reached,
    /// The caller's stop predicate fired.
    Event,
    /// Step size fell below the minimum while the error test kept failing.
    StepUnderflow,
    /// Step size fell below the minimum while the field could not be evaluated.
    RhsFailure,
    MaxSteps,
}

#[derive(Debug, Clone)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Dopri5 {
    pub fn new(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            h_min: 1e-14,
            h_max: f64::INFINITY,
            max_steps: 2_000_000,
        }
    }
}

/// One accepted step with its interpolation coefficients.
#[derive(Debug, Clone)]
pub struct Segment {
    pub t0: f64,
    pub h: f64,
    rcont: [Vec<f64>; 5],
}

impl Segment {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = &self.rcont;
        (0..r1.len())
            .map(|i| r1[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i]))))
            .collect()
    }
}

/// Accepted states and dense output of an integration run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub segments: Vec<Segment>,
    pub stop: StopReason,
}

impl Trajectory {
    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("non-empty trajectory")
    }

    /// Dense-output state at `t`, `None` outside the integrated range.
    pub fn eval(&self, t: f64) -> Option<Vec<f64>> {
        let (lo, hi) = {
            let (a, b) = (self.t_start(), self.t_end());
            (a.min(b), a.max(b))
        };
        if t < lo || t > hi {
            return None;
        }
        if self.segments.is_empty() {
            return Some(self.states[0].clone());
        }
        let forward = self.t_end() >= self.t_start();
        let pos = self
            .segments
            .partition_point(|s| if forward { s.t1() < t } else { s.t1() > t });
        let seg = &self.segments[pos.min(self.segments.len() - 1)];
        Some(seg.eval(t))
    }
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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

impl Dopri5 {
    /// Integrates from `(t0, y0)` towards `t_end` (either direction). `stop`
    /// is checked after every accepted step.
    pub fn integrate<S, P>(&self, sys: &S, t0: f64, y0: &[f64], t_end: f64, mut stop: P) -> Trajectory
    where
        S: OdeSystem + ?Sized,
        P: FnMut(f64, &[f64]) -> bool,
    {
        let n = sys.dim();
        let dir = if t_end >= t0 { 1.0 } else { -1.0 };
        let mut traj = Trajectory {
            times: vec![t0],
            states: vec![y0.to_vec()],
            segments: Vec::new(),
            stop: StopReason::Reached,
        };
        if t_end == t0 {
            return traj;
        }
        let mut t = t0;
        let mut y = y0.to_vec();
        let mut k1 = vec![0.0; n];
        if sys.rhs(t, &y, &mut k1).is_err() {
            traj.stop = StopReason::RhsFailure;
            return traj;
        }
        let span = (t_end - t0).abs();
        let mut h = dir * span.min(self.h_max).min(1e-2 * span.max(1.0));
        let mut stages = vec![vec![0.0; n]; 6];
        let mut tmp = vec![0.0; n];
        let mut y_new = vec![0.0; n];
        let mut k7 = vec![0.0; n];

        for _ in 0..self.max_steps {
            if (t_end - t) * dir <= 0.0 {
                traj.stop = StopReason::Reached;
                return traj;
            }
            if (t + h - t_end) * dir > 0.0 {
                h = t_end - t;
            }
            let attempt = self.try_step(sys, t, &y, &k1, h, &mut stages, &mut tmp, &mut y_new, &mut k7);
            match attempt {
                Err(RhsFailure) => {
                    h *= 0.5;
                    if h.abs() < self.h_min {
                        traj.stop = StopReason::RhsFailure;
                        return traj;
                    }
                    continue;
                }
                Ok(err) => {
                    if err <= 1.0 {
                        let rcont = self.dense(&y, &y_new, &k1, &stages, &k7, h);
                        traj.segments.push(Segment { t0: t, h, rcont });
                        t = if (t + h - t_end).abs() <= 1e-15 * t_end.abs().max(1.0) {
                            t_end
                        } else {
                            t + h
                        };
                        y.copy_from_slice(&y_new);
                        k1.copy_from_slice(&k7);
                        traj.times.push(t);
                        traj.states.push(y.clone());
                        if stop(t, &y) {
                            traj.stop = StopReason::Event;
                            return traj;
                        }
                        let factor = if err == 0.0 {
                            5.0
                        } else {
                            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                        };
                        h = dir * (h.abs() * factor).min(self.h_max);
                    } else {
                        h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                        if h.abs() < self.h_min {
                            traj.stop = StopReason::StepUnderflow;
                            return traj;
                        }
                    }
                }
            }
        }
        traj.stop = StopReason::MaxSteps;
        traj
    }

    #[allow(clippy::too_many_arguments)]
    fn try_step<S: OdeSystem + ?Sized>(
        &self,
        sys: &S,
        t: f64,
        y: &[f64],
        k1: &[f64],
        h: f64,
        k: &mut [Vec<f64>],
        tmp: &mut [f64],
        y_new: &mut [f64],
        k7: &mut [f64],
    ) -> Result<f64, RhsFailure> {
        let n = y.len();
        // k[0] = k2 .. k[4] = k6
        for i in 0..n {
            tmp[i] = y[i] + h * A21 * k1[i];
        }
        sys.rhs(t + C2 * h, tmp, &mut k[0])?;
        for i in 0..n {
            tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k[0][i]);
        }
        sys.rhs(t + C3 * h, tmp, &mut k[1])?;
        for i in 0..n {
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k[0][i] + A43 * k[1][i]);
        }
        sys.rhs(t + C4 * h, tmp, &mut k[2])?;
        for i in 0..n {
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k[0][i] + A53 * k[1][i] + A54 * k[2][i]);
        }
        sys.rhs(t + C5 * h, tmp, &mut k[3])?;
        for i in 0..n {
            tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k[0][i] + A63 * k[1][i] + A64 * k[2][i] + A65 * k[3][i]);
        }
        sys.rhs(t + h, tmp, &mut k[4])?;
        for i in 0..n {
            y_new[i] = y[i] + h * (A71 * k1[i] + A73 * k[1][i] + A74 * k[2][i] + A75 * k[3][i] + A76 * k[4][i]);
        }
        sys.rhs(t + h, y_new, k7)?;
        let mut acc = 0.0;
        for i in 0..n {
            let e = h * (E1 * k1[i] + E3 * k[1][i] + E4 * k[2][i] + E5 * k[3][i] + E6 * k[4][i] + E7 * k7[i]);
            let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
            acc += (e / sc).powi(2);
        }
        let err = (acc / n as f64).sqrt();
        if err.is_finite() {
            Ok(err)
        } else {
            Err(RhsFailure)
        }
    }

    fn dense(&self, y: &[f64], y_new: &[f64], k1: &[f64], k: &[Vec<f64>], k7: &[f64], h: f64) -> [Vec<f64>; 5] {
        let n = y.len();
        let mut r = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for i in 0..n {
            let ydiff = y_new[i] - y[i];
            let bspl = h * k1[i] - ydiff;
            r[0][i] = y[i];
            r[1][i] = ydiff;
            r[2][i] = bspl;
            r[3][i] = ydiff - h * k7[i] - bspl;
            r[4][i] = h * (D1 * k1[i] + D3 * k[1][i] + D4 * k[2][i] + D5 * k[3][i] + D6 * k[4][i] + D7 * k7[i]);
        }
        r
    }
}
