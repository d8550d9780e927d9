//! Adaptive Dormand–Prince 5(4) integration with blow-up detection.
//!
//! Steps are accepted on a mixed absolute/relative RMS error norm. After every
//! accepted step the system's blow-up measure is compared with the threshold;
//! the crossing inside the final step is located by bisection on the cubic
//! Hermite interpolant, and the pole itself by the simple-pole extrapolation
//! `t* ≈ t + y/y′` of the dominant component.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

pub trait OdeSystem {
    fn dim(&self) -> usize;

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]);

    /// Quantity compared against the blow-up threshold.
    fn blowup_measure(&self, y: &[f64]) -> f64 {
        y.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Index of the component that dominates the blow-up measure.
    fn dominant_component(&self, y: &[f64]) -> usize {
        y.iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(k, m), (i, v)| {
                if v.abs() > m {
                    (i, v.abs())
                } else {
                    (k, m)
                }
            })
            .0
    }

    /// True once the state has left the region where the system is defined.
    fn collapsed(&self, _y: &[f64]) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rel: 1e-12,
            abs: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrateOptions {
    pub tolerances: Tolerances,
    pub blowup_threshold: f64,
    pub max_steps: usize,
    pub max_step: f64,
    /// When set, samples are recorded exactly at these times (steps are
    /// shortened to land on them) instead of at every accepted step.
    pub t_eval: Option<Vec<f64>>,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            tolerances: Tolerances::default(),
            blowup_threshold: 1e8,
            max_steps: 1_000_000,
            max_step: f64::INFINITY,
            t_eval: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    ReachedEnd,
    BlowUpDetected,
    StepUnderflow,
    /// The warping function dropped below its floor.
    WarpCollapse,
    StepLimit,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::ReachedEnd => "reached-end",
            Termination::BlowUpDetected => "blow-up-detected",
            Termination::StepUnderflow => "step-underflow",
            Termination::WarpCollapse => "warp-collapse",
            Termination::StepLimit => "step-limit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub y: Vec<f64>,
    /// Right-hand side evaluated at `(t, y)`.
    pub dy: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationResult {
    pub samples: Vec<Sample>,
    pub termination: Termination,
    pub blowup_estimate: Option<f64>,
    /// Threshold crossing located by bisection inside the final step.
    pub threshold_crossing: Option<f64>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl IntegrationResult {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("integration result is never empty")
    }

    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }
}

/// Cubic Hermite interpolation between two samples.
pub fn hermite(a: &Sample, b: &Sample, t: f64) -> Vec<f64> {
    let h = b.t - a.t;
    let s = (t - a.t) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    (0..a.y.len())
        .map(|i| h00 * a.y[i] + h10 * h * a.dy[i] + h01 * b.y[i] + h11 * h * b.dy[i])
        .collect()
}

// Dormand–Prince 5(4) tableau.
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

struct Stages {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
}

impl Stages {
    fn new(dim: usize) -> Self {
        Stages {
            k: std::array::from_fn(|_| vec![0.0; dim]),
            tmp: vec![0.0; dim],
        }
    }

    /// One trial step from `(t, y)` with `k[0] = f(t, y)` already filled.
    /// Writes the 5th-order solution to `y_new`, its derivative to `k[6]`,
    /// and returns the scaled error norm.
    fn step<S: OdeSystem>(
        &mut self,
        sys: &S,
        t: f64,
        y: &[f64],
        h: f64,
        tol: &Tolerances,
        y_new: &mut [f64],
    ) -> f64 {
        let n = y.len();
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let tmp = &mut self.tmp;
        for i in 0..n {
            tmp[i] = y[i] + h * A21 * k1[i];
        }
        sys.rhs(t + C2 * h, tmp, k2);
        for i in 0..n {
            tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        sys.rhs(t + C3 * h, tmp, k3);
        for i in 0..n {
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        sys.rhs(t + C4 * h, tmp, k4);
        for i in 0..n {
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        sys.rhs(t + C5 * h, tmp, k5);
        for i in 0..n {
            tmp[i] = y[i]
                + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        sys.rhs(t + h, tmp, k6);
        for i in 0..n {
            y_new[i] =
                y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        sys.rhs(t + h, y_new, k7);
        let mut acc = 0.0;
        for i in 0..n {
            let err = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = tol.abs + tol.rel * y[i].abs().max(y_new[i].abs());
            acc += (err / scale).powi(2);
        }
        (acc / n as f64).sqrt()
    }
}

fn initial_step<S: OdeSystem>(sys: &S, t: f64, y: &[f64], f0: &[f64], dir: f64, tol: &Tolerances) -> f64 {
    let n = y.len() as f64;
    let scale = |i: usize| tol.abs + tol.rel * y[i].abs();
    let d0 = (y.iter().enumerate().map(|(i, v)| (v / scale(i)).powi(2)).sum::<f64>() / n).sqrt();
    let d1 = (f0.iter().enumerate().map(|(i, v)| (v / scale(i)).powi(2)).sum::<f64>() / n).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<f64> = y.iter().zip(f0).map(|(y, f)| y + dir * h0 * f).collect();
    let mut f1 = vec![0.0; y.len()];
    sys.rhs(t + dir * h0, &y1, &mut f1);
    let d2 = (f1
        .iter()
        .zip(f0)
        .enumerate()
        .map(|(i, (a, b))| ((a - b) / scale(i)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    (100.0 * h0).min(h1)
}

/// Integrates `sys` from `(t0, y0)` towards `t1` (either direction).
pub fn integrate<S: OdeSystem>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    t1: f64,
    opts: &IntegrateOptions,
) -> Result<IntegrationResult> {
    let tol = &opts.tolerances;
    if !(t0.is_finite() && t1.is_finite()) || t0 == t1 {
        return Err(param(format!("degenerate integration span [{t0}, {t1}]")));
    }
    if !(tol.rel > 0.0 && tol.abs > 0.0) {
        return Err(param("tolerances must be positive"));
    }
    if !(opts.blowup_threshold > 0.0) {
        return Err(param("blow-up threshold must be positive"));
    }
    if y0.len() != sys.dim() {
        return Err(param(format!(
            "initial state has {} components, system expects {}",
            y0.len(),
            sys.dim()
        )));
    }
    let dir = (t1 - t0).signum();
    let mut eval: Vec<f64> = opts.t_eval.clone().unwrap_or_default();
    eval.retain(|&te| (te - t0) * dir >= 0.0 && (t1 - te) * dir >= 0.0);
    eval.sort_by(|a, b| (dir * a).total_cmp(&(dir * b)));
    eval.dedup();
    let dense_only = opts.t_eval.is_some();
    let mut next_eval = 0;

    let dim = y0.len();
    let mut stages = Stages::new(dim);
    let mut y = y0.to_vec();
    let mut t = t0;
    sys.rhs(t, &y, &mut stages.k[0]);

    let mut samples = Vec::new();
    let start = Sample {
        t,
        y: y.clone(),
        dy: stages.k[0].clone(),
    };
    if !dense_only {
        samples.push(start.clone());
    } else if eval.first() == Some(&t0) {
        samples.push(start.clone());
        next_eval = 1;
    }
    let initial_measure = sys.blowup_measure(&y);

    let mut h = initial_step(sys, t, &y, &stages.k[0], dir, tol).min(opts.max_step);
    let mut y_new = vec![0.0; dim];
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let mut last_rejected = false;
    let mut prev = start;

    let finish = |samples: Vec<Sample>, termination, estimate, crossing, accepted, rejected| {
        Ok(IntegrationResult {
            samples,
            termination,
            blowup_estimate: estimate,
            threshold_crossing: crossing,
            accepted_steps: accepted,
            rejected_steps: rejected,
        })
    };

    loop {
        if accepted + rejected >= opts.max_steps {
            push_final(&mut samples, &prev, dense_only);
            return finish(samples, Termination::StepLimit, None, None, accepted, rejected);
        }
        // Never step past t1 or the next requested output time.
        let mut target = t1;
        if let Some(&te) = eval.get(next_eval) {
            target = te;
        }
        let remaining = (target - t) * dir;
        let mut lands = false;
        let mut step = h;
        if step >= remaining {
            step = remaining;
            lands = true;
        }
        let min_step = 16.0 * f64::EPSILON * t.abs().max(1.0);
        if step < min_step && !lands {
            let grew = sys.blowup_measure(&y) > 1e3 * initial_measure.max(1.0);
            push_final(&mut samples, &prev, dense_only);
            if grew {
                let est = pole_extrapolation(sys, &prev, None);
                return finish(
                    samples,
                    Termination::BlowUpDetected,
                    Some(est),
                    Some(t),
                    accepted,
                    rejected,
                );
            }
            return finish(samples, Termination::StepUnderflow, None, None, accepted, rejected);
        }

        let err = stages.step(sys, t, &y, dir * step, tol, &mut y_new);
        let finite = err.is_finite() && y_new.iter().all(|v| v.is_finite());
        if !finite || err > 1.0 {
            rejected += 1;
            let fac = if finite {
                (0.9 * err.powf(-0.2)).clamp(0.1, 1.0)
            } else {
                0.1
            };
            h = step * fac;
            last_rejected = true;
            continue;
        }

        accepted += 1;
        let t_new = if lands { target } else { t + dir * step };
        let next = Sample {
            t: t_new,
            y: y_new.clone(),
            dy: stages.k[6].clone(),
        };

        let mut fac = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        if last_rejected {
            fac = fac.min(1.0);
        }
        last_rejected = false;
        if !lands || step >= h * 0.999 {
            h = (step * fac).min(opts.max_step);
        }

        if lands && next_eval < eval.len() && eval[next_eval] == t_new {
            samples.push(next.clone());
            next_eval += 1;
        } else if !dense_only {
            samples.push(next.clone());
        }

        if sys.collapsed(&next.y) {
            push_final(&mut samples, &next, dense_only);
            return finish(samples, Termination::WarpCollapse, None, None, accepted, rejected);
        }

        let measure = sys.blowup_measure(&next.y);
        if measure > opts.blowup_threshold {
            let crossing = bisect_crossing(sys, &prev, &next, opts.blowup_threshold);
            let est = pole_extrapolation(sys, &next, Some((&prev, crossing)));
            push_final(&mut samples, &next, dense_only);
            return finish(
                samples,
                Termination::BlowUpDetected,
                Some(est),
                Some(crossing),
                accepted,
                rejected,
            );
        }

        stages.k.swap(0, 6);
        y.copy_from_slice(&next.y);
        t = t_new;
        prev = next;
        if t == t1 {
            return finish(samples, Termination::ReachedEnd, None, None, accepted, rejected);
        }
    }
}

fn push_final(samples: &mut Vec<Sample>, last: &Sample, dense_only: bool) {
    if dense_only && samples.last().map(|s| s.t) != Some(last.t) {
        samples.push(last.clone());
    }
}

fn bisect_crossing<S: OdeSystem>(sys: &S, a: &Sample, b: &Sample, threshold: f64) -> f64 {
    let (mut lo, mut hi) = (a.t, b.t);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if sys.blowup_measure(&hermite(a, b, mid)) > threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `t + y_k / y_k′` for the dominant component. Falls back to the threshold
/// crossing when the extrapolation points backwards.
fn pole_extrapolation<S: OdeSystem>(sys: &S, last: &Sample, bracket: Option<(&Sample, f64)>) -> f64 {
    let k = sys.dominant_component(&last.y);
    let (yk, dyk) = (last.y[k], last.dy[k]);
    let est = if dyk != 0.0 && (yk / dyk).is_finite() {
        last.t + yk / dyk
    } else {
        last.t
    };
    match bracket {
        Some((prev, crossing)) => {
            let dir = (last.t - prev.t).signum();
            if (est - last.t) * dir >= 0.0 {
                est
            } else {
                crossing
            }
        }
        None => est,
    }
}
