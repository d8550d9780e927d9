//! Gradient Ricci solitons with flat level sets, `dt² + Σ hᵢ²(t) dxᵢ²`.
//!
//! With `u₀ = f′` and `uᵢ = hᵢ′/hᵢ` the soliton equation becomes the
//! polynomial first-order system
//!
//! ```text
//! uⱼ′ = (u₀ − A) uⱼ − λ
//! u₀′ = B + (u₀ − A) A − k λ,      A = Σ uᵢ,  B = Σ uᵢ²
//! ```
//!
//! where `k = n − 2` follows from the normal component of the soliton
//! equation. The coefficient `k = n − 1` is kept as a selectable convention
//! because it appears in the literature; it does not conserve
//! `S + |∇f|² − 2λf` once `λ ≠ 0`.

use serde::{Deserialize, Serialize};

use crate::curvature::{curvature, DiagonalProfile};
use crate::error::{param, Error, Result};
use crate::integrator::{self, IntegrateOptions, IntegrationResult, OdeSystem, Termination};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoefficientConvention {
    /// `u₀′ = B + (u₀ − A)A − (n − 2)λ`
    #[default]
    Corrected,
    /// `u₀′ = B + (u₀ − A)A − (n − 1)λ`
    AsPrinted,
}

impl CoefficientConvention {
    pub fn lambda_coefficient(self, n: usize) -> f64 {
        match self {
            CoefficientConvention::Corrected => (n - 2) as f64,
            CoefficientConvention::AsPrinted => (n - 1) as f64,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CoefficientConvention::Corrected => "corrected",
            CoefficientConvention::AsPrinted => "as-printed",
        }
    }
}

impl std::str::FromStr for CoefficientConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "corrected" => Ok(CoefficientConvention::Corrected),
            "as-printed" => Ok(CoefficientConvention::AsPrinted),
            other => Err(param(format!(
                "unknown convention {other:?} (expected corrected or as-printed)"
            ))),
        }
    }
}

/// First-order state `(u₀, u₁, …, u_{n−1})` at parameter `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatSolitonState {
    pub t: f64,
    pub u0: f64,
    pub u: Vec<f64>,
}

impl FlatSolitonState {
    pub fn new(t: f64, u0: f64, u: Vec<f64>) -> Self {
        FlatSolitonState { t, u0, u }
    }

    pub fn dimension(&self) -> usize {
        self.u.len() + 1
    }

    /// `A = Σ uᵢ`
    pub fn mean_curvature(&self) -> f64 {
        self.u.iter().sum()
    }

    /// `B = Σ uᵢ²`
    pub fn shape_norm_sq(&self) -> f64 {
        self.u.iter().map(|x| x * x).sum()
    }

    /// `(u₀ − A)² − B`, constant along steady (`λ = 0`) trajectories.
    pub fn quadratic_integral(&self) -> f64 {
        let l = self.u0 - self.mean_curvature();
        l * l - self.shape_norm_sq()
    }

    pub fn max_abs(&self) -> f64 {
        self.u.iter().fold(self.u0.abs(), |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatDerivative {
    pub u0: f64,
    pub u: Vec<f64>,
}

fn check_dimension(n: usize, components: usize) -> Result<()> {
    if n < 3 {
        return Err(param(format!("n must be >= 3, got {n}")));
    }
    if components != n - 1 {
        return Err(param(format!(
            "state has {components} fiber components, n = {n} needs {}",
            n - 1
        )));
    }
    Ok(())
}

fn rhs_into(u0: f64, u: &[f64], lambda: f64, k: f64, du0: &mut f64, du: &mut [f64]) {
    let a: f64 = u.iter().sum();
    let b: f64 = u.iter().map(|x| x * x).sum();
    let l = u0 - a;
    for (d, &uj) in du.iter_mut().zip(u) {
        *d = l * uj - lambda;
    }
    *du0 = b + l * a - k * lambda;
}

pub fn rhs(
    state: &FlatSolitonState,
    lambda: f64,
    n: usize,
    convention: CoefficientConvention,
) -> Result<FlatDerivative> {
    check_dimension(n, state.u.len())?;
    let mut d = FlatDerivative {
        u0: 0.0,
        u: vec![0.0; state.u.len()],
    };
    rhs_into(
        state.u0,
        &state.u,
        lambda,
        convention.lambda_coefficient(n),
        &mut d.u0,
        &mut d.u,
    );
    Ok(d)
}

/// The flat system augmented with the quadratures `∫u₀ dt` and `∫uᵢ dt`,
/// which carry `f` and `log hᵢ` along the trajectory.
///
/// Layout: `[u₀, u₁ … u_{n−1}, ∫u₀, ∫u₁ … ∫u_{n−1}]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatSystem {
    pub n: usize,
    pub lambda: f64,
    pub convention: CoefficientConvention,
}

impl OdeSystem for FlatSystem {
    fn dim(&self) -> usize {
        2 * self.n
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let n = self.n;
        let (head, quad) = dy.split_at_mut(n);
        let (du0, du) = head.split_first_mut().expect("n >= 3");
        rhs_into(
            y[0],
            &y[1..n],
            self.lambda,
            self.convention.lambda_coefficient(n),
            du0,
            du,
        );
        quad.copy_from_slice(&y[..n]);
    }

    fn blowup_measure(&self, y: &[f64]) -> f64 {
        y[..self.n].iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn dominant_component(&self, y: &[f64]) -> usize {
        let mut best = 0;
        for i in 1..self.n {
            if y[i].abs() > y[best].abs() {
                best = i;
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatTrajectory {
    pub n: usize,
    pub lambda: f64,
    pub convention: CoefficientConvention,
    pub result: IntegrationResult,
}

impl FlatTrajectory {
    pub fn termination(&self) -> Termination {
        self.result.termination
    }

    pub fn blowup_estimate(&self) -> Option<f64> {
        self.result.blowup_estimate
    }

    pub fn len(&self) -> usize {
        self.result.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.result.samples.is_empty()
    }

    pub fn states(&self) -> Vec<FlatSolitonState> {
        self.result
            .samples
            .iter()
            .map(|s| FlatSolitonState::new(s.t, s.y[0], s.y[1..self.n].to_vec()))
            .collect()
    }

    pub fn last_state(&self) -> FlatSolitonState {
        let s = self.result.last();
        FlatSolitonState::new(s.t, s.y[0], s.y[1..self.n].to_vec())
    }
}

/// Adaptive integration of the flat system from `initial` (at `initial.t`) towards `t_end`.
pub fn integrate(
    initial: &FlatSolitonState,
    lambda: f64,
    n: usize,
    convention: CoefficientConvention,
    t_end: f64,
    options: &IntegrateOptions,
) -> Result<FlatTrajectory> {
    check_dimension(n, initial.u.len())?;
    let system = FlatSystem {
        n,
        lambda,
        convention,
    };
    let mut y0 = vec![0.0; 2 * n];
    y0[0] = initial.u0;
    y0[1..n].copy_from_slice(&initial.u);
    let result = integrator::integrate(&system, initial.t, &y0, t_end, options)?;
    Ok(FlatTrajectory {
        n,
        lambda,
        convention,
        result,
    })
}

/// Recovers `hᵢ = h0ᵢ exp(∫uᵢ)`, `f = f0 + ∫u₀` and their derivatives from a trajectory.
///
/// Second derivatives come from the right-hand side: `hᵢ″/hᵢ = uᵢ′ + uᵢ²`, `f″ = u₀′`.
pub fn reconstruct(traj: &FlatTrajectory, h0: &[f64], f0: f64) -> Result<DiagonalProfile> {
    let n = traj.n;
    if h0.len() != n - 1 {
        return Err(param(format!(
            "h0 has {} components, expected {}",
            h0.len(),
            n - 1
        )));
    }
    if let Some(i) = h0.iter().position(|&v| !(v > 0.0)) {
        return Err(param(format!("h0[{i}] = {} must be positive", h0[i])));
    }
    let mut grid = Vec::with_capacity(traj.len());
    let mut h = Vec::with_capacity(traj.len());
    let mut hp = Vec::with_capacity(traj.len());
    let mut hpp = Vec::with_capacity(traj.len());
    let mut f = Vec::with_capacity(traj.len());
    let mut fp = Vec::with_capacity(traj.len());
    let mut fpp = Vec::with_capacity(traj.len());
    for s in &traj.result.samples {
        grid.push(s.t);
        let mut row = Vec::with_capacity(n - 1);
        let mut row_p = Vec::with_capacity(n - 1);
        let mut row_pp = Vec::with_capacity(n - 1);
        for (i, &h0i) in h0.iter().enumerate() {
            let ui = s.y[1 + i];
            let dui = s.dy[1 + i];
            let hi = h0i * s.y[n + 1 + i].exp();
            row.push(hi);
            row_p.push(ui * hi);
            row_pp.push((dui + ui * ui) * hi);
        }
        h.push(row);
        hp.push(row_p);
        hpp.push(row_pp);
        f.push(f0 + s.y[n]);
        fp.push(s.y[0]);
        fpp.push(s.dy[0]);
    }
    let profile = DiagonalProfile {
        n,
        lambda: traj.lambda,
        grid,
        h,
        h_prime: hp,
        h_double_prime: hpp,
        f,
        f_prime: fp,
        f_double_prime: fpp,
        convention: Some(traj.convention),
        provenance: format!(
            "integrate-flat n={} lambda={} convention={}",
            n,
            traj.lambda,
            traj.convention.as_str()
        ),
    };
    profile.validate()?;
    Ok(profile)
}

/// Pointwise residuals of `Ric + Hess f − λg` in the adapted frame, maximised over the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolitonResidual {
    /// `|Ric(N,N) + f″ − λ|`
    pub normal_eq: f64,
    /// `|Ric(eⱼ,eⱼ) + f′ hⱼ′/hⱼ − λ|` per fiber direction.
    pub fiber_eq: Vec<f64>,
    pub max_abs: f64,
}

pub fn soliton_residual(profile: &DiagonalProfile) -> Result<SolitonResidual> {
    profile.validate()?;
    let lambda = profile.lambda;
    let mut normal_eq: f64 = 0.0;
    let mut fiber_eq = vec![0.0_f64; profile.n - 1];
    for idx in 0..profile.len() {
        let k = curvature(profile, idx)?;
        let (u, _) = profile.ratios(idx)?;
        let fp = profile.f_prime[idx];
        normal_eq = normal_eq.max((k.ric_nn + profile.f_double_prime[idx] - lambda).abs());
        for (j, e) in fiber_eq.iter_mut().enumerate() {
            *e = e.max((k.ric_diag[j] + fp * u[j] - lambda).abs());
        }
    }
    let max_abs = fiber_eq.iter().fold(normal_eq, |m, &v| m.max(v));
    Ok(SolitonResidual {
        normal_eq,
        fiber_eq,
        max_abs,
    })
}
