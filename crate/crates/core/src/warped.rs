//! Gradient Ricci solitons on warped products `dt² + F²(t) g_fiber` over an
//! `(n − 1)`-dimensional Einstein fiber with `Ric_fiber = μ g_fiber`.
//!
//! With `w = F′/F` and `u₀ = f′`:
//!
//! ```text
//! F′  = w F
//! w′  = μ/F² − (n − 1) w² + u₀ w − λ
//! u₀′ = (n − 1) μ/F² − (n − 1)(n − 2) w² + (n − 1) u₀ w − (n − 2) λ
//! ```
//!
//! Three exact solutions pin the signs: the Gaussian cone `F = t`,
//! `u₀ = λt` over the round sphere (`μ = n − 2`), the round cylinder
//! `F² = μ/λ`, and, with `μ = 0`, the flat system with all `uᵢ = w`.

use serde::{Deserialize, Serialize};

use crate::curvature::{curvature_warped, WarpedProfile};
use crate::error::{param, Error, Result};
use crate::integrator::{self, IntegrateOptions, IntegrationResult, OdeSystem, Termination};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarpedSolitonState {
    pub t: f64,
    /// Warping function `F`.
    pub warp: f64,
    /// `F′/F`
    pub w: f64,
    pub u0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarpedDerivative {
    pub warp: f64,
    pub w: f64,
    pub u0: f64,
}

fn rhs_parts(warp: f64, w: f64, u0: f64, n: usize, mu: f64, lambda: f64) -> WarpedDerivative {
    let fiber = (n - 1) as f64;
    let intrinsic = mu / (warp * warp);
    WarpedDerivative {
        warp: w * warp,
        w: intrinsic - fiber * w * w + u0 * w - lambda,
        u0: fiber * intrinsic - fiber * (n - 2) as f64 * w * w + fiber * u0 * w
            - (n - 2) as f64 * lambda,
    }
}

pub fn rhs_warped(
    state: &WarpedSolitonState,
    n: usize,
    mu: f64,
    lambda: f64,
) -> Result<WarpedDerivative> {
    if n < 3 {
        return Err(param(format!("n must be >= 3, got {n}")));
    }
    if !(state.warp > 0.0) {
        return Err(Error::NonPositiveWarping {
            index: 0,
            component: 0,
            value: state.warp,
        });
    }
    Ok(rhs_parts(state.warp, state.w, state.u0, n, mu, lambda))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    GaussianCone,
    RoundCylinder,
    Bryant,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonModel {
    pub kind: ModelKind,
    pub n: usize,
    pub mu: f64,
    pub lambda: f64,
}

impl SolitonModel {
    pub fn new(kind: ModelKind, n: usize, mu: f64, lambda: f64) -> Result<Self> {
        if n < 3 {
            return Err(param(format!("n must be >= 3, got {n}")));
        }
        match kind {
            ModelKind::RoundCylinder if !(lambda > 0.0 && mu > 0.0) => {
                return Err(param("round cylinder needs lambda > 0 and mu > 0"))
            }
            ModelKind::Bryant if !(lambda == 0.0 && mu > 0.0) => {
                return Err(param("Bryant soliton needs lambda = 0 and mu > 0"))
            }
            ModelKind::GaussianCone if mu != (n - 2) as f64 => {
                return Err(param("Gaussian cone needs the unit round fiber, mu = n - 2"))
            }
            _ => {}
        }
        Ok(SolitonModel {
            kind,
            n,
            mu,
            lambda,
        })
    }

    pub fn gaussian_cone(n: usize, lambda: f64) -> Result<Self> {
        Self::new(ModelKind::GaussianCone, n, (n - 2) as f64, lambda)
    }

    pub fn round_cylinder(n: usize, mu: f64, lambda: f64) -> Result<Self> {
        Self::new(ModelKind::RoundCylinder, n, mu, lambda)
    }

    pub fn bryant(n: usize) -> Result<Self> {
        Self::new(ModelKind::Bryant, n, (n - 2) as f64, 0.0)
    }

    /// Exact state at `t` for the cone and cylinder.
    pub fn exact_state(&self, t: f64) -> Result<WarpedSolitonState> {
        match self.kind {
            ModelKind::GaussianCone => Ok(WarpedSolitonState {
                t,
                warp: t,
                w: 1.0 / t,
                u0: self.lambda * t,
            }),
            ModelKind::RoundCylinder => Ok(WarpedSolitonState {
                t,
                warp: (self.mu / self.lambda).sqrt(),
                w: 0.0,
                u0: self.lambda * t,
            }),
            _ => Err(param("no closed form for this model")),
        }
    }

    /// Exact profile with `f = λt²/2` for the cone and cylinder.
    pub fn exact_profile(&self, grid: Vec<f64>) -> Result<WarpedProfile> {
        let lambda = self.lambda;
        let potential = |t: f64| (0.5 * lambda * t * t, lambda * t, lambda);
        let mut profile = match self.kind {
            ModelKind::GaussianCone => {
                WarpedProfile::from_fn(self.n, self.mu, lambda, grid, |t| (t, 1.0, 0.0), potential)?
            }
            ModelKind::RoundCylinder => {
                let radius = (self.mu / lambda).sqrt();
                WarpedProfile::from_fn(
                    self.n,
                    self.mu,
                    lambda,
                    grid,
                    |_| (radius, 0.0, 0.0),
                    potential,
                )?
            }
            _ => return Err(param("no closed form for this model")),
        };
        profile.provenance = format!("exact {:?}", self.kind);
        Ok(profile)
    }
}

/// Smooth-closure series launch for the Bryant soliton at `t = epsilon`.
///
/// Normalised by `f″(0) = −1`; other Bryant solitons are dilations.
/// Order matching of the warped system at the closed orbit gives
///
/// ```text
/// F  = t + c₃ t³ + c₅ t⁵,         c₃ = c₁ / (6(n − 1))
/// f′ = c₁ t + d₃ t³,              c₅ = c₁² (13n − 10) / (120 (n − 1)² (n + 2))
///                                  d₃ = 2 c₁² / (3 (n + 2))
/// ```
pub fn bryant_series_start(n: usize, epsilon: f64) -> Result<WarpedSolitonState> {
    if n < 3 {
        return Err(param(format!("n must be >= 3, got {n}")));
    }
    if !(epsilon > 0.0 && epsilon < 0.1) {
        return Err(param(format!("epsilon = {epsilon} must lie in (0, 0.1)")));
    }
    let (c3, c5, d3) = bryant_coefficients(n, BRYANT_C1);
    let e = epsilon;
    let warp = e + c3 * e.powi(3) + c5 * e.powi(5);
    let warp_prime = 1.0 + 3.0 * c3 * e * e + 5.0 * c5 * e.powi(4);
    Ok(WarpedSolitonState {
        t: e,
        warp,
        w: warp_prime / warp,
        u0: BRYANT_C1 * e + d3 * e.powi(3),
    })
}

/// `f″(0)` of the normalised Bryant launch.
pub const BRYANT_C1: f64 = -1.0;

/// Series coefficients `(c₃, c₅, d₃)` for a given `c₁ = f″(0)`.
pub fn bryant_coefficients(n: usize, c1: f64) -> (f64, f64, f64) {
    let nf = n as f64;
    let c3 = c1 / (6.0 * (nf - 1.0));
    let c5 = c1 * c1 * (13.0 * nf - 10.0) / (120.0 * (nf - 1.0).powi(2) * (nf + 2.0));
    let d3 = 2.0 * c1 * c1 / (3.0 * (nf + 2.0));
    (c3, c5, d3)
}

/// Warped system augmented with `∫u₀`. Layout `[F, w, u₀, ∫u₀]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpedSystem {
    pub n: usize,
    pub mu: f64,
    pub lambda: f64,
    /// Integration stops once `F` drops below this floor.
    pub warp_floor: f64,
}

impl OdeSystem for WarpedSystem {
    fn dim(&self) -> usize {
        4
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let d = rhs_parts(y[0], y[1], y[2], self.n, self.mu, self.lambda);
        dy[0] = d.warp;
        dy[1] = d.w;
        dy[2] = d.u0;
        dy[3] = y[2];
    }

    fn blowup_measure(&self, y: &[f64]) -> f64 {
        y[0].abs().max(y[1].abs()).max(y[2].abs())
    }

    fn dominant_component(&self, y: &[f64]) -> usize {
        let mut best = 0;
        for i in 1..3 {
            if y[i].abs() > y[best].abs() {
                best = i;
            }
        }
        best
    }

    fn collapsed(&self, y: &[f64]) -> bool {
        !(y[0] > self.warp_floor)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WarpedTrajectory {
    pub n: usize,
    pub mu: f64,
    pub lambda: f64,
    pub result: IntegrationResult,
}

impl WarpedTrajectory {
    pub fn termination(&self) -> Termination {
        self.result.termination
    }

    pub fn blowup_estimate(&self) -> Option<f64> {
        self.result.blowup_estimate
    }

    pub fn states(&self) -> Vec<WarpedSolitonState> {
        self.result
            .samples
            .iter()
            .map(|s| WarpedSolitonState {
                t: s.t,
                warp: s.y[0],
                w: s.y[1],
                u0: s.y[2],
            })
            .collect()
    }
}

/// Default floor below which `F` counts as collapsed.
pub const WARP_FLOOR: f64 = 1e-10;

pub fn integrate_warped(
    initial: &WarpedSolitonState,
    n: usize,
    mu: f64,
    lambda: f64,
    t_end: f64,
    options: &IntegrateOptions,
) -> Result<WarpedTrajectory> {
    rhs_warped(initial, n, mu, lambda)?;
    let system = WarpedSystem {
        n,
        mu,
        lambda,
        warp_floor: WARP_FLOOR,
    };
    let y0 = [initial.warp, initial.w, initial.u0, 0.0];
    let result = integrator::integrate(&system, initial.t, &y0, t_end, options)?;
    Ok(WarpedTrajectory {
        n,
        mu,
        lambda,
        result,
    })
}

/// `F` and `f = f0 + ∫u₀` with second derivatives taken from the right-hand side.
pub fn warped_to_profile(traj: &WarpedTrajectory, f0: f64) -> Result<WarpedProfile> {
    let samples = &traj.result.samples;
    let mut profile = WarpedProfile {
        n: traj.n,
        mu: traj.mu,
        lambda: traj.lambda,
        grid: Vec::with_capacity(samples.len()),
        warp: Vec::with_capacity(samples.len()),
        warp_prime: Vec::with_capacity(samples.len()),
        warp_double_prime: Vec::with_capacity(samples.len()),
        f: Vec::with_capacity(samples.len()),
        f_prime: Vec::with_capacity(samples.len()),
        f_double_prime: Vec::with_capacity(samples.len()),
        provenance: format!(
            "integrate-warped n={} mu={} lambda={}",
            traj.n, traj.mu, traj.lambda
        ),
    };
    for s in samples {
        let (warp, w, u0) = (s.y[0], s.y[1], s.y[2]);
        profile.grid.push(s.t);
        profile.warp.push(warp);
        profile.warp_prime.push(w * warp);
        profile.warp_double_prime.push((s.dy[1] + w * w) * warp);
        profile.f.push(f0 + s.y[3]);
        profile.f_prime.push(u0);
        profile.f_double_prime.push(s.dy[2]);
    }
    profile.validate()?;
    Ok(profile)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WarpedResidual {
    /// `max |Ric(N,N) + f″ − λ|`
    pub normal_eq: f64,
    /// `max |Ric(e,e) + f′ F′/F − λ|`
    pub fiber_eq: f64,
    pub max_abs: f64,
}

pub fn warped_soliton_residual(profile: &WarpedProfile) -> Result<WarpedResidual> {
    profile.validate()?;
    let mut normal_eq: f64 = 0.0;
    let mut fiber_eq: f64 = 0.0;
    for i in 0..profile.len() {
        let k = curvature_warped(profile, i)?;
        let w = profile.warp_prime[i] / profile.warp[i];
        normal_eq = normal_eq.max((k.ric_nn + profile.f_double_prime[i] - profile.lambda).abs());
        fiber_eq =
            fiber_eq.max((k.ric_diag[0] + profile.f_prime[i] * w - profile.lambda).abs());
    }
    Ok(WarpedResidual {
        normal_eq,
        fiber_eq,
        max_abs: normal_eq.max(fiber_eq),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flat::{self, CoefficientConvention, FlatSolitonState};

    #[test]
    fn gaussian_cone_substitution() {
        for n in 3..=8 {
            for &lambda in &[-1.0, 0.0, 1.0] {
                for &t in &[0.1, 1.0, 4.0] {
                    let s = WarpedSolitonState { t, warp: t, w: 1.0 / t, u0: lambda * t };
                    let d = rhs_warped(&s, n, (n - 2) as f64, lambda).unwrap();
                    assert!((d.w + 1.0 / (t * t)).abs() < 1e-12);
                    assert!((d.u0 - lambda).abs() < 1e-12);
                    assert!((d.warp - 1.0).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn round_cylinder_substitution() {
        let model = SolitonModel::round_cylinder(4, 2.0, 0.5).unwrap();
        let s = model.exact_state(3.0).unwrap();
        let d = rhs_warped(&s, 4, 2.0, 0.5).unwrap();
        assert_eq!(d.warp, 0.0);
        assert!(d.w.abs() < 1e-15);
        assert!((d.u0 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn flat_fiber_matches_flat_system() {
        let s = WarpedSolitonState { t: 0.0, warp: 1.7, w: -0.4, u0: 0.9 };
        for n in 3..7 {
            let d = rhs_warped(&s, n, 0.0, 0.6).unwrap();
            let flat_state = FlatSolitonState::new(0.0, s.u0, vec![s.w; n - 1]);
            let fd = flat::rhs(&flat_state, 0.6, n, CoefficientConvention::Corrected).unwrap();
            assert!((d.w - fd.u[0]).abs() < 1e-14);
            assert!((d.u0 - fd.u0).abs() < 1e-13);
        }
    }

    #[test]
    fn model_preconditions() {
        assert!(SolitonModel::round_cylinder(3, 1.0, 0.0).is_err());
        assert!(SolitonModel::new(ModelKind::Bryant, 3, 1.0, 0.5).is_err());
        assert!(SolitonModel::new(ModelKind::GaussianCone, 4, 1.0, 0.0).is_err());
        assert!(SolitonModel::bryant(3).is_ok());
    }

    #[test]
    fn series_start_orders() {
        for n in 3..6 {
            for &eps in &[1e-2, 1e-3] {
                let s = bryant_series_start(n, eps).unwrap();
                assert!((s.w - 1.0 / eps).abs() < 2.0 * eps);
                assert!(s.u0.abs() < 2.0 * eps);
            }
        }
        assert!(bryant_series_start(2, 1e-3).is_err());
        assert!(bryant_series_start(3, 0.0).is_err());
    }

    #[test]
    fn series_residual_shrinks_with_order() {
        // Independent check of the coefficients: plug the truncated series
        // into the system with exact derivatives.
        let n = 4;
        let (c3, c5, d3) = bryant_coefficients(n, BRYANT_C1);
        let warp = |t: f64| t + c3 * t.powi(3) + c5 * t.powi(5);
        let dwarp = |t: f64| 1.0 + 3.0 * c3 * t * t + 5.0 * c5 * t.powi(4);
        let u0 = |t: f64| BRYANT_C1 * t + d3 * t.powi(3);
        let ddwarp = |t: f64| 6.0 * c3 * t + 20.0 * c5 * t.powi(3);
        let defect = |t: f64| {
            let w = dwarp(t) / warp(t);
            let dw = ddwarp(t) / warp(t) - w * w;
            let du = BRYANT_C1 + 3.0 * d3 * t * t;
            let d = rhs_parts(warp(t), w, u0(t), n, (n - 2) as f64, 0.0);
            (dw - d.w).abs().max((du - d.u0).abs())
        };
        let (r1, r2) = (defect(0.02), defect(0.01));
        // Truncation leaves O(t³) defects or better; halving t cuts them by ≥ 8.
        assert!(r1 / r2 > 7.5, "defects {r1} {r2}");
    }

    #[test]
    fn negative_warp_rejected() {
        let s = WarpedSolitonState { t: 0.0, warp: -1.0, w: 0.0, u0: 0.0 };
        assert!(matches!(
            rhs_warped(&s, 3, 1.0, 0.0),
            Err(Error::NonPositiveWarping { .. })
        ));
    }
}
