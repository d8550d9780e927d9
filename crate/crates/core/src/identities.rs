//! Structural identities every gradient Ricci soliton satisfies, evaluated
//! along sampled profiles:
//!
//! - `S + |∇f|² − 2λf = C` (Hamilton's conservation law),
//! - `Δ_f S + 2|Ric|² = 2λS` with `Δ_f S = S″ + (tr L − f′) S′` for
//!   functions of `t` alone.
//!
//! Wherever a profile satisfies its first-order system pointwise, `S′` and
//! `S″` follow from differentiating that system (no discretisation error).
//! Elsewhere they come from 5-point finite-difference weights on the profile
//! grid, which carries an `O(Δt³)` floor and amplifies rounding by `Δt⁻²`.

use serde::{Deserialize, Serialize};

use crate::curvature::{curvature, CurvatureReport, DiagonalProfile, WarpedProfile};
use crate::curvature::curvature_warped;
use crate::error::{param, Result};
use crate::flat::CoefficientConvention;

/// Common view of diagonal and warped profiles for the monitors.
pub trait SolitonProfile {
    fn grid(&self) -> &[f64];
    fn lambda(&self) -> f64;
    fn potential(&self) -> &[f64];
    fn potential_prime(&self) -> &[f64];
    fn curvature_at(&self, index: usize) -> Result<CurvatureReport>;
    /// `tr L` at `index`.
    fn mean_curvature_at(&self, index: usize) -> Result<f64>;
    fn convention(&self) -> Option<CoefficientConvention> {
        None
    }
    fn provenance(&self) -> &str;
    /// Adds `c` to the potential `f`.
    fn shift_potential(&mut self, c: f64);
    /// `(S, S′, S″)` by the chain rule through the first-order system, or
    /// `None` when the sample does not satisfy that system.
    fn scalar_jet(&self, _index: usize) -> Result<Option<[f64; 3]>> {
        Ok(None)
    }
}

/// Relative tolerance for accepting a sample as a solution of the first-order system.
const SYSTEM_TOL: f64 = 1e-9;

fn satisfies(lhs: f64, terms: &[f64]) -> bool {
    let sum: f64 = terms.iter().sum();
    let scale = 1.0 + lhs.abs() + terms.iter().map(|x| x.abs()).sum::<f64>();
    (lhs - sum).abs() <= SYSTEM_TOL * scale
}

fn diagonal_jet(p: &DiagonalProfile, index: usize) -> Result<Option<[f64; 3]>> {
    let (u, r) = p.ratios(index)?;
    let lambda = p.lambda;
    let k = p.convention.unwrap_or_default().lambda_coefficient(p.n);
    let (u0, du0) = (p.f_prime[index], p.f_double_prime[index]);
    let a: f64 = u.iter().sum();
    let b: f64 = u.iter().map(|x| x * x).sum();
    let du: Vec<f64> = u.iter().zip(&r).map(|(ui, ri)| ri - ui * ui).collect();
    for (ui, dui) in u.iter().zip(&du) {
        if !satisfies(*dui, &[(u0 - a) * ui, -lambda]) {
            return Ok(None);
        }
    }
    if !satisfies(du0, &[b, (u0 - a) * a, -k * lambda]) {
        return Ok(None);
    }
    let a1: f64 = du.iter().sum();
    let b1: f64 = u.iter().zip(&du).map(|(x, y)| x * y).sum();
    let ddu: Vec<f64> = u
        .iter()
        .zip(&du)
        .map(|(ui, dui)| (du0 - a1) * ui + (u0 - a) * dui)
        .collect();
    let a2: f64 = ddu.iter().sum();
    let ddu0 = 2.0 * b1 + (du0 - a1) * a + (u0 - a) * a1;
    let a3: f64 = (0..u.len())
        .map(|i| (ddu0 - a2) * u[i] + 2.0 * (du0 - a1) * du[i] + (u0 - a) * ddu[i])
        .sum();
    let second: f64 = (0..u.len()).map(|i| du[i] * du[i] + u[i] * ddu[i]).sum();
    Ok(Some([
        -2.0 * a1 - a * a - b,
        -2.0 * a2 - 2.0 * a * a1 - 2.0 * b1,
        -2.0 * a3 - 2.0 * a1 * a1 - 2.0 * a * a2 - 2.0 * second,
    ]))
}

fn warped_jet(p: &WarpedProfile, index: usize) -> Result<Option<[f64; 3]>> {
    let w = p.mean_curvature(index)? / (p.n - 1) as f64;
    let warp = p.warp[index];
    let (lambda, mu) = (p.lambda, p.mu);
    let (nf, m) = (p.n as f64, (p.n - 1) as f64);
    let (u0, du0) = (p.f_prime[index], p.f_double_prime[index]);
    let w1 = p.warp_double_prime[index] / warp - w * w;
    let q = mu / (warp * warp);
    if !satisfies(w1, &[q, -m * w * w, u0 * w, -lambda]) {
        return Ok(None);
    }
    if !satisfies(du0, &[m * q, -m * (nf - 2.0) * w * w, m * u0 * w, -(nf - 2.0) * lambda]) {
        return Ok(None);
    }
    let q1 = -2.0 * w * q;
    let q2 = -2.0 * w1 * q + 4.0 * w * w * q;
    let w2 = q1 - 2.0 * m * w * w1 + du0 * w + u0 * w1;
    let ddu0 = m * q1 - 2.0 * m * (nf - 2.0) * w * w1 + m * (du0 * w + u0 * w1);
    let w3 = q2 - 2.0 * m * (w1 * w1 + w * w2) + ddu0 * w + 2.0 * du0 * w1 + u0 * w2;
    Ok(Some([
        m * (-2.0 * w1 - nf * w * w + q),
        m * (-2.0 * w2 - 2.0 * nf * w * w1 + q1),
        m * (-2.0 * w3 - 2.0 * nf * (w1 * w1 + w * w2) + q2),
    ]))
}

impl SolitonProfile for DiagonalProfile {
    fn grid(&self) -> &[f64] {
        &self.grid
    }
    fn lambda(&self) -> f64 {
        self.lambda
    }
    fn potential(&self) -> &[f64] {
        &self.f
    }
    fn potential_prime(&self) -> &[f64] {
        &self.f_prime
    }
    fn curvature_at(&self, index: usize) -> Result<CurvatureReport> {
        curvature(self, index)
    }
    fn mean_curvature_at(&self, index: usize) -> Result<f64> {
        Ok(self.ratios(index)?.0.iter().sum())
    }
    fn convention(&self) -> Option<CoefficientConvention> {
        self.convention
    }
    fn provenance(&self) -> &str {
        &self.provenance
    }
    fn shift_potential(&mut self, c: f64) {
        self.f.iter_mut().for_each(|f| *f += c);
    }
    fn scalar_jet(&self, index: usize) -> Result<Option<[f64; 3]>> {
        diagonal_jet(self, index)
    }
}

impl SolitonProfile for WarpedProfile {
    fn grid(&self) -> &[f64] {
        &self.grid
    }
    fn lambda(&self) -> f64 {
        self.lambda
    }
    fn potential(&self) -> &[f64] {
        &self.f
    }
    fn potential_prime(&self) -> &[f64] {
        &self.f_prime
    }
    fn curvature_at(&self, index: usize) -> Result<CurvatureReport> {
        curvature_warped(self, index)
    }
    fn mean_curvature_at(&self, index: usize) -> Result<f64> {
        self.mean_curvature(index)
    }
    fn provenance(&self) -> &str {
        &self.provenance
    }
    fn shift_potential(&mut self, c: f64) {
        self.f.iter_mut().for_each(|f| *f += c);
    }
    fn scalar_jet(&self, index: usize) -> Result<Option<[f64; 3]>> {
        warped_jet(self, index)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IdentityReport {
    /// `Q(t) = S + f′² − 2λf` per grid point; empty when not evaluated.
    pub hamilton_constant: Vec<f64>,
    /// `max |Q − Q(t₀)|`
    pub hamilton_drift: Option<f64>,
    /// `max |Δ_f S + 2|Ric|² − 2λS|`
    pub elliptic_residual: Option<f64>,
    pub grid_span: (f64, f64),
    pub convention: Option<CoefficientConvention>,
    pub provenance: String,
}

impl IdentityReport {
    fn empty<P: SolitonProfile + ?Sized>(profile: &P) -> Self {
        let grid = profile.grid();
        IdentityReport {
            hamilton_constant: Vec::new(),
            hamilton_drift: None,
            elliptic_residual: None,
            grid_span: (grid[0], grid[grid.len() - 1]),
            convention: profile.convention(),
            provenance: profile.provenance().to_string(),
        }
    }

    /// `Q(t₀)`, the reported value of the conserved constant.
    pub fn hamilton_value(&self) -> Option<f64> {
        self.hamilton_constant.first().copied()
    }

    /// Largest of the evaluated drift and residual.
    pub fn worst(&self) -> f64 {
        self.hamilton_drift
            .unwrap_or(0.0)
            .max(self.elliptic_residual.unwrap_or(0.0))
    }
}

fn check_nonempty<P: SolitonProfile + ?Sized>(profile: &P) -> Result<()> {
    if profile.grid().is_empty() {
        return Err(param("profile has no grid points"));
    }
    Ok(())
}

pub fn hamilton_monitor<P: SolitonProfile + ?Sized>(profile: &P) -> Result<IdentityReport> {
    check_nonempty(profile)?;
    let lambda = profile.lambda();
    let (f, fp) = (profile.potential(), profile.potential_prime());
    let mut q = Vec::with_capacity(f.len());
    for i in 0..f.len() {
        let s = profile.curvature_at(i)?.scalar;
        q.push(s + fp[i] * fp[i] - 2.0 * lambda * f[i]);
    }
    let drift = q.iter().fold(0.0_f64, |m, v| m.max((v - q[0]).abs()));
    let mut report = IdentityReport::empty(profile);
    report.hamilton_constant = q;
    report.hamilton_drift = Some(drift);
    Ok(report)
}

/// Largest magnitude among the terms `S`, `f′²`, `2λf` over the grid; the
/// natural scale for a relative Hamilton drift.
pub fn hamilton_scale<P: SolitonProfile + ?Sized>(profile: &P) -> Result<f64> {
    let lambda = profile.lambda();
    let (f, fp) = (profile.potential(), profile.potential_prime());
    let mut scale: f64 = 0.0;
    for i in 0..f.len() {
        let s = profile.curvature_at(i)?.scalar;
        scale = scale
            .max(s.abs())
            .max(fp[i] * fp[i])
            .max((2.0 * lambda * f[i]).abs());
    }
    Ok(scale)
}

/// Fornberg weights for derivatives `0..=order` at `x0` on nodes `xs`.
pub fn fd_weights(x0: f64, xs: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

const STENCIL: usize = 5;

pub fn elliptic_monitor<P: SolitonProfile + ?Sized>(profile: &P) -> Result<IdentityReport> {
    let grid = profile.grid();
    if grid.len() < STENCIL {
        return Err(param(format!(
            "elliptic monitor needs at least {STENCIL} grid points, got {}",
            grid.len()
        )));
    }
    let lambda = profile.lambda();
    let fp = profile.potential_prime();
    let reports = (0..grid.len())
        .map(|i| profile.curvature_at(i))
        .collect::<Result<Vec<_>>>()?;
    let scalar: Vec<f64> = reports.iter().map(|r| r.scalar).collect();
    let mut worst: f64 = 0.0;
    for i in 0..grid.len() {
        let (ds, dds) = match profile.scalar_jet(i)? {
            Some([_, ds, dds]) => (ds, dds),
            None => {
                let start = i.saturating_sub(STENCIL / 2).min(grid.len() - STENCIL);
                let w = fd_weights(grid[i], &grid[start..start + STENCIL], 2);
                let ds: f64 = (0..STENCIL).map(|k| w[1][k] * scalar[start + k]).sum();
                let dds: f64 = (0..STENCIL).map(|k| w[2][k] * scalar[start + k]).sum();
                (ds, dds)
            }
        };
        let mean = profile.mean_curvature_at(i)?;
        let residual =
            dds + (mean - fp[i]) * ds + 2.0 * reports[i].ric_norm_sq - 2.0 * lambda * scalar[i];
        worst = worst.max(residual.abs());
    }
    let mut report = IdentityReport::empty(profile);
    report.elliptic_residual = Some(worst);
    Ok(report)
}

/// Both monitors in one report.
pub fn verify<P: SolitonProfile + ?Sized>(profile: &P) -> Result<IdentityReport> {
    let mut report = hamilton_monitor(profile)?;
    report.elliptic_residual = elliptic_monitor(profile)?.elliptic_residual;
    Ok(report)
}

/// The codazzi-type line `δL + ∇ tr L = 0` of the reduced soliton equation.
///
/// For metrics depending on `t` alone both terms are spatial derivatives of
/// constants on each level set, so the value is exactly zero. The call also
/// checks that the frame Ricci entries agree with the sectional-curvature
/// sums used by the residual evaluators.
pub fn structural_eq_check(profile: &DiagonalProfile) -> Result<f64> {
    for i in 0..profile.len() {
        let k = curvature(profile, i)?;
        for j in 0..k.ric_diag.len() {
            let from_sections: f64 =
                k.sec_normal[j] + (0..k.ric_diag.len()).filter(|&m| m != j).map(|m| k.sec_tangent[m][j]).sum::<f64>();
            let scale = 1.0 + from_sections.abs().max(k.ric_diag[j].abs());
            if (from_sections - k.ric_diag[j]).abs() > 1e-10 * scale {
                return Err(param(format!(
                    "frame Ricci mismatch at index {i}, direction {j}: {} vs {}",
                    k.ric_diag[j], from_sections
                )));
            }
        }
    }
    Ok(0.0)
}

/// Shifts `f` of a `λ = 1/2` profile so that `S + |∇f|² = f`.
pub fn normalize_shrinker<P: SolitonProfile + ?Sized>(profile: &mut P) -> Result<f64> {
    if profile.lambda() != 0.5 {
        return Err(param(format!(
            "shrinker normalisation needs lambda = 1/2, got {}",
            profile.lambda()
        )));
    }
    let q0 = hamilton_monitor(profile)?.hamilton_constant[0];
    profile.shift_potential(q0);
    Ok(q0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warped::SolitonModel;

    fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn static_flat_linear_potential() {
        let p = DiagonalProfile::from_fn(
            3,
            0.0,
            grid(0.0, 1.0, 11),
            |_| (vec![1.0, 2.0], vec![0.0; 2], vec![0.0; 2]),
            |t| (0.5 * t, 0.5, 0.0),
        )
        .unwrap();
        let r = verify(&p).unwrap();
        assert_eq!(r.hamilton_drift, Some(0.0));
        assert_eq!(r.hamilton_constant[0], 0.25);
        assert_eq!(r.elliptic_residual, Some(0.0));
        assert_eq!(structural_eq_check(&p).unwrap(), 0.0);
    }

    #[test]
    fn round_cylinder_is_conserved() {
        // n = 3, μ = 1, λ = 1/2, F = √2
        let model = SolitonModel::round_cylinder(3, 1.0, 0.5).unwrap();
        let p = model.exact_profile(grid(-2.0, 2.0, 41)).unwrap();
        let r = verify(&p).unwrap();
        assert!(r.hamilton_drift.unwrap() < 1e-14);
        assert!(r.elliptic_residual.unwrap() < 1e-12);
    }

    #[test]
    fn potential_shift_moves_constant() {
        let model = SolitonModel::round_cylinder(4, 2.0, 1.0).unwrap();
        let mut p = model.exact_profile(grid(0.0, 1.0, 6)).unwrap();
        let before = hamilton_monitor(&p).unwrap();
        p.shift_potential(0.75);
        let after = hamilton_monitor(&p).unwrap();
        assert!((after.hamilton_constant[0] - before.hamilton_constant[0] + 1.5).abs() < 1e-14);
        assert_eq!(after.hamilton_drift, before.hamilton_drift);
    }

    #[test]
    fn shrinker_normalisation() {
        let model = SolitonModel::round_cylinder(3, 1.0, 0.5).unwrap();
        let mut p = model.exact_profile(grid(0.0, 1.0, 6)).unwrap();
        normalize_shrinker(&mut p).unwrap();
        for i in 0..p.len() {
            let s = curvature_warped(&p, i).unwrap().scalar;
            assert!((s + p.f_prime[i].powi(2) - p.f[i]).abs() < 1e-13);
        }
        let mut steady = SolitonModel::gaussian_cone(3, 0.0).unwrap().exact_profile(grid(1.0, 2.0, 6)).unwrap();
        assert!(normalize_shrinker(&mut steady).is_err());
    }

    #[test]
    fn weights_match_classic_stencils() {
        let w = fd_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 2);
        let d1 = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        let d2 = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
        for k in 0..5 {
            assert!((w[1][k] - d1[k]).abs() < 1e-14);
            assert!((w[2][k] - d2[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn short_grid_rejected() {
        let model = SolitonModel::gaussian_cone(3, 1.0).unwrap();
        let p = model.exact_profile(grid(1.0, 2.0, 4)).unwrap();
        assert!(elliptic_monitor(&p).is_err());
        assert!(hamilton_monitor(&p).is_ok());
    }
}
