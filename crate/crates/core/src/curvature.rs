//! Curvature of the two cohomogeneity-one ansätze handled by this crate.
//!
//! Diagonal profiles `dt² + Σ hᵢ²(t) dxᵢ²` have flat level sets; warped
//! profiles `dt² + F²(t) g_fiber` have an Einstein fiber with
//! `Ric_fiber = μ g_fiber`. Every report is expressed in the orthonormal
//! frame `N = ∂_t`, `eᵢ = ∂ᵢ / hᵢ`, in which the Ricci tensor is diagonal.
//!
//! Profiles store their first and second derivatives; nothing in this module
//! differentiates samples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flat::CoefficientConvention;

/// Flat-level-set metric `dt² + Σ hᵢ²(t) dxᵢ²` with potential `f`, sampled on a grid.
///
/// Per-point arrays are indexed `[grid index][component]` with `n − 1` components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalProfile {
    pub n: usize,
    pub lambda: f64,
    pub grid: Vec<f64>,
    pub h: Vec<Vec<f64>>,
    pub h_prime: Vec<Vec<f64>>,
    pub h_double_prime: Vec<Vec<f64>>,
    pub f: Vec<f64>,
    pub f_prime: Vec<f64>,
    pub f_double_prime: Vec<f64>,
    /// Coefficient convention of the ODE that produced the profile, if any.
    pub convention: Option<CoefficientConvention>,
    pub provenance: String,
}

/// Warped metric `dt² + F²(t) g_fiber` over an `(n − 1)`-dimensional Einstein fiber.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpedProfile {
    pub n: usize,
    pub mu: f64,
    pub lambda: f64,
    pub grid: Vec<f64>,
    pub warp: Vec<f64>,
    pub warp_prime: Vec<f64>,
    pub warp_double_prime: Vec<f64>,
    pub f: Vec<f64>,
    pub f_prime: Vec<f64>,
    pub f_double_prime: Vec<f64>,
    pub provenance: String,
}

/// Traces of the shape operator `L` and its derivative at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceData {
    /// `tr L = Σ hᵢ′/hᵢ`
    pub a: f64,
    /// `tr L² = Σ (hᵢ′/hᵢ)²`
    pub b: f64,
    /// `tr L′ = Σ (hᵢ″/hᵢ − (hᵢ′/hᵢ)²)`
    pub tr_l_prime: f64,
    pub tr_l2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    /// `K(eᵢ, N)`
    pub sec_normal: Vec<f64>,
    /// `K(eᵢ, eⱼ)` for `i ≠ j`; the diagonal is left at zero.
    pub sec_tangent: Vec<Vec<f64>>,
    pub ric_nn: f64,
    pub ric_diag: Vec<f64>,
    pub scalar: f64,
    pub ric_norm_sq: f64,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::Profile(format!(
            "grid needs at least 2 points, got {}",
            grid.len()
        )));
    }
    if let Some(i) = grid.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::Profile(format!(
            "grid not strictly increasing at index {}",
            i + 1
        )));
    }
    Ok(())
}

fn check_len(name: &str, len: usize, expected: usize) -> Result<()> {
    if len != expected {
        return Err(Error::Profile(format!(
            "{name} has {len} samples, grid has {expected}"
        )));
    }
    Ok(())
}

impl DiagonalProfile {
    /// Samples closed-form warping functions and potential on `grid`.
    ///
    /// `metric(t)` returns `(h, h′, h″)` and `potential(t)` returns `(f, f′, f″)`.
    pub fn from_fn<M, P>(
        n: usize,
        lambda: f64,
        grid: Vec<f64>,
        mut metric: M,
        mut potential: P,
    ) -> Result<Self>
    where
        M: FnMut(f64) -> (Vec<f64>, Vec<f64>, Vec<f64>),
        P: FnMut(f64) -> (f64, f64, f64),
    {
        let len = grid.len();
        let mut profile = DiagonalProfile {
            n,
            lambda,
            h: Vec::with_capacity(len),
            h_prime: Vec::with_capacity(len),
            h_double_prime: Vec::with_capacity(len),
            f: Vec::with_capacity(len),
            f_prime: Vec::with_capacity(len),
            f_double_prime: Vec::with_capacity(len),
            grid: Vec::new(),
            convention: None,
            provenance: "closed form".into(),
        };
        for &t in &grid {
            let (h, hp, hpp) = metric(t);
            profile.h.push(h);
            profile.h_prime.push(hp);
            profile.h_double_prime.push(hpp);
            let (f, fp, fpp) = potential(t);
            profile.f.push(f);
            profile.f_prime.push(fp);
            profile.f_double_prime.push(fpp);
        }
        profile.grid = grid;
        profile.validate()?;
        Ok(profile)
    }

    /// Checks dimensions and grid ordering. Positivity of `hᵢ` is checked
    /// pointwise by the curvature operations.
    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::Parameter(format!("n must be >= 3, got {}", self.n)));
        }
        check_grid(&self.grid)?;
        let len = self.grid.len();
        for (name, rows) in [
            ("h", &self.h),
            ("h'", &self.h_prime),
            ("h''", &self.h_double_prime),
        ] {
            check_len(name, rows.len(), len)?;
            if let Some(i) = rows.iter().position(|r| r.len() != self.n - 1) {
                return Err(Error::Profile(format!(
                    "{name} at index {i} has {} components, expected {}",
                    rows[i].len(),
                    self.n - 1
                )));
            }
        }
        check_len("f", self.f.len(), len)?;
        check_len("f'", self.f_prime.len(), len)?;
        check_len("f''", self.f_double_prime.len(), len)?;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Log-derivatives `hᵢ′/hᵢ` and second ratios `hᵢ″/hᵢ` at `index`.
    pub fn ratios(&self, index: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        if index >= self.grid.len() {
            return Err(Error::Parameter(format!(
                "grid index {index} out of range (len {})",
                self.grid.len()
            )));
        }
        let h = &self.h[index];
        if let Some(component) = h.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::NonPositiveWarping {
                index,
                component,
                value: h[component],
            });
        }
        let u = h
            .iter()
            .zip(&self.h_prime[index])
            .map(|(h, hp)| hp / h)
            .collect();
        let r = h
            .iter()
            .zip(&self.h_double_prime[index])
            .map(|(h, hpp)| hpp / h)
            .collect();
        Ok((u, r))
    }

    /// Sub-profile on `range` of grid indices.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        DiagonalProfile {
            n: self.n,
            lambda: self.lambda,
            grid: self.grid[range.clone()].to_vec(),
            h: self.h[range.clone()].to_vec(),
            h_prime: self.h_prime[range.clone()].to_vec(),
            h_double_prime: self.h_double_prime[range.clone()].to_vec(),
            f: self.f[range.clone()].to_vec(),
            f_prime: self.f_prime[range.clone()].to_vec(),
            f_double_prime: self.f_double_prime[range].to_vec(),
            convention: self.convention,
            provenance: self.provenance.clone(),
        }
    }
}

impl WarpedProfile {
    /// Samples `(F, F′, F″)` and `(f, f′, f″)` from closed forms.
    pub fn from_fn<M, P>(
        n: usize,
        mu: f64,
        lambda: f64,
        grid: Vec<f64>,
        mut warp: M,
        mut potential: P,
    ) -> Result<Self>
    where
        M: FnMut(f64) -> (f64, f64, f64),
        P: FnMut(f64) -> (f64, f64, f64),
    {
        let len = grid.len();
        let mut profile = WarpedProfile {
            n,
            mu,
            lambda,
            grid: Vec::new(),
            warp: Vec::with_capacity(len),
            warp_prime: Vec::with_capacity(len),
            warp_double_prime: Vec::with_capacity(len),
            f: Vec::with_capacity(len),
            f_prime: Vec::with_capacity(len),
            f_double_prime: Vec::with_capacity(len),
            provenance: "closed form".into(),
        };
        for &t in &grid {
            let (w, wp, wpp) = warp(t);
            profile.warp.push(w);
            profile.warp_prime.push(wp);
            profile.warp_double_prime.push(wpp);
            let (f, fp, fpp) = potential(t);
            profile.f.push(f);
            profile.f_prime.push(fp);
            profile.f_double_prime.push(fpp);
        }
        profile.grid = grid;
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::Parameter(format!("n must be >= 3, got {}", self.n)));
        }
        check_grid(&self.grid)?;
        let len = self.grid.len();
        check_len("F", self.warp.len(), len)?;
        check_len("F'", self.warp_prime.len(), len)?;
        check_len("F''", self.warp_double_prime.len(), len)?;
        check_len("f", self.f.len(), len)?;
        check_len("f'", self.f_prime.len(), len)?;
        check_len("f''", self.f_double_prime.len(), len)?;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        WarpedProfile {
            n: self.n,
            mu: self.mu,
            lambda: self.lambda,
            grid: self.grid[range.clone()].to_vec(),
            warp: self.warp[range.clone()].to_vec(),
            warp_prime: self.warp_prime[range.clone()].to_vec(),
            warp_double_prime: self.warp_double_prime[range.clone()].to_vec(),
            f: self.f[range.clone()].to_vec(),
            f_prime: self.f_prime[range.clone()].to_vec(),
            f_double_prime: self.f_double_prime[range].to_vec(),
            provenance: self.provenance.clone(),
        }
    }

    /// Mean curvature `tr L = (n − 1) F′/F` at `index`.
    pub fn mean_curvature(&self, index: usize) -> Result<f64> {
        let warp = self.positive_warp(index)?;
        Ok((self.n - 1) as f64 * self.warp_prime[index] / warp)
    }

    fn positive_warp(&self, index: usize) -> Result<f64> {
        let warp = *self.warp.get(index).ok_or_else(|| {
            Error::Parameter(format!(
                "grid index {index} out of range (len {})",
                self.warp.len()
            ))
        })?;
        if !(warp > 0.0) {
            return Err(Error::NonPositiveWarping {
                index,
                component: 0,
                value: warp,
            });
        }
        Ok(warp)
    }
}

/// Traces from log-derivatives `uᵢ = hᵢ′/hᵢ` and ratios `rᵢ = hᵢ″/hᵢ`.
pub fn traces_from_ratios(u: &[f64], r: &[f64]) -> TraceData {
    let a: f64 = u.iter().sum();
    let b: f64 = u.iter().map(|x| x * x).sum();
    let tr_l_prime = u.iter().zip(r).map(|(u, r)| r - u * u).sum();
    TraceData {
        a,
        b,
        tr_l_prime,
        tr_l2: b,
    }
}

pub fn shape_traces(profile: &DiagonalProfile, index: usize) -> Result<TraceData> {
    let (u, r) = profile.ratios(index)?;
    Ok(traces_from_ratios(&u, &r))
}

/// Curvature of the diagonal ansatz from `uᵢ = hᵢ′/hᵢ` and `rᵢ = hᵢ″/hᵢ`.
pub fn curvature_from_ratios(u: &[f64], r: &[f64]) -> CurvatureReport {
    let m = u.len();
    let TraceData { a, b, .. } = traces_from_ratios(u, r);
    let sec_normal: Vec<f64> = r.iter().map(|r| -r).collect();
    let mut sec_tangent = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            if i != j {
                sec_tangent[i][j] = -u[i] * u[j];
            }
        }
    }
    let ric_nn = -r.iter().sum::<f64>();
    let ric_diag: Vec<f64> = u
        .iter()
        .zip(r)
        .map(|(u, r)| -a * u - (r - u * u))
        .collect();
    let scalar = -2.0 * r.iter().sum::<f64>() - a * a + b;
    let ric_norm_sq = ric_nn * ric_nn + ric_diag.iter().map(|x| x * x).sum::<f64>();
    CurvatureReport {
        sec_normal,
        sec_tangent,
        ric_nn,
        ric_diag,
        scalar,
        ric_norm_sq,
    }
}

pub fn curvature(profile: &DiagonalProfile, index: usize) -> Result<CurvatureReport> {
    let (u, r) = profile.ratios(index)?;
    Ok(curvature_from_ratios(&u, &r))
}

/// Curvature of `dt² + F² g_fiber` from `F`, `F′`, `F″` at a single point.
///
/// Tangent-plane sectional curvatures use the fiber's average sectional
/// curvature `μ/(n − 2)`, exact when the fiber is a space form.
pub fn warped_curvature_at(
    n: usize,
    mu: f64,
    warp: f64,
    warp_prime: f64,
    warp_double_prime: f64,
) -> CurvatureReport {
    let m = n - 1;
    let fiber = (n - 1) as f64;
    let w = warp_prime / warp;
    let accel = warp_double_prime / warp;
    let intrinsic = mu / (warp * warp);
    let sec_normal = vec![-accel; m];
    let tangent = intrinsic / (n - 2) as f64 - w * w;
    let mut sec_tangent = vec![vec![tangent; m]; m];
    for (i, row) in sec_tangent.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    let ric_nn = -fiber * accel;
    let ric_diag = vec![intrinsic - (n - 2) as f64 * w * w - accel; m];
    let a = fiber * w;
    let b = fiber * w * w;
    let scalar = 2.0 * ric_nn + fiber * intrinsic - a * a + b;
    let ric_norm_sq = ric_nn * ric_nn + ric_diag.iter().map(|x| x * x).sum::<f64>();
    CurvatureReport {
        sec_normal,
        sec_tangent,
        ric_nn,
        ric_diag,
        scalar,
        ric_norm_sq,
    }
}

pub fn curvature_warped(profile: &WarpedProfile, index: usize) -> Result<CurvatureReport> {
    let warp = profile.positive_warp(index)?;
    Ok(warped_curvature_at(
        profile.n,
        profile.mu,
        warp,
        profile.warp_prime[index],
        profile.warp_double_prime[index],
    ))
}
