//! Closed-form steady (`λ = 0`) solutions of the flat system.
//!
//! With `λ = 0` every `uⱼ` is a constant multiple of one function,
//! `uⱼ = aⱼ h`, normalised here by `h(t₀) = 1`. Writing `l = u₀ − a h`
//! (`a = Σ aⱼ`, `b = Σ aⱼ²`) the system collapses to
//!
//! ```text
//! h′ = l h,   l′ = b h²,   b h² = l² + C,   l′ = l² + C
//! ```
//!
//! so each trajectory is one branch of the scalar Riccati equation
//! `l′ = l² + C`, and `u₀ = l + a h`.
//!
//! For `C < 0` the phase line of `l′ = l² − D²` has three kinds of orbit:
//! `|l| > D` (coth, one pole), `|l| < D` (tanh, global) and `|l| = D`
//! (constant). Real `h` forces `l² ≥ D²` whenever `b > 0`, so reductions of
//! actual states always land on the coth or constant branch.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::curvature::DiagonalProfile;
use crate::error::{param, Error, Result};
use crate::flat::FlatSolitonState;

/// Constants of the steady reduction, normalised so that `h(t₀) = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RiccatiReduction {
    a: Vec<f64>,
    a_sum: f64,
    b: f64,
    h0: f64,
    l0: f64,
    c: f64,
}

impl RiccatiReduction {
    /// Fiber coefficients `aⱼ` with `uⱼ = aⱼ h`.
    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn a_sum(&self) -> f64 {
        self.a_sum
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn h0(&self) -> f64 {
        self.h0
    }

    pub fn l0(&self) -> f64 {
        self.l0
    }

    /// Riccati constant `C = b h₀² − l₀²`.
    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn case_tag(&self) -> CaseTag {
        CaseTag::of(self.c)
    }
}

pub fn reduce(initial: &FlatSolitonState) -> RiccatiReduction {
    let a = initial.u.clone();
    let a_sum: f64 = a.iter().sum();
    let b: f64 = a.iter().map(|x| x * x).sum();
    let h0 = 1.0;
    let l0 = initial.u0 - a_sum * h0;
    let c = b * h0 * h0 - l0 * l0;
    RiccatiReduction {
        a,
        a_sum,
        b,
        h0,
        l0,
        c,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    #[serde(rename = "C-zero")]
    CZero,
    #[serde(rename = "C-positive")]
    CPositive,
    #[serde(rename = "C-negative")]
    CNegative,
}

impl CaseTag {
    pub fn of(c: f64) -> Self {
        if c > 0.0 {
            CaseTag::CPositive
        } else if c < 0.0 {
            CaseTag::CNegative
        } else {
            CaseTag::CZero
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CaseTag::CZero => "C-zero",
            CaseTag::CPositive => "C-positive",
            CaseTag::CNegative => "C-negative",
        }
    }
}

/// One solution branch of `l′ = l² + C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "branch", rename_all = "kebab-case")]
pub enum RiccatiBranch {
    /// `l = −1/(t + C₁)`
    Reciprocal { c1: f64 },
    /// `l = D tan(Dt + D₁)`
    Tangent { d: f64, d1: f64 },
    /// `l = −D coth(D(t − pole))`
    Coth { d: f64, pole: f64 },
    /// `l = −D tanh(D(t − center))`
    Tanh { d: f64, center: f64 },
    /// `l ≡ value`
    Constant { value: f64 },
    /// The literal `C < 0` expression `D(e^{2Dt} + D₁)/(e^{2Dt} − D₁)`.
    /// It solves `l′ = −(l² − D²)` and is kept only to document that.
    LiteralCoth { d: f64, d1: f64 },
}

fn acoth(x: f64) -> f64 {
    0.5 * ((x + 1.0) / (x - 1.0)).ln()
}

impl RiccatiBranch {
    /// The branch of `l′ = l² + c` through `l(t0) = l0`.
    pub fn fit(l0: f64, c: f64, t0: f64) -> Result<Self> {
        if !(l0.is_finite() && c.is_finite() && t0.is_finite()) {
            return Err(param("Riccati data must be finite"));
        }
        if c == 0.0 {
            if l0 == 0.0 {
                return Ok(RiccatiBranch::Constant { value: 0.0 });
            }
            return Ok(RiccatiBranch::Reciprocal { c1: -1.0 / l0 - t0 });
        }
        let d = c.abs().sqrt();
        if c > 0.0 {
            return Ok(RiccatiBranch::Tangent {
                d,
                d1: (l0 / d).atan() - d * t0,
            });
        }
        let ratio = -l0 / d;
        if ratio.abs() > 1.0 {
            Ok(RiccatiBranch::Coth {
                d,
                pole: t0 - acoth(ratio) / d,
            })
        } else if ratio.abs() < 1.0 {
            Ok(RiccatiBranch::Tanh {
                d,
                center: t0 - ratio.atanh() / d,
            })
        } else {
            Ok(RiccatiBranch::Constant { value: l0 })
        }
    }

    /// The literal `C < 0` expression with `D₁` chosen so that `l(t0) = l0`.
    pub fn fit_literal_case3(l0: f64, c: f64, t0: f64) -> Result<Self> {
        if !(c < 0.0) {
            return Err(param("the literal C<0 form needs C < 0"));
        }
        let d = (-c).sqrt();
        if l0 + d == 0.0 {
            return Err(param("l0 = -D has no literal C<0 fit"));
        }
        let e = (2.0 * d * t0).exp();
        Ok(RiccatiBranch::LiteralCoth {
            d,
            d1: e * (l0 - d) / (l0 + d),
        })
    }

    pub fn l(&self, t: f64) -> f64 {
        match *self {
            RiccatiBranch::Reciprocal { c1 } => -1.0 / (t + c1),
            RiccatiBranch::Tangent { d, d1 } => d * (d * t + d1).tan(),
            RiccatiBranch::Coth { d, pole } => -d / (d * (t - pole)).tanh(),
            RiccatiBranch::Tanh { d, center } => -d * (d * (t - center)).tanh(),
            RiccatiBranch::Constant { value } => value,
            RiccatiBranch::LiteralCoth { d, d1 } => {
                let e = (2.0 * d * t).exp();
                d * (e + d1) / (e - d1)
            }
        }
    }

    /// Analytic derivative of the branch formula.
    pub fn l_prime(&self, t: f64) -> f64 {
        match *self {
            RiccatiBranch::Reciprocal { c1 } => 1.0 / ((t + c1) * (t + c1)),
            RiccatiBranch::Tangent { d, d1 } => {
                let c = (d * t + d1).cos();
                d * d / (c * c)
            }
            RiccatiBranch::Coth { d, pole } => {
                let s = (d * (t - pole)).sinh();
                d * d / (s * s)
            }
            RiccatiBranch::Tanh { d, center } => {
                let c = (d * (t - center)).cosh();
                -d * d / (c * c)
            }
            RiccatiBranch::Constant { .. } => 0.0,
            RiccatiBranch::LiteralCoth { d, d1 } => {
                let e = (2.0 * d * t).exp();
                -4.0 * d * d * d1 * e / ((e - d1) * (e - d1))
            }
        }
    }

    /// `∫_{t0}^{t} l dt`
    pub fn integral(&self, t0: f64, t: f64) -> f64 {
        match *self {
            RiccatiBranch::Reciprocal { c1 } => -((t + c1) / (t0 + c1)).abs().ln(),
            RiccatiBranch::Tangent { d, d1 } => {
                -((d * t + d1).cos() / (d * t0 + d1).cos()).abs().ln()
            }
            RiccatiBranch::Coth { d, pole } => {
                -((d * (t - pole)).sinh() / (d * (t0 - pole)).sinh()).abs().ln()
            }
            RiccatiBranch::Tanh { d, center } => {
                -((d * (t - center)).cosh() / (d * (t0 - center)).cosh()).ln()
            }
            RiccatiBranch::Constant { value } => value * (t - t0),
            RiccatiBranch::LiteralCoth { d, d1 } => {
                // l = D + 2D·D₁/(e^{2Dt} − D₁), antiderivative ln|e^{2Dt} − D₁| − Dt
                let g = |s: f64| ((2.0 * d * s).exp() - d1).abs().ln() - d * s;
                g(t) - g(t0)
            }
        }
    }

    /// Poles of `l`, in increasing order. Periodic tangent poles are reported
    /// as the two bounding the fundamental interval.
    fn poles(&self) -> Vec<f64> {
        match *self {
            RiccatiBranch::Reciprocal { c1 } => vec![-c1],
            RiccatiBranch::Tangent { d, d1 } => vec![(-FRAC_PI_2 - d1) / d, (FRAC_PI_2 - d1) / d],
            RiccatiBranch::Coth { pole, .. } => vec![pole],
            RiccatiBranch::LiteralCoth { d, d1 } if d1 > 0.0 => vec![d1.ln() / (2.0 * d)],
            _ => Vec::new(),
        }
    }

    /// Maximal open interval around `t0` on which `l` is finite.
    pub fn domain(&self, t0: f64) -> (f64, f64) {
        let poles = self.poles();
        let lo = poles
            .iter()
            .copied()
            .filter(|&p| p < t0)
            .fold(f64::NEG_INFINITY, f64::max);
        let hi = poles
            .iter()
            .copied()
            .filter(|&p| p > t0)
            .fold(f64::INFINITY, f64::min);
        (lo, hi)
    }
}

/// A steady closed-form solution: a Riccati branch for `l` plus the matching `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ClosedFormSteady {
    pub case_tag: CaseTag,
    pub branch: RiccatiBranch,
    /// Sign applied to the closed-form `h` so that `h(t₀) > 0`.
    pub sign_choice: f64,
    pub t0: f64,
    pub domain: (f64, f64),
    pub a: Vec<f64>,
    pub a_sum: f64,
    pub b: f64,
    pub c: f64,
}

/// Solves the reduced Riccati problem through `t0`.
pub fn solve_riccati(red: &RiccatiReduction, t0: f64) -> Result<ClosedFormSteady> {
    let branch = if red.b == 0.0 {
        // All uⱼ vanish, so l′ = b h² = 0 and l stays at l₀.
        RiccatiBranch::Constant { value: red.l0 }
    } else {
        if red.l0 * red.l0 + red.c < 0.0 {
            return Err(param(format!(
                "l0 = {} and C = {} give b h^2 < 0",
                red.l0, red.c
            )));
        }
        RiccatiBranch::fit(red.l0, red.c, t0)?
    };
    build(red, branch, t0)
}

/// The literal `C < 0` closed form, for documenting that it fails the residual oracle.
pub fn solve_riccati_literal_case3(red: &RiccatiReduction, t0: f64) -> Result<ClosedFormSteady> {
    if !(red.b > 0.0) {
        return Err(param("the literal C<0 form needs b > 0"));
    }
    let branch = RiccatiBranch::fit_literal_case3(red.l0, red.c, t0)?;
    build(red, branch, t0)
}

fn build(red: &RiccatiReduction, branch: RiccatiBranch, t0: f64) -> Result<ClosedFormSteady> {
    let mut sol = ClosedFormSteady {
        case_tag: red.case_tag(),
        branch,
        sign_choice: 1.0,
        t0,
        domain: branch.domain(t0),
        a: red.a.clone(),
        a_sum: red.a_sum,
        b: red.b,
        c: red.c,
    };
    let raw = sol.h(t0);
    if raw < 0.0 {
        sol.sign_choice = -1.0;
    } else if !(raw > 0.0) {
        return Err(param(format!("closed form gives h(t0) = {raw}")));
    }
    Ok(sol)
}

impl ClosedFormSteady {
    pub fn l(&self, t: f64) -> f64 {
        self.branch.l(t)
    }

    pub fn l_prime(&self, t: f64) -> f64 {
        self.branch.l_prime(t)
    }

    /// `h` from its closed form (or `exp ∫ l` when `b = 0`).
    pub fn h(&self, t: f64) -> f64 {
        let s = self.sign_choice / self.b.sqrt();
        if self.b == 0.0 {
            return self.branch.integral(self.t0, t).exp();
        }
        match self.branch {
            RiccatiBranch::Reciprocal { c1 } => s / (t + c1),
            RiccatiBranch::Tangent { d, d1 } => s * d / (d * t + d1).cos(),
            RiccatiBranch::Coth { d, pole } => s * d / (d * (t - pole)).sinh(),
            RiccatiBranch::LiteralCoth { d, d1 } => {
                let e = (2.0 * d * t).exp();
                s * 4.0 * d1 * d * d * e / (e - d1)
            }
            // Unreachable for b > 0: these branches give l² + C ≤ 0.
            RiccatiBranch::Tanh { .. } | RiccatiBranch::Constant { .. } => {
                self.branch.integral(self.t0, t).exp()
            }
        }
    }

    /// Analytic derivative of the `h` formula.
    pub fn h_prime(&self, t: f64) -> f64 {
        let s = self.sign_choice / self.b.sqrt();
        if self.b == 0.0 {
            return self.l(t) * self.h(t);
        }
        match self.branch {
            RiccatiBranch::Reciprocal { c1 } => -s / ((t + c1) * (t + c1)),
            RiccatiBranch::Tangent { d, d1 } => {
                let th = d * t + d1;
                s * d * d * th.sin() / (th.cos() * th.cos())
            }
            RiccatiBranch::Coth { d, pole } => {
                let x = d * (t - pole);
                -s * d * d * x.cosh() / (x.sinh() * x.sinh())
            }
            RiccatiBranch::LiteralCoth { d, d1 } => {
                let e = (2.0 * d * t).exp();
                s * 4.0 * d1 * d * d * (-2.0 * d * d1 * e) / ((e - d1) * (e - d1))
            }
            RiccatiBranch::Tanh { .. } | RiccatiBranch::Constant { .. } => self.l(t) * self.h(t),
        }
    }

    /// `∫_{t₀}^{t} h dt`
    pub fn h_integral(&self, t: f64) -> Result<f64> {
        let t0 = self.t0;
        if self.b == 0.0 {
            return Ok(match self.branch {
                RiccatiBranch::Constant { value } if value != 0.0 => {
                    ((value * (t - t0)).exp() - 1.0) / value
                }
                RiccatiBranch::Constant { .. } => t - t0,
                _ => return Err(param("b = 0 requires the constant branch")),
            });
        }
        let s = self.sign_choice / self.b.sqrt();
        match self.branch {
            RiccatiBranch::Reciprocal { c1 } => Ok(s * ((t + c1) / (t0 + c1)).abs().ln()),
            RiccatiBranch::Tangent { d, d1 } => {
                let g = |x: f64| {
                    let th = d * x + d1;
                    (1.0 / th.cos() + th.tan()).abs().ln()
                };
                Ok(s * (g(t) - g(t0)))
            }
            RiccatiBranch::Coth { d, pole } => {
                let g = |x: f64| (0.5 * d * (x - pole)).tanh().abs().ln();
                Ok(s * (g(t) - g(t0)))
            }
            _ => Err(param("no closed-form quadrature for this branch")),
        }
    }

    pub fn u0(&self, t: f64) -> f64 {
        self.l(t) + self.a_sum * self.h(t)
    }

    /// The flat state `(u₀, aⱼ h)` at `t`.
    pub fn state(&self, t: f64) -> FlatSolitonState {
        let h = self.h(t);
        FlatSolitonState::new(t, self.l(t) + self.a_sum * h, self.a.iter().map(|a| a * h).collect())
    }

    fn check_in_domain(&self, t: f64) -> Result<()> {
        let (lo, hi) = self.domain;
        if t > lo && t < hi {
            Ok(())
        } else {
            Err(Error::OutsideDomain { t, lo, hi })
        }
    }

    /// Samples the full metric `hᵢ = h0ᵢ exp(aᵢ ∫h)` and potential `f = f0 + ∫u₀`.
    pub fn profile(&self, grid: Vec<f64>, h0: &[f64], f0: f64) -> Result<DiagonalProfile> {
        let n = self.a.len() + 1;
        if h0.len() != self.a.len() {
            return Err(param(format!(
                "h0 has {} components, expected {}",
                h0.len(),
                self.a.len()
            )));
        }
        for &t in &grid {
            self.check_in_domain(t)?;
        }
        let mut hs = Vec::with_capacity(grid.len());
        for &t in &grid {
            hs.push(self.h_integral(t)?);
        }
        let mut metric_idx = 0;
        let mut potential_idx = 0;
        let mut profile = DiagonalProfile::from_fn(
            n,
            0.0,
            grid,
            |t| {
                let big_h = hs[metric_idx];
                metric_idx += 1;
                let (h, hp) = (self.h(t), self.h_prime(t));
                let mut v = Vec::with_capacity(n - 1);
                let mut vp = Vec::with_capacity(n - 1);
                let mut vpp = Vec::with_capacity(n - 1);
                for (a, h0) in self.a.iter().zip(h0) {
                    let hi = h0 * (a * big_h).exp();
                    v.push(hi);
                    vp.push(a * h * hi);
                    vpp.push((a * hp + a * a * h * h) * hi);
                }
                (v, vp, vpp)
            },
            |t| {
                let big_h = hs[potential_idx];
                potential_idx += 1;
                let f = f0 + self.branch.integral(self.t0, t) + self.a_sum * big_h;
                let fp = self.u0(t);
                let fpp = self.l_prime(t) + self.a_sum * self.h_prime(t);
                (f, fp, fpp)
            },
        )?;
        profile.provenance = format!("closed-form steady {}", self.case_tag.as_str());
        Ok(profile)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ClosedFormResiduals {
    /// `max |l′ − l² − C|`
    pub max_riccati: f64,
    /// `max |b h² − l² − C|`
    pub max_algebraic: f64,
    /// `max |h′ − l h|`
    pub max_log_deriv: f64,
}

impl ClosedFormResiduals {
    pub fn max(&self) -> f64 {
        self.max_riccati.max(self.max_algebraic).max(self.max_log_deriv)
    }
}

pub fn residual_closed_form(
    sol: &ClosedFormSteady,
    red: &RiccatiReduction,
    grid: &[f64],
) -> Result<ClosedFormResiduals> {
    let mut r = ClosedFormResiduals {
        max_riccati: 0.0,
        max_algebraic: 0.0,
        max_log_deriv: 0.0,
    };
    let (b, c) = (red.b, red.c);
    for &t in grid {
        sol.check_in_domain(t)?;
        let (l, lp, h, hp) = (sol.l(t), sol.l_prime(t), sol.h(t), sol.h_prime(t));
        r.max_riccati = r.max_riccati.max((lp - l * l - c).abs());
        r.max_algebraic = r.max_algebraic.max((b * h * h - l * l - c).abs());
        r.max_log_deriv = r.max_log_deriv.max((hp - l * h).abs());
    }
    Ok(r)
}

/// Nearest pole of `l` from `t₀` in the given direction (`+1` forward, `−1` backward).
pub fn blowup_time(sol: &ClosedFormSteady, direction: i32) -> Option<f64> {
    let (lo, hi) = sol.domain;
    let t = if direction >= 0 { hi } else { lo };
    t.is_finite().then_some(t)
}
