//! Isometry-algebra dimension bounds for irreducible non-trivial gradient
//! Ricci solitons.
//!
//! For an `n`-manifold the isometry algebra has dimension at most
//! `n(n+1)/2`; on an irreducible non-trivial soliton the bound drops to
//! `n(n−1)/2`, and below that maximum the dimension cannot exceed
//! `(n−1)(n−2)/2 + 1` unless `n = 5`. The soliton hypotheses cannot be
//! checked from `(n, d)` alone, so every verdict is conditional on them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DimBounds {
    pub n: u64,
    /// `n(n+1)/2`
    pub kobayashi: u64,
    /// `n(n−1)/2`
    pub soliton_max: u64,
    /// `(n−1)(n−2)/2 + 1`
    pub gap_ceiling: u64,
}

impl DimBounds {
    pub fn new(n: u64) -> Result<Self> {
        if n < 3 {
            return Err(param(format!("n must be >= 3, got {n}")));
        }
        Ok(DimBounds {
            n,
            kobayashi: n * (n + 1) / 2,
            soliton_max: n * (n - 1) / 2,
            gap_ceiling: (n - 1) * (n - 2) / 2 + 1,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ExceedsKobayashi,
    /// `d = n(n+1)/2`: only constant-curvature spaces, never a non-trivial soliton.
    ConstantCurvatureMax,
    /// `n(n−1)/2 < d < n(n+1)/2`: above the soliton maximum.
    ExceedsSolitonMax,
    SolitonMax,
    ForbiddenGap,
    /// The gap band for `n = 5`, where the gap rule is not asserted.
    GapRuleInapplicable,
    Allowed,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::ExceedsKobayashi => "exceeds-kobayashi",
            Verdict::ConstantCurvatureMax => "constant-curvature-max",
            Verdict::ExceedsSolitonMax => "exceeds-soliton-max",
            Verdict::SolitonMax => "soliton-max",
            Verdict::ForbiddenGap => "forbidden-gap",
            Verdict::GapRuleInapplicable => "gap-rule-inapplicable",
            Verdict::Allowed => "allowed",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimVerdict {
    pub n: u64,
    pub d: u64,
    pub verdict: Verdict,
    pub bounds: DimBounds,
}

pub fn classify(n: u64, d: u64) -> Result<DimVerdict> {
    let bounds = DimBounds::new(n)?;
    let verdict = if d > bounds.kobayashi {
        Verdict::ExceedsKobayashi
    } else if d == bounds.kobayashi {
        Verdict::ConstantCurvatureMax
    } else if d > bounds.soliton_max {
        Verdict::ExceedsSolitonMax
    } else if d == bounds.soliton_max {
        Verdict::SolitonMax
    } else if d > bounds.gap_ceiling {
        if n == 5 {
            Verdict::GapRuleInapplicable
        } else {
            Verdict::ForbiddenGap
        }
    } else {
        Verdict::Allowed
    };
    Ok(DimVerdict {
        n,
        d,
        verdict,
        bounds,
    })
}

pub fn bound_table(n_max: u64) -> Result<Vec<DimBounds>> {
    if n_max < 3 {
        return Err(param(format!("table needs nMax >= 3, got {n_max}")));
    }
    (3..=n_max).map(DimBounds::new).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_values() {
        let t = bound_table(10).unwrap();
        let triple = |b: &DimBounds| (b.kobayashi, b.soliton_max, b.gap_ceiling);
        assert_eq!(triple(&t[0]), (6, 3, 2));
        assert_eq!(triple(&t[1]), (10, 6, 4));
        assert_eq!(triple(&t[7]), (55, 45, 37));
    }

    #[test]
    fn verdicts() {
        assert_eq!(classify(4, 5).unwrap().verdict, Verdict::ForbiddenGap);
        assert_eq!(classify(3, 3).unwrap().verdict, Verdict::SolitonMax);
        assert_eq!(classify(5, 8).unwrap().verdict, Verdict::GapRuleInapplicable);
        assert_eq!(classify(5, 9).unwrap().verdict, Verdict::GapRuleInapplicable);
        assert_eq!(classify(5, 7).unwrap().verdict, Verdict::Allowed);
        assert_eq!(classify(4, 10).unwrap().verdict, Verdict::ConstantCurvatureMax);
        assert_eq!(classify(4, 11).unwrap().verdict, Verdict::ExceedsKobayashi);
        assert_eq!(classify(3, 5).unwrap().verdict, Verdict::ExceedsSolitonMax);
        assert_eq!(classify(3, 2).unwrap().verdict, Verdict::Allowed);
        assert_eq!(classify(6, 0).unwrap().verdict, Verdict::Allowed);
    }

    #[test]
    fn small_n_rejected() {
        assert!(classify(2, 1).is_err());
        assert!(bound_table(2).is_err());
    }
}
