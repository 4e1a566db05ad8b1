use std::fmt;

use num_traits::{One, Zero};

use super::AnalysisError;
use crate::model::{total_utility, Instance};
use crate::offline::{solve_exact_oracle, solve_offline_model1};
use crate::online::{run_online, TieBreak};
use crate::scalar::{format_fixed, Rational, Scalar};

/// Offline utility over online utility.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ratio {
    Finite(Rational),
    /// Online collected nothing while the optimum collected something.
    Infinite,
}

impl Ratio {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Ratio::Finite(r) => Some(r),
            Ratio::Infinite => None,
        }
    }

    /// `self <= bound`, with infinity above everything.
    pub fn within(&self, bound: &Rational) -> bool {
        self.finite().is_some_and(|r| r <= bound)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Finite(r) => f.write_str(&format_fixed(r, 6)),
            Ratio::Infinite => f.write_str("inf"),
        }
    }
}

/// Both zero counts as ratio 1.
pub fn ratio_of(offline: &Rational, online: &Rational) -> Ratio {
    if online.is_zero() {
        if offline.is_zero() {
            Ratio::Finite(Rational::one())
        } else {
            Ratio::Infinite
        }
    } else {
        Ratio::Finite(offline / online)
    }
}

/// `1 + δ` for Model 1, `1 + δ + (α_max/α_min)·δ` for Model 2.
pub fn theorem_bound<S: Scalar>(instance: &Instance<S>, model2: bool) -> Result<Rational, AnalysisError> {
    let delta = instance.discount.to_exact().ok_or(AnalysisError::NonFinite)?;
    let base = Rational::one() + &delta;
    if !model2 {
        return Ok(base);
    }
    let alphas: Vec<Rational> = instance
        .agents
        .iter()
        .map(|a| a.priority.to_exact().ok_or(AnalysisError::NonFinite))
        .collect::<Result<_, _>>()?;
    let spread = match (alphas.iter().max(), alphas.iter().min()) {
        (Some(hi), Some(lo)) if !lo.is_zero() => hi / lo,
        _ => Rational::one(),
    };
    Ok(base + spread * delta)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatioReport {
    pub offline_utility: Rational,
    pub online_utility: Rational,
    pub ratio: Ratio,
    pub bound: Rational,
}

impl RatioReport {
    /// Online over offline, the "empirical efficiency".
    pub fn efficiency(&self) -> Rational {
        if self.offline_utility.is_zero() {
            Rational::one()
        } else {
            &self.online_utility / &self.offline_utility
        }
    }

    pub fn is_tight(&self) -> bool {
        self.ratio.finite() == Some(&self.bound)
    }
}

/// Runs both sides and compares. Model 1 uses the flow solver; Model 2 the
/// exact search within `budget` nodes.
pub fn competitive_ratio<S: Scalar>(
    instance: &Instance<S>,
    model2: bool,
    tie_break: &TieBreak,
    budget: u64,
) -> Result<RatioReport, AnalysisError> {
    let exact = instance.to_exact().ok_or(AnalysisError::NonFinite)?;
    let offline = if model2 {
        solve_exact_oracle(&exact, true, budget)?
    } else {
        solve_offline_model1(&exact)?
    };
    let online = run_online(&exact, model2, tie_break)?;
    let offline_utility = total_utility(&exact, &offline);
    let online_utility = total_utility(&exact, &online);
    Ok(RatioReport {
        ratio: ratio_of(&offline_utility, &online_utility),
        bound: theorem_bound(&exact, model2)?,
        offline_utility,
        online_utility,
    })
}
