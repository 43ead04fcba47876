//! Lower bounds for fundamental tones and their verification records.

mod barta;
mod cheeger;
mod comparison;
mod thm32;

pub use barta::{
    barta_bound, canonical_test_field, eigenfunction_log_gradient_field, weak_divergence,
    VertexVectorField,
};
pub use cheeger::{cheeger_lower_bound_check, cheeger_sweep, SweepCut};
pub use comparison::{comparison_bound, phi_sandwich, ComparisonOutcome, SandwichOutcome};
pub use thm32::{ball_bound, radius_constant, BallBound};

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// The constants appearing in the bound formulas, isolated so the harness can
/// mutate each one for its self-test.
#[derive(Clone, Copy, Debug)]
pub struct BoundConstants {
    pub thm32_front_i: f64,
    pub thm32_front_ii: f64,
    pub thm32_front_iii: f64,
    pub lambda_r_scale: f64,
    pub comparison_scale: f64,
    pub sandwich_mu_scale: f64,
    pub cheeger_quarter: f64,
    pub barta_scale: f64,
}

impl Default for BoundConstants {
    fn default() -> Self {
        BoundConstants {
            thm32_front_i: 2.0,
            thm32_front_ii: 2.0,
            thm32_front_iii: 2.0,
            lambda_r_scale: 1.0,
            comparison_scale: 1.0,
            sandwich_mu_scale: 1.0,
            cheeger_quarter: 0.25,
            barta_scale: 1.0,
        }
    }
}

/// One mutable constant per bound formula; multiplying any of them by ten
/// must break the corresponding verification.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MutationTarget {
    Thm32I,
    Thm32II,
    Thm32III,
    LambdaR,
    Comparison,
    Sandwich,
    Cheeger,
    Barta,
}

impl MutationTarget {
    pub const ALL: [MutationTarget; 8] = [
        MutationTarget::Thm32I,
        MutationTarget::Thm32II,
        MutationTarget::Thm32III,
        MutationTarget::LambdaR,
        MutationTarget::Comparison,
        MutationTarget::Sandwich,
        MutationTarget::Cheeger,
        MutationTarget::Barta,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MutationTarget::Thm32I => "thm32_i",
            MutationTarget::Thm32II => "thm32_ii",
            MutationTarget::Thm32III => "thm32_iii",
            MutationTarget::LambdaR => "lambda_r",
            MutationTarget::Comparison => "comparison",
            MutationTarget::Sandwich => "sandwich",
            MutationTarget::Cheeger => "cheeger",
            MutationTarget::Barta => "barta",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|t| t.name() == s)
            .ok_or_else(|| {
                Error::domain(format!(
                    "unknown mutation target {s:?}; expected one of {}",
                    Self::ALL.map(|t| t.name()).join(", ")
                ))
            })
    }

    /// Constants with this target's formula constant corrupted tenfold.
    pub fn corrupt(&self) -> BoundConstants {
        let mut c = BoundConstants::default();
        match self {
            MutationTarget::Thm32I => c.thm32_front_i *= 10.0,
            MutationTarget::Thm32II => c.thm32_front_ii *= 10.0,
            MutationTarget::Thm32III => c.thm32_front_iii *= 10.0,
            MutationTarget::LambdaR => c.lambda_r_scale *= 10.0,
            MutationTarget::Comparison => c.comparison_scale *= 10.0,
            MutationTarget::Sandwich => c.sandwich_mu_scale *= 10.0,
            MutationTarget::Cheeger => c.cheeger_quarter *= 10.0,
            MutationTarget::Barta => c.barta_scale *= 10.0,
        }
        c
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundName {
    Barta,
    Thm32I,
    Thm32Ii,
    Thm32Iii,
    LambdaRConst,
    ComparisonRs,
    PhiSandwich,
    Cheeger,
}

impl BoundName {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundName::Barta => "barta",
            BoundName::Thm32I => "thm32_i",
            BoundName::Thm32Ii => "thm32_ii",
            BoundName::Thm32Iii => "thm32_iii",
            BoundName::LambdaRConst => "lambda_r_const",
            BoundName::ComparisonRs => "comparison_rs",
            BoundName::PhiSandwich => "phi_sandwich",
            BoundName::Cheeger => "cheeger",
        }
    }
}

/// Loose-typed report input value, serialized untagged so numbers stay
/// numbers in the JSON output.
#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum InputValue {
    Int(i64),
    Num(f64),
    Text(String),
}

impl From<f64> for InputValue {
    fn from(v: f64) -> Self {
        InputValue::Num(v)
    }
}
impl From<i64> for InputValue {
    fn from(v: i64) -> Self {
        InputValue::Int(v)
    }
}
impl From<&str> for InputValue {
    fn from(v: &str) -> Self {
        InputValue::Text(v.to_string())
    }
}

/// One verification record: bound vs computed eigenvalue.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub bound_name: BoundName,
    pub inputs: BTreeMap<String, InputValue>,
    pub bound_value: f64,
    pub computed_lambda: Option<f64>,
    pub margin: Option<f64>,
    pub pass: bool,
    pub mesh_level: i64,
}

impl BoundReport {
    /// Applies the pass rule: without a computed eigenvalue the record is
    /// informational (pass); otherwise the margin must not be more negative
    /// than the declared relative tolerance allows.
    pub fn evaluate(
        bound_name: BoundName,
        inputs: BTreeMap<String, InputValue>,
        bound_value: f64,
        computed_lambda: Option<f64>,
        tol_rel: f64,
        mesh_level: i64,
    ) -> Self {
        let margin = computed_lambda.map(|l| l - bound_value);
        let pass = match (computed_lambda, margin) {
            (Some(lambda), Some(m)) => m >= -tol_rel * lambda.abs(),
            _ => true,
        };
        BoundReport {
            bound_name,
            inputs,
            bound_value,
            computed_lambda,
            margin,
            pass,
            mesh_level,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mutation_targets_round_trip() {
        for t in MutationTarget::ALL {
            assert_eq!(MutationTarget::parse(t.name()).unwrap(), t);
            let c = t.corrupt();
            let d = BoundConstants::default();
            // Exactly one constant changed, by a factor of ten.
            let pairs = [
                (c.thm32_front_i, d.thm32_front_i),
                (c.thm32_front_ii, d.thm32_front_ii),
                (c.thm32_front_iii, d.thm32_front_iii),
                (c.lambda_r_scale, d.lambda_r_scale),
                (c.comparison_scale, d.comparison_scale),
                (c.sandwich_mu_scale, d.sandwich_mu_scale),
                (c.cheeger_quarter, d.cheeger_quarter),
                (c.barta_scale, d.barta_scale),
            ];
            let changed: Vec<_> = pairs.iter().filter(|(a, b)| a != b).collect();
            assert_eq!(changed.len(), 1);
            assert_eq!(changed[0].0, 10.0 * changed[0].1);
        }
        assert!(MutationTarget::parse("bogus").is_err());
    }

    #[test]
    fn report_pass_rule() {
        let r = BoundReport::evaluate(
            BoundName::Barta,
            BTreeMap::new(),
            4.0,
            Some(5.0),
            1e-6,
            3,
        );
        assert!(r.pass);
        assert_eq!(r.margin, Some(1.0));
        let r = BoundReport::evaluate(
            BoundName::Barta,
            BTreeMap::new(),
            6.0,
            Some(5.0),
            1e-6,
            3,
        );
        assert!(!r.pass);
        let r = BoundReport::evaluate(BoundName::Cheeger, BTreeMap::new(), 1.0, None, 1e-6, 3);
        assert!(r.pass, "informational records pass");
    }
}
