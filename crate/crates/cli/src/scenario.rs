//! Scenario files: a unitary, a glued space, and a list of checks to run
//! against them. Everything needed to reproduce a run is in the file (plus
//! an optional `QPG_SEED` override), and the run report echoes the scenario
//! back so the output is self-describing.

use serde::{Deserialize, Serialize};

use qpg_core::coaction;
use qpg_core::magic::{verify_magic_unitary, MagicUnitary};
use qpg_core::ncalg;
use qpg_core::numerics::Tolerance;
use qpg_core::spaces::{connectivity_report, GluedSpace, SpaceConfig};
use qpg_core::{CheckReport, Error};

/// How to obtain the magic unitary: the built-in two-projection family, a
/// permutation, or an explicit block grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum UnitarySpec {
    TwoProjection { two_projection: TwoProjectionParams },
    Permutation { permutation: Vec<usize> },
    Inline(MagicUnitary),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoProjectionParams {
    pub theta: f64,
}

impl UnitarySpec {
    pub fn build(&self) -> Result<MagicUnitary, Error> {
        match self {
            UnitarySpec::TwoProjection { two_projection } => {
                qpg_core::magic::build_two_projection_magic(two_projection.theta)
            }
            UnitarySpec::Permutation { permutation } => MagicUnitary::from_permutation(permutation),
            UnitarySpec::Inline(u) => Ok(u.clone()),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            UnitarySpec::TwoProjection { two_projection } => {
                format!("two-projection family, theta = {}", two_projection.theta)
            }
            UnitarySpec::Permutation { permutation } => {
                format!("permutation {permutation:?}")
            }
            UnitarySpec::Inline(u) => {
                format!("explicit block grid (n = {}, d = {})", u.n(), u.d())
            }
        }
    }
}

/// The checks a scenario may request, in the order they run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckName {
    /// Projection, row-sum, column-sum, and orthogonality defects.
    Magic,
    /// The defining relations, proved by rewriting.
    Symbolic,
    /// Comultiplication compatibility, symbolically and on the
    /// representation.
    Coassoc,
    /// The glued space has a single component.
    Connected,
    /// The coaction is a unital *-homomorphism.
    Homomorphism,
    /// Fiber-constant functions take scalar values at glued points.
    Technical,
    /// The quotient algebra is carried into itself.
    Invariance,
    /// Every generator block is recovered from a free slice.
    Faithful,
    /// Fixed-point dimension and the ergodicity verdict (informational).
    Ergodic,
    /// Span rank against the full target dimension (informational when
    /// short).
    Density,
}

pub const ALL_CHECKS: [CheckName; 10] = [
    CheckName::Magic,
    CheckName::Symbolic,
    CheckName::Coassoc,
    CheckName::Connected,
    CheckName::Homomorphism,
    CheckName::Technical,
    CheckName::Invariance,
    CheckName::Faithful,
    CheckName::Ergodic,
    CheckName::Density,
];

fn default_tolerance() -> f64 {
    1e-10
}

fn default_checks() -> Vec<CheckName> {
    ALL_CHECKS.to_vec()
}

fn default_seed() -> u64 {
    42
}

fn default_trials() -> usize {
    100
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub unitary: UnitarySpec,
    pub space: SpaceConfig,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_checks")]
    pub checks: Vec<CheckName>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
}

impl Scenario {
    /// Run the requested checks in order. Structural problems (bad shapes,
    /// invalid tolerance, a faithfulness request with no free point) surface
    /// as errors; check failures are ordinary results.
    pub fn run(&self) -> Result<Vec<CheckReport>, Error> {
        let u = self.unitary.build()?;
        let spec = self.space.to_gluing_spec()?;
        if u.n() != spec.n() {
            return Err(Error::Dimension(format!(
                "unitary size {} does not match the {} copies in the space",
                u.n(),
                spec.n()
            )));
        }
        let tol = Tolerance::new(self.tolerance)?;
        let glued = GluedSpace::build(&spec);
        let n = u.n() as u32;

        let mut reports = Vec::new();
        for check in &self.checks {
            match check {
                CheckName::Magic => reports.push(verify_magic_unitary(&u, &tol)?),
                CheckName::Symbolic => reports.push(ncalg::relation_suite(n)?),
                CheckName::Coassoc => {
                    reports.push(ncalg::coassoc_check(n)?);
                    reports.push(coaction::check_rep_coassociativity(
                        &spec,
                        &u,
                        self.seed,
                        self.trials,
                        &tol,
                    )?);
                }
                CheckName::Connected => reports.push(connectivity_report(&glued)),
                CheckName::Homomorphism => reports.push(coaction::check_homomorphism(
                    &spec,
                    &u,
                    self.seed,
                    self.trials,
                    &tol,
                )?),
                CheckName::Technical => reports.push(coaction::check_technical_lemma(
                    &spec,
                    &u,
                    self.seed,
                    self.trials,
                    &tol,
                )?),
                CheckName::Invariance => reports.push(coaction::check_invariance(
                    &spec,
                    &u,
                    self.seed,
                    self.trials,
                    &tol,
                )?),
                CheckName::Faithful => {
                    reports.push(coaction::check_faithful_slices(&spec, &u, &tol)?)
                }
                CheckName::Ergodic => reports.push(coaction::fixed_point_space(&spec, &u, &tol)?),
                CheckName::Density => reports.push(coaction::density_rank(&spec, &u, &tol)?),
            }
        }
        Ok(reports)
    }
}

/// A complete run: the scenario as executed (seed overrides applied), every
/// report, and the verdict. `timing_ms` is the only field that varies
/// between identical runs and is kept top-level so consumers can strip it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: Scenario,
    pub checks: Vec<CheckReport>,
    pub overall: String,
    pub timing_ms: u64,
}

impl RunReport {
    pub fn assemble(scenario: Scenario, checks: Vec<CheckReport>, timing_ms: u64) -> Self {
        let overall = if checks.iter().any(CheckReport::failed) {
            "fail".to_string()
        } else {
            "pass".to_string()
        };
        Self {
            scenario,
            checks,
            overall,
            timing_ms,
        }
    }

    pub fn passed(&self) -> bool {
        self.overall == "pass"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_spec_variants_parse() {
        let two: UnitarySpec =
            serde_json::from_str(r#"{"two_projection": {"theta": 0.5}}"#).unwrap();
        assert!(matches!(two, UnitarySpec::TwoProjection { .. }));
        assert_eq!(two.build().unwrap().n(), 4);

        let perm: UnitarySpec = serde_json::from_str(r#"{"permutation": [2, 1, 3]}"#).unwrap();
        let u = perm.build().unwrap();
        assert_eq!((u.n(), u.d()), (3, 1));

        let inline_text = serde_json::to_string(&u).unwrap();
        let inline: UnitarySpec = serde_json::from_str(&inline_text).unwrap();
        assert!(matches!(inline, UnitarySpec::Inline(_)));
    }

    #[test]
    fn scenario_defaults_fill_in() {
        let text = r#"{
            "unitary": {"two_projection": {"theta": 0.7853981633974483}},
            "space": {"kind": "interval", "m": 5, "glued_indices": [1], "n": 4}
        }"#;
        let scenario: Scenario = serde_json::from_str(text).unwrap();
        assert_eq!(scenario.tolerance, 1e-10);
        assert_eq!(scenario.seed, 42);
        assert_eq!(scenario.trials, 100);
        assert_eq!(scenario.checks.len(), 10);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{
            "unitary": {"permutation": [1, 2, 3, 4]},
            "space": {"kind": "interval", "m": 5, "glued_indices": [1], "n": 4},
            "tollerance": 1e-8
        }"#;
        assert!(serde_json::from_str::<Scenario>(text).is_err());
    }

    #[test]
    fn size_mismatch_is_structural() {
        let text = r#"{
            "unitary": {"permutation": [2, 1, 3]},
            "space": {"kind": "interval", "m": 5, "glued_indices": [1], "n": 4}
        }"#;
        let scenario: Scenario = serde_json::from_str(text).unwrap();
        assert!(scenario.run().is_err());
    }

    #[test]
    fn battery_runs_and_echoes() {
        let text = r#"{
            "unitary": {"two_projection": {"theta": 0.7853981633974483}},
            "space": {"kind": "interval", "m": 5, "glued_indices": [1], "n": 4},
            "trials": 10
        }"#;
        let scenario: Scenario = serde_json::from_str(text).unwrap();
        let checks = scenario.run().unwrap();
        // coassoc contributes two reports.
        assert_eq!(checks.len(), 11);
        let report = RunReport::assemble(scenario, checks, 0);
        assert!(report.passed());
        let js = serde_json::to_value(&report).unwrap();
        assert_eq!(js["overall"], "pass");
        assert_eq!(js["scenario"]["trials"], 10);
    }
}
