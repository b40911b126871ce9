//! Scenario files: a strict TOML schema with baseline defaults, precise
//! error locations, and did-you-mean suggestions for unknown keys.
//!
//! A scenario names a procedure and a deployment, optionally overrides the
//! latency knobs, and may carry one experiment block. Only the baseline
//! parameters default; experiment grids must be explicit.

use serde::{Deserialize, Serialize};

use crate::analytic::RequirementBounds;
use crate::error::{Error, Result};
use crate::model::{DeploymentSpec, LatencyParams, OperatorKind};
use crate::procedures::ProcedureKind;

/// Baseline knob defaults applied when a scenario omits `[params]` fields.
pub mod defaults {
    pub const ACCESS_MS: f64 = 0.5;
    pub const BACKHAUL_MS_PER_KM: f64 = 0.05;
    pub const NF_MS: f64 = 1.0;
    pub const SERVER_MS: f64 = 30.0;
    pub const CORE_INTERNAL_MS: f64 = 0.0;
    pub const UO_CORE_DISTANCE_KM: f64 = 0.5;
    pub const MNO_CORE_DISTANCE_KM: f64 = 250.0;
    pub const UO_N_FACTORIES: u32 = 1;
    pub const MNO_N_FACTORIES: u32 = 10;
    pub const UO_RESOURCE_RATIO: f64 = 1.0;
    pub const MNO_RESOURCE_RATIO: f64 = 100.0;
}

/// The raw file shape. Every section is optional except `procedure`;
/// unknown keys are rejected.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    procedure: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    deployment: Option<RawDeployment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<RawParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bounds: Option<RawBounds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    experiment: Option<RawExperiment>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDeployment {
    operator: Option<String>,
    core_distance_km: Option<f64>,
    server_distance_km: Option<f64>,
    n_factories: Option<u32>,
    resource_ratio: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    access_ms: Option<f64>,
    backhaul_ms_per_km: Option<f64>,
    /// Baseline (single-site) NF processing delay; the deployment scales it.
    nf_ms: Option<f64>,
    server_ms: Option<f64>,
    core_internal_ms: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBounds {
    one_way_ms: Option<f64>,
    round_trip_ms: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    kind: Option<String>,
    d_min_km: Option<f64>,
    d_max_km: Option<f64>,
    step_km: Option<f64>,
    mno_nf_ms: Option<f64>,
    t_min_ms: Option<f64>,
    t_max_ms: Option<f64>,
    n_points: Option<u32>,
    uo_distance_km: Option<f64>,
    mno_distance_km: Option<f64>,
    uo_nf_ms: Option<f64>,
    n_factories: Option<u32>,
    threshold_ms: Option<f64>,
}

/// A validated experiment request.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExperimentSpec {
    DistanceSweep {
        d_min_km: f64,
        d_max_km: f64,
        step_km: f64,
        mno_nf_ms: f64,
    },
    NfDelaySweep {
        t_min_ms: f64,
        t_max_ms: f64,
        n_points: u32,
        uo_distance_km: f64,
        mno_distance_km: f64,
    },
    CaseTable {
        uo_nf_ms: f64,
        uo_distance_km: f64,
        n_factories: u32,
    },
    Threshold {
        threshold_ms: f64,
        d_min_km: f64,
        d_max_km: f64,
        step_km: f64,
        mno_nf_ms: f64,
    },
}

/// A fully resolved scenario: defaults applied, deployment validated, and
/// the effective NF delay computed for the chosen operator.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub procedure: ProcedureKind,
    pub deployment: DeploymentSpec,
    /// Effective parameters: `t_nf` already scaled for the operator,
    /// `d_backhaul_km` equal to the deployment core distance.
    pub params: LatencyParams,
    /// The single-site baseline NF delay as written in the file.
    pub base_nf_ms: f64,
    pub bounds: RequirementBounds,
    pub experiment: Option<ExperimentSpec>,
}

impl ScenarioConfig {
    /// Canonical serialization: every field explicit, so parsing the output
    /// yields an identical config.
    pub fn to_canonical_toml(&self) -> String {
        let raw = RawScenario {
            procedure: Some(self.procedure.as_str().to_string()),
            deployment: Some(RawDeployment {
                operator: Some(self.deployment.operator_kind.as_str().to_string()),
                core_distance_km: Some(self.deployment.core_distance_km),
                server_distance_km: Some(self.deployment.server_distance_km),
                n_factories: Some(self.deployment.n_factories),
                resource_ratio: Some(self.deployment.resource_ratio),
            }),
            params: Some(RawParams {
                access_ms: Some(self.params.t_access.as_ms()),
                backhaul_ms_per_km: Some(self.params.backhaul_rate.as_ms_per_km()),
                nf_ms: Some(self.base_nf_ms),
                server_ms: Some(self.params.t_server.as_ms()),
                core_internal_ms: Some(self.params.t_core_internal.as_ms()),
            }),
            bounds: Some(RawBounds {
                one_way_ms: Some(self.bounds.one_way_ms),
                round_trip_ms: Some(self.bounds.round_trip_ms),
            }),
            experiment: self.experiment.as_ref().map(raw_experiment),
        };
        toml::to_string(&raw).expect("canonical scenario serializes")
    }
}

fn raw_experiment(e: &ExperimentSpec) -> RawExperiment {
    let mut raw = RawExperiment::default();
    match *e {
        ExperimentSpec::DistanceSweep {
            d_min_km,
            d_max_km,
            step_km,
            mno_nf_ms,
        } => {
            raw.kind = Some("distance-sweep".to_string());
            raw.d_min_km = Some(d_min_km);
            raw.d_max_km = Some(d_max_km);
            raw.step_km = Some(step_km);
            raw.mno_nf_ms = Some(mno_nf_ms);
        }
        ExperimentSpec::NfDelaySweep {
            t_min_ms,
            t_max_ms,
            n_points,
            uo_distance_km,
            mno_distance_km,
        } => {
            raw.kind = Some("nf-delay-sweep".to_string());
            raw.t_min_ms = Some(t_min_ms);
            raw.t_max_ms = Some(t_max_ms);
            raw.n_points = Some(n_points);
            raw.uo_distance_km = Some(uo_distance_km);
            raw.mno_distance_km = Some(mno_distance_km);
        }
        ExperimentSpec::CaseTable {
            uo_nf_ms,
            uo_distance_km,
            n_factories,
        } => {
            raw.kind = Some("case-table".to_string());
            raw.uo_nf_ms = Some(uo_nf_ms);
            raw.uo_distance_km = Some(uo_distance_km);
            raw.n_factories = Some(n_factories);
        }
        ExperimentSpec::Threshold {
            threshold_ms,
            d_min_km,
            d_max_km,
            step_km,
            mno_nf_ms,
        } => {
            raw.kind = Some("threshold".to_string());
            raw.threshold_ms = Some(threshold_ms);
            raw.d_min_km = Some(d_min_km);
            raw.d_max_km = Some(d_max_km);
            raw.step_km = Some(step_km);
            raw.mno_nf_ms = Some(mno_nf_ms);
        }
    }
    raw
}

/// Parses and validates scenario text. Syntax errors, unknown keys, and
/// constraint violations are distinct and located: syntax and unknown-key
/// errors carry line/column positions, constraint errors name the field.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| located_error(text, &e))?;
    resolve(raw)
}

fn located_error(text: &str, err: &toml::de::Error) -> Error {
    let mut message = err.message().to_string();
    if let Some(suggestion) = unknown_key_suggestion(&message) {
        message.push_str(&format!("; did you mean `{suggestion}`?"));
    }
    if let Some(span) = err.span() {
        let (line, col) = line_col(text, span.start);
        Error::Scenario(format!("line {line}, column {col}: {message}"))
    } else {
        Error::Scenario(message)
    }
}

fn line_col(text: &str, byte_offset: usize) -> (usize, usize) {
    let clamped = byte_offset.min(text.len());
    let prefix = &text[..clamped];
    let line = prefix.bytes().filter(|&b| b == b'\n').count() + 1;
    let col = prefix
        .rsplit('\n')
        .next()
        .map(|l| l.chars().count())
        .unwrap_or(0)
        + 1;
    (line, col)
}

/// For serde's "unknown field `x`, expected one of `a`, `b`" messages,
/// proposes the expected key closest to the unknown one.
fn unknown_key_suggestion(message: &str) -> Option<String> {
    let unknown = message.strip_prefix("unknown field `")?;
    let (unknown, rest) = unknown.split_once('`')?;
    let expected_part = rest.split_once("expected")?.1;
    let candidates: Vec<&str> = expected_part
        .split('`')
        .skip(1)
        .step_by(2)
        .collect();
    candidates
        .into_iter()
        .map(|c| (levenshtein(unknown, c), c))
        .filter(|(d, _)| *d <= 3)
        .min()
        .map(|(_, c)| c.to_string())
}

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let cost = usize::from(ca != cb);
            cur[j + 1] = (prev[j] + cost).min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn resolve(raw: RawScenario) -> Result<ScenarioConfig> {
    let procedure_name = raw
        .procedure
        .ok_or_else(|| Error::validation("procedure", "missing required key"))?;
    let procedure = ProcedureKind::parse(&procedure_name)?;

    let dep = raw.deployment.unwrap_or_default();
    let operator = match dep.operator.as_deref() {
        None => OperatorKind::Uo,
        Some(s) => s.parse()?,
    };
    let (default_core, default_n, default_ratio) = match operator {
        OperatorKind::Uo => (
            defaults::UO_CORE_DISTANCE_KM,
            defaults::UO_N_FACTORIES,
            defaults::UO_RESOURCE_RATIO,
        ),
        OperatorKind::Mno => (
            defaults::MNO_CORE_DISTANCE_KM,
            defaults::MNO_N_FACTORIES,
            defaults::MNO_RESOURCE_RATIO,
        ),
    };
    let core_distance_km = dep.core_distance_km.unwrap_or(default_core);
    let deployment = DeploymentSpec {
        operator_kind: operator,
        core_distance_km,
        server_distance_km: dep.server_distance_km.unwrap_or(core_distance_km),
        n_factories: dep.n_factories.unwrap_or(default_n),
        resource_ratio: dep.resource_ratio.unwrap_or(default_ratio),
    };
    deployment.validate()?;

    let p = raw.params.unwrap_or_default();
    let base_nf_ms = p.nf_ms.unwrap_or(defaults::NF_MS);
    let effective_nf_ms = deployment.effective_t_nf_ms(base_nf_ms)?;
    let params = LatencyParams::from_ms(
        p.access_ms.unwrap_or(defaults::ACCESS_MS),
        p.backhaul_ms_per_km.unwrap_or(defaults::BACKHAUL_MS_PER_KM),
        effective_nf_ms,
        p.server_ms.unwrap_or(defaults::SERVER_MS),
        p.core_internal_ms.unwrap_or(defaults::CORE_INTERNAL_MS),
        deployment.core_distance_km,
    )?;

    let b = raw.bounds.unwrap_or_default();
    let bounds = RequirementBounds {
        one_way_ms: b.one_way_ms.unwrap_or(RequirementBounds::default().one_way_ms),
        round_trip_ms: b
            .round_trip_ms
            .unwrap_or(RequirementBounds::default().round_trip_ms),
    };

    let experiment = match raw.experiment {
        None => None,
        Some(e) => Some(resolve_experiment(e, base_nf_ms, &deployment)?),
    };

    Ok(ScenarioConfig {
        procedure,
        deployment,
        params,
        base_nf_ms,
        bounds,
        experiment,
    })
}

fn require<T: Copy>(value: Option<T>, field: &str) -> Result<T> {
    value.ok_or_else(|| Error::validation(field, "required for this experiment kind"))
}

fn resolve_experiment(
    e: RawExperiment,
    base_nf_ms: f64,
    deployment: &DeploymentSpec,
) -> Result<ExperimentSpec> {
    let kind = e
        .kind
        .as_deref()
        .ok_or_else(|| Error::validation("experiment.kind", "missing required key"))?;
    match kind {
        "distance-sweep" => Ok(ExperimentSpec::DistanceSweep {
            d_min_km: require(e.d_min_km, "experiment.d_min_km")?,
            d_max_km: require(e.d_max_km, "experiment.d_max_km")?,
            step_km: require(e.step_km, "experiment.step_km")?,
            mno_nf_ms: require(e.mno_nf_ms, "experiment.mno_nf_ms")?,
        }),
        "nf-delay-sweep" => Ok(ExperimentSpec::NfDelaySweep {
            t_min_ms: require(e.t_min_ms, "experiment.t_min_ms")?,
            t_max_ms: require(e.t_max_ms, "experiment.t_max_ms")?,
            n_points: require(e.n_points, "experiment.n_points")?,
            uo_distance_km: require(e.uo_distance_km, "experiment.uo_distance_km")?,
            mno_distance_km: require(e.mno_distance_km, "experiment.mno_distance_km")?,
        }),
        "case-table" => Ok(ExperimentSpec::CaseTable {
            uo_nf_ms: e.uo_nf_ms.unwrap_or(base_nf_ms),
            uo_distance_km: e.uo_distance_km.unwrap_or(defaults::UO_CORE_DISTANCE_KM),
            n_factories: e.n_factories.unwrap_or(match deployment.operator_kind {
                OperatorKind::Mno => deployment.n_factories,
                OperatorKind::Uo => defaults::MNO_N_FACTORIES,
            }),
        }),
        "threshold" => Ok(ExperimentSpec::Threshold {
            threshold_ms: require(e.threshold_ms, "experiment.threshold_ms")?,
            d_min_km: require(e.d_min_km, "experiment.d_min_km")?,
            d_max_km: require(e.d_max_km, "experiment.d_max_km")?,
            step_km: require(e.step_km, "experiment.step_km")?,
            mno_nf_ms: require(e.mno_nf_ms, "experiment.mno_nf_ms")?,
        }),
        other => Err(Error::validation(
            "experiment.kind",
            format!(
                "unknown kind `{other}`, expected one of `distance-sweep`, \
                 `nf-delay-sweep`, `case-table`, `threshold`"
            ),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_uo_scenario_fills_baseline_defaults() {
        let cfg = parse_scenario("procedure = \"data-transfer\"\n").unwrap();
        assert_eq!(cfg.procedure, ProcedureKind::DataTransfer);
        assert_eq!(cfg.deployment.operator_kind, OperatorKind::Uo);
        assert_eq!(cfg.params.t_access.as_ms(), 0.5);
        assert_eq!(cfg.params.backhaul_rate.as_ms_per_km(), 0.05);
        assert_eq!(cfg.params.t_server.as_ms(), 30.0);
        assert_eq!(cfg.params.t_nf.as_ms(), 1.0);
        assert_eq!(cfg.deployment.core_distance_km, 0.5);
        assert_eq!(cfg.params.d_backhaul_km, 0.5);
    }

    #[test]
    fn mno_scenario_scales_the_nf_delay() {
        let text = "procedure = \"registration\"\n[deployment]\noperator = \"mno\"\n";
        let cfg = parse_scenario(text).unwrap();
        assert_eq!(cfg.deployment.core_distance_km, 250.0);
        assert_eq!(cfg.deployment.n_factories, 10);
        // 1 ms baseline x 10 factories / 100x resources.
        assert!((cfg.params.t_nf.as_ms() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn unknown_key_is_rejected_with_location() {
        let text = "procedure = \"data-transfer\"\n[params]\nlatnecy = 1.0\n";
        let err = parse_scenario(text).unwrap_err().to_string();
        assert!(err.contains("latnecy"), "{err}");
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn close_typo_gets_a_suggestion() {
        let text = "procedure = \"data-transfer\"\n[params]\nacces_ms = 1.0\n";
        let err = parse_scenario(text).unwrap_err().to_string();
        assert!(err.contains("did you mean `access_ms`"), "{err}");

        let text = "procedure = \"data-transfer\"\n[deployment]\noperater = \"uo\"\n";
        let err = parse_scenario(text).unwrap_err().to_string();
        assert!(err.contains("did you mean `operator`"), "{err}");
    }

    #[test]
    fn negative_distance_is_a_constraint_error_naming_the_field() {
        let text =
            "procedure = \"data-transfer\"\n[deployment]\ncore_distance_km = -1.0\n";
        let err = parse_scenario(text).unwrap_err().to_string();
        assert!(err.contains("core_distance_km"), "{err}");
    }

    #[test]
    fn canonical_round_trip_is_identity() {
        let texts = [
            "procedure = \"data-transfer\"\n".to_string(),
            "procedure = \"registration\"\n[deployment]\noperator = \"mno\"\n".to_string(),
            concat!(
                "procedure = \"data-transfer\"\n",
                "[experiment]\n",
                "kind = \"threshold\"\n",
                "threshold_ms = 50.0\n",
                "d_min_km = 0.5\n",
                "d_max_km = 500.0\n",
                "step_km = 50.0\n",
                "mno_nf_ms = 0.1\n",
            )
            .to_string(),
        ];
        for text in texts {
            let cfg = parse_scenario(&text).unwrap();
            let canonical = cfg.to_canonical_toml();
            let reparsed = parse_scenario(&canonical).unwrap();
            assert_eq!(cfg, reparsed, "canonical text:\n{canonical}");
        }
    }

    #[test]
    fn experiment_grids_must_be_explicit() {
        let text = "procedure = \"registration\"\n[experiment]\nkind = \"distance-sweep\"\n";
        let err = parse_scenario(text).unwrap_err().to_string();
        assert!(err.contains("experiment.d_min_km"), "{err}");
    }

    #[test]
    fn levenshtein_basics() {
        assert!(levenshtein("latnecy", "nf_ms") > 3);
        assert!(levenshtein("latnecy", "access_ms") > 3);
        assert_eq!(levenshtein("operater", "operator"), 1);
        assert_eq!(levenshtein("", "abc"), 3);
    }
}
