//! Published reference values, loaded from a versioned data file so tests
//! and the reproduction report reference anchors by id instead of inlining
//! numbers.

use std::sync::OnceLock;

use serde::Deserialize;

/// The full anchor set shipped with the crate.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Anchors {
    pub requirements: RequirementAnchor,
    pub registration_distance_sweep: SlopeAnchor,
    pub registration_nf_delay_sweep: SlopeAnchor,
    pub data_transfer_threshold: ThresholdAnchor,
    pub data_transfer_slow_core: SlowCoreAnchor,
    #[serde(rename = "case_table")]
    pub case_tables: Vec<CaseTableAnchor>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequirementAnchor {
    pub one_way_ms: f64,
    pub round_trip_ms: f64,
    pub source: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlopeAnchor {
    #[serde(alias = "slope_ms_per_km", alias = "slope_ms_per_ms")]
    pub slope: f64,
    pub source: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdAnchor {
    pub crossing_km: f64,
    pub threshold_ms: f64,
    pub source: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlowCoreAnchor {
    pub uo_t_nf_ms: f64,
    pub e2e_ms: f64,
    pub source: String,
}

/// One published break-even table (four resource cases).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseTableAnchor {
    pub id: String,
    pub procedure: String,
    pub uo_t_nf_ms: f64,
    /// False when the published rows cannot be reproduced by any integer
    /// crossing count of the model.
    pub model_consistent: bool,
    pub source: String,
    pub rows: Vec<CaseRowAnchor>,
}

/// A published table row; a missing distance means "infeasible".
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseRowAnchor {
    pub case: u8,
    pub mno_t_nf_ms: f64,
    pub distance_km: Option<f64>,
}

impl Anchors {
    pub fn case_table(&self, id: &str) -> Option<&CaseTableAnchor> {
        self.case_tables.iter().find(|t| t.id == id)
    }
}

static ANCHORS: OnceLock<Anchors> = OnceLock::new();

/// The anchor set bundled with this build.
pub fn anchors() -> &'static Anchors {
    ANCHORS.get_or_init(|| {
        toml::from_str(include_str!("../data/anchors.toml")).expect("bundled anchors parse")
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_anchors_parse_and_cover_all_tables() {
        let a = anchors();
        assert_eq!(a.case_tables.len(), 4);
        assert!(a.case_table("data_transfer_nf_1ms").is_some());
        assert_eq!(a.requirements.one_way_ms, 10.0);
        assert_eq!(a.requirements.round_trip_ms, 50.0);
        for table in &a.case_tables {
            assert_eq!(table.rows.len(), 4);
            assert!(table.rows[0].distance_km.is_none(), "case 1 is infeasible");
        }
    }
}
