//! Closed-form latency model: per-component budgets, break-even distance
//! solvers, and latency-requirement checks.
//!
//! The end-to-end latency of a procedure decomposes linearly over its
//! crossing counts: access crossings times the access delay, backhaul
//! crossings times rate times distance, processing charges times the NF
//! delay, plus the server stage when present. Inverting the backhaul term
//! for a target latency gives the largest core-site distance that still
//! meets the target.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::LatencyParams;
use crate::procedures::Coefficients;

/// Whether a budget covers one direction or a full round trip; selects the
/// applicable requirement bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LatencyScope {
    OneWay,
    RoundTrip,
}

/// A latency prediction split by component, in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatencyBudget {
    pub access_ms: f64,
    pub backhaul_ms: f64,
    pub processing_ms: f64,
    pub core_internal_ms: f64,
    pub server_ms: f64,
    /// Sum of the terms above, in that order.
    pub total_ms: f64,
}

/// Evaluates the closed form for the given coefficients and parameters.
/// `with_server` adds one server processing term.
pub fn latency(c: &Coefficients, params: &LatencyParams, with_server: bool) -> LatencyBudget {
    let access_ms = c.access_crossings as f64 * params.t_access.as_ms();
    let backhaul_ms =
        c.backhaul_crossings as f64 * params.backhaul_rate.as_ms_per_km() * params.d_backhaul_km;
    let processing_ms = c.processing_charges as f64 * params.t_nf.as_ms();
    let core_internal_ms = c.core_internal_crossings as f64 * params.t_core_internal.as_ms();
    let server_ms = if with_server {
        params.t_server.as_ms()
    } else {
        0.0
    };
    let total_ms = access_ms + backhaul_ms + processing_ms + core_internal_ms + server_ms;
    LatencyBudget {
        access_ms,
        backhaul_ms,
        processing_ms,
        core_internal_ms,
        server_ms,
        total_ms,
    }
}

/// Break-even outcome: the largest backhaul distance meeting a target, or
/// infeasible when the fixed terms alone already exceed it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BreakevenResult {
    Feasible { distance_km: f64 },
    Infeasible,
}

impl BreakevenResult {
    pub fn distance_km(&self) -> Option<f64> {
        match self {
            BreakevenResult::Feasible { distance_km } => Some(*distance_km),
            BreakevenResult::Infeasible => None,
        }
    }
}

/// Solves the backhaul distance at which the closed form meets `target_ms`.
///
/// Uses every parameter except `d_backhaul_km`, which is the unknown.
/// Requires at least one backhaul crossing (otherwise distance has no
/// effect) and a positive propagation rate.
pub fn breakeven_distance(
    c: &Coefficients,
    target_ms: f64,
    params: &LatencyParams,
    with_server: bool,
) -> Result<BreakevenResult> {
    if c.backhaul_crossings == 0 {
        return Err(Error::DegenerateProcedure {
            procedure: format!("{c:?}"),
        });
    }
    let rate = params.backhaul_rate.as_ms_per_km();
    if rate <= 0.0 {
        return Err(Error::validation("backhaul_rate", "must be > 0 to solve for distance"));
    }
    if !target_ms.is_finite() {
        return Err(Error::validation("target_ms", "must be finite"));
    }
    let fixed_ms = c.access_crossings as f64 * params.t_access.as_ms()
        + c.processing_charges as f64 * params.t_nf.as_ms()
        + c.core_internal_crossings as f64 * params.t_core_internal.as_ms()
        + if with_server {
            params.t_server.as_ms()
        } else {
            0.0
        };
    let numerator = target_ms - fixed_ms;
    if numerator <= 0.0 {
        return Ok(BreakevenResult::Infeasible);
    }
    Ok(BreakevenResult::Feasible {
        distance_km: numerator / (c.backhaul_crossings as f64 * rate),
    })
}

/// The latency requirements of the offloaded-processing workload:
/// one-way frame delivery and full round trip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RequirementBounds {
    pub one_way_ms: f64,
    pub round_trip_ms: f64,
}

impl Default for RequirementBounds {
    /// 10 ms one-way frame delivery, 50 ms round trip.
    fn default() -> RequirementBounds {
        RequirementBounds {
            one_way_ms: 10.0,
            round_trip_ms: 50.0,
        }
    }
}

/// Requirement-check outcome. The boundary is inclusive: a total exactly
/// equal to the bound passes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass { margin_ms: f64 },
    Fail { exceedance_ms: f64 },
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass { .. })
    }
}

/// Checks a budget against the bound applicable to its scope.
pub fn check_requirements(
    budget: &LatencyBudget,
    scope: LatencyScope,
    bounds: &RequirementBounds,
) -> Result<Verdict> {
    let bound_ms = match scope {
        LatencyScope::OneWay => bounds.one_way_ms,
        LatencyScope::RoundTrip => bounds.round_trip_ms,
    };
    if !bound_ms.is_finite() || bound_ms <= 0.0 {
        return Err(Error::validation("bound_ms", "must be > 0"));
    }
    if budget.total_ms <= bound_ms {
        Ok(Verdict::Pass {
            margin_ms: bound_ms - budget.total_ms,
        })
    } else {
        Ok(Verdict::Fail {
            exceedance_ms: budget.total_ms - bound_ms,
        })
    }
}
