//! Deterministic discrete-event execution of a procedure over a topology.
//!
//! The simulation clock is an integer picosecond counter, so identical
//! inputs always produce byte-identical traces. Events at equal times are
//! ordered by an insertion sequence number (FIFO among equals); there is no
//! wall-clock or RNG dependence anywhere.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Delay, LatencyParams, LinkClass, NfKind, Topology};
use crate::procedures::{Action, CompletionEvent, Procedure};

/// What happened at a point in simulated time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Send,
    Arrive,
    ProcessingDone,
    ServerDone,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Send => "send",
            EventKind::Arrive => "arrive",
            EventKind::ProcessingDone => "processing_done",
            EventKind::ServerDone => "server_done",
        }
    }
}

/// A timestamped trace entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event {
    /// Simulated time since procedure start.
    pub time: Delay,
    pub kind: EventKind,
    /// Message name, or the stage label for server processing.
    pub message: String,
    pub src: NfKind,
    pub dst: NfKind,
    /// Monotone tie-break counter; orders events with equal times.
    pub seq: u64,
}

/// Critical-path time split by component. The parts always sum to the
/// end-to-end latency exactly (integer arithmetic).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ComponentTotals {
    pub access: Delay,
    pub backhaul: Delay,
    pub core_internal: Delay,
    pub processing: Delay,
    pub server: Delay,
}

impl ComponentTotals {
    pub fn sum(&self) -> Delay {
        self.access + self.backhaul + self.core_internal + self.processing + self.server
    }
}

/// The result of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trace {
    pub events: Vec<Event>,
    /// Completion-event time minus first-send time.
    pub e2e_latency: Delay,
    pub per_component: ComponentTotals,
}

impl Trace {
    /// Structured-text event log with stable field order, one event per
    /// line: `time_ms,kind,message,src,dst`. Golden-file comparable.
    pub fn to_text(&self) -> String {
        let mut out = String::from("time_ms,kind,message,src,dst\n");
        for e in &self.events {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                e.time.format_ms(),
                e.kind.as_str(),
                e.message,
                e.src,
                e.dst
            ));
        }
        out
    }
}

/// Executes `procedure` over `topology` with `params`.
///
/// Steps run as a causal chain: each starts when the previous one completes.
/// A step marked concurrent with its successor is dispatched at the same
/// instant as that successor and its completion does not gate the chain.
/// Link traversals advance the clock by the link-class latency, each message
/// received at a core NF charges `t_nf`, and the server stage charges
/// `t_server`.
pub fn run(procedure: &Procedure, topology: &Topology, params: &LatencyParams) -> Result<Trace> {
    params.validate()?;

    let mut events: Vec<Event> = Vec::new();
    let mut seq: u64 = 0;
    let mut emit = |time: Delay, kind: EventKind, message: &str, src: NfKind, dst: NfKind,
                    events: &mut Vec<Event>| {
        events.push(Event {
            time,
            kind,
            message: message.to_string(),
            src,
            dst,
            seq,
        });
        seq += 1;
    };

    let mut now = Delay::ZERO;
    let mut totals = ComponentTotals::default();
    let mut completion_time: Option<Delay> = None;

    for step in procedure.steps() {
        let start = now;
        let on_path = !step.concurrent_with_next;
        match &step.action {
            Action::Transfer(m) => {
                let path = topology.route(m.src, m.dst).map_err(|e| match e {
                    Error::Unroutable { reason, .. } => Error::Unroutable {
                        message: m.name.clone(),
                        reason,
                    },
                    other => other,
                })?;
                emit(start, EventKind::Send, &m.name, m.src, m.dst, &mut events);

                let mut at = start;
                let mut leg = ComponentTotals::default();
                for idx in path {
                    let link = &topology.links[idx];
                    let hop = link.delay(params);
                    at += hop;
                    match link.class {
                        LinkClass::Access => leg.access += hop,
                        LinkClass::Backhaul => leg.backhaul += hop,
                        LinkClass::CoreInternal => leg.core_internal += hop,
                    }
                }
                emit(at, EventKind::Arrive, &m.name, m.src, m.dst, &mut events);

                let done = if m.charges_processing {
                    let d = at + params.t_nf;
                    leg.processing += params.t_nf;
                    emit(d, EventKind::ProcessingDone, &m.name, m.src, m.dst, &mut events);
                    d
                } else {
                    at
                };

                if let Some(rule) = procedure.completion() {
                    let fired = rule.message == m.name
                        && rule.node == m.dst
                        && match rule.event {
                            CompletionEvent::Arrival => true,
                            CompletionEvent::Processed => m.charges_processing,
                        };
                    if fired && completion_time.is_none() {
                        completion_time = Some(match rule.event {
                            CompletionEvent::Arrival => at,
                            CompletionEvent::Processed => done,
                        });
                    }
                }

                if on_path {
                    now = done;
                    totals.access += leg.access;
                    totals.backhaul += leg.backhaul;
                    totals.core_internal += leg.core_internal;
                    totals.processing += leg.processing;
                }
            }
            Action::ServerProcessing { label } => {
                let done = start + params.t_server;
                emit(
                    done,
                    EventKind::ServerDone,
                    label,
                    NfKind::Server,
                    NfKind::Server,
                    &mut events,
                );
                if let Some(rule) = procedure.completion() {
                    if rule.message == *label && rule.node == NfKind::Server {
                        completion_time.get_or_insert(done);
                    }
                }
                if on_path {
                    now = done;
                    totals.server += params.t_server;
                }
            }
        }
    }

    events.sort_by_key(|e| (e.time, e.seq));

    let e2e_latency = match procedure.completion() {
        Some(_) => completion_time.ok_or_else(|| Error::Domain(
            "completion event never fired".to_string(),
        ))?,
        None => Delay::ZERO,
    };

    Ok(Trace {
        events,
        e2e_latency,
        per_component: totals,
    })
}

/// Runs each element independently, preserving input order. A failing
/// element yields its error at its own index without aborting the others.
pub fn run_batch(
    runs: &[(&Procedure, &Topology, &LatencyParams)],
) -> Vec<Result<Trace>> {
    runs.iter()
        .map(|(p, t, params)| run(p, t, params))
        .collect()
}
