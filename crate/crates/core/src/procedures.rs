//! Executable definitions of the three message-sequence procedures —
//! device registration, PDU session establishment, and frame data transfer —
//! plus extraction of the crossing/processing coefficients that drive the
//! closed-form latency model.
//!
//! A procedure is an ordered list of steps executed as a causal chain: each
//! step starts when the previous one finishes, except steps explicitly marked
//! concurrent with their successor (fire-and-forget side updates). Every
//! message received at a core network function charges one NF processing
//! delay; the gNB and the server forward without an NF charge (the server has
//! its own dedicated processing stage).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{LinkClass, NfKind, Topology};

/// One message transfer between two elements.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Message {
    pub name: String,
    pub src: NfKind,
    pub dst: NfKind,
    /// True when the destination is a core NF and receipt charges `t_nf`.
    pub charges_processing: bool,
}

impl Message {
    pub fn new(name: &str, src: NfKind, dst: NfKind) -> Message {
        Message {
            name: name.to_string(),
            src,
            dst,
            charges_processing: dst.is_core_nf(),
        }
    }
}

/// What a step does when it runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Action {
    /// Route a message from its source to its destination.
    Transfer(Message),
    /// The server consumes one frame and produces the augmentation
    /// (charges `t_server`).
    ServerProcessing { label: String },
}

/// One step of a procedure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Step {
    pub action: Action,
    /// Dispatched together with the following step; its completion does not
    /// gate the chain and it contributes nothing to the critical path.
    pub concurrent_with_next: bool,
}

impl Step {
    fn transfer(name: &str, src: NfKind, dst: NfKind) -> Step {
        Step {
            action: Action::Transfer(Message::new(name, src, dst)),
            concurrent_with_next: false,
        }
    }

    fn concurrent_transfer(name: &str, src: NfKind, dst: NfKind) -> Step {
        Step {
            concurrent_with_next: true,
            ..Step::transfer(name, src, dst)
        }
    }

    fn server_processing(label: &str) -> Step {
        Step {
            action: Action::ServerProcessing {
                label: label.to_string(),
            },
            concurrent_with_next: false,
        }
    }

    pub fn message(&self) -> Option<&Message> {
        match &self.action {
            Action::Transfer(m) => Some(m),
            Action::ServerProcessing { .. } => None,
        }
    }
}

/// The trace event that marks procedure completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CompletionEvent {
    /// The completion message arrives at the completion node.
    Arrival,
    /// The completion node finishes processing the completion message.
    Processed,
}

/// Names the final message and the node at which completion is measured.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletionRule {
    pub message: String,
    pub node: NfKind,
    pub event: CompletionEvent,
}

/// The canonical procedures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProcedureKind {
    Registration,
    PduSession,
    DataTransfer,
}

impl ProcedureKind {
    pub const ALL: [ProcedureKind; 3] = [
        ProcedureKind::Registration,
        ProcedureKind::PduSession,
        ProcedureKind::DataTransfer,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProcedureKind::Registration => "registration",
            ProcedureKind::PduSession => "pdu-session",
            ProcedureKind::DataTransfer => "data-transfer",
        }
    }

    pub fn parse(s: &str) -> Result<ProcedureKind> {
        match s {
            "registration" => Ok(ProcedureKind::Registration),
            "pdu-session" => Ok(ProcedureKind::PduSession),
            "data-transfer" => Ok(ProcedureKind::DataTransfer),
            other => Err(Error::validation(
                "procedure",
                format!(
                    "unknown procedure `{other}`, expected one of `registration`, \
                     `pdu-session`, `data-transfer`"
                ),
            )),
        }
    }

    pub fn procedure(self) -> Procedure {
        match self {
            ProcedureKind::Registration => registration_procedure(),
            ProcedureKind::PduSession => pdu_session_procedure(),
            ProcedureKind::DataTransfer => data_transfer_procedure(),
        }
    }

    /// Whether the closed form adds the server processing term.
    pub fn charges_server(self) -> bool {
        self == ProcedureKind::DataTransfer
    }
}

impl std::fmt::Display for ProcedureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An ordered message sequence with a completion predicate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Procedure {
    pub name: String,
    steps: Vec<Step>,
    completion: Option<CompletionRule>,
}

impl Procedure {
    /// Validates and builds a procedure. Non-empty procedures must complete
    /// on their final step; the final step cannot be marked concurrent.
    pub fn new(
        name: &str,
        steps: Vec<Step>,
        completion: Option<CompletionRule>,
    ) -> Result<Procedure> {
        for step in &steps {
            if let Some(m) = step.message() {
                if m.name.is_empty() {
                    return Err(Error::validation("steps", "message name must be nonempty"));
                }
                if m.src == m.dst {
                    return Err(Error::validation(
                        "steps",
                        format!("message `{}` has src == dst", m.name),
                    ));
                }
            }
        }
        match (&steps.last(), &completion) {
            (None, None) => {}
            (None, Some(_)) => {
                return Err(Error::validation(
                    "completion",
                    "empty procedure cannot have a completion rule",
                ))
            }
            (Some(_), None) => {
                return Err(Error::validation(
                    "completion",
                    "non-empty procedure requires a completion rule",
                ))
            }
            (Some(last), Some(rule)) => {
                if last.concurrent_with_next {
                    return Err(Error::validation(
                        "steps",
                        "final step cannot be concurrent with a successor",
                    ));
                }
                let matches_last = match (&last.action, rule.event) {
                    (Action::Transfer(m), CompletionEvent::Arrival) => {
                        m.name == rule.message && m.dst == rule.node
                    }
                    (Action::Transfer(m), CompletionEvent::Processed) => {
                        m.name == rule.message && m.dst == rule.node && m.charges_processing
                    }
                    (Action::ServerProcessing { label }, _) => {
                        *label == rule.message && rule.node == NfKind::Server
                    }
                };
                if !matches_last {
                    return Err(Error::validation(
                        "completion",
                        format!(
                            "completion `{}` at {} does not match the final step",
                            rule.message, rule.node
                        ),
                    ));
                }
            }
        }
        Ok(Procedure {
            name: name.to_string(),
            steps,
            completion,
        })
    }

    /// An empty procedure; useful as the degenerate base case.
    pub fn empty(name: &str) -> Procedure {
        Procedure {
            name: name.to_string(),
            steps: Vec::new(),
            completion: None,
        }
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn completion(&self) -> Option<&CompletionRule> {
        self.completion.as_ref()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Number of server processing stages (zero or one in this release).
    pub fn server_charges(&self) -> u32 {
        self.steps
            .iter()
            .filter(|s| matches!(s.action, Action::ServerProcessing { .. }))
            .count() as u32
    }

    /// Step listing as structured text: `index<TAB>name<TAB>src<TAB>dst`,
    /// with `*` appended to the index of concurrent steps. Stable, suitable
    /// for golden-file comparison.
    pub fn step_table(&self) -> String {
        let mut out = String::from("step\tmessage\tsrc\tdst\n");
        for (i, step) in self.steps.iter().enumerate() {
            let idx = i + 1;
            let mark = if step.concurrent_with_next { "*" } else { "" };
            match &step.action {
                Action::Transfer(m) => {
                    out.push_str(&format!("{idx}{mark}\t{}\t{}\t{}\n", m.name, m.src, m.dst));
                }
                Action::ServerProcessing { label } => {
                    out.push_str(&format!("{idx}{mark}\t{label}\tserver\tserver\n"));
                }
            }
        }
        out
    }
}

/// The device registration procedure: fifteen steps from the initial
/// request through authentication, two identity exchanges, policy
/// association, and the final completion message processed at the AMF.
/// The session-context update toward the SMF is dispatched together with
/// the registration accept and stays off the critical path.
pub fn registration_procedure() -> Procedure {
    use NfKind::*;
    let steps = vec![
        Step::transfer("RegistrationRequest", Device, GnB),
        Step::transfer("RegistrationRequest", GnB, Amf),
        Step::transfer("IdentityRequest", Amf, Device),
        Step::transfer("IdentityResponse", Device, Amf),
        Step::transfer("AuthRequest", Amf, Ausf),
        Step::transfer("AuthDataRequest", Ausf, Udm),
        Step::transfer("AuthDataResponse", Udm, Ausf),
        Step::transfer("AuthResponse", Ausf, Amf),
        Step::transfer("IdentityRequest2", Amf, Device),
        Step::transfer("IdentityResponse2", Device, Amf),
        Step::transfer("PolicyAssociationRequest", Amf, Pcf),
        Step::transfer("PolicyAssociationResponse", Pcf, Amf),
        Step::concurrent_transfer("SessionContextUpdate", Amf, Smf),
        Step::transfer("RegistrationAccept", Amf, Device),
        Step::transfer("RegistrationComplete", Device, Amf),
    ];
    Procedure::new(
        "registration",
        steps,
        Some(CompletionRule {
            message: "RegistrationComplete".to_string(),
            node: NfKind::Amf,
            event: CompletionEvent::Processed,
        }),
    )
    .expect("registration procedure is well-formed")
}

/// The PDU session establishment procedure: session creation via the SMF,
/// subscriber-data registration, an authentication round trip between the
/// device and the server over the user plane, policy association, user-plane
/// setup at the UPF, radio resource setup, and the final session update
/// response processed at the AMF.
pub fn pdu_session_procedure() -> Procedure {
    use NfKind::*;
    let steps = vec![
        Step::transfer("PduSessionEstablishmentRequest", Device, Amf),
        Step::transfer("CreateSessionRequest", Amf, Smf),
        Step::transfer("SmfRegistration", Smf, Udm),
        Step::transfer("SmfRegistrationAck", Udm, Smf),
        Step::transfer("CreateSessionResponse", Smf, Amf),
        Step::transfer("SessionAuthRequest", Device, Server),
        Step::transfer("SessionAuthResponse", Server, Device),
        Step::transfer("SessionPolicyRequest", Smf, Pcf),
        Step::transfer("SessionPolicyResponse", Pcf, Smf),
        Step::transfer("SessionEstablishmentRequest", Smf, Upf),
        Step::transfer("SessionEstablishmentResponse", Upf, Smf),
        Step::transfer("AccessInfoTransfer", Smf, Amf),
        Step::transfer("PduSessionIdInfo", Amf, GnB),
        Step::transfer("ResourceSetup", GnB, Device),
        Step::transfer("ResourceSetupAck", Device, GnB),
        Step::transfer("PduSessionRequestAck", GnB, Amf),
        Step::transfer("PduSessionUpdateRequest", Amf, Smf),
        Step::transfer("SessionModificationRequest", Smf, Upf),
        Step::transfer("SessionModificationResponse", Upf, Smf),
        Step::transfer("PduSessionUpdateResponse", Smf, Amf),
    ];
    Procedure::new(
        "pdu-session",
        steps,
        Some(CompletionRule {
            message: "PduSessionUpdateResponse".to_string(),
            node: NfKind::Amf,
            event: CompletionEvent::Processed,
        }),
    )
    .expect("pdu session procedure is well-formed")
}

/// One frame round trip: uplink through the UPF to the server, server
/// processing, and the augmentation back to the device.
pub fn data_transfer_procedure() -> Procedure {
    use NfKind::*;
    let steps = vec![
        Step::transfer("Frame", Device, GnB),
        Step::transfer("Frame", GnB, Upf),
        Step::transfer("Frame", Upf, Server),
        Step::server_processing("ImageProcessing"),
        Step::transfer("Augmentation", Server, Upf),
        Step::transfer("Augmentation", Upf, GnB),
        Step::transfer("Augmentation", GnB, Device),
    ];
    Procedure::new(
        "data-transfer",
        steps,
        Some(CompletionRule {
            message: "Augmentation".to_string(),
            node: NfKind::Device,
            event: CompletionEvent::Arrival,
        }),
    )
    .expect("data transfer procedure is well-formed")
}

/// The uplink leg of the data transfer: frame dispatch until arrival at the
/// server, before server processing. Used for the one-way latency check.
pub fn data_transfer_uplink() -> Procedure {
    use NfKind::*;
    let steps = vec![
        Step::transfer("Frame", Device, GnB),
        Step::transfer("Frame", GnB, Upf),
        Step::transfer("Frame", Upf, Server),
    ];
    Procedure::new(
        "data-transfer-uplink",
        steps,
        Some(CompletionRule {
            message: "Frame".to_string(),
            node: NfKind::Server,
            event: CompletionEvent::Arrival,
        }),
    )
    .expect("uplink leg is well-formed")
}

/// Link-crossing and processing-charge counts of a procedure over a
/// topology. Structural only: independent of every latency parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Coefficients {
    /// Access-link traversals on the critical path.
    pub access_crossings: u32,
    /// Backhaul-link traversals on the critical path.
    pub backhaul_crossings: u32,
    /// Core-internal hops on the critical path (zero-latency by default).
    pub core_internal_crossings: u32,
    /// NF processing charges on the critical path.
    pub processing_charges: u32,
    /// All NF processing charges, including concurrent off-path steps.
    pub processing_charges_total: u32,
}

/// Counts link traversals and processing charges of `procedure` routed over
/// `topology`. Steps marked concurrent with their successor contribute only
/// to `processing_charges_total`.
pub fn extract_coefficients(procedure: &Procedure, topology: &Topology) -> Result<Coefficients> {
    let mut c = Coefficients::default();
    for step in procedure.steps() {
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
                if on_path {
                    for idx in path {
                        match topology.links[idx].class {
                            LinkClass::Access => c.access_crossings += 1,
                            LinkClass::Backhaul => c.backhaul_crossings += 1,
                            LinkClass::CoreInternal => c.core_internal_crossings += 1,
                        }
                    }
                }
                if m.charges_processing {
                    c.processing_charges_total += 1;
                    if on_path {
                        c.processing_charges += 1;
                    }
                }
            }
            Action::ServerProcessing { .. } => {}
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_topology, DeploymentSpec, LatencyParams};

    fn uo_topology() -> Topology {
        build_topology(&DeploymentSpec::uo(), &LatencyParams::default()).unwrap()
    }

    #[test]
    fn registration_has_fifteen_steps() {
        assert_eq!(registration_procedure().steps().len(), 15);
    }

    #[test]
    fn registration_starts_with_request_from_device() {
        let p = registration_procedure();
        let first = p.steps()[0].message().unwrap();
        assert_eq!(first.name, "RegistrationRequest");
        assert_eq!(first.src, NfKind::Device);
    }

    #[test]
    fn registration_ends_with_complete_at_amf() {
        let p = registration_procedure();
        let last = p.steps().last().unwrap().message().unwrap();
        assert_eq!(last.name, "RegistrationComplete");
        assert_eq!(last.dst, NfKind::Amf);
        let rule = p.completion().unwrap();
        assert_eq!(rule.node, NfKind::Amf);
        assert_eq!(rule.event, CompletionEvent::Processed);
    }

    #[test]
    fn registration_coefficients_over_uo_topology() {
        let c = extract_coefficients(&registration_procedure(), &uo_topology()).unwrap();
        assert_eq!(c.access_crossings, 7);
        assert_eq!(c.backhaul_crossings, 7);
        assert_eq!(c.processing_charges, 10);
        assert_eq!(c.processing_charges_total, 11);
    }

    #[test]
    fn registration_access_and_backhaul_counts_pair_up() {
        let c = extract_coefficients(&registration_procedure(), &uo_topology()).unwrap();
        assert_eq!(c.access_crossings, c.backhaul_crossings);
    }

    #[test]
    fn pdu_session_structure() {
        let p = pdu_session_procedure();
        assert_eq!(p.steps().len(), 20);
        let first = p.steps()[0].message().unwrap();
        assert_eq!(first.name, "PduSessionEstablishmentRequest");
        assert_eq!(first.src, NfKind::Device);
        let modification = p
            .steps()
            .iter()
            .filter_map(|s| s.message())
            .find(|m| m.name == "SessionModificationRequest")
            .unwrap();
        assert_eq!(modification.dst, NfKind::Upf);
        assert_eq!(p.completion().unwrap().node, NfKind::Amf);
    }

    #[test]
    fn pdu_session_coefficients_over_uo_topology() {
        let c = extract_coefficients(&pdu_session_procedure(), &uo_topology()).unwrap();
        assert_eq!(
            (c.access_crossings, c.backhaul_crossings, c.processing_charges),
            (5, 7, 15)
        );
        assert_eq!(c.processing_charges_total, 15);
    }

    #[test]
    fn data_transfer_coefficients() {
        let c = extract_coefficients(&data_transfer_procedure(), &uo_topology()).unwrap();
        assert_eq!(
            (c.access_crossings, c.backhaul_crossings, c.processing_charges),
            (2, 4, 2)
        );
        // The frames travel gNB<->UPF<->server directly, never through
        // another core NF.
        assert_eq!(c.core_internal_crossings, 0);
    }

    #[test]
    fn data_transfer_charges_server_once_and_completes_at_device() {
        let p = data_transfer_procedure();
        assert_eq!(p.server_charges(), 1);
        let rule = p.completion().unwrap();
        assert_eq!(rule.node, NfKind::Device);
        assert_eq!(rule.event, CompletionEvent::Arrival);
    }

    #[test]
    fn uplink_leg_coefficients() {
        let c = extract_coefficients(&data_transfer_uplink(), &uo_topology()).unwrap();
        assert_eq!(
            (c.access_crossings, c.backhaul_crossings, c.processing_charges),
            (1, 2, 1)
        );
    }

    #[test]
    fn empty_procedure_yields_zero_coefficients() {
        let c = extract_coefficients(&Procedure::empty("noop"), &uo_topology()).unwrap();
        assert_eq!(c, Coefficients::default());
    }

    #[test]
    fn session_auth_round_trip_crosses_backhaul_twice_each_way() {
        // Device -> server rides the user plane: one access link, then two
        // backhaul crossings (gNB to core, core back out to the server).
        let topo = uo_topology();
        let p = pdu_session_procedure();
        let auth = p
            .steps()
            .iter()
            .filter_map(|s| s.message())
            .find(|m| m.name == "SessionAuthRequest")
            .unwrap();
        let path = topo.route(auth.src, auth.dst).unwrap();
        let classes: Vec<LinkClass> = path.iter().map(|&i| topo.links[i].class).collect();
        assert_eq!(
            classes,
            vec![LinkClass::Access, LinkClass::Backhaul, LinkClass::Backhaul]
        );
    }

    #[test]
    fn unroutable_message_names_the_message() {
        let p = Procedure::new(
            "bogus",
            vec![Step::transfer("SliceQuery", NfKind::Device, NfKind::Nssf)],
            Some(CompletionRule {
                message: "SliceQuery".to_string(),
                node: NfKind::Nssf,
                event: CompletionEvent::Arrival,
            }),
        )
        .unwrap();
        let err = extract_coefficients(&p, &uo_topology()).unwrap_err();
        assert!(err.to_string().contains("SliceQuery"), "{err}");
    }

    #[test]
    fn step_table_is_stable() {
        let table = registration_procedure().step_table();
        assert!(table.starts_with("step\tmessage\tsrc\tdst\n"));
        assert!(table.contains("13*\tSessionContextUpdate\tamf\tsmf"));
        assert!(table.ends_with("15\tRegistrationComplete\tdevice\tamf\n"));
    }

    #[test]
    fn completion_must_match_final_step() {
        let bad = Procedure::new(
            "bad",
            vec![Step::transfer("Ping", NfKind::Device, NfKind::GnB)],
            Some(CompletionRule {
                message: "Pong".to_string(),
                node: NfKind::GnB,
                event: CompletionEvent::Arrival,
            }),
        );
        assert!(bad.is_err());
    }

    #[test]
    fn extraction_is_invariant_under_parameter_values() {
        let spec = DeploymentSpec::uo();
        let a = build_topology(&spec, &LatencyParams::default()).unwrap();
        let b = build_topology(
            &spec,
            &LatencyParams::from_ms(3.0, 0.2, 7.0, 99.0, 0.5, 0.5).unwrap(),
        )
        .unwrap();
        for proc in [
            registration_procedure(),
            pdu_session_procedure(),
            data_transfer_procedure(),
        ] {
            assert_eq!(
                extract_coefficients(&proc, &a).unwrap(),
                extract_coefficients(&proc, &b).unwrap(),
                "{}",
                proc.name
            );
        }
    }

    mod linear_form {
        //! The simulated latency of each canonical procedure must equal its
        //! hand-counted linear decomposition for every positive parameter
        //! assignment. The crossing counts here are frozen from the message
        //! sequences themselves and bypass `extract_coefficients`.

        use super::super::*;
        use crate::engine;
        use crate::model::{build_topology, DeploymentSpec, LatencyParams};
        use proptest::prelude::*;

        /// (procedure, access, backhaul, processing charges, server charges)
        fn frozen() -> [(Procedure, u32, u32, u32, u32); 3] {
            [
                (registration_procedure(), 7, 7, 10, 0),
                (pdu_session_procedure(), 5, 7, 15, 0),
                (data_transfer_procedure(), 2, 4, 2, 1),
            ]
        }

        proptest! {
            #[test]
            fn simulation_matches_hand_counted_form(
                t_access_us in 1u32..5_000,
                rate_ns_per_m in 1u32..500,
                t_nf_us in 1u32..20_000,
                t_server_us in 0u32..60_000,
                d_m in 1u32..1_000_000,
            ) {
                // Nanosecond-grid durations and metre-grid distances make
                // every traversal an exact picosecond count on both routes.
                let params = LatencyParams::from_ms(
                    f64::from(t_access_us) * 1e-3,
                    f64::from(rate_ns_per_m) * 1e-3,
                    f64::from(t_nf_us) * 1e-3,
                    f64::from(t_server_us) * 1e-3,
                    0.0,
                    f64::from(d_m) * 1e-3,
                ).unwrap();
                let spec = DeploymentSpec::uo_at(params.d_backhaul_km).unwrap();
                let topo = build_topology(&spec, &params).unwrap();
                for (proc, k_access, k_backhaul, k_processing, k_server) in frozen() {
                    let simulated = engine::run(&proc, &topo, &params).unwrap().e2e_latency.as_ms();
                    let expected = f64::from(k_access) * params.t_access.as_ms()
                        + f64::from(k_backhaul)
                            * params.backhaul_rate.as_ms_per_km()
                            * params.d_backhaul_km
                        + f64::from(k_processing) * params.t_nf.as_ms()
                        + f64::from(k_server) * params.t_server.as_ms();
                    prop_assert!(
                        (simulated - expected).abs() <= 1e-9,
                        "{}: simulated {simulated}, expected {expected}",
                        proc.name
                    );
                }
            }
        }
    }
}
