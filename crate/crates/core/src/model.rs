//! Domain types for network elements, deployment scenarios, and latency
//! parameters, plus topology construction for the two deployment models.
//!
//! Two deployments are compared: a micro-operator (uO) hosting its own 5G
//! core next to the served site, and a mobile network operator (MNO) hosting
//! a shared core farther away. Both use the same element set — one device,
//! one gNB, one instance of each core network function, and one application
//! server — and differ only in backhaul distance and in the effective NF
//! processing delay (the MNO divides its resources across many sites).
//!
//! All latency arithmetic uses integer picoseconds (`Delay`) so simulation
//! traces and experiment files are bit-reproducible.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Picoseconds per millisecond; the fixed decimal unit of the simulation clock.
const PS_PER_MS: f64 = 1e9;

/// Largest duration accepted from user input, in milliseconds (one hour).
/// Keeps accumulated event times far away from i64 overflow.
const MAX_MS: f64 = 3_600_000.0;

/// A non-negative duration stored as an integer count of picoseconds.
///
/// One picosecond is 1e-9 ms, the tolerance unit of the simulation/closed-form
/// equivalence checks, so clock arithmetic never drifts at the tested scale.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Delay(i64);

impl Delay {
    pub const ZERO: Delay = Delay(0);

    /// Builds a delay from milliseconds, rejecting NaN, negatives, and
    /// values past [`MAX_MS`]. The value is rounded to whole picoseconds.
    pub fn from_ms(field: &str, ms: f64) -> Result<Delay> {
        if !ms.is_finite() {
            return Err(Error::validation(field, "must be finite"));
        }
        if ms < 0.0 {
            return Err(Error::validation(field, format!("must be >= 0, got {ms}")));
        }
        if ms > MAX_MS {
            return Err(Error::validation(field, format!("must be <= {MAX_MS} ms")));
        }
        Ok(Delay((ms * PS_PER_MS).round() as i64))
    }

    pub fn as_ms(self) -> f64 {
        self.0 as f64 / PS_PER_MS
    }

    pub const fn as_ps(self) -> i64 {
        self.0
    }

    /// Exact decimal rendering in milliseconds with nine fractional digits.
    pub fn format_ms(self) -> String {
        let ps = self.0;
        format!("{}.{:09}", ps / 1_000_000_000, ps % 1_000_000_000)
    }
}

impl std::ops::Add for Delay {
    type Output = Delay;
    fn add(self, rhs: Delay) -> Delay {
        Delay(self.0 + rhs.0)
    }
}

impl std::ops::AddAssign for Delay {
    fn add_assign(&mut self, rhs: Delay) {
        self.0 += rhs.0;
    }
}

impl fmt::Display for Delay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ms", self.format_ms())
    }
}

/// Backhaul propagation rate, stored as integer picoseconds per kilometre.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PropagationRate(i64);

impl PropagationRate {
    pub fn from_ms_per_km(field: &str, ms_per_km: f64) -> Result<PropagationRate> {
        let d = Delay::from_ms(field, ms_per_km)?;
        Ok(PropagationRate(d.as_ps()))
    }

    pub fn as_ms_per_km(self) -> f64 {
        self.0 as f64 / PS_PER_MS
    }

    /// Propagation delay for one traversal of a link of the given length.
    pub fn traversal(self, length_km: f64) -> Delay {
        Delay((self.0 as f64 * length_km).round() as i64)
    }
}

/// The network elements a message sequence can involve.
///
/// The reserved kinds close the architecture's element list (slice selection
/// and management, exposure, repository, application function) but are not
/// instantiable in this release: no topology places them and no procedure
/// addresses them.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum NfKind {
    Device,
    GnB,
    Amf,
    Smf,
    Upf,
    Ausf,
    Udm,
    Pcf,
    Server,
    // Reserved, non-instantiable kinds.
    Nssf,
    Nef,
    Nrf,
    Af,
    Csmf,
    Nsmf,
    Nssmf,
}

impl NfKind {
    /// Instantiable kinds in deterministic node-id order.
    pub const INSTANTIABLE: [NfKind; 9] = [
        NfKind::Device,
        NfKind::GnB,
        NfKind::Amf,
        NfKind::Smf,
        NfKind::Upf,
        NfKind::Ausf,
        NfKind::Udm,
        NfKind::Pcf,
        NfKind::Server,
    ];

    /// Core network functions that charge processing delay on message receipt.
    pub const CORE_NFS: [NfKind; 6] = [
        NfKind::Amf,
        NfKind::Smf,
        NfKind::Upf,
        NfKind::Ausf,
        NfKind::Udm,
        NfKind::Pcf,
    ];

    pub fn is_core_nf(self) -> bool {
        NfKind::CORE_NFS.contains(&self)
    }

    pub fn is_reserved(self) -> bool {
        !NfKind::INSTANTIABLE.contains(&self)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NfKind::Device => "device",
            NfKind::GnB => "gnb",
            NfKind::Amf => "amf",
            NfKind::Smf => "smf",
            NfKind::Upf => "upf",
            NfKind::Ausf => "ausf",
            NfKind::Udm => "udm",
            NfKind::Pcf => "pcf",
            NfKind::Server => "server",
            NfKind::Nssf => "nssf",
            NfKind::Nef => "nef",
            NfKind::Nrf => "nrf",
            NfKind::Af => "af",
            NfKind::Csmf => "csmf",
            NfKind::Nsmf => "nsmf",
            NfKind::Nssmf => "nssmf",
        }
    }
}

impl fmt::Display for NfKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Link classes with distinct latency rules: access is a fixed scalar per
/// traversal, backhaul is distance-proportional, core-internal is a fixed
/// scalar (zero by default, co-located NFs).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkClass {
    Access,
    Backhaul,
    CoreInternal,
}

/// Physical site of an element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Site {
    Factory,
    CoreSite,
}

/// Who operates the core network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    /// Micro-operator: local core, serves a single site with its own resources.
    Uo,
    /// Mobile network operator: remote core shared across many sites.
    Mno,
}

impl OperatorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OperatorKind::Uo => "uo",
            OperatorKind::Mno => "mno",
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OperatorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<OperatorKind> {
        match s {
            "uo" => Ok(OperatorKind::Uo),
            "mno" => Ok(OperatorKind::Mno),
            other => Err(Error::validation(
                "operator",
                format!("unknown operator `{other}`, expected `uo` or `mno`"),
            )),
        }
    }
}

/// The scalar latency knobs of the model.
///
/// `t_nf` is the effective per-message NF processing delay of the operator
/// being evaluated; `d_backhaul_km` is the distance the closed form assigns
/// to every backhaul crossing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyParams {
    /// Radio-leg delay per access traversal.
    pub t_access: Delay,
    /// Backhaul propagation per kilometre (fibre).
    pub backhaul_rate: PropagationRate,
    /// Processing delay charged per message received at a core NF.
    pub t_nf: Delay,
    /// Aggregated delay at the image processing server per offloaded frame.
    pub t_server: Delay,
    /// Delay per NF-to-NF hop inside the core site (zero when co-located).
    pub t_core_internal: Delay,
    /// Distance from the access network to the core site, in kilometres.
    pub d_backhaul_km: f64,
}

impl LatencyParams {
    /// Builds a parameter set from millisecond/kilometre values, validating
    /// every field.
    pub fn from_ms(
        t_access_ms: f64,
        backhaul_ms_per_km: f64,
        t_nf_ms: f64,
        t_server_ms: f64,
        t_core_internal_ms: f64,
        d_backhaul_km: f64,
    ) -> Result<LatencyParams> {
        validate_km("d_backhaul_km", d_backhaul_km, false)?;
        Ok(LatencyParams {
            t_access: Delay::from_ms("t_access", t_access_ms)?,
            backhaul_rate: PropagationRate::from_ms_per_km("backhaul_rate", backhaul_ms_per_km)?,
            t_nf: Delay::from_ms("t_nf", t_nf_ms)?,
            t_server: Delay::from_ms("t_server", t_server_ms)?,
            t_core_internal: Delay::from_ms("t_core_internal", t_core_internal_ms)?,
            d_backhaul_km,
        })
    }

    /// Returns a copy with a different NF processing delay.
    pub fn with_t_nf_ms(&self, t_nf_ms: f64) -> Result<LatencyParams> {
        let mut p = self.clone();
        p.t_nf = Delay::from_ms("t_nf", t_nf_ms)?;
        Ok(p)
    }

    /// Returns a copy with a different backhaul distance.
    pub fn with_distance_km(&self, d_backhaul_km: f64) -> Result<LatencyParams> {
        validate_km("d_backhaul_km", d_backhaul_km, false)?;
        let mut p = self.clone();
        p.d_backhaul_km = d_backhaul_km;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        validate_km("d_backhaul_km", self.d_backhaul_km, false)?;
        Ok(())
    }
}

impl Default for LatencyParams {
    /// Baseline values: 0.5 ms access, 0.05 ms/km fibre backhaul, 1 ms NF
    /// processing, 30 ms server processing, co-located core NFs, 0.5 km core
    /// distance.
    fn default() -> LatencyParams {
        LatencyParams::from_ms(0.5, 0.05, 1.0, 30.0, 0.0, 0.5).expect("defaults are valid")
    }
}

fn validate_km(field: &str, km: f64, require_positive: bool) -> Result<()> {
    if !km.is_finite() {
        return Err(Error::validation(field, "must be finite"));
    }
    if require_positive && km <= 0.0 {
        return Err(Error::validation(field, format!("must be > 0, got {km}")));
    }
    if !require_positive && km < 0.0 {
        return Err(Error::validation(field, format!("must be >= 0, got {km}")));
    }
    Ok(())
}

/// Deployment choice: who operates the core and where it sits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentSpec {
    pub operator_kind: OperatorKind,
    /// Distance from the gNB to the core site, km. Must be positive.
    pub core_distance_km: f64,
    /// Distance from the core site back to the application server, km.
    /// Defaults to `core_distance_km`: the server stays on the served
    /// premises, so user-plane traffic that detours through the core crosses
    /// the same distance twice each way.
    pub server_distance_km: f64,
    /// Number of sites the operator serves with the same core resources.
    pub n_factories: u32,
    /// Operator resources relative to the single-site baseline.
    pub resource_ratio: f64,
}

impl DeploymentSpec {
    /// Local micro-operator core 0.5 km away, dedicated resources.
    pub fn uo() -> DeploymentSpec {
        DeploymentSpec {
            operator_kind: OperatorKind::Uo,
            core_distance_km: 0.5,
            server_distance_km: 0.5,
            n_factories: 1,
            resource_ratio: 1.0,
        }
    }

    /// Local micro-operator core at a chosen distance.
    pub fn uo_at(core_distance_km: f64) -> Result<DeploymentSpec> {
        let spec = DeploymentSpec {
            core_distance_km,
            server_distance_km: core_distance_km,
            ..DeploymentSpec::uo()
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Remote MNO core serving ten sites; resource ratio 100 gives the
    /// baseline 0.1 ms effective NF delay used in the distance experiments.
    pub fn mno(core_distance_km: f64) -> Result<DeploymentSpec> {
        let spec = DeploymentSpec {
            operator_kind: OperatorKind::Mno,
            core_distance_km,
            server_distance_km: core_distance_km,
            n_factories: 10,
            resource_ratio: 100.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        validate_km("core_distance_km", self.core_distance_km, true)?;
        validate_km("server_distance_km", self.server_distance_km, true)?;
        if self.n_factories < 1 {
            return Err(Error::validation("n_factories", "must be >= 1"));
        }
        if !self.resource_ratio.is_finite() || self.resource_ratio <= 0.0 {
            return Err(Error::validation(
                "resource_ratio",
                format!("must be > 0, got {}", self.resource_ratio),
            ));
        }
        if self.operator_kind == OperatorKind::Uo
            && (self.n_factories != 1 || self.resource_ratio != 1.0)
        {
            return Err(Error::validation(
                "operator_kind",
                "a uo deployment serves one site with ratio 1",
            ));
        }
        Ok(())
    }

    /// Effective NF processing delay for this deployment given the
    /// single-site baseline delay, in milliseconds.
    pub fn effective_t_nf_ms(&self, baseline_t_nf_ms: f64) -> Result<f64> {
        match self.operator_kind {
            OperatorKind::Uo => Ok(baseline_t_nf_ms),
            OperatorKind::Mno => {
                mno_nf_delay(baseline_t_nf_ms, self.n_factories, self.resource_ratio)
            }
        }
    }
}

/// Effective NF processing delay of an operator that serves `n_factories`
/// sites with `resource_ratio` times the single-site resources: load scales
/// the delay up, resources scale it down, with unit proportionality constant.
pub fn mno_nf_delay(uo_t_nf_ms: f64, n_factories: u32, resource_ratio: f64) -> Result<f64> {
    if !uo_t_nf_ms.is_finite() || uo_t_nf_ms <= 0.0 {
        return Err(Error::Domain(format!(
            "uo_t_nf_ms must be > 0, got {uo_t_nf_ms}"
        )));
    }
    if n_factories < 1 {
        return Err(Error::Domain("n_factories must be >= 1".to_string()));
    }
    if !resource_ratio.is_finite() || resource_ratio <= 0.0 {
        return Err(Error::Domain(format!(
            "resource_ratio must be > 0, got {resource_ratio}"
        )));
    }
    // n/ratio first: equal load and resources cancel exactly.
    Ok(uo_t_nf_ms * (n_factories as f64 / resource_ratio))
}

/// Identifier of a node within a topology. Assignment is deterministic:
/// instantiable kinds are numbered in [`NfKind::INSTANTIABLE`] order.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct NodeId(pub u8);

/// A placed network element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub kind: NfKind,
}

/// An undirected link between two nodes. Backhaul links carry a positive
/// length; other classes have none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub a: NodeId,
    pub b: NodeId,
    pub class: LinkClass,
    pub length_km: Option<f64>,
}

impl Link {
    /// Latency of one traversal under the given parameters.
    pub fn delay(&self, params: &LatencyParams) -> Delay {
        match self.class {
            LinkClass::Access => params.t_access,
            LinkClass::Backhaul => params
                .backhaul_rate
                .traversal(self.length_km.unwrap_or(0.0)),
            LinkClass::CoreInternal => params.t_core_internal,
        }
    }
}

/// The network graph a procedure executes over.
///
/// Construction always yields the same shape: device—gNB access link, two
/// backhaul entries into the core site (control traffic lands at the AMF,
/// user traffic at the UPF, both at `core_distance_km`), a full core-internal
/// mesh among the core NFs, and a backhaul link from the UPF back out to the
/// server at `server_distance_km`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub nodes: Vec<Node>,
    pub links: Vec<Link>,
    pub placement: BTreeMap<NfKind, Site>,
}

impl Topology {
    pub fn node_id(&self, kind: NfKind) -> Option<NodeId> {
        self.nodes.iter().find(|n| n.kind == kind).map(|n| n.id)
    }

    /// Shortest route between two elements as a sequence of link indices.
    ///
    /// Breadth-first by hop count; ties resolve toward lower node ids, so
    /// routing is deterministic. User-plane paths therefore enter the core at
    /// the UPF and control-plane paths at the AMF without extra hops.
    pub fn route(&self, src: NfKind, dst: NfKind) -> Result<Vec<usize>> {
        let unroutable = |reason: &str| Error::Unroutable {
            message: format!("{src}->{dst}"),
            reason: reason.to_string(),
        };
        let src_id = self.node_id(src).ok_or_else(|| unroutable("source not in topology"))?;
        let dst_id = self
            .node_id(dst)
            .ok_or_else(|| unroutable("destination not in topology"))?;
        if src_id == dst_id {
            return Err(unroutable("source equals destination"));
        }

        // Adjacency sorted by neighbour id for deterministic BFS order.
        let n = self.nodes.iter().map(|n| n.id.0 as usize).max().unwrap_or(0) + 1;
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (idx, link) in self.links.iter().enumerate() {
            adj[link.a.0 as usize].push((link.b.0 as usize, idx));
            adj[link.b.0 as usize].push((link.a.0 as usize, idx));
        }
        for list in &mut adj {
            list.sort_unstable();
        }

        let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut visited = vec![false; n];
        let mut queue = std::collections::VecDeque::new();
        visited[src_id.0 as usize] = true;
        queue.push_back(src_id.0 as usize);
        while let Some(u) = queue.pop_front() {
            if u == dst_id.0 as usize {
                break;
            }
            for &(v, link_idx) in &adj[u] {
                if !visited[v] {
                    visited[v] = true;
                    parent[v] = Some((u, link_idx));
                    queue.push_back(v);
                }
            }
        }
        if !visited[dst_id.0 as usize] {
            return Err(unroutable("no path in topology"));
        }
        let mut path = Vec::new();
        let mut cur = dst_id.0 as usize;
        while let Some((prev, link_idx)) = parent[cur] {
            path.push(link_idx);
            cur = prev;
        }
        path.reverse();
        Ok(path)
    }

    /// Structural checks: unique instantiable kinds, exactly one access link,
    /// positive backhaul lengths, and connectivity from the device to every
    /// core NF and to the server.
    pub fn validate(&self) -> Result<()> {
        let mut seen = Vec::new();
        for node in &self.nodes {
            if node.kind.is_reserved() {
                return Err(Error::validation(
                    "nodes",
                    format!("kind `{}` is reserved and not instantiable", node.kind),
                ));
            }
            if seen.contains(&node.kind) {
                return Err(Error::validation(
                    "nodes",
                    format!("kind `{}` appears more than once", node.kind),
                ));
            }
            seen.push(node.kind);
        }
        let access_links = self
            .links
            .iter()
            .filter(|l| l.class == LinkClass::Access)
            .count();
        if access_links != 1 {
            return Err(Error::validation(
                "links",
                format!("expected exactly one access link, found {access_links}"),
            ));
        }
        for link in &self.links {
            if link.class == LinkClass::Backhaul {
                match link.length_km {
                    Some(km) if km > 0.0 && km.is_finite() => {}
                    other => {
                        return Err(Error::validation(
                            "links",
                            format!("backhaul link must have positive length, got {other:?}"),
                        ))
                    }
                }
            }
        }
        for kind in NfKind::CORE_NFS.iter().chain([NfKind::Server].iter()) {
            self.route(NfKind::Device, *kind)?;
        }
        Ok(())
    }
}

/// Builds the deployment topology for a validated spec.
///
/// Pure: identical inputs yield identical (bit-equal serialized) topologies.
pub fn build_topology(spec: &DeploymentSpec, params: &LatencyParams) -> Result<Topology> {
    spec.validate()?;
    params.validate()?;

    let nodes: Vec<Node> = NfKind::INSTANTIABLE
        .iter()
        .enumerate()
        .map(|(i, &kind)| Node {
            id: NodeId(i as u8),
            kind,
        })
        .collect();
    let id = |kind: NfKind| NodeId(
        NfKind::INSTANTIABLE
            .iter()
            .position(|&k| k == kind)
            .expect("instantiable") as u8,
    );

    let mut links = vec![
        Link {
            a: id(NfKind::Device),
            b: id(NfKind::GnB),
            class: LinkClass::Access,
            length_km: None,
        },
        Link {
            a: id(NfKind::GnB),
            b: id(NfKind::Amf),
            class: LinkClass::Backhaul,
            length_km: Some(spec.core_distance_km),
        },
        Link {
            a: id(NfKind::GnB),
            b: id(NfKind::Upf),
            class: LinkClass::Backhaul,
            length_km: Some(spec.core_distance_km),
        },
    ];
    for (i, &a) in NfKind::CORE_NFS.iter().enumerate() {
        for &b in &NfKind::CORE_NFS[i + 1..] {
            links.push(Link {
                a: id(a),
                b: id(b),
                class: LinkClass::CoreInternal,
                length_km: None,
            });
        }
    }
    links.push(Link {
        a: id(NfKind::Upf),
        b: id(NfKind::Server),
        class: LinkClass::Backhaul,
        length_km: Some(spec.server_distance_km),
    });

    let mut placement = BTreeMap::new();
    placement.insert(NfKind::Device, Site::Factory);
    placement.insert(NfKind::GnB, Site::Factory);
    placement.insert(NfKind::Server, Site::Factory);
    for &nf in &NfKind::CORE_NFS {
        placement.insert(nf, Site::CoreSite);
    }

    let topology = Topology {
        nodes,
        links,
        placement,
    };
    topology.validate()?;
    Ok(topology)
}
