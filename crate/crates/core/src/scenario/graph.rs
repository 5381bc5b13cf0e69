use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

pub type ServerId = usize;
pub type FunctionId = usize;

/// A computation server, either co-located with a base station or in the core.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Server {
    pub capacity_hz: f64,
    pub is_edge: bool,
    /// Functions this server can execute; `None` means every function.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub library: Option<Vec<FunctionId>>,
}

impl Server {
    pub fn supports(&self, f: FunctionId) -> bool {
        self.library.as_ref().is_none_or(|lib| lib.contains(&f))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub from: ServerId,
    pub to: ServerId,
    pub setup_delay_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RawGraph {
    servers: Vec<Server>,
    links: Vec<Link>,
}

/// Directed backhaul graph over computation servers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct BackhaulGraph {
    servers: Vec<Server>,
    links: Vec<Link>,
    /// Row-major `n x n` setup delays; `None` where no link exists.
    delay: Vec<Option<f64>>,
    in_neighbors: Vec<Vec<ServerId>>,
}

impl TryFrom<RawGraph> for BackhaulGraph {
    type Error = ModelError;

    fn try_from(raw: RawGraph) -> Result<Self> {
        BackhaulGraph::new(raw.servers, raw.links)
    }
}

impl From<BackhaulGraph> for RawGraph {
    fn from(g: BackhaulGraph) -> Self {
        RawGraph { servers: g.servers, links: g.links }
    }
}

impl BackhaulGraph {
    pub fn new(servers: Vec<Server>, links: Vec<Link>) -> Result<Self> {
        let n = servers.len();
        for (i, s) in servers.iter().enumerate() {
            if !(s.capacity_hz > 0.0) || !s.capacity_hz.is_finite() {
                return Err(ModelError::Topology(format!(
                    "server {i} has non-positive capacity {}",
                    s.capacity_hz
                )));
            }
        }
        let mut delay = vec![None; n * n];
        let mut in_neighbors = vec![Vec::new(); n];
        for l in &links {
            if l.from >= n || l.to >= n {
                return Err(ModelError::Topology(format!(
                    "link {} -> {} references a missing server",
                    l.from, l.to
                )));
            }
            if l.from == l.to {
                return Err(ModelError::Topology(format!("self-loop at server {}", l.from)));
            }
            if !(l.setup_delay_s > 0.0) || !l.setup_delay_s.is_finite() {
                return Err(ModelError::Topology(format!(
                    "link {} -> {} has non-positive setup delay",
                    l.from, l.to
                )));
            }
            let slot = &mut delay[l.from * n + l.to];
            if slot.is_some() {
                return Err(ModelError::Topology(format!(
                    "duplicate link {} -> {}",
                    l.from, l.to
                )));
            }
            *slot = Some(l.setup_delay_s);
            in_neighbors[l.to].push(l.from);
        }
        for v in &mut in_neighbors {
            v.sort_unstable();
        }
        Ok(Self { servers, links, delay, in_neighbors })
    }

    pub fn len(&self) -> usize {
        self.servers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.servers.is_empty()
    }

    pub fn servers(&self) -> &[Server] {
        &self.servers
    }

    pub fn server(&self, v: ServerId) -> &Server {
        &self.servers[v]
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    /// Connectivity indicator: true iff the directed link `x -> y` exists.
    pub fn connected(&self, x: ServerId, y: ServerId) -> bool {
        self.setup_delay(x, y).is_some()
    }

    pub fn setup_delay(&self, x: ServerId, y: ServerId) -> Option<f64> {
        self.delay.get(x * self.len() + y).copied().flatten()
    }

    /// Delay of moving data from `x` to `y`: zero when co-located.
    pub fn hop_delay(&self, x: ServerId, y: ServerId) -> Option<f64> {
        if x == y {
            Some(0.0)
        } else {
            self.setup_delay(x, y)
        }
    }

    pub fn in_neighbors(&self, v: ServerId) -> &[ServerId] {
        &self.in_neighbors[v]
    }

    pub fn edge_servers(&self) -> impl Iterator<Item = ServerId> + '_ {
        self.servers.iter().enumerate().filter(|(_, s)| s.is_edge).map(|(i, _)| i)
    }

    /// Largest setup delay over all links, zero for a graph without links.
    pub fn max_setup_delay(&self) -> f64 {
        self.links.iter().fold(0.0, |m, l| m.max(l.setup_delay_s))
    }

    pub fn supports(&self, v: ServerId, f: FunctionId) -> bool {
        self.servers[v].supports(f)
    }

    /// Removes `functions` from the library of server `v`.
    pub fn blacklist(&mut self, v: ServerId, functions: &[FunctionId], all: &[FunctionId]) {
        let server = &mut self.servers[v];
        let lib = server.library.get_or_insert_with(|| all.to_vec());
        lib.retain(|f| !functions.contains(f));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    FullMesh,
    Ring,
    MeshCenterCloud,
    MeshCenterBs,
}

impl TopologyKind {
    pub const ALL: [TopologyKind; 4] = [
        TopologyKind::FullMesh,
        TopologyKind::Ring,
        TopologyKind::MeshCenterCloud,
        TopologyKind::MeshCenterBs,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TopologyKind::FullMesh => "full_mesh",
            TopologyKind::Ring => "ring",
            TopologyKind::MeshCenterCloud => "mesh_center_cloud",
            TopologyKind::MeshCenterBs => "mesh_center_bs",
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TopologyKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        TopologyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == norm)
            .ok_or_else(|| ModelError::Parse(format!("unknown topology '{s}'")))
    }
}

/// Builds a backhaul graph. Edge servers get ids `0..edge_caps.len()`, core
/// servers follow. Every physical link becomes two directed links.
///
/// * `FullMesh`: complete graph over all servers.
/// * `Ring`: cycle over the edge servers; core servers stay unlinked.
/// * `MeshCenterCloud`: star with every core server linked to every edge server.
/// * `MeshCenterBs`: star centred on edge server 0.
pub fn build_topology(
    kind: TopologyKind,
    edge_caps_hz: &[f64],
    core_caps_hz: &[f64],
    setup_delay_s: f64,
) -> Result<BackhaulGraph> {
    let ne = edge_caps_hz.len();
    let nc = core_caps_hz.len();
    if ne == 0 {
        return Err(ModelError::Topology("at least one edge server is required".into()));
    }
    if !(setup_delay_s > 0.0) {
        return Err(ModelError::Topology(format!(
            "setup delay must be positive, got {setup_delay_s}"
        )));
    }
    let servers: Vec<Server> = edge_caps_hz
        .iter()
        .map(|&c| Server { capacity_hz: c, is_edge: true, library: None })
        .chain(core_caps_hz.iter().map(|&c| Server { capacity_hz: c, is_edge: false, library: None }))
        .collect();
    let n = ne + nc;
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    match kind {
        TopologyKind::FullMesh => {
            for a in 0..n {
                for b in a + 1..n {
                    pairs.push((a, b));
                }
            }
        }
        TopologyKind::Ring => {
            if ne < 3 {
                return Err(ModelError::Topology(format!(
                    "a ring needs at least 3 edge servers, got {ne}"
                )));
            }
            for a in 0..ne {
                pairs.push((a, (a + 1) % ne));
            }
        }
        TopologyKind::MeshCenterCloud => {
            if nc == 0 {
                return Err(ModelError::Topology(
                    "mesh-center-cloud needs at least one core server".into(),
                ));
            }
            for c in ne..n {
                for e in 0..ne {
                    pairs.push((e, c));
                }
            }
        }
        TopologyKind::MeshCenterBs => {
            for v in 1..n {
                pairs.push((0, v));
            }
        }
    }
    let links = pairs
        .into_iter()
        .flat_map(|(a, b)| {
            [
                Link { from: a, to: b, setup_delay_s },
                Link { from: b, to: a, setup_delay_s },
            ]
        })
        .collect();
    BackhaulGraph::new(servers, links)
}
