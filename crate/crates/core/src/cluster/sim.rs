use std::sync::Arc;

use num_rational::BigRational;
use rayon::prelude::*;

use super::packing::{IngestHeader, Packer, U16Le, HEADER_BYTES};
use super::policy::{ExplicitHelpers, HelperPolicy};
use super::trace::{EventKind, TraceRecord, Transfer};
use super::ClusterError;
use crate::code::{BlockStore, CodeInstance, Decoder, StoredBlock};
use crate::field::FieldElement;
use crate::repair::scheme::{self, RepairScheme};
use crate::repair::HelperDownload;

#[derive(Clone)]
pub struct ClusterOptions {
    pub packer: Arc<dyn Packer>,
    /// Repair scheme; `None` picks the first registered scheme that
    /// supports the code.
    pub scheme: Option<Arc<dyn RepairScheme>>,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        Self {
            packer: Arc::new(U16Le),
            scheme: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeStatus {
    Live,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeState {
    pub id: usize,
    pub status: NodeStatus,
    /// All stripes back to back; absent while failed.
    pub block: Option<StoredBlock>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairOutcome {
    pub failed: usize,
    pub helpers: Vec<usize>,
    /// Per-stripe download from each helper.
    pub downloads: Vec<HelperDownload>,
    pub stripes: usize,
    pub gamma: BigRational,
    pub scheme: &'static str,
}

impl RepairOutcome {
    pub fn subsymbols_per_stripe(&self) -> usize {
        self.downloads.iter().map(|d| d.subsymbols).sum()
    }
}

struct StripeView<'a> {
    nodes: &'a [NodeState],
    stripe: usize,
    alpha: usize,
}

impl BlockStore for StripeView<'_> {
    fn block(&self, node: usize) -> Option<&[FieldElement]> {
        let state = self.nodes.get(node.checked_sub(1)?)?;
        let data = &state.block.as_ref()?.data;
        data.get(self.stripe * self.alpha..(self.stripe + 1) * self.alpha)
    }
}

/// A single-file cluster of `n` nodes under the single-failure model.
pub struct Cluster {
    code: Arc<CodeInstance>,
    packer: Arc<dyn Packer>,
    scheme: Arc<dyn RepairScheme>,
    nodes: Vec<NodeState>,
    stripes: usize,
    epoch: u64,
    trace: Vec<TraceRecord>,
}

impl Cluster {
    pub fn ingest(code: impl Into<Arc<CodeInstance>>, bytes: &[u8]) -> Result<Self, ClusterError> {
        Self::ingest_with(code, bytes, ClusterOptions::default())
    }

    /// Packs `header || bytes` into subsymbols, zero-pads to whole stripes
    /// of `k * alpha_sub`, and encodes stripe by stripe onto `n` nodes.
    pub fn ingest_with(
        code: impl Into<Arc<CodeInstance>>,
        bytes: &[u8],
        options: ClusterOptions,
    ) -> Result<Self, ClusterError> {
        let code = code.into();
        let field = code.field();
        let packer = options.packer;
        packer.check_field(field)?;
        let scheme = options.scheme.unwrap_or_else(|| scheme::select(&code));

        let header = IngestHeader {
            length: bytes.len() as u64,
            packer_id: packer.id(),
        };
        let mut payload = Vec::with_capacity(HEADER_BYTES + bytes.len());
        payload.extend_from_slice(&header.to_bytes());
        payload.extend_from_slice(bytes);
        let mut subs = packer.pack(field, &payload);

        let alpha = code.alpha_sub();
        let stripe_len = code.k() * alpha;
        let stripes = subs.len().div_ceil(stripe_len);
        subs.resize(stripes * stripe_len, 0);

        let encoded: Vec<Vec<Vec<FieldElement>>> = subs
            .par_chunks(stripe_len)
            .map(|stripe| {
                let units: Vec<&[FieldElement]> = stripe.chunks(alpha).collect();
                code.encode_stripe(&units)
            })
            .collect::<Result<_, _>>()?;
        let nodes = (1..=code.n())
            .map(|id| {
                let data = encoded.iter().flat_map(|s| s[id - 1].iter().copied()).collect();
                Ok(NodeState {
                    id,
                    status: NodeStatus::Live,
                    block: Some(StoredBlock {
                        node_id: id,
                        role: code.node_role(id)?,
                        data,
                    }),
                })
            })
            .collect::<Result<_, ClusterError>>()?;

        let mut cluster = Self {
            code,
            packer,
            scheme,
            nodes,
            stripes,
            epoch: 0,
            trace: Vec::new(),
        };
        let all: Vec<usize> = (1..=cluster.code.n()).collect();
        let transfers = all
            .iter()
            .map(|&to| Transfer {
                from: 0,
                to,
                subsymbols: alpha,
            })
            .collect();
        cluster.record(EventKind::Ingest, all, transfers, None, None);
        Ok(cluster)
    }

    fn record(
        &mut self,
        event: EventKind,
        nodes: Vec<usize>,
        transfers: Vec<Transfer>,
        gamma: Option<String>,
        scheme: Option<String>,
    ) {
        self.trace.push(TraceRecord {
            epoch: self.epoch,
            event,
            nodes,
            transfers,
            stripes: self.stripes,
            gamma,
            scheme,
        });
        self.epoch += 1;
    }

    pub fn code(&self) -> &CodeInstance {
        &self.code
    }

    pub fn packer(&self) -> &dyn Packer {
        self.packer.as_ref()
    }

    pub fn scheme(&self) -> &dyn RepairScheme {
        self.scheme.as_ref()
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> Option<&NodeState> {
        id.checked_sub(1).and_then(|i| self.nodes.get(i))
    }

    pub fn stripes(&self) -> usize {
        self.stripes
    }

    /// Epoch the next event will get.
    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    pub fn trace_lines(&self) -> String {
        self.trace.iter().map(|r| r.to_line() + "\n").collect()
    }

    pub fn failed_node(&self) -> Option<usize> {
        self.nodes.iter().find(|s| s.status == NodeStatus::Failed).map(|s| s.id)
    }

    pub fn live_nodes(&self) -> Vec<usize> {
        self.nodes
            .iter()
            .filter(|s| s.status == NodeStatus::Live)
            .map(|s| s.id)
            .collect()
    }

    pub fn fail(&mut self, node: usize) -> Result<(), ClusterError> {
        let status = self.node(node).ok_or(ClusterError::UnknownNode(node))?.status;
        if status == NodeStatus::Failed {
            return Err(ClusterError::AlreadyFailed(node));
        }
        if let Some(failed) = self.failed_node() {
            return Err(ClusterError::DoubleFailure {
                failed,
                requested: node,
            });
        }
        let state = &mut self.nodes[node - 1];
        state.status = NodeStatus::Failed;
        state.block = None;
        self.record(EventKind::Fail, vec![node], Vec::new(), None, None);
        Ok(())
    }

    /// Rebuilds the failed node on a newcomer from helpers chosen by
    /// `policy`. The cluster is unchanged if any step fails.
    pub fn run_repair(&mut self, policy: &dyn HelperPolicy) -> Result<RepairOutcome, ClusterError> {
        let failed = self.failed_node().ok_or(ClusterError::NoFailure)?;
        let live = self.live_nodes();
        let helpers = policy.select(&self.code, failed, &live)?;
        let plan = self.scheme.prepare(&self.code, failed, &helpers)?;
        let alpha = self.code.alpha_sub();

        let results = (0..self.stripes)
            .into_par_iter()
            .map(|stripe| {
                let view = StripeView {
                    nodes: &self.nodes,
                    stripe,
                    alpha,
                };
                plan.execute(&view)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let first = results.first().expect("at least one stripe");
        let downloads = first.downloads.clone();
        let gamma = first.gamma_measured();
        let role = first.restored.role;
        let data: Vec<FieldElement> = results.iter().flat_map(|r| r.restored.data.iter().copied()).collect();

        let state = &mut self.nodes[failed - 1];
        state.status = NodeStatus::Live;
        state.block = Some(StoredBlock {
            node_id: failed,
            role,
            data,
        });
        let transfers = downloads
            .iter()
            .map(|d| Transfer {
                from: d.node,
                to: failed,
                subsymbols: d.subsymbols,
            })
            .collect();
        let scheme = self.scheme.name();
        self.record(
            EventKind::Repair,
            vec![failed],
            transfers,
            Some(gamma.to_string()),
            Some(scheme.to_string()),
        );
        Ok(RepairOutcome {
            failed,
            helpers,
            downloads,
            stripes: self.stripes,
            gamma,
            scheme,
        })
    }

    fn decoder(&self, nodes: &[usize]) -> Result<Decoder, ClusterError> {
        if nodes.len() != self.code.k() {
            return Err(ClusterError::BadSubset(format!(
                "need {} nodes, got {nodes:?}",
                self.code.k()
            )));
        }
        for (i, &n) in nodes.iter().enumerate() {
            let state = self.node(n).ok_or(ClusterError::UnknownNode(n))?;
            if nodes[..i].contains(&n) {
                return Err(ClusterError::BadSubset(format!("node {n} repeated in {nodes:?}")));
            }
            if state.status != NodeStatus::Live {
                return Err(ClusterError::NodeFailed(n));
            }
        }
        Ok(Decoder::new(&self.code, nodes)?)
    }

    /// Reconstructs the file from `k` live nodes without recording an event.
    pub fn read_bytes(&self, nodes: &[usize]) -> Result<Vec<u8>, ClusterError> {
        let decoder = self.decoder(nodes)?;
        let alpha = self.code.alpha_sub();
        let stripes: Vec<Vec<Vec<FieldElement>>> = (0..self.stripes)
            .into_par_iter()
            .map(|stripe| {
                decoder.decode_from(&StripeView {
                    nodes: &self.nodes,
                    stripe,
                    alpha,
                })
            })
            .collect::<Result<_, _>>()?;
        let subs: Vec<FieldElement> = stripes.into_iter().flatten().flatten().collect();
        let payload = self.packer.unpack(self.code.field(), &subs)?;
        let header = IngestHeader::from_bytes(&payload)?;
        if header.packer_id != self.packer.id() {
            return Err(ClusterError::Corrupt(format!(
                "payload packed with id {}, cluster uses {}",
                header.packer_id,
                self.packer.id()
            )));
        }
        let body = &payload[HEADER_BYTES..];
        let len = usize::try_from(header.length)
            .ok()
            .filter(|&l| l <= body.len())
            .ok_or_else(|| ClusterError::Corrupt(format!("length {} exceeds payload", header.length)))?;
        Ok(body[..len].to_vec())
    }

    /// Data-collector read: like [`Cluster::read_bytes`], plus a trace record.
    pub fn dc_read(&mut self, nodes: &[usize]) -> Result<Vec<u8>, ClusterError> {
        let bytes = self.read_bytes(nodes)?;
        let alpha = self.code.alpha_sub();
        let transfers = nodes
            .iter()
            .map(|&from| Transfer {
                from,
                to: 0,
                subsymbols: alpha,
            })
            .collect();
        self.record(EventKind::DcRead, nodes.to_vec(), transfers, None, None);
        Ok(bytes)
    }
}

/// Re-executes `records` from the original file and checks that every
/// regenerated record matches.
pub fn replay(
    code: impl Into<Arc<CodeInstance>>,
    bytes: &[u8],
    options: ClusterOptions,
    records: &[TraceRecord],
) -> Result<Cluster, ClusterError> {
    let (first, rest) = records
        .split_first()
        .ok_or_else(|| ClusterError::Trace("empty trace".into()))?;
    if first.event != EventKind::Ingest {
        return Err(ClusterError::Trace(format!(
            "trace starts with {}",
            first.event.as_str()
        )));
    }
    let mut cluster = Cluster::ingest_with(code, bytes, options)?;
    check(&cluster, first)?;
    for rec in rest {
        let diverged = |detail: String| ClusterError::ReplayDivergence {
            epoch: rec.epoch,
            detail,
        };
        match rec.event {
            EventKind::Ingest => return Err(ClusterError::Trace("second ingest event".into())),
            EventKind::Fail => {
                let node = *rec
                    .nodes
                    .first()
                    .ok_or_else(|| ClusterError::Trace("fail without node".into()))?;
                cluster.fail(node).map_err(|e| diverged(e.to_string()))?;
            }
            EventKind::Repair => {
                if rec.scheme.as_deref() != Some(cluster.scheme.name()) {
                    return Err(diverged(format!(
                        "recorded scheme {:?}, cluster uses {}",
                        rec.scheme,
                        cluster.scheme.name()
                    )));
                }
                let helpers = rec.transfers.iter().map(|t| t.from).collect();
                cluster
                    .run_repair(&ExplicitHelpers(helpers))
                    .map_err(|e| diverged(e.to_string()))?;
            }
            EventKind::DcRead => {
                cluster.dc_read(&rec.nodes).map_err(|e| diverged(e.to_string()))?;
            }
        }
        check(&cluster, rec)?;
    }
    Ok(cluster)
}

fn check(cluster: &Cluster, expected: &TraceRecord) -> Result<(), ClusterError> {
    let got = cluster.trace.last().expect("an event was recorded");
    if got != expected {
        return Err(ClusterError::ReplayDivergence {
            epoch: expected.epoch,
            detail: format!("expected {}, regenerated {}", expected.to_line(), got.to_line()),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::packing::Radix;
    use crate::cluster::policy::LowestId;
    use crate::code::{construct_code, CodeParams};
    use crate::scalar::build_42;

    fn code634(m: usize) -> CodeInstance {
        construct_code(CodeParams::new(6, 3, 4, m, 65537, 0)).unwrap()
    }

    #[test]
    fn empty_file() {
        let c = Cluster::ingest(code634(1), &[]).unwrap();
        // 10 header bytes = 5 subsymbols, one stripe of 6
        assert_eq!(c.stripes(), 1);
        assert_eq!(c.read_bytes(&[1, 2, 3]).unwrap(), Vec::<u8>::new());
        assert_eq!(c.read_bytes(&[4, 5, 6]).unwrap(), Vec::<u8>::new());
    }

    #[test]
    fn small_field_rejected_by_default_packer() {
        let (_, code) = build_42();
        assert!(matches!(
            Cluster::ingest(code, b"x"),
            Err(ClusterError::FieldTooSmall { q: 5, .. })
        ));
    }

    #[test]
    fn fail_errors() {
        let mut c = Cluster::ingest(code634(1), b"hello").unwrap();
        assert_eq!(c.run_repair(&LowestId).unwrap_err(), ClusterError::NoFailure);
        c.fail(1).unwrap();
        assert_eq!(c.node(1).unwrap().status, NodeStatus::Failed);
        assert!(c.node(1).unwrap().block.is_none());
        assert_eq!(c.fail(1), Err(ClusterError::AlreadyFailed(1)));
        assert_eq!(
            c.fail(2),
            Err(ClusterError::DoubleFailure {
                failed: 1,
                requested: 2
            })
        );
        assert_eq!(c.fail(9), Err(ClusterError::UnknownNode(9)));
        assert_eq!(c.read_bytes(&[1, 2, 3]), Err(ClusterError::NodeFailed(1)));
    }

    #[test]
    fn repair_restores_state() {
        let bytes: Vec<u8> = (0..500u32).map(|i| (i * 31 % 251) as u8).collect();
        let mut c = Cluster::ingest(code634(1), &bytes).unwrap();
        let before = c.nodes().to_vec();
        for f in 1..=6 {
            c.fail(f).unwrap();
            let out = c.run_repair(&LowestId).unwrap();
            assert_eq!(out.subsymbols_per_stripe(), 34);
            assert_eq!(c.nodes(), &before[..]);
        }
        assert_eq!(c.dc_read(&[2, 4, 6]).unwrap(), bytes);
        let epochs: Vec<u64> = c.trace().iter().map(|r| r.epoch).collect();
        assert_eq!(epochs, (0..14).collect::<Vec<_>>());
    }

    #[test]
    fn bad_subsets() {
        let c = Cluster::ingest(code634(1), b"abc").unwrap();
        assert!(matches!(c.read_bytes(&[1, 2]), Err(ClusterError::BadSubset(_))));
        assert!(matches!(c.read_bytes(&[1, 1, 2]), Err(ClusterError::BadSubset(_))));
    }

    #[test]
    fn scalar_code_with_radix_packing() {
        let (_, code) = build_42();
        let opts = ClusterOptions {
            packer: Arc::new(Radix),
            scheme: None,
        };
        let mut c = Cluster::ingest_with(code, b"golden", opts).unwrap();
        assert_eq!(c.scheme().name(), "scalar42");
        c.fail(3).unwrap();
        let out = c.run_repair(&LowestId).unwrap();
        assert_eq!(out.gamma, BigRational::from_integer(3.into()));
        assert_eq!(c.dc_read(&[3, 4]).unwrap(), b"golden");
    }

    #[test]
    fn replay_matches_and_detects_divergence() {
        let bytes = b"replay me, please".to_vec();
        let mut c = Cluster::ingest(code634(1), &bytes).unwrap();
        c.fail(5).unwrap();
        c.run_repair(&LowestId).unwrap();
        c.dc_read(&[4, 5, 6]).unwrap();
        let replayed = replay(code634(1), &bytes, ClusterOptions::default(), c.trace()).unwrap();
        assert_eq!(replayed.nodes(), c.nodes());
        assert_eq!(replayed.trace_lines(), c.trace_lines());

        let mut tampered = c.trace().to_vec();
        tampered[2].transfers[0].subsymbols += 1;
        assert!(matches!(
            replay(code634(1), &bytes, ClusterOptions::default(), &tampered),
            Err(ClusterError::ReplayDivergence { epoch: 2, .. })
        ));
        assert!(matches!(
            replay(code634(1), &[7u8; 200], ClusterOptions::default(), c.trace()),
            Err(ClusterError::ReplayDivergence { epoch: 0, .. })
        ));
    }
}
