use std::collections::BTreeMap;

use num_rational::BigRational;

use super::sim::Cluster;
use super::trace::EventKind;
use crate::code::cutset_point;
use crate::repair::gamma_formula;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventTotals {
    pub count: usize,
    /// Over all stripes.
    pub subsymbols: u128,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairMetric {
    pub epoch: u64,
    pub failed: usize,
    pub helpers: Vec<usize>,
    pub scheme: String,
    pub subsymbols_per_stripe: usize,
    pub gamma: BigRational,
    /// Closed-form bandwidth, for alignment repairs.
    pub formula: Option<BigRational>,
    pub cutset_gamma: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricsReport {
    pub totals: BTreeMap<&'static str, EventTotals>,
    pub repairs: Vec<RepairMetric>,
}

impl MetricsReport {
    pub fn total(&self, event: EventKind) -> &EventTotals {
        &self.totals[event.as_str()]
    }
}

pub fn metrics_report(cluster: &Cluster) -> MetricsReport {
    let p = *cluster.code().params();
    let file_units = (p.k * (p.d - p.k + 1)) as u64;
    let cutset = cutset_point(p.n, p.k, p.d, file_units)
        .expect("verified code has admissible parameters")
        .gamma;
    let formula = gamma_formula(p.k, p.d, p.m).ok();

    let mut totals: BTreeMap<&'static str, EventTotals> =
        [EventKind::Ingest, EventKind::Fail, EventKind::Repair, EventKind::DcRead]
            .into_iter()
            .map(|e| (e.as_str(), EventTotals::default()))
            .collect();
    let mut repairs = Vec::new();
    for rec in cluster.trace() {
        let t = totals.get_mut(rec.event.as_str()).expect("all kinds present");
        t.count += 1;
        t.subsymbols += rec.subsymbols_per_stripe() as u128 * rec.stripes as u128;
        if rec.event == EventKind::Repair {
            let scheme = rec.scheme.clone().unwrap_or_default();
            repairs.push(RepairMetric {
                epoch: rec.epoch,
                failed: rec.nodes[0],
                helpers: rec.transfers.iter().map(|t| t.from).collect(),
                subsymbols_per_stripe: rec.subsymbols_per_stripe(),
                gamma: rec
                    .gamma
                    .as_deref()
                    .and_then(|g| g.parse().ok())
                    .expect("repair records carry gamma"),
                formula: if scheme == "alignment" { formula.clone() } else { None },
                cutset_gamma: cutset.clone(),
                scheme,
            });
        }
    }
    MetricsReport { totals, repairs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::packing::Radix;
    use crate::cluster::{ClusterOptions, LowestId};
    use crate::code::{construct_code, CodeParams};
    use crate::scalar::build_42;
    use std::sync::Arc;

    #[test]
    fn fresh_cluster_has_no_repair_traffic() {
        let code = construct_code(CodeParams::new(6, 3, 4, 1, 65537, 0)).unwrap();
        let c = Cluster::ingest(code, b"abc").unwrap();
        let r = metrics_report(&c);
        assert_eq!(r.total(EventKind::Repair), &EventTotals::default());
        assert_eq!(r.total(EventKind::Ingest).count, 1);
        assert!(r.repairs.is_empty());
    }

    #[test]
    fn alignment_repair_at_m2() {
        let code = construct_code(CodeParams::new(6, 3, 4, 2, 65537, 0)).unwrap();
        let mut c = Cluster::ingest(code, b"metrics").unwrap();
        c.fail(2).unwrap();
        c.run_repair(&LowestId).unwrap();
        let r = metrics_report(&c);
        let rep = &r.repairs[0];
        assert_eq!(rep.gamma, BigRational::new(97.into(), 8.into()));
        assert_eq!(rep.formula.as_ref(), Some(&rep.gamma));
        assert_eq!(rep.cutset_gamma, BigRational::from_integer(4.into()));
        assert_eq!(rep.subsymbols_per_stripe, 2 * 81 + 2 * 16);
    }

    #[test]
    fn scalar_repair_hits_cutset() {
        let (_, code) = build_42();
        let opts = ClusterOptions {
            packer: Arc::new(Radix),
            scheme: None,
        };
        let mut c = Cluster::ingest_with(code, b"x", opts).unwrap();
        c.fail(1).unwrap();
        c.run_repair(&LowestId).unwrap();
        let rep = &metrics_report(&c).repairs[0];
        assert_eq!(rep.gamma, rep.cutset_gamma);
        assert_eq!(rep.gamma, BigRational::from_integer(3.into()));
        assert_eq!(rep.formula, None);
    }
}
