use std::sync::Arc;

use alignstore::cluster::{
    metrics_report, Cluster, ClusterError, ClusterOptions, ExplicitHelpers, HelperPolicy, HighestId, LowestId,
    ParityFirst, Radix,
};
use alignstore::code::{construct_code, describe_code, load_code, CodeParams};
use alignstore::subsets::KSubsets;
use num_rational::BigRational;
use proptest::prelude::*;

fn code(n: usize, k: usize, d: usize, m: usize, seed: u64) -> alignstore::CodeInstance {
    construct_code(CodeParams::new(n, k, d, m, 65537, seed)).unwrap()
}

fn all_reads_match(cluster: &Cluster, bytes: &[u8]) {
    let p = cluster.code().params();
    for subset in KSubsets::new(p.n, p.k) {
        let nodes: Vec<usize> = subset.iter().map(|i| i + 1).collect();
        assert_eq!(cluster.read_bytes(&nodes).unwrap(), bytes, "read from {nodes:?}");
    }
}

#[test]
fn every_helper_set_every_node() {
    let bytes: Vec<u8> = (0..777u32).map(|i| (i ^ (i >> 3)) as u8).collect();
    let mut cluster = Cluster::ingest(code(6, 3, 4, 1, 2), &bytes).unwrap();
    let pristine = cluster.nodes().to_vec();
    for f in 1..=6usize {
        let others: Vec<usize> = (1..=6).filter(|&x| x != f).collect();
        for pick in KSubsets::new(5, 4) {
            let helpers: Vec<usize> = pick.iter().map(|&i| others[i]).collect();
            cluster.fail(f).unwrap();
            let out = cluster.run_repair(&ExplicitHelpers(helpers.clone())).unwrap();
            assert_eq!(out.helpers, helpers);
            assert_eq!(cluster.nodes(), &pristine[..], "node {f} from {helpers:?}");
        }
    }
    all_reads_match(&cluster, &bytes);
}

#[test]
fn registered_policies_on_general_parameters() {
    let policies: [&dyn HelperPolicy; 3] = [&LowestId, &HighestId, &ParityFirst];
    for (n, k, d) in [(5, 3, 3), (6, 4, 5), (7, 3, 6)] {
        let bytes = format!("payload for ({n},{k},{d})").into_bytes();
        let mut cluster = Cluster::ingest(code(n, k, d, 1, 0), &bytes).unwrap();
        let pristine = cluster.nodes().to_vec();
        for f in 1..=n {
            for policy in policies {
                cluster.fail(f).unwrap();
                cluster.run_repair(policy).unwrap();
                assert_eq!(cluster.nodes(), &pristine[..]);
            }
        }
        all_reads_match(&cluster, &bytes);
    }
}

#[test]
fn one_mebibyte_file() {
    let bytes: Vec<u8> = (0..1u32 << 20)
        .map(|i| (i.wrapping_mul(2_654_435_761) >> 24) as u8)
        .collect();
    let mut cluster = Cluster::ingest(code(6, 3, 4, 1, 0), &bytes).unwrap();
    cluster.fail(5).unwrap();
    cluster.run_repair(&LowestId).unwrap();
    assert_eq!(cluster.dc_read(&[4, 5, 6]).unwrap(), bytes);
    assert_eq!(cluster.dc_read(&[1, 2, 3]).unwrap(), bytes);
}

#[test]
fn descriptor_reload_drives_same_cluster() {
    let original = code(6, 3, 4, 2, 4);
    let reloaded = load_code(&describe_code(&original)).unwrap();
    let a = Cluster::ingest(original, b"same").unwrap();
    let b = Cluster::ingest(reloaded, b"same").unwrap();
    assert_eq!(a.nodes(), b.nodes());
}

#[test]
fn metrics_after_mixed_events() {
    let mut cluster = Cluster::ingest(code(6, 3, 4, 2, 0), &[9; 100]).unwrap();
    cluster.fail(6).unwrap();
    cluster.run_repair(&ParityFirst).unwrap();
    cluster.dc_read(&[1, 5, 6]).unwrap();
    let report = metrics_report(&cluster);
    assert_eq!(report.repairs.len(), 1);
    assert_eq!(report.repairs[0].gamma, BigRational::new(97.into(), 8.into()));
    assert_eq!(report.totals["dc_read"].count, 1);
}

#[test]
fn small_field_needs_radix() {
    let c = construct_code(CodeParams::new(5, 3, 3, 1, 257, 0)).unwrap();
    assert!(matches!(
        Cluster::ingest(c.clone(), b"x"),
        Err(ClusterError::FieldTooSmall { q: 257, .. })
    ));
    let opts = ClusterOptions {
        packer: Arc::new(Radix),
        scheme: None,
    };
    let mut cluster = Cluster::ingest_with(c, b"tiny field", opts).unwrap();
    cluster.fail(4).unwrap();
    cluster.run_repair(&LowestId).unwrap();
    assert_eq!(cluster.read_bytes(&[3, 4, 5]).unwrap(), b"tiny field");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn random_files_survive_any_single_failure(
        bytes in proptest::collection::vec(any::<u8>(), 0..2048),
        failed in 1usize..=6,
        pick in 0usize..5,
    ) {
        let mut cluster = Cluster::ingest(code(6, 3, 4, 1, 0), &bytes).unwrap();
        let others: Vec<usize> = (1..=6).filter(|&x| x != failed).collect();
        let helpers: Vec<usize> = others.iter().copied().enumerate().filter(|&(i, _)| i != pick).map(|(_, h)| h).collect();
        cluster.fail(failed).unwrap();
        cluster.run_repair(&ExplicitHelpers(helpers)).unwrap();
        all_reads_match(&cluster, &bytes);
    }
}
