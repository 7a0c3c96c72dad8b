//! Shared fixtures for the benchmarks.

use mhscreen_core::{
    gen_synthetic, make_family, GroupSpec, SignatureStore, SyntheticWorkload, WorkloadSpec,
};

pub const K: usize = 1000;

/// Synthetic pairs from `groups` (`J:count:size`), signed with `K` slots.
pub fn signed_workload(groups: &[&str], seed: u64) -> (SyntheticWorkload, SignatureStore) {
    let groups = groups
        .iter()
        .map(|g| g.parse::<GroupSpec>().expect("group spec"))
        .collect();
    let w = gen_synthetic(&WorkloadSpec { groups, seed }).expect("workload");
    let fam = make_family(K, seed).expect("family");
    let sets: Vec<_> = w.sets.iter().collect();
    let store = fam
        .sign_all(&sets)
        .expect("sign")
        .into_iter()
        .enumerate()
        .map(|(i, s)| (i as u64, s))
        .collect();
    (w, store)
}
