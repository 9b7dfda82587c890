//! Fixtures shared by the qds benchmarks.

use qds::{random, CPMap, DensityState, Tolerances};

/// Seeded random channel with its mean invariant state.
pub fn channel_with_state(seed: u64, n: usize, m: usize) -> (CPMap, DensityState) {
    let map = random::channel(&mut random::rng(seed), n, m);
    let state = qds::invariant_states(&map, &Tolerances::default())
        .expect("random channels have invariant states")
        .mean()
        .clone();
    (map, state)
}
