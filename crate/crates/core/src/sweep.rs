//! Randomised property sweeps. Instance `i` draws from its own stream seeded
//! by `instance_seed(seed, i)`, and results are collected in index order, so
//! reports do not depend on thread scheduling.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::CPMap;
use crate::error::Result;
use crate::random::{self, instance_seed};
use crate::semigroup::{
    classify, invariant_states, kms_dual, kms_residual, lindblad_channel, mixing_residual,
    stationary_states,
};
use crate::tol::Tolerances;

/// Sampling times of the continuous-time sweep.
pub const LINDBLAD_TIMES: [f64; 3] = [1.0, 5.0, 20.0];

#[derive(Debug, Clone, Serialize)]
pub struct LindbladInstance {
    pub index: usize,
    pub seed: u64,
    pub dim: usize,
    pub jumps: usize,
    pub faithful: bool,
    pub times: Vec<f64>,
    pub ergodic: Vec<bool>,
    pub strong_mixing: Vec<bool>,
    pub gaps: Vec<f64>,
    pub counterexample: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChannelInstance {
    pub index: usize,
    pub seed: u64,
    pub dim: usize,
    pub kraus: usize,
    pub kms_residual: f64,
    pub involution_residual: f64,
    pub spectral_mixing: bool,
    pub iterate_mixing: bool,
    pub counterexample: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport<T> {
    pub kind: &'static str,
    pub count: usize,
    pub max_dim: usize,
    pub seed: u64,
    /// Instances contradicting the property under test.
    pub counterexamples: usize,
    /// Instances skipped because the hypotheses failed (no faithful state).
    pub skipped: usize,
    pub errors: usize,
    pub instances: Vec<T>,
}

fn lindblad_instance(
    index: usize,
    seed: u64,
    max_dim: usize,
    tol: &Tolerances,
) -> LindbladInstance {
    let s = instance_seed(seed, index as u64);
    let mut rng = random::rng(s);
    let dim = rng.random_range(2..=max_dim.max(2));
    let jumps = rng.random_range(1..=2usize);
    let gen = random::lindblad(&mut rng, dim, jumps);
    let mut inst = LindbladInstance {
        index,
        seed: s,
        dim,
        jumps,
        faithful: false,
        times: LINDBLAD_TIMES.to_vec(),
        ergodic: Vec::new(),
        strong_mixing: Vec::new(),
        gaps: Vec::new(),
        counterexample: false,
        error: None,
    };
    let run = |inst: &mut LindbladInstance| -> Result<()> {
        let stationary = stationary_states(&gen, tol)?;
        inst.faithful = stationary.faithful_exists;
        if !inst.faithful {
            return Ok(());
        }
        for &t in &LINDBLAD_TIMES {
            let map = lindblad_channel(&gen, t, tol)?;
            let c = classify(&map, Some(stationary.mean()), tol)?;
            inst.ergodic.push(c.ergodic);
            inst.strong_mixing.push(c.strong_mixing);
            inst.gaps.push(c.spectral_gap);
        }
        inst.counterexample = inst
            .ergodic
            .iter()
            .zip(&inst.strong_mixing)
            .any(|(&e, &m)| e && !m);
        Ok(())
    };
    if let Err(e) = run(&mut inst) {
        inst.error = Some(e.to_string());
    }
    inst
}

/// Continuous-time sweep: for random generators with a faithful stationary
/// state, ergodicity of `exp(tL)` should imply strong mixing.
pub fn lindblad_sweep(
    count: usize,
    max_dim: usize,
    seed: u64,
    tol: &Tolerances,
) -> SweepReport<LindbladInstance> {
    let instances: Vec<LindbladInstance> = (0..count)
        .into_par_iter()
        .map(|i| lindblad_instance(i, seed, max_dim, tol))
        .collect();
    SweepReport {
        kind: "lindblad",
        count,
        max_dim,
        seed,
        counterexamples: instances.iter().filter(|i| i.counterexample).count(),
        skipped: instances
            .iter()
            .filter(|i| !i.faithful && i.error.is_none())
            .count(),
        errors: instances.iter().filter(|i| i.error.is_some()).count(),
        instances,
    }
}

fn superop_gap(a: &CPMap, b: &CPMap) -> f64 {
    (a.superop().matrix() - b.superop().matrix()).norm()
}

fn channel_instance(index: usize, seed: u64, max_dim: usize, tol: &Tolerances) -> ChannelInstance {
    let s = instance_seed(seed, index as u64);
    let mut rng = random::rng(s);
    let dim = rng.random_range(2..=max_dim.max(2));
    let kraus = rng.random_range(1..=3usize);
    let map = random::channel(&mut rng, dim, kraus);
    let mut inst = ChannelInstance {
        index,
        seed: s,
        dim,
        kraus,
        kms_residual: f64::NAN,
        involution_residual: f64::NAN,
        spectral_mixing: false,
        iterate_mixing: false,
        counterexample: false,
        error: None,
    };
    let run = |inst: &mut ChannelInstance| -> Result<()> {
        let state = invariant_states(&map, tol)?.mean().clone();
        let dual = kms_dual(&map, &state, tol)?;
        inst.kms_residual = kms_residual(&map, &dual, &state);
        inst.involution_residual = superop_gap(&map, &kms_dual(&dual, &state, tol)?);
        inst.spectral_mixing = classify(&map, Some(&state), tol)?.strong_mixing;
        inst.iterate_mixing = mixing_residual(&map, &state, 200) <= 1e-6;
        inst.counterexample = inst.kms_residual > 1e-9
            || inst.involution_residual > 1e-9
            || inst.spectral_mixing != inst.iterate_mixing;
        Ok(())
    };
    if let Err(e) = run(&mut inst) {
        inst.error = Some(e.to_string());
        inst.counterexample = true;
    }
    inst
}

/// Discrete-time sweep over random channels: KMS-duality relation and
/// involution, and agreement of spectral and iterate mixing verdicts.
pub fn channel_sweep(
    count: usize,
    max_dim: usize,
    seed: u64,
    tol: &Tolerances,
) -> SweepReport<ChannelInstance> {
    let instances: Vec<ChannelInstance> = (0..count)
        .into_par_iter()
        .map(|i| channel_instance(i, seed, max_dim, tol))
        .collect();
    SweepReport {
        kind: "channel",
        count,
        max_dim,
        seed,
        counterexamples: instances.iter().filter(|i| i.counterexample).count(),
        skipped: 0,
        errors: instances.iter().filter(|i| i.error.is_some()).count(),
        instances,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweeps_are_reproducible_and_clean() {
        let tol = Tolerances::default();
        let a = lindblad_sweep(6, 3, 7, &tol);
        let b = lindblad_sweep(6, 3, 7, &tol);
        assert_eq!(crate::io::to_stable_json(&a), crate::io::to_stable_json(&b));
        assert_eq!(a.counterexamples, 0);
        assert_eq!(a.errors, 0);
        let c = channel_sweep(6, 3, 7, &tol);
        assert_eq!(c.counterexamples, 0, "{c:?}");
    }
}
