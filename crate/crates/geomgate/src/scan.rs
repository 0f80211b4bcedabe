//! Parallel scan drivers. Points run on the rayon pool and are collected in
//! input order, so output does not depend on scheduling.

use geomgate_core::analysis::{robustness_point, robustness_sweep_result, AnalysisError, ErrorAxis, RobustnessTarget, SweepResult};
use geomgate_core::evolve::IntegratorConfig;
use geomgate_core::openquantum::{
    combine_members, decay_sweep_result, member_fidelity, DecayGate, DecayModel, DecayTarget, OpenQuantumError,
};
use geomgate_core::twoqubit::{blockade_point, blockade_sweep_result, TwoQubitError, TwoQubitGateSpec};
use rayon::prelude::*;

pub fn blockade_scan(
    spec: &TwoQubitGateSpec,
    ratios: &[f64],
    config: &IntegratorConfig,
) -> Result<SweepResult, TwoQubitError> {
    if ratios.is_empty() {
        return Err(TwoQubitError::EmptyRatios);
    }
    let points = ratios
        .par_iter()
        .map(|&r| blockade_point(spec, r, config))
        .collect::<Result<Vec<_>, _>>()?;
    blockade_sweep_result(spec, config, &points)
}

pub fn robustness_scan(
    target: &RobustnessTarget,
    axis: ErrorAxis,
    values: &[f64],
    config: &IntegratorConfig,
) -> Result<SweepResult, AnalysisError> {
    if values.is_empty() {
        return Err(AnalysisError::EmptyGrid);
    }
    let points = values
        .par_iter()
        .map(|&v| robustness_point(target, &axis.model(v), config))
        .collect::<Result<Vec<_>, _>>()?;
    robustness_sweep_result(target, axis, values, config, &points)
}

/// Every (rate, ensemble member) pair is an independent job.
pub fn decay_scan(
    gate: &DecayGate,
    rates: &[f64],
    target: DecayTarget,
    config: &IntegratorConfig,
) -> Result<SweepResult, OpenQuantumError> {
    if rates.is_empty() {
        return Err(OpenQuantumError::EmptyRates);
    }
    let models = rates
        .iter()
        .map(|&g| DecayModel::new(g, target))
        .collect::<Result<Vec<_>, _>>()?;
    let ensemble = gate.ensemble();
    let jobs: Vec<(usize, usize)> = (0..models.len())
        .flat_map(|m| (0..ensemble.len()).map(move |k| (m, k)))
        .collect();
    let members = jobs
        .par_iter()
        .map(|&(m, k)| member_fidelity(gate, &ensemble[k], &models[m], config))
        .collect::<Result<Vec<_>, _>>()?;
    let tau = gate.duration()?;
    let points: Vec<_> = members.chunks(ensemble.len()).map(|c| combine_members(c, tau)).collect();
    decay_sweep_result(gate, rates, target, config, &points)
}
