use std::ops::Range;

use thiserror::Error;

use crate::lhv::{
    run_lhv_teleportation, AngleConvention, CoincidencePolicy, DelayModel, LhvError, LhvSetup,
};
use crate::parallel::{map_trials, Execution};
use crate::protocols::{
    chsh_from_table, teleport_active, BellTest, DianaBasis, EntanglementSwap, InStateSpec, JointDistribution,
    MeasurementPlan, OrderingScenario, PassiveTeleportation, ProtocolError, Setting, TrialRecord,
};
use crate::qcore::{BellLabel, Observable};

use super::config::{ConfigError, ProtocolName, RunConfig, TeleportMode};
use super::log::{LogError, LogHeader, RunLog, RunSummary, LOG_FORMAT_VERSION};
use super::{
    chsh_estimator, derive_stream, fidelity_estimator, mean_estimate, EstimationError,
};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Lhv(#[from] LhvError),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
    #[error(transparent)]
    Log(#[from] LogError),
}

impl RunError {
    /// Errors caused by a statistical bin with no records.
    pub fn is_empty_bin(&self) -> bool {
        matches!(
            self,
            Self::Estimation(EstimationError::EmptyBin(_))
                | Self::Protocol(ProtocolError::EmptyBin(_))
                | Self::Lhv(LhvError::NoAcceptedTrials { .. })
                | Self::Lhv(LhvError::Estimation(EstimationError::EmptyBin(_)))
        )
    }
}

/// Input state used when the configuration names none.
pub const DEFAULT_IN_STATE: (f64, f64) = (1.0, 0.5);
/// Delay scale used when the configuration names none.
pub const DEFAULT_T0: f64 = 1e-9;

fn in_state(c: &RunConfig) -> Result<InStateSpec, RunError> {
    Ok(InStateSpec::new(
        c.in_theta.unwrap_or(DEFAULT_IN_STATE.0),
        c.in_phi.unwrap_or(DEFAULT_IN_STATE.1),
    )?)
}

fn ordering(c: &RunConfig, default: &str) -> Result<OrderingScenario, RunError> {
    Ok(c.ordering.as_deref().unwrap_or(default).parse()?)
}

fn collect<F>(range: Range<u64>, exec: Execution, f: F) -> Result<Vec<TrialRecord>, RunError>
where
    F: Fn(u64) -> Result<TrialRecord, RunError> + Sync + Send,
{
    map_trials(range, exec, f).into_iter().collect()
}

fn accepted(records: &[TrialRecord]) -> u64 {
    records.iter().filter(|r| r.accepted).count() as u64
}

/// Runs a simulation protocol with the worker count from the configuration.
pub fn run(config: &RunConfig) -> Result<RunLog, RunError> {
    run_with(config, Execution::from_workers(config.workers))
}

/// Runs a simulation protocol; output is independent of `exec`.
pub fn run_with(config: &RunConfig, exec: Execution) -> Result<RunLog, RunError> {
    if !config.protocol.is_simulation() {
        return Err(ConfigError::Invalid(format!("{:?} is not a trial simulation", config.protocol)).into());
    }
    config.validate()?;
    let seed = config.seed.expect("validated");
    let range = config.first_trial()..config.first_trial() + config.trials();
    let mut summary = RunSummary {
        trials: config.trials(),
        ..Default::default()
    };
    let records = match config.protocol {
        ProtocolName::Bell => {
            let label = config.bell_state.unwrap_or(BellLabel::B11);
            let test = BellTest::new(label, MeasurementPlan::chsh_alice(), MeasurementPlan::chsh_bob())?;
            let order = ordering(config, "MA-MB")?;
            let records = collect(range, exec, |i| Ok(test.trial(i, &order, &mut derive_stream(seed, i))?))?;
            summary.estimates.insert("chsh".into(), chsh_estimator(&records, None)?);
            summary.values.insert("chsh_exact".into(), chsh_from_table(&test.joint_table(&order)?, None)?);
            records
        }
        ProtocolName::Teleport => {
            let s = in_state(config)?;
            match config.teleport_mode.unwrap_or_default() {
                TeleportMode::Active => {
                    let records = collect(range, exec, |i| {
                        Ok(teleport_active(&s, &mut derive_stream(seed, i))?.into_record(i))
                    })?;
                    let f = mean_estimate(records.iter().filter_map(|r| r.fidelity))
                        .ok_or(EstimationError::EmptyBin("fidelity".into()))?;
                    summary.estimates.insert("fidelity".into(), f);
                    records
                }
                TeleportMode::Passive => {
                    let plan = match &config.bob_settings {
                        None => MeasurementPlan::pauli_uniform(crate::protocols::Agent::Bob),
                        Some(labels) => {
                            let settings = labels
                                .iter()
                                .map(|l| Ok(Setting::of(Observable::from_label(l).map_err(ProtocolError::from)?)))
                                .collect::<Result<Vec<_>, RunError>>()?;
                            MeasurementPlan::uniform(crate::protocols::Agent::Bob, settings)?
                        }
                    };
                    let tele = PassiveTeleportation::new(s, plan)?;
                    let order = ordering(config, "MA-MB")?;
                    let mask = config.bell_mask.unwrap_or(false);
                    let records = collect(range, exec, |i| {
                        let mut r = tele.trial(i, &order, &mut derive_stream(seed, i))?;
                        r.accepted = !mask || r.passes_bell_mask();
                        Ok(r)
                    })?;
                    summary.estimates.insert("fidelity".into(), fidelity_estimator(&records, None, &s)?);
                    for l in BellLabel::ALL {
                        if let Ok(f) = fidelity_estimator(&records, Some(l), &s) {
                            summary.estimates.insert(format!("fidelity_{l}"), f);
                        }
                    }
                    records
                }
            }
        }
        ProtocolName::Swap => {
            let basis = config.diana_basis.unwrap_or(DianaBasis::Bell);
            if basis == DianaBasis::Product && config.post_select.is_some() {
                return Err(ConfigError::Invalid("post_select needs Diana in the Bell basis".into()).into());
            }
            let swap = EntanglementSwap::new(basis, MeasurementPlan::chsh_alice(), MeasurementPlan::chsh_bob())?;
            let order = ordering(config, "MA-MB-MD")?;
            let records = collect(range, exec, |i| Ok(swap.trial(i, &order, &mut derive_stream(seed, i))?))?;
            let table = swap.joint_table(&order)?;
            summary.estimates.insert("chsh_unconditioned".into(), chsh_estimator(&records, None)?);
            summary.values.insert("chsh_unconditioned_exact".into(), chsh_from_table(&table, None)?);
            if let Some(l) = config.post_select {
                summary.estimates.insert(format!("chsh_{l}"), chsh_estimator(&records, Some(l))?);
                summary.values.insert(format!("chsh_{l}_exact"), chsh_from_table(&table, Some(l))?);
            }
            records
        }
        ProtocolName::Lhv => {
            let delay = DelayModel::new(
                config.delay_scale_t0.unwrap_or(DEFAULT_T0),
                config.angle_convention.unwrap_or(AngleConvention::Bloch),
            )?;
            let policy = CoincidencePolicy::new(config.window.unwrap_or(f64::INFINITY))?;
            let setup = LhvSetup::new(in_state(config)?, delay, policy)
                .with_estimation(config.estimation_mode.unwrap_or_default())
                .with_alice_delays(config.alice_delays.unwrap_or_default())
                .with_bell_mask(config.bell_mask.unwrap_or(false));
            let run = run_lhv_teleportation(&setup, range, seed, exec)?;
            summary.estimates.insert("f_av".into(), run.summary.f_av);
            summary.values.insert("acceptance_rate".into(), run.summary.acceptance_rate);
            run.records
        }
        ProtocolName::Link | ProtocolName::Events => unreachable!("checked above"),
    };
    summary.accepted = accepted(&records);
    Ok(RunLog {
        header: LogHeader {
            format_version: LOG_FORMAT_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            first_trial: config.first_trial(),
            trials: config.trials(),
            config: config.canonical(),
        },
        records,
        summary: Some(summary),
    })
}
