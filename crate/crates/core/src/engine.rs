//! Jump-diffusion sample-path engine.
//!
//! Paths are integrated in log space: writing `(u1, u2, v)` for
//! `(ln x1, ln x2, ln y)`, the continuous part follows an Euler-Maruyama step
//! of the log-transformed system and each compound-Poisson event of mark `k`
//! adds `ln(1 + c_i[k])` to component `i` exactly. Exponentiating back can
//! never produce a nonpositive state, so positivity is structural rather than
//! enforced by clamping.
//!
//! Jump times are drawn exactly (exponential waiting times at the total
//! intensity, marks proportional to atom weights) and superimposed on the
//! uniform grid: a step containing jumps is split at each jump time. The
//! `x`-dynamics are stated against the raw jump measure while the log system
//! uses the compensated one; the engine simulates raw events and folds the
//! compensator into the continuous drift, which is exactly the algebra
//! relating `b_i` to `r_i`.
//!
//! Bookkeeping: `M_i(t)` accumulates the Brownian integrals
//! `int sigma_i dB_i` and `Mt_i(t)` the compensated jump sums; both vanish
//! like `t^(-1/2)` after division by `t`, which the analysis layer verifies.
//!
//! Determinism: identical `(model, init, config, path_index)` yields
//! bit-identical trajectories, and ensembles are independent of thread
//! scheduling (see [`crate::rng`]).

use crate::model::{CrispModel, JumpMeasure, ModelError, Species, StateVector};
use crate::rng::{brownian_stream, jump_stream};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hard bound on log-state components; leaving `[-LIMIT, LIMIT]` aborts the
/// path as a numerical blow-up instead of silently clamping.
pub const LOG_STATE_LIMIT: f64 = 700.0;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error(
        "path {path_index}: log-state {component} left [-{limit}, {limit}] at t = {time} \
         (numerical blow-up; check the model scales and dt)"
    )]
    NonFiniteState {
        path_index: u64,
        component: &'static str,
        time: f64,
        limit: f64,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Time grid, seeding and recording policy for a simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    /// Time horizon `T`.
    pub horizon: f64,
    /// Uniform diffusion step.
    pub dt: f64,
    /// Master seed; per-path streams are derived from it.
    pub seed: u64,
    /// Number of independent paths in an ensemble.
    #[serde(rename = "paths")]
    pub n_paths: usize,
    /// Record every k-th grid step (the final step is always recorded).
    pub record_stride: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            horizon: 1000.0,
            dt: 1e-3,
            seed: 0,
            n_paths: 200,
            record_stride: 100,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let fail = |msg: String| Err(EngineError::InvalidConfig(msg));
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return fail(format!("horizon must be positive and finite, got {}", self.horizon));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return fail(format!("dt must be positive and finite, got {}", self.dt));
        }
        if self.dt > self.horizon {
            return fail(format!("dt {} exceeds horizon {}", self.dt, self.horizon));
        }
        if self.n_paths == 0 {
            return fail("paths must be >= 1".to_string());
        }
        if self.record_stride == 0 {
            return fail("record_stride must be >= 1".to_string());
        }
        if self.dt > 1e-2 {
            log::warn!(
                "dt = {} is coarse; drift scales of order one are marginally resolved",
                self.dt
            );
        }
        Ok(())
    }

    pub fn step_count(&self) -> u64 {
        ((self.horizon / self.dt).round() as u64).max(1)
    }
}

/// One compound-Poisson event: all species jump at `time` with the sizes of
/// atom `mark`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpEvent {
    pub time: f64,
    pub mark: usize,
}

/// Common read access for full-system and one-dimensional trajectories, as
/// used by the estimators in [`crate::asymptotics`].
pub trait SampledPath {
    fn times(&self) -> &[f64];
    /// Recorded log states of one species (the only series for 1-D paths).
    fn log_series(&self, species: Species) -> &[f64];

    fn terminal(&self, species: Species) -> f64 {
        self.log_series(species)
            .last()
            .map(|u| u.exp())
            .unwrap_or(f64::NAN)
    }
}

/// Recorded sample path of the full three-species system.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    log_states: [Vec<f64>; 3],
    jump_events: Vec<JumpEvent>,
    diffusion_martingale: [Vec<f64>; 3],
    jump_martingale: [Vec<f64>; 3],
}

impl Trajectory {
    fn with_capacity(n: usize) -> Self {
        Self {
            times: Vec::with_capacity(n),
            log_states: [
                Vec::with_capacity(n),
                Vec::with_capacity(n),
                Vec::with_capacity(n),
            ],
            jump_events: Vec::new(),
            diffusion_martingale: [
                Vec::with_capacity(n),
                Vec::with_capacity(n),
                Vec::with_capacity(n),
            ],
            jump_martingale: [
                Vec::with_capacity(n),
                Vec::with_capacity(n),
                Vec::with_capacity(n),
            ],
        }
    }

    fn record(&mut self, t: f64, u: &[f64; 3], m: &[f64; 3], mt: &[f64; 3]) {
        self.times.push(t);
        for i in 0..3 {
            self.log_states[i].push(u[i]);
            self.diffusion_martingale[i].push(m[i]);
            self.jump_martingale[i].push(mt[i]);
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn jump_events(&self) -> &[JumpEvent] {
        &self.jump_events
    }

    pub fn state_at(&self, index: usize) -> StateVector {
        StateVector::from_log([
            self.log_states[0][index],
            self.log_states[1][index],
            self.log_states[2][index],
        ])
        .expect("log-state bounds keep states positive and finite")
    }

    pub fn terminal_state(&self) -> StateVector {
        self.state_at(self.len() - 1)
    }

    pub fn state_series(&self, species: Species) -> impl Iterator<Item = f64> + '_ {
        self.log_states[species.index()].iter().map(|u| u.exp())
    }

    /// Running Brownian martingale `M_i(t)` at the recorded times.
    pub fn diffusion_martingale(&self, species: Species) -> &[f64] {
        &self.diffusion_martingale[species.index()]
    }

    /// Running compensated-jump martingale `Mt_i(t)` at the recorded times.
    pub fn jump_martingale(&self, species: Species) -> &[f64] {
        &self.jump_martingale[species.index()]
    }
}

impl SampledPath for Trajectory {
    fn times(&self) -> &[f64] {
        &self.times
    }

    fn log_series(&self, species: Species) -> &[f64] {
        &self.log_states[species.index()]
    }
}

/// Recorded sample path of a one-dimensional comparison process.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarTrajectory {
    times: Vec<f64>,
    log_values: Vec<f64>,
    jump_events: Vec<JumpEvent>,
    diffusion_martingale: Vec<f64>,
    jump_martingale: Vec<f64>,
}

impl ScalarTrajectory {
    fn with_capacity(n: usize) -> Self {
        Self {
            times: Vec::with_capacity(n),
            log_values: Vec::with_capacity(n),
            jump_events: Vec::new(),
            diffusion_martingale: Vec::with_capacity(n),
            jump_martingale: Vec::with_capacity(n),
        }
    }

    fn record(&mut self, t: f64, u: f64, m: f64, mt: f64) {
        self.times.push(t);
        self.log_values.push(u);
        self.diffusion_martingale.push(m);
        self.jump_martingale.push(mt);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn jump_events(&self) -> &[JumpEvent] {
        &self.jump_events
    }

    pub fn log_values(&self) -> &[f64] {
        &self.log_values
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.log_values.iter().map(|u| u.exp())
    }

    pub fn terminal_value(&self) -> f64 {
        self.log_values.last().expect("nonempty trajectory").exp()
    }

    pub fn diffusion_martingale(&self) -> &[f64] {
        &self.diffusion_martingale
    }

    pub fn jump_martingale(&self) -> &[f64] {
        &self.jump_martingale
    }
}

impl SampledPath for ScalarTrajectory {
    fn times(&self) -> &[f64] {
        &self.times
    }

    fn log_series(&self, _species: Species) -> &[f64] {
        &self.log_values
    }
}

/// The four one-dimensional comparison processes: logistic jump-diffusions
/// that bound the full system pathwise (`x1 <= phi1`, `x2 <= phi2`,
/// `phi3 <= y <= phi4`) when driven with the same increments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComparisonKind {
    Phi1,
    Phi2,
    Phi3,
    Phi4,
}

impl ComparisonKind {
    pub const ALL: [ComparisonKind; 4] = [
        ComparisonKind::Phi1,
        ComparisonKind::Phi2,
        ComparisonKind::Phi3,
        ComparisonKind::Phi4,
    ];

    /// The species whose noise channel and jump sizes this process replays.
    pub fn species(self) -> Species {
        match self {
            ComparisonKind::Phi1 => Species::Prey1,
            ComparisonKind::Phi2 => Species::Prey2,
            ComparisonKind::Phi3 | ComparisonKind::Phi4 => Species::Predator,
        }
    }
}

/// Scalar coefficients of one comparison equation, extracted from a crisp
/// model.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonSpec {
    which: ComparisonKind,
    species: Species,
    rate: f64,
    self_interaction: f64,
    sigma: f64,
    jumps: JumpMeasure,
}

impl ComparisonSpec {
    pub fn new(which: ComparisonKind, model: &CrispModel) -> Self {
        use Species::{Predator, Prey1, Prey2};
        let (rate, self_interaction) = match which {
            ComparisonKind::Phi1 => (model.r(Prey1), model.a(Prey1, Prey1)),
            ComparisonKind::Phi2 => (model.r(Prey2), model.a(Prey2, Prey2)),
            ComparisonKind::Phi3 => (-model.r(Predator), model.a(Predator, Predator)),
            ComparisonKind::Phi4 => (
                -model.r(Predator) + model.a(Predator, Prey1) + model.a(Predator, Prey2),
                model.a(Predator, Predator),
            ),
        };
        let species = which.species();
        Self {
            which,
            species,
            rate,
            self_interaction,
            sigma: model.sigma(species),
            jumps: model.jumps().clone(),
        }
    }

    pub fn which(&self) -> ComparisonKind {
        self.which
    }

    pub fn species(&self) -> Species {
        self.species
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn self_interaction(&self) -> f64 {
        self.self_interaction
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `(weight, size)` pairs of the jump atoms as seen by this process.
    pub fn jump_pairs(&self) -> Vec<(f64, f64)> {
        self.jumps
            .atoms()
            .iter()
            .map(|a| (a.weight, a.size(self.species)))
            .collect()
    }

    /// Threshold coefficient `b = rate - sigma^2/2 + sum w ln(1+c)`.
    pub fn b(&self) -> f64 {
        self.rate - self.sigma * self.sigma / 2.0 + self.jumps.log_jump_integral(self.species)
    }
}

/// Exact compound-Poisson schedule on `(0, horizon]`: exponential waiting
/// times at the total intensity, marks proportional to atom weights.
fn jump_schedule(rng: &mut ChaCha8Rng, jumps: &JumpMeasure, horizon: f64) -> Vec<JumpEvent> {
    let total = jumps.total_rate();
    if !(total > 0.0) {
        return Vec::new();
    }
    let atoms = jumps.atoms();
    let mut events = Vec::new();
    let mut t = 0.0_f64;
    loop {
        let u: f64 = rng.random();
        t += -(1.0 - u).ln() / total;
        if t > horizon {
            break;
        }
        let mut threshold = rng.random::<f64>() * total;
        let mut mark = atoms.len() - 1;
        for (k, atom) in atoms.iter().enumerate() {
            if threshold < atom.weight {
                mark = k;
                break;
            }
            threshold -= atom.weight;
        }
        events.push(JumpEvent { time: t, mark });
    }
    events
}

fn check_component(
    value: f64,
    component: &'static str,
    time: f64,
    path_index: u64,
) -> Result<(), EngineError> {
    if !value.is_finite() || value.abs() > LOG_STATE_LIMIT {
        return Err(EngineError::NonFiniteState {
            path_index,
            component,
            time,
            limit: LOG_STATE_LIMIT,
        });
    }
    Ok(())
}

const LOG_COMPONENTS: [&str; 3] = ["u1", "u2", "v"];

/// Simulate one sample path of the full system.
pub fn simulate_path(
    model: &CrispModel,
    init: &StateVector,
    cfg: &SimulationConfig,
    path_index: u64,
) -> Result<Trajectory, EngineError> {
    cfg.validate()?;
    let n_steps = cfg.step_count();
    let dt = cfg.dt;
    let horizon = n_steps as f64 * dt;

    let b = model.b().as_array();
    let jc: [f64; 3] = [
        model.jumps().log_jump_integral(Species::Prey1),
        model.jumps().log_jump_integral(Species::Prey2),
        model.jumps().log_jump_integral(Species::Predator),
    ];
    // Continuous drift constant against the raw jump measure.
    let cont = [b[0] - jc[0], b[1] - jc[1], b[2] - jc[2]];
    let mut a = [[0.0_f64; 3]; 3];
    for (i, &si) in Species::ALL.iter().enumerate() {
        for (j, &sj) in Species::ALL.iter().enumerate() {
            a[i][j] = model.a(si, sj);
        }
    }
    let sigma = [
        model.sigma(Species::Prey1),
        model.sigma(Species::Prey2),
        model.sigma(Species::Predator),
    ];
    let mark_ln: Vec<[f64; 3]> = model
        .jumps()
        .atoms()
        .iter()
        .map(|atom| atom.sizes().map(f64::ln_1p))
        .collect();

    let mut brownian = [
        brownian_stream(cfg.seed, path_index, 0),
        brownian_stream(cfg.seed, path_index, 1),
        brownian_stream(cfg.seed, path_index, 2),
    ];
    let schedule = jump_schedule(&mut jump_stream(cfg.seed, path_index), model.jumps(), horizon);

    let mut u = init.to_log();
    let mut m_acc = [0.0_f64; 3];
    let mut mt_acc = [0.0_f64; 3];
    let records = (n_steps / cfg.record_stride as u64) as usize + 2;
    let mut traj = Trajectory::with_capacity(records);
    traj.record(0.0, &u, &m_acc, &mt_acc);

    let diffuse = |u: &mut [f64; 3],
                   m_acc: &mut [f64; 3],
                   mt_acc: &mut [f64; 3],
                   brownian: &mut [ChaCha8Rng; 3],
                   h: f64,
                   t_end: f64|
     -> Result<(), EngineError> {
        let e = [u[0].exp(), u[1].exp(), u[2].exp()];
        let d = [
            cont[0] - a[0][0] * e[0] - a[0][1] * e[1] - a[0][2] * e[2] / (1.0 + e[0]),
            cont[1] - a[1][0] * e[0] - a[1][1] * e[1] - a[1][2] * e[2] / (1.0 + e[1]),
            cont[2] - a[2][2] * e[2]
                + a[2][0] * e[0] / (1.0 + e[0])
                + a[2][1] * e[1] / (1.0 + e[1]),
        ];
        let sqrt_h = h.sqrt();
        for i in 0..3 {
            let z: f64 = brownian[i].sample(StandardNormal);
            let db = sqrt_h * z;
            u[i] += d[i] * h + sigma[i] * db;
            m_acc[i] += sigma[i] * db;
            mt_acc[i] -= jc[i] * h;
            check_component(u[i], LOG_COMPONENTS[i], t_end, path_index)?;
        }
        Ok(())
    };

    let mut next_jump = 0usize;
    for step in 0..n_steps {
        let t0 = step as f64 * dt;
        let t1 = if step + 1 == n_steps {
            horizon
        } else {
            (step + 1) as f64 * dt
        };
        let mut seg_start = t0;
        while next_jump < schedule.len() && schedule[next_jump].time <= t1 {
            let event = schedule[next_jump];
            diffuse(
                &mut u,
                &mut m_acc,
                &mut mt_acc,
                &mut brownian,
                event.time - seg_start,
                event.time,
            )?;
            for i in 0..3 {
                u[i] += mark_ln[event.mark][i];
                mt_acc[i] += mark_ln[event.mark][i];
                check_component(u[i], LOG_COMPONENTS[i], event.time, path_index)?;
            }
            traj.jump_events.push(event);
            seg_start = event.time;
            next_jump += 1;
        }
        diffuse(&mut u, &mut m_acc, &mut mt_acc, &mut brownian, t1 - seg_start, t1)?;
        if (step + 1) % cfg.record_stride as u64 == 0 || step + 1 == n_steps {
            traj.record(t1, &u, &m_acc, &mt_acc);
        }
    }
    Ok(traj)
}

/// Simulate one sample path of a comparison process.
///
/// With the same `(seed, path_index)` as a full-system path this replays the
/// identical Brownian increments (on the channel of its species) and the
/// identical jump schedule, which is what makes the pathwise comparison
/// ordering testable.
pub fn simulate_comparison(
    spec: &ComparisonSpec,
    init: f64,
    cfg: &SimulationConfig,
    path_index: u64,
) -> Result<ScalarTrajectory, EngineError> {
    cfg.validate()?;
    if !(init > 0.0) || !init.is_finite() {
        return Err(EngineError::InvalidConfig(format!(
            "comparison initial value must be strictly positive and finite, got {init}"
        )));
    }
    let n_steps = cfg.step_count();
    let dt = cfg.dt;
    let horizon = n_steps as f64 * dt;

    let jc = spec.jumps.log_jump_integral(spec.species);
    let cont = spec.rate - spec.sigma * spec.sigma / 2.0;
    let mark_ln: Vec<f64> = spec
        .jumps
        .atoms()
        .iter()
        .map(|atom| atom.size(spec.species).ln_1p())
        .collect();

    let mut brownian = brownian_stream(cfg.seed, path_index, spec.species.index());
    let schedule = jump_schedule(&mut jump_stream(cfg.seed, path_index), &spec.jumps, horizon);

    let mut u = init.ln();
    let mut m_acc = 0.0_f64;
    let mut mt_acc = 0.0_f64;
    let records = (n_steps / cfg.record_stride as u64) as usize + 2;
    let mut traj = ScalarTrajectory::with_capacity(records);
    traj.record(0.0, u, m_acc, mt_acc);

    let component = LOG_COMPONENTS[spec.species.index()];
    let diffuse = |u: &mut f64,
                   m_acc: &mut f64,
                   mt_acc: &mut f64,
                   brownian: &mut ChaCha8Rng,
                   h: f64,
                   t_end: f64|
     -> Result<(), EngineError> {
        let d = cont - spec.self_interaction * u.exp();
        let z: f64 = brownian.sample(StandardNormal);
        let db = h.sqrt() * z;
        *u += d * h + spec.sigma * db;
        *m_acc += spec.sigma * db;
        *mt_acc -= jc * h;
        check_component(*u, component, t_end, path_index)
    };

    let mut next_jump = 0usize;
    for step in 0..n_steps {
        let t0 = step as f64 * dt;
        let t1 = if step + 1 == n_steps {
            horizon
        } else {
            (step + 1) as f64 * dt
        };
        let mut seg_start = t0;
        while next_jump < schedule.len() && schedule[next_jump].time <= t1 {
            let event = schedule[next_jump];
            diffuse(
                &mut u,
                &mut m_acc,
                &mut mt_acc,
                &mut brownian,
                event.time - seg_start,
                event.time,
            )?;
            u += mark_ln[event.mark];
            mt_acc += mark_ln[event.mark];
            check_component(u, component, event.time, path_index)?;
            traj.jump_events.push(event);
            seg_start = event.time;
            next_jump += 1;
        }
        diffuse(&mut u, &mut m_acc, &mut mt_acc, &mut brownian, t1 - seg_start, t1)?;
        if (step + 1) % cfg.record_stride as u64 == 0 || step + 1 == n_steps {
            traj.record(t1, u, m_acc, mt_acc);
        }
    }
    Ok(traj)
}

/// Simulate `cfg.n_paths` independent paths, in parallel, with per-path
/// streams derived from `(seed, path_index)`. The result order and every bit
/// of its content are independent of scheduling.
pub fn run_ensemble(
    model: &CrispModel,
    init: &StateVector,
    cfg: &SimulationConfig,
) -> Result<Vec<Trajectory>, EngineError> {
    cfg.validate()?;
    (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|path_index| simulate_path(model, init, cfg, path_index))
        .collect()
}

/// Ensemble variant of [`simulate_comparison`].
pub fn run_comparison_ensemble(
    spec: &ComparisonSpec,
    init: f64,
    cfg: &SimulationConfig,
) -> Result<Vec<ScalarTrajectory>, EngineError> {
    cfg.validate()?;
    (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|path_index| simulate_comparison(spec, init, cfg, path_index))
        .collect()
}
