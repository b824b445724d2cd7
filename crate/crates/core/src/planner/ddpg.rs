//! Deterministic policy-gradient agent over goal-conditioned observations.

use std::path::Path;

use ndarray::{s, Array2};
use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::replay::{ReplayBuffer, Transition};
use crate::env::{observe, EnvState, Vec3};
use crate::error::{Error, Result};
use crate::nn::{Activation, AdamHyper, AdamState, Mlp, NetCheckpoint, Normalizer};
use crate::seed::{self, Rng};

pub const ACTION_DIM: usize = 3;
pub const AGENT_FORMAT_VERSION: u32 = 1;

/// `[agent]` table of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub hidden: Vec<usize>,
    pub gamma: f64,
    pub tau: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub noise_sigma: f64,
    /// Probability of a uniformly random action while exploring.
    pub random_eps: f64,
    /// Weight of the squared-action penalty in the actor loss.
    pub action_l2: f64,
    /// Normalized observations are clipped to `±obs_clip`.
    pub obs_clip: f64,
    pub batch_size: usize,
    pub updates_per_iteration: usize,
    pub buffer_capacity: usize,
    /// `"final"` or `"future(k)"`.
    pub her_strategy: String,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            hidden: vec![128, 128],
            gamma: 0.98,
            tau: 0.05,
            actor_lr: 1e-3,
            critic_lr: 1e-3,
            noise_sigma: 0.2,
            random_eps: 0.3,
            action_l2: 1.0,
            obs_clip: 5.0,
            batch_size: 128,
            updates_per_iteration: 40,
            buffer_capacity: 100_000,
            her_strategy: "future(4)".into(),
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Config(format!("gamma must be in (0, 1) (got {})", self.gamma)));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::Config(format!("tau must be in (0, 1] (got {})", self.tau)));
        }
        if self.batch_size == 0 || self.buffer_capacity == 0 || self.hidden.is_empty() {
            return Err(Error::Config("batch_size, buffer_capacity and hidden must be non-empty".into()));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::Config("noise_sigma must be >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.random_eps) {
            return Err(Error::Config("random_eps must be in [0, 1]".into()));
        }
        if !(self.action_l2 >= 0.0 && self.obs_clip > 0.0) {
            return Err(Error::Config("action_l2 must be >= 0 and obs_clip > 0".into()));
        }
        self.her_strategy.parse::<super::HerStrategy>()?;
        Ok(())
    }
}

/// Actor, critic, their targets and optimizers.
#[derive(Debug, Clone, PartialEq)]
pub struct DdpgAgent {
    pub actor: Mlp,
    pub critic: Mlp,
    pub target_actor: Mlp,
    pub target_critic: Mlp,
    pub actor_opt: AdamState,
    pub critic_opt: AdamState,
    pub gamma: f64,
    pub tau: f64,
    pub noise_sigma: f64,
    pub random_eps: f64,
    pub action_l2: f64,
    /// Multiplier on the tanh head; normalized actions use 1.
    pub action_scale: f64,
    /// Input statistics shared by actor and critic.
    pub normalizer: Normalizer,
}

/// Loss diagnostics of one optimization step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct UpdateStats {
    pub critic_loss: f64,
    pub actor_loss: f64,
    pub mean_q: f64,
    /// Set when the buffer held fewer transitions than the batch size.
    pub skipped: bool,
}

impl DdpgAgent {
    pub fn new(obs_len: usize, cfg: &AgentConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut actor_sizes = vec![obs_len];
        actor_sizes.extend(&cfg.hidden);
        actor_sizes.push(ACTION_DIM);
        let mut critic_sizes = vec![obs_len + ACTION_DIM];
        critic_sizes.extend(&cfg.hidden);
        critic_sizes.push(1);

        let actor = Mlp::new(&actor_sizes, Activation::Tanh, seed::derive(seed, seed::stream::INIT, 0))?;
        let critic = Mlp::new(&critic_sizes, Activation::Identity, seed::derive(seed, seed::stream::INIT, 1))?;
        let actor_opt = AdamState::new(
            &actor,
            AdamHyper {
                lr: cfg.actor_lr,
                ..AdamHyper::default()
            },
        );
        let critic_opt = AdamState::new(
            &critic,
            AdamHyper {
                lr: cfg.critic_lr,
                ..AdamHyper::default()
            },
        );
        Ok(Self {
            target_actor: actor.clone(),
            target_critic: critic.clone(),
            actor,
            critic,
            actor_opt,
            critic_opt,
            gamma: cfg.gamma,
            tau: cfg.tau,
            noise_sigma: cfg.noise_sigma,
            random_eps: cfg.random_eps,
            action_l2: cfg.action_l2,
            action_scale: 1.0,
            normalizer: Normalizer::new(obs_len, cfg.obs_clip),
        })
    }

    pub fn obs_len(&self) -> usize {
        self.actor.input_len()
    }

    /// Lower clip bound `−1/(1−γ)` for values and critic targets.
    pub fn value_floor(&self) -> f64 {
        -1.0 / (1.0 - self.gamma)
    }

    fn clip_value(&self, v: f64) -> f64 {
        v.clamp(self.value_floor(), 0.0)
    }

    /// Deterministic policy output, scaled tanh.
    pub fn policy(&self, obs_goal: &[f64]) -> Result<Vec3> {
        if obs_goal.len() != self.obs_len() {
            return Err(Error::Shape {
                context: "policy input",
                expected: self.obs_len(),
                actual: obs_goal.len(),
            });
        }
        let y = self.actor.predict(&self.normalizer.normalize(obs_goal))?;
        Ok(Vec3::new(y[0], y[1], y[2]) * self.action_scale)
    }

    /// Zero-mean Gaussian exploration noise with std `noise_sigma` per axis.
    pub fn exploration_noise(&self, rng: &mut Rng) -> Vec3 {
        if self.noise_sigma == 0.0 {
            return Vec3::ZERO;
        }
        let n = Normal::new(0.0, self.noise_sigma).expect("finite sigma");
        Vec3::new(n.sample(rng), n.sample(rng), n.sample(rng))
    }

    /// Policy action in `[-1, 1]^3`. Exploring, it is replaced by a uniform
    /// random action with probability `random_eps`, else perturbed by noise.
    pub fn select_action(&self, obs_goal: &[f64], explore: bool, rng: &mut Rng) -> Result<Vec3> {
        let mut a = self.policy(obs_goal)?;
        if explore {
            if rng.random::<f64>() < self.random_eps {
                return Ok(Vec3::new(
                    rng.random_range(-1.0..=1.0),
                    rng.random_range(-1.0..=1.0),
                    rng.random_range(-1.0..=1.0),
                ));
            }
            a += self.exploration_noise(rng);
        }
        Ok(a.clamp_abs(1.0))
    }

    /// Folds observations into the input statistics.
    pub fn observe_inputs<'a>(&mut self, obs: impl IntoIterator<Item = &'a [f64]>) {
        for o in obs {
            self.normalizer.update(o);
        }
    }

    fn normalized_matrix(&self, rows: &[&[f64]]) -> Result<Array2<f64>> {
        let mut m = Self::batch_matrix(rows, self.obs_len())?;
        for mut row in m.rows_mut() {
            self.normalizer
                .normalize_in_place(row.as_slice_mut().expect("standard layout"));
        }
        Ok(m)
    }

    fn batch_matrix(rows: &[&[f64]], width: usize) -> Result<Array2<f64>> {
        let mut m = Array2::zeros((rows.len(), width));
        for (i, r) in rows.iter().enumerate() {
            if r.len() != width {
                return Err(Error::Shape {
                    context: "batch row",
                    expected: width,
                    actual: r.len(),
                });
            }
            m.row_mut(i).assign(&ndarray::ArrayView1::from(*r));
        }
        Ok(m)
    }

    fn q_values(actor: &Mlp, critic: &Mlp, obs: &Array2<f64>) -> Result<Vec<f64>> {
        let a = actor.forward_batch(obs.view())?;
        let input = ndarray::concatenate![ndarray::Axis(1), obs.view(), a.output().view()];
        let q = critic.forward_batch(input.view())?;
        Ok(q.output().column(0).to_vec())
    }

    /// Clipped `V̂(s‖g) = Q(s‖g, π(s‖g))` for a batch of observations.
    pub fn values(&self, obs_goals: &[&[f64]]) -> Result<Vec<f64>> {
        if obs_goals.is_empty() {
            return Ok(Vec::new());
        }
        let m = self.normalized_matrix(obs_goals)?;
        Ok(Self::q_values(&self.actor, &self.critic, &m)?
            .into_iter()
            .map(|v| self.clip_value(v))
            .collect())
    }

    pub fn value(&self, obs_goal: &[f64]) -> Result<f64> {
        Ok(self.values(&[obs_goal])?[0])
    }

    /// Clipped TD target `r + γ·Q'(s'‖g, π'(s'‖g))`.
    pub fn critic_target(&self, reward: f64, next_q: f64) -> f64 {
        self.clip_value(reward + self.gamma * next_q)
    }

    /// One critic step, one actor step and a soft target update on a minibatch.
    pub fn update(&mut self, buffer: &ReplayBuffer, batch_size: usize, rng: &mut Rng) -> Result<UpdateStats> {
        if buffer.len() < batch_size || batch_size == 0 {
            log::warn!(
                "replay buffer holds {} transitions, batch needs {batch_size}; skipping update",
                buffer.len()
            );
            return Ok(UpdateStats {
                skipped: true,
                ..UpdateStats::default()
            });
        }
        let batch = buffer.sample(batch_size, rng);
        self.update_on(&batch)
    }

    pub fn update_on(&mut self, batch: &[&Transition]) -> Result<UpdateStats> {
        let n = batch.len();
        let width = self.obs_len();
        let obs = self.normalized_matrix(&batch.iter().map(|t| t.obs_goal.as_slice()).collect::<Vec<_>>())?;
        let next = self.normalized_matrix(&batch.iter().map(|t| t.next_obs_goal.as_slice()).collect::<Vec<_>>())?;
        let mut actions = Array2::zeros((n, ACTION_DIM));
        for (i, t) in batch.iter().enumerate() {
            for j in 0..ACTION_DIM {
                actions[[i, j]] = t.action[j];
            }
        }

        // Critic.
        let next_q = Self::q_values(&self.target_actor, &self.target_critic, &next)?;
        let targets: Vec<f64> = batch
            .iter()
            .zip(&next_q)
            .map(|(t, &q)| self.critic_target(t.reward, q))
            .collect();
        let critic_in = ndarray::concatenate![ndarray::Axis(1), obs.view(), actions.view()];
        let cache = self.critic.forward_batch(critic_in.view())?;
        let q = cache.output().column(0).to_owned();
        let mut dq = Array2::zeros((n, 1));
        let mut critic_loss = 0.0;
        for i in 0..n {
            let err = q[i] - targets[i];
            critic_loss += err * err;
            dq[[i, 0]] = 2.0 * err / n as f64;
        }
        critic_loss /= n as f64;
        let (cg, _) = self.critic.backward(&cache, dq.view())?;
        self.critic_opt.step(&mut self.critic, &cg);

        // Actor: minimize −Q(s‖g, π(s‖g)) + action_l2·mean(π²).
        let a_cache = self.actor.forward_batch(obs.view())?;
        let pi = a_cache.output().mapv(|v| v * self.action_scale);
        let q_in = ndarray::concatenate![ndarray::Axis(1), obs.view(), pi.view()];
        let q_cache = self.critic.forward_batch(q_in.view())?;
        let q_pi = q_cache.output().column(0).to_owned();
        let y = a_cache.output();
        let l2_norm = (n * ACTION_DIM) as f64;
        let actor_loss = -q_pi.mean().unwrap_or(0.0) + self.action_l2 * y.mapv(|v| v * v).sum() / l2_norm;
        let dloss = Array2::from_elem((n, 1), -1.0 / n as f64);
        let (_, d_input) = self.critic.backward(&q_cache, dloss.view())?;
        let d_action = d_input.slice(s![.., width..]).mapv(|v| v * self.action_scale)
            + y.mapv(|v| 2.0 * self.action_l2 * v / l2_norm);
        let (ag, _) = self.actor.backward(&a_cache, d_action.view())?;
        self.actor_opt.step(&mut self.actor, &ag);

        self.soft_update();
        Ok(UpdateStats {
            critic_loss,
            actor_loss,
            mean_q: q.mean().unwrap_or(0.0),
            skipped: false,
        })
    }

    pub fn soft_update(&mut self) {
        self.target_actor.soft_update_from(&self.actor, self.tau);
        self.target_critic.soft_update_from(&self.critic, self.tau);
    }

    /// Values `V̂(s_0‖g)` of one start state for several candidate goals.
    pub fn start_values(&self, s0: &EnvState, goals: &[Vec3]) -> Result<Vec<f64>> {
        let obs: Vec<Vec<f64>> = goals.iter().map(|g| observe(s0, *g)).collect();
        let refs: Vec<&[f64]> = obs.iter().map(Vec::as_slice).collect();
        self.values(&refs)
    }
}

/// Everything besides weights that must match between training and evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentManifest {
    pub version: u32,
    pub scenario: String,
    pub observation_len: usize,
    pub gamma: f64,
    pub tau: f64,
    pub noise_sigma: f64,
    pub random_eps: f64,
    pub action_l2: f64,
    pub action_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentCheckpoint {
    pub manifest: AgentManifest,
    pub actor: NetCheckpoint,
    pub critic: NetCheckpoint,
    pub target_actor: NetCheckpoint,
    pub target_critic: NetCheckpoint,
    pub normalizer: Normalizer,
}

impl AgentCheckpoint {
    pub fn capture(agent: &DdpgAgent, scenario: &str) -> Self {
        Self {
            manifest: AgentManifest {
                version: AGENT_FORMAT_VERSION,
                scenario: scenario.to_string(),
                observation_len: agent.obs_len(),
                gamma: agent.gamma,
                tau: agent.tau,
                noise_sigma: agent.noise_sigma,
                random_eps: agent.random_eps,
                action_l2: agent.action_l2,
                action_scale: agent.action_scale,
            },
            actor: NetCheckpoint::capture(&agent.actor, Some(&agent.actor_opt)),
            critic: NetCheckpoint::capture(&agent.critic, Some(&agent.critic_opt)),
            target_actor: NetCheckpoint::capture(&agent.target_actor, None),
            target_critic: NetCheckpoint::capture(&agent.target_critic, None),
            normalizer: agent.normalizer.clone(),
        }
    }

    pub fn restore(&self) -> Result<DdpgAgent> {
        let m = &self.manifest;
        if m.version != AGENT_FORMAT_VERSION {
            return Err(Error::Manifest(format!("unsupported agent format version {}", m.version)));
        }
        let (actor, actor_opt) = self.actor.restore()?;
        let (critic, critic_opt) = self.critic.restore()?;
        let (target_actor, _) = self.target_actor.restore()?;
        let (target_critic, _) = self.target_critic.restore()?;
        if actor.input_len() != m.observation_len
            || critic.input_len() != m.observation_len + ACTION_DIM
            || self.normalizer.len() != m.observation_len
        {
            return Err(Error::Manifest("network input sizes disagree with manifest".into()));
        }
        let actor_opt = actor_opt.ok_or_else(|| Error::Manifest("actor optimizer state missing".into()))?;
        let critic_opt = critic_opt.ok_or_else(|| Error::Manifest("critic optimizer state missing".into()))?;
        Ok(DdpgAgent {
            actor,
            critic,
            target_actor,
            target_critic,
            actor_opt,
            critic_opt,
            gamma: m.gamma,
            tau: m.tau,
            noise_sigma: m.noise_sigma,
            random_eps: m.random_eps,
            action_l2: m.action_l2,
            action_scale: m.action_scale,
            normalizer: self.normalizer.clone(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Loads and checks that the checkpoint was trained on `scenario`.
    pub fn load_for(path: &Path, scenario: &str, observation_len: usize) -> Result<DdpgAgent> {
        let ck = Self::load(path)?;
        if ck.manifest.scenario != scenario {
            return Err(Error::Manifest(format!(
                "checkpoint trained on {} but evaluating {scenario}",
                ck.manifest.scenario
            )));
        }
        if ck.manifest.observation_len != observation_len {
            return Err(Error::Manifest(format!(
                "checkpoint expects observations of length {}, scenario produces {observation_len}",
                ck.manifest.observation_len
            )));
        }
        ck.restore()
    }
}
