//! Deep Q-network meta-feature selector.
//!
//! States are bitmasks over the 23 catalogue features, actions pick one
//! unselected feature, and rewards come from a [`RewardTable`]. Every
//! episode's terminal mask is scored by a [`SubsetScorer`] and the best one
//! becomes the selected meta-feature list.

pub mod env;
pub mod network;
pub mod replay;

use std::collections::BTreeMap;

use rand::seq::IteratorRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use env::{env_step, SelectionState, StepOutcome};
pub use network::Mlp;
pub use replay::{ReplayBuffer, Transition};

use crate::error::{Error, Result};
use crate::meta_learner::{cross_validated_accuracy, MetaForestParams};
use crate::metafeatures::{MetaFeatureList, MAX_SELECTED, N_META_FEATURES};
use crate::rewards::{MetaDataset, RewardTable};
use crate::seeds::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DqnParams {
    pub episodes: usize,
    pub learning_rate: f64,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Share of all steps over which epsilon decays linearly.
    pub decay_fraction: f64,
    pub minibatch: usize,
    pub target_sync: usize,
    pub replay_capacity: usize,
    pub hidden: usize,
    pub init_scale: f64,
    pub n_max: usize,
    pub seed: u64,
}

impl Default for DqnParams {
    fn default() -> Self {
        DqnParams {
            episodes: 300,
            learning_rate: 0.001,
            gamma: 0.9,
            epsilon_start: 1.0,
            epsilon_end: 0.1,
            decay_fraction: 0.5,
            minibatch: 32,
            target_sync: 100,
            replay_capacity: 200,
            hidden: 64,
            init_scale: 0.05,
            n_max: MAX_SELECTED,
            seed: 0,
        }
    }
}

impl DqnParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.episodes == 0 {
            return bad("at least one episode is required".into());
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return bad(format!("gamma {} outside [0, 1)", self.gamma));
        }
        for (name, e) in [("epsilon_start", self.epsilon_start), ("epsilon_end", self.epsilon_end)] {
            if !(0.0..=1.0).contains(&e) {
                return bad(format!("{name} {e} outside [0, 1]"));
            }
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate {} must be positive", self.learning_rate));
        }
        if self.n_max == 0 || self.n_max > MAX_SELECTED {
            return bad(format!("n_max {} outside 1..={MAX_SELECTED}", self.n_max));
        }
        if self.minibatch == 0 || self.target_sync == 0 || self.replay_capacity == 0 || self.hidden == 0 {
            return bad("minibatch, target sync, replay capacity and hidden width must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.decay_fraction) {
            return bad(format!("decay fraction {} outside [0, 1]", self.decay_fraction));
        }
        Ok(())
    }

    pub fn total_steps(&self) -> usize {
        self.episodes * self.n_max
    }

    /// Exploration rate before the `step`-th action (0-based).
    pub fn epsilon(&self, step: usize) -> f64 {
        let horizon = self.decay_fraction * self.total_steps() as f64;
        if horizon <= 0.0 {
            return self.epsilon_end;
        }
        let t = (step as f64 / horizon).min(1.0);
        self.epsilon_start + (self.epsilon_end - self.epsilon_start) * t
    }
}

/// Online network plus the frozen copy used for bootstrap targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QNetwork {
    pub online: Mlp,
    pub target: Mlp,
}

impl QNetwork {
    pub fn new(hidden: usize, scale: f64, seed: u64) -> QNetwork {
        let online = Mlp::new(&[N_META_FEATURES, hidden, hidden, N_META_FEATURES], scale, seed);
        QNetwork {
            target: online.clone(),
            online,
        }
    }

    pub fn sync(&mut self) {
        self.target = self.online.clone();
    }
}

/// Highest value among `candidates`, lowest index on ties.
fn best_of(values: &[f64], candidates: impl Iterator<Item = usize>) -> Option<usize> {
    let mut best: Option<usize> = None;
    for a in candidates {
        if best.is_none_or(|b| values[a] > values[b]) {
            best = Some(a);
        }
    }
    best
}

/// Epsilon-greedy over the unselected features.
pub fn select_action(net: &Mlp, state: SelectionState, epsilon: f64, rng: &mut impl Rng) -> Result<usize> {
    if state.legal_actions().next().is_none() {
        return Err(Error::Contract("no legal actions left".into()));
    }
    if rng.gen::<f64>() < epsilon {
        return Ok(state.legal_actions().choose(rng).expect("nonempty"));
    }
    let q = net.forward(&state.encode());
    Ok(best_of(&q, state.legal_actions()).expect("nonempty"))
}

/// Bootstrap targets `r + gamma * max_a' Q_target(s', a')`, or `r` on
/// terminal transitions.
pub fn q_targets(target: &Mlp, batch: &[Transition], gamma: f64) -> Vec<f64> {
    batch
        .iter()
        .map(|t| {
            if t.done {
                return t.reward;
            }
            let next = SelectionState { mask: t.next };
            let q = target.forward(&next.encode());
            match best_of(&q, next.legal_actions()) {
                Some(a) => t.reward + gamma * q[a],
                None => t.reward,
            }
        })
        .collect()
}

/// One SGD step of the online network towards the bootstrap targets.
/// Returns the batch loss before the step.
pub fn q_update(net: &mut QNetwork, batch: &[Transition], alpha: f64, gamma: f64) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument("empty minibatch".into()));
    }
    let targets = q_targets(&net.target, batch, gamma);
    let inputs: Vec<Vec<f64>> = batch.iter().map(|t| SelectionState { mask: t.state }.encode()).collect();
    let heads: Vec<usize> = batch.iter().map(|t| t.action).collect();
    let (loss, grad) = net.online.mse_gradient(&inputs, &heads, &targets);
    net.online.descend(&grad, alpha);
    Ok(loss)
}

/// Scores a candidate meta-feature subset; higher is better.
pub trait SubsetScorer: Sync {
    fn score(&self, indices: &[usize]) -> Result<f64>;
}

/// k-fold accuracy of the meta-learner on the projected meta-dataset.
pub struct CrossValidatedForest<'a> {
    pub md: &'a MetaDataset,
    pub folds: usize,
    pub forest: MetaForestParams,
}

impl SubsetScorer for CrossValidatedForest<'_> {
    fn score(&self, indices: &[usize]) -> Result<f64> {
        cross_validated_accuracy(self.md, indices, self.folds, &self.forest)
    }
}

/// Sum of the table rewards of the subset.
pub struct AdditiveRewards<'a>(pub &'a RewardTable);

impl SubsetScorer for AdditiveRewards<'_> {
    fn score(&self, indices: &[usize]) -> Result<f64> {
        Ok(indices.iter().map(|&i| self.0.get(i)).sum())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub mask: u32,
    pub steps: usize,
    pub total_reward: f64,
    pub epsilon_end: f64,
}

/// Stepwise trainer; [`train_dqn_with`] drives it to completion.
pub struct Agent<'a> {
    params: DqnParams,
    rewards: &'a RewardTable,
    net: QNetwork,
    buffer: ReplayBuffer,
    rng: ChaCha8Rng,
    steps: usize,
    syncs: usize,
}

impl<'a> Agent<'a> {
    pub fn new(rewards: &'a RewardTable, params: DqnParams) -> Result<Self> {
        params.validate()?;
        Ok(Agent {
            net: QNetwork::new(params.hidden, params.init_scale, derive_seed(params.seed, "dqn/init")),
            buffer: ReplayBuffer::new(params.replay_capacity),
            rng: ChaCha8Rng::seed_from_u64(derive_seed(params.seed, "dqn/agent")),
            rewards,
            params,
            steps: 0,
            syncs: 0,
        })
    }

    pub fn network(&self) -> &QNetwork {
        &self.net
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn syncs(&self) -> usize {
        self.syncs
    }

    pub fn epsilon(&self) -> f64 {
        self.params.epsilon(self.steps)
    }

    /// Act once from `state`, store the transition, learn, and sync the
    /// target network when the step counter hits the interval.
    pub fn step(&mut self, state: SelectionState) -> Result<StepOutcome> {
        let eps = self.epsilon();
        let action = select_action(&self.net.online, state, eps, &mut self.rng)?;
        let out = env_step(state, action, self.rewards, self.params.n_max)?;
        self.buffer.push(Transition {
            state: state.mask,
            action,
            reward: out.reward,
            next: out.next.mask,
            done: out.done,
        });
        if self.buffer.len() >= self.params.minibatch {
            let batch = self.buffer.sample(self.params.minibatch, &mut self.rng);
            q_update(&mut self.net, &batch, self.params.learning_rate, self.params.gamma)?;
        }
        self.steps += 1;
        if self.steps.is_multiple_of(self.params.target_sync) {
            self.net.sync();
            self.syncs += 1;
        }
        Ok(out)
    }

    pub fn run_episode(&mut self) -> Result<EpisodeRecord> {
        let mut state = SelectionState::START;
        let mut steps = 0;
        let mut total_reward = 0.0;
        loop {
            let out = self.step(state)?;
            steps += 1;
            total_reward += out.reward;
            state = out.next;
            if out.done {
                break;
            }
        }
        Ok(EpisodeRecord {
            mask: state.mask,
            steps,
            total_reward,
            epsilon_end: self.epsilon(),
        })
    }

    /// Pure greedy rollout of the current online network.
    pub fn greedy_mask(&self) -> Result<u32> {
        let mut state = SelectionState::START;
        while state.count() < self.params.n_max {
            let q = self.net.online.forward(&state.encode());
            let a = best_of(&q, state.legal_actions()).ok_or_else(|| Error::Contract("no legal actions left".into()))?;
            state = env_step(state, a, self.rewards, self.params.n_max)?.next;
        }
        Ok(state.mask)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DqnReport {
    pub selected: MetaFeatureList,
    pub score: f64,
    pub greedy: MetaFeatureList,
    pub episodes: Vec<EpisodeRecord>,
    /// Score of every distinct terminal mask, keyed by mask.
    pub scores: BTreeMap<u32, f64>,
}

fn indices_of(mask: u32) -> Vec<usize> {
    (0..N_META_FEATURES).filter(|&i| mask & (1 << i) != 0).collect()
}

/// Run every episode and keep the best-scoring terminal mask (fewer
/// features, then the lexicographically smaller index list, on ties).
pub fn train_dqn_with(rewards: &RewardTable, scorer: &dyn SubsetScorer, params: &DqnParams) -> Result<DqnReport> {
    let mut agent = Agent::new(rewards, *params)?;
    let mut episodes = Vec::with_capacity(params.episodes);
    for _ in 0..params.episodes {
        episodes.push(agent.run_episode()?);
    }
    let mut scores = BTreeMap::new();
    for e in &episodes {
        if let std::collections::btree_map::Entry::Vacant(slot) = scores.entry(e.mask) {
            slot.insert(scorer.score(&indices_of(e.mask))?);
        }
    }
    let mut best: Option<(u32, f64)> = None;
    for (&mask, &score) in &scores {
        let better = match best {
            None => true,
            Some((b, s)) => {
                score > s
                    || (score == s
                        && (mask.count_ones(), indices_of(mask)) < (b.count_ones(), indices_of(b)))
            }
        };
        if better {
            best = Some((mask, score));
        }
    }
    let (mask, score) = best.expect("at least one episode");
    Ok(DqnReport {
        selected: MetaFeatureList::from_mask(mask)?,
        score,
        greedy: MetaFeatureList::from_mask(agent.greedy_mask()?)?,
        episodes,
        scores,
    })
}

/// Select meta-features scored by cross-validated meta-learner accuracy.
pub fn train_dqn(rewards: &RewardTable, md: &MetaDataset, params: &DqnParams) -> Result<MetaFeatureList> {
    let scorer = CrossValidatedForest {
        md,
        folds: 5,
        forest: MetaForestParams {
            seed: derive_seed(params.seed, "dqn/score"),
            ..Default::default()
        },
    };
    Ok(train_dqn_with(rewards, &scorer, params)?.selected)
}
