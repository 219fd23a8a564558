use crate::error::{Error, Result};
use crate::metafeatures::N_META_FEATURES;
use crate::rewards::RewardTable;

/// Selected meta-features as a bitmask; bit `i` set means feature `i` is in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct SelectionState {
    pub mask: u32,
}

impl SelectionState {
    pub const START: SelectionState = SelectionState { mask: 0 };

    pub fn count(self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_selected(self, feature: usize) -> bool {
        self.mask & (1 << feature) != 0
    }

    pub fn legal_actions(self) -> impl Iterator<Item = usize> {
        (0..N_META_FEATURES).filter(move |&a| !self.is_selected(a))
    }

    /// Network input: one 0/1 entry per catalogue feature.
    pub fn encode(self) -> Vec<f64> {
        (0..N_META_FEATURES).map(|i| f64::from(u8::from(self.is_selected(i)))).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub next: SelectionState,
    pub reward: f64,
    pub done: bool,
}

/// Select `action`; the reward is that feature's table entry and the episode
/// ends once `n_max` features are chosen.
pub fn env_step(state: SelectionState, action: usize, rewards: &RewardTable, n_max: usize) -> Result<StepOutcome> {
    if action >= N_META_FEATURES {
        return Err(Error::Contract(format!("action {action} out of range")));
    }
    if state.is_selected(action) {
        return Err(Error::Contract(format!("meta-feature {action} already selected")));
    }
    let next = SelectionState {
        mask: state.mask | 1 << action,
    };
    Ok(StepOutcome {
        next,
        reward: rewards.get(action),
        done: next.count() >= n_max,
    })
}
