//! Train the Q-learning selector on a hand-made reward table where three
//! meta-features clearly dominate.

use autocash::dqn::{train_dqn_with, AdditiveRewards, DqnParams};
use autocash::metafeatures::N_META_FEATURES;
use autocash::rewards::RewardTable;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let top = [2, 9, 17];
    let rewards = RewardTable::new((0..N_META_FEATURES).map(|i| if top.contains(&i) { 0.9 } else { 0.1 }).collect())?;
    let params = DqnParams { n_max: 3, seed: 4, ..DqnParams::default() };
    let report = train_dqn_with(&rewards, &AdditiveRewards(&rewards), &params)?;

    for (i, e) in report.episodes.iter().enumerate().step_by(30) {
        println!("episode {i:>3}  reward {:.1}  epsilon {:.2}  mask {:023b}", e.total_reward, e.epsilon_end, e.mask);
    }
    println!("selected {:?} (score {:.1})", report.selected.indices(), report.score);
    println!("greedy   {:?}", report.greedy.indices());
    Ok(())
}
