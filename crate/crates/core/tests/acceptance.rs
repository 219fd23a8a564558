//! Acceptance suite: one line per criterion, non-zero exit when any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use autocash::data::{load_csv, CsvOptions, TargetColumn};
use autocash::dqn::{
    q_targets, q_update, train_dqn_with, AdditiveRewards, Agent, DqnParams, Mlp, QNetwork, SelectionState, Transition,
};
use autocash::ga::{evolve, optimize, Chromosome, GaParams};
use autocash::meta_learner::{cross_validated_accuracy, train_rf, MetaForestParams};
use autocash::metafeatures::{entropy, MetaFeatureList, MetaFeatureVector, N_META_FEATURES};
use autocash::metrics::{auc_binary, f_score};
use autocash::pipeline::{load_corpus, prepare, recommend, train_pipeline, TrainParams};
use autocash::portfolio::{AlgorithmId, Portfolio};
use autocash::rewards::{MetaDataset, MetaRow, RewardTable};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

fn within(start: Instant, budget: Duration) -> Result<Duration, String> {
    let took = start.elapsed();
    if took < budget {
        Ok(took)
    } else {
        Err(format!("took {took:.1?}, budget {budget:?}"))
    }
}

/// Area under the ROC polyline, integrating with trapezoids over tie groups.
fn trapezoid_auc(labels: &[bool], scores: &[f64]) -> f64 {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let p = labels.iter().filter(|&&l| l).count() as f64;
    let n = labels.len() as f64 - p;
    let (mut tp, mut fp, mut area) = (0.0, 0.0, 0.0);
    let mut i = 0;
    while i < order.len() {
        let (tp0, fp0) = (tp, fp);
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
            i += 1;
        }
        area += (fp - fp0) / n * (tp + tp0) / (2.0 * p);
    }
    area
}

fn metric_oracles() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.gen_range(2..=200);
        let levels = rng.gen_range(2..=50);
        let mut labels: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.4)).collect();
        labels[0] = true;
        labels[1] = false;
        let scores: Vec<f64> = (0..n).map(|_| rng.gen_range(0..levels) as f64 / levels as f64).collect();
        let auc = auc_binary(&labels, &scores).map_err(|e| e.to_string())?;
        worst = worst.max((auc - trapezoid_auc(&labels, &scores)).abs());
    }
    if worst > 1e-9 {
        return Err(format!("AUC differs from ROC integration by {worst:e}"));
    }
    for k in [2usize, 4, 8] {
        let h = entropy(&vec![1.0 / k as f64; k]).map_err(|e| e.to_string())?;
        if h != (k as f64).log2() {
            return Err(format!("entropy of uniform {k} is {h}"));
        }
    }
    let f = f_score(0.99, 0.5).map_err(|e| e.to_string())?;
    if f != 0.495 {
        return Err(format!("f_score(0.99, 0.5) = {f}"));
    }
    let took = within(start, Duration::from_secs(5))?;
    Ok(format!("max AUC deviation {worst:.1e} over 1000 instances, {took:.2?}"))
}

fn ga_convergence() -> Outcome {
    let start = Instant::now();
    let onemax = |c: &Chromosome| Some(c.ones() as f64);
    let mut solved = 0;
    for seed in 0..100 {
        let params = GaParams {
            population: 20,
            generations: 50,
            patience: 50,
            seed,
            ..GaParams::default()
        };
        let run = evolve(32, &[], &params, &onemax).map_err(|e| e.to_string())?;
        if run.history.windows(2).any(|w| w[1].best < w[0].best) {
            return Err(format!("seed {seed}: best fitness decreased"));
        }
        if run.history.iter().position(|g| g.best == 32.0).is_some_and(|g| g <= 50) {
            solved += 1;
        }
    }
    let took = within(start, Duration::from_secs(30))?;
    if solved < 95 {
        return Err(format!("optimum reached in {solved}/100 runs"));
    }
    Ok(format!("optimum in {solved}/100 runs, elitism held in all, {took:.2?}"))
}

fn hpo_dominance() -> Outcome {
    let start = Instant::now();
    let datasets = load_corpus(&data_dir().join("small"), &CsvOptions::default()).map_err(|e| e.to_string())?;
    if datasets.len() != 5 {
        return Err(format!("expected 5 bundled datasets, found {}", datasets.len()));
    }
    let portfolio = Portfolio::standard();
    let mut runs = 0;
    let mut improved = 0;
    for (k, d) in datasets.iter().enumerate() {
        let d = prepare(d, 0).map_err(|e| e.to_string())?;
        for spec in portfolio.algorithms() {
            let params = GaParams {
                seed: 100 + k as u64,
                ..GaParams::default()
            };
            let r = optimize(spec, &d, &params).map_err(|e| e.to_string())?;
            if r.outcome.f_score < r.default_outcome.f_score {
                return Err(format!(
                    "{} on {}: tuned {} < default {}",
                    spec.id,
                    d.name(),
                    r.outcome.f_score,
                    r.default_outcome.f_score
                ));
            }
            runs += 1;
            if r.outcome.f_score > r.default_outcome.f_score {
                improved += 1;
            }
        }
    }
    let took = within(start, Duration::from_secs(600))?;
    Ok(format!("{runs}/{runs} runs at or above default ({improved} strictly better), {took:.1?}"))
}

/// Best `k`-subset under the additive surrogate, by exhaustive enumeration.
fn brute_force_top3(rewards: &RewardTable) -> Vec<usize> {
    let mut best = (f64::NEG_INFINITY, vec![]);
    for a in 0..N_META_FEATURES {
        for b in a + 1..N_META_FEATURES {
            for c in b + 1..N_META_FEATURES {
                let s = rewards.get(a) + rewards.get(b) + rewards.get(c);
                if s > best.0 {
                    best = (s, vec![a, b, c]);
                }
            }
        }
    }
    best.1
}

fn dqn_subset_oracle() -> Outcome {
    let start = Instant::now();
    let top = [4, 11, 19];
    let rewards = RewardTable::new((0..N_META_FEATURES).map(|i| if top.contains(&i) { 0.9 } else { 0.1 }).collect())
        .map_err(|e| e.to_string())?;
    let oracle = brute_force_top3(&rewards);
    if oracle != top {
        return Err(format!("brute force found {oracle:?}"));
    }
    let mut hits = 0;
    let mut greedy_hits = 0;
    for seed in 0..20 {
        let params = DqnParams {
            episodes: 300,
            n_max: 3,
            seed,
            ..DqnParams::default()
        };
        let report = train_dqn_with(&rewards, &AdditiveRewards(&rewards), &params).map_err(|e| e.to_string())?;
        if report.selected.indices() == oracle {
            hits += 1;
        }
        if report.greedy.indices() == oracle {
            greedy_hits += 1;
        }
    }
    let took = within(start, Duration::from_secs(120))?;
    if hits < 18 {
        return Err(format!("top-3 set returned in {hits}/20 runs"));
    }
    Ok(format!("top-3 set returned in {hits}/20 runs (greedy rollout {greedy_hits}/20), {took:.1?}"))
}

fn gradient_correctness() -> Outcome {
    let start = Instant::now();
    let sizes = [N_META_FEATURES, 64, 64, N_META_FEATURES];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let h = 1e-5;
    let mut checked = 0usize;
    let mut worst: f64 = 0.0;
    for instance in 0..100 {
        let mut net = QNetwork {
            online: Mlp::randomized(&sizes, 0.5, rng.gen()),
            target: Mlp::randomized(&sizes, 0.5, rng.gen()),
        };
        let mut mask = 0u32;
        for _ in 0..rng.gen_range(0..8) {
            mask |= 1 << rng.gen_range(0..N_META_FEATURES);
        }
        let state = SelectionState { mask };
        let legal: Vec<usize> = state.legal_actions().collect();
        let action = legal[rng.gen_range(0..legal.len())];
        let t = Transition {
            state: mask,
            action,
            reward: rng.gen(),
            next: mask | 1 << action,
            done: rng.gen_bool(0.3),
        };
        let y = q_targets(&net.target, &[t], 0.9);
        let x = vec![state.encode()];
        let before = net.online.params();
        // with a unit step the applied update is the gradient itself
        q_update(&mut net, &[t], 1.0, 0.9).map_err(|e| e.to_string())?;
        let after = net.online.params();
        let analytic: Vec<f64> = before.iter().zip(&after).map(|(b, a)| b - a).collect();

        let mut probe = Mlp::randomized(&sizes, 0.0, 0);
        let mut params = before.clone();
        for _ in 0..300 {
            let k = rng.gen_range(0..params.len());
            params[k] = before[k] + h;
            probe.set_params(&params);
            let up = probe.mse_gradient(&x, &[action], &y).0;
            params[k] = before[k] - h;
            probe.set_params(&params);
            let down = probe.mse_gradient(&x, &[action], &y).0;
            params[k] = before[k];
            let numeric = (up - down) / (2.0 * h);
            let scale = numeric.abs().max(analytic[k].abs());
            if scale < 1e-10 {
                continue;
            }
            let rel = (numeric - analytic[k]).abs() / scale;
            worst = worst.max(rel);
            if rel > 1e-4 {
                return Err(format!("instance {instance}, parameter {k}: analytic {} vs numeric {numeric}", analytic[k]));
            }
            checked += 1;
        }
    }
    let took = within(start, Duration::from_secs(30))?;
    Ok(format!("{checked} parameters over 100 instances, worst relative error {worst:.1e}, {took:.1?}"))
}

fn meta_learner_fidelity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let labels = [AlgorithmId::KNearestNeighbors, AlgorithmId::DecisionTree, AlgorithmId::LogisticRegression];
    let rows = (0..100)
        .map(|i| {
            let mut v = [0.0; N_META_FEATURES];
            for x in v.iter_mut() {
                *x = rng.gen_range(0.0..10.0);
            }
            let label = labels[(v[7] / 10.0 * 3.0) as usize];
            MetaRow::new(format!("d{i}"), MetaFeatureVector::new(v), label)
        })
        .collect();
    let md = MetaDataset::new(rows).map_err(|e| e.to_string())?;
    let params = MetaForestParams { seed: 6, ..MetaForestParams::default() };
    let all: Vec<usize> = (0..N_META_FEATURES).collect();
    let acc = cross_validated_accuracy(&md, &all, 5, &params).map_err(|e| e.to_string())?;
    if acc < 0.9 {
        return Err(format!("5-fold accuracy {acc}"));
    }
    let forest = train_rf(&md, &MetaFeatureList::all(), &params).map_err(|e| e.to_string())?;
    for _ in 0..1000 {
        let x: Vec<f64> = (0..N_META_FEATURES).map(|_| rng.gen_range(-100.0..100.0)).collect();
        let p = forest.predict(&x).map_err(|e| e.to_string())?;
        if !labels.contains(&p) {
            return Err(format!("prediction {p} outside the trained labels"));
        }
    }
    let took = within(start, Duration::from_secs(10))?;
    Ok(format!("5-fold accuracy {acc:.2}, 1000 predictions inside the label set, {took:.2?}"))
}

fn end_to_end() -> Outcome {
    let portfolio = Portfolio::standard();
    let options = CsvOptions::default();
    let params = TrainParams { seed: 42, ..TrainParams::default() };
    let start = Instant::now();
    let artifact = train_pipeline(&data_dir().join("corpus"), &options, &portfolio, &params).map_err(|e| e.to_string())?;
    let iris = load_csv(data_dir().join("small/iris.csv"), &TargetColumn::Last, &options).map_err(|e| e.to_string())?;
    let ga = GaParams { seed: 42, ..GaParams::default() };
    let rec = recommend(&artifact, &iris, &ga, &portfolio).map_err(|e| e.to_string())?;
    let took = within(start, Duration::from_secs(60))?;

    if artifact.m_list.len() > 8 {
        return Err(format!("M_list has {} entries", artifact.m_list.len()));
    }
    if artifact.forest.n_trees() != 100 || artifact.provenance.datasets.len() != 10 {
        return Err("artifact shape differs from the training setup".into());
    }
    if !portfolio.ids().contains(&rec.algorithm) {
        return Err(format!("{} is not in the portfolio", rec.algorithm));
    }
    if rec.tuning.outcome.f_score < rec.tuning.default_outcome.f_score {
        return Err(format!(
            "tuned {} below default {}",
            rec.tuning.outcome.f_score, rec.tuning.default_outcome.f_score
        ));
    }
    let first = artifact.to_json().map_err(|e| e.to_string())?;
    let again = train_pipeline(&data_dir().join("corpus"), &options, &portfolio, &params).map_err(|e| e.to_string())?;
    if again.to_json().map_err(|e| e.to_string())? != first {
        return Err("rerun produced a different artifact".into());
    }
    Ok(format!(
        "M_list {:?}, recommended {} ({:.4} -> {:.4}), identical rerun, {took:.1?}",
        artifact.m_list.indices(),
        rec.algorithm,
        rec.tuning.default_outcome.f_score,
        rec.tuning.outcome.f_score
    ))
}

fn replay_and_target() -> Outcome {
    let start = Instant::now();
    let rewards = RewardTable::new((0..N_META_FEATURES).map(|i| (i % 5) as f64 / 5.0).collect()).map_err(|e| e.to_string())?;
    let params = DqnParams { seed: 8, ..DqnParams::default() };
    let mut agent = Agent::new(&rewards, params).map_err(|e| e.to_string())?;
    let mut log: Vec<Transition> = Vec::new();
    let mut target = agent.network().target.clone();
    let mut max_len = 0;
    for episode in 0..params.episodes {
        let mut state = SelectionState::START;
        let mut steps = 0;
        loop {
            let out = agent.step(state).map_err(|e| e.to_string())?;
            steps += 1;
            log.push(*agent.buffer().iter().last().expect("just pushed"));
            let len = agent.buffer().len();
            max_len = max_len.max(len);
            if len > 200 {
                return Err(format!("buffer holds {len} transitions"));
            }
            let kept: Vec<Transition> = agent.buffer().iter().copied().collect();
            if kept[..] != log[log.len() - len..] {
                return Err(format!("buffer is not the latest {len} transitions at step {}", agent.steps()));
            }
            let now = &agent.network().target;
            let sync_step = agent.steps() % params.target_sync == 0;
            if sync_step && now != &agent.network().online {
                return Err(format!("target not synced at step {}", agent.steps()));
            }
            if !sync_step && now != &target {
                return Err(format!("target changed off-schedule at step {}", agent.steps()));
            }
            target = now.clone();
            state = out.next;
            if out.done {
                break;
            }
        }
        if steps != params.n_max {
            return Err(format!("episode {episode} took {steps} steps"));
        }
    }
    let took = start.elapsed();
    Ok(format!(
        "{} steps, buffer peak {max_len}, {} target syncs, every episode {} steps, {took:.1?}",
        agent.steps(),
        agent.syncs(),
        params.n_max
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 metric oracles", metric_oracles),
        ("2 GA convergence", ga_convergence),
        ("3 HPO dominance", hpo_dominance),
        ("4 DQN subset oracle", dqn_subset_oracle),
        ("5 gradient correctness", gradient_correctness),
        ("6 meta-learner fidelity", meta_learner_fidelity),
        ("7 end-to-end", end_to_end),
        ("8 replay/target mechanics", replay_and_target),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
