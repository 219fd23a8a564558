//! Genetic-algorithm hyperparameter optimisation over binary-encoded
//! configurations, and per-hyperparameter screening.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::metrics::{evaluate, EvaluationOutcome};
use crate::portfolio::{AlgorithmId, AlgorithmSpec, Config};
use crate::seeds::derive_seed;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Chromosome {
    pub bits: Vec<bool>,
}

impl Chromosome {
    pub fn new(bits: Vec<bool>) -> Self {
        Chromosome { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

impl std::fmt::Display for Chromosome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.bits.iter().try_for_each(|&b| f.write_str(if b { "1" } else { "0" }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaParams {
    pub population: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    /// Per-bit flip probability; `None` means `1 / chromosome length`.
    pub mutation_prob: Option<f64>,
    pub tournament: usize,
    pub elitism: usize,
    /// Stop after this many generations without a strict improvement.
    pub patience: usize,
    pub seed: u64,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams {
            population: 20,
            generations: 50,
            crossover_prob: 0.9,
            mutation_prob: None,
            tournament: 3,
            elitism: 1,
            patience: 10,
            seed: 0,
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_owned()));
        if self.population < 2 {
            return bad("population must be at least 2");
        }
        if self.generations < 1 {
            return bad("generations must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.crossover_prob) {
            return bad("crossover probability outside [0, 1]");
        }
        if self.mutation_prob.is_some_and(|p| !(0.0..=1.0).contains(&p)) {
            return bad("mutation probability outside [0, 1]");
        }
        if self.tournament < 1 {
            return bad("tournament size must be at least 1");
        }
        if self.elitism >= self.population {
            return bad("elitism must leave room for offspring");
        }
        Ok(())
    }
}

fn write_code(bits: &mut Vec<bool>, code: u64, width: u32) {
    for k in (0..width).rev() {
        bits.push(code >> k & 1 == 1);
    }
}

fn read_code(bits: &[bool]) -> u64 {
    bits.iter().fold(0, |acc, &b| acc << 1 | u64::from(b))
}

/// Total width of the tunable fields of `spec`.
pub fn chromosome_len(spec: &AlgorithmSpec) -> usize {
    spec.tunable().map(|h| h.bits as usize).sum()
}

/// Concatenate the smallest code of each tunable value, most significant
/// bit first, in declaration order.
pub fn encode(spec: &AlgorithmSpec, config: &Config) -> Result<Chromosome> {
    let mut bits = Vec::with_capacity(chromosome_len(spec));
    for h in spec.tunable() {
        let value = config.get(&h.name).ok_or_else(|| Error::Config {
            algorithm: spec.id.to_string(),
            message: format!("missing `{}`", h.name),
        })?;
        let code = h.domain.encode(value, h.bits).ok_or_else(|| Error::Config {
            algorithm: spec.id.to_string(),
            message: format!("`{}` = {value} is outside its domain", h.name),
        })?;
        write_code(&mut bits, code, h.bits);
    }
    Ok(Chromosome::new(bits))
}

/// Tunable fields come from the chromosome, the rest from the defaults.
pub fn decode(spec: &AlgorithmSpec, c: &Chromosome) -> Result<Config> {
    if c.len() != chromosome_len(spec) {
        return Err(Error::InvalidArgument(format!(
            "chromosome has {} bits, `{}` expects {}",
            c.len(),
            spec.id,
            chromosome_len(spec)
        )));
    }
    let mut config = spec.default_config.clone();
    let mut at = 0;
    for h in spec.tunable() {
        let width = h.bits as usize;
        config.insert(h.name.clone(), h.domain.decode(read_code(&c.bits[at..at + width]), h.bits));
        at += width;
    }
    Ok(config)
}

/// Single-point exchange at `cut`: `a[..cut] + b[cut..]` and `b[..cut] + a[cut..]`.
pub fn crossover_at(a: &Chromosome, b: &Chromosome, cut: usize) -> Result<(Chromosome, Chromosome)> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!("length mismatch: {} vs {}", a.len(), b.len())));
    }
    if cut > a.len() {
        return Err(Error::InvalidArgument(format!("cut {cut} beyond length {}", a.len())));
    }
    let join = |x: &Chromosome, y: &Chromosome| Chromosome::new([&x.bits[..cut], &y.bits[cut..]].concat());
    Ok((join(a, b), join(b, a)))
}

/// With probability `prob`, cut at a uniform point in `1..len` and exchange
/// tails; otherwise return the parents.
pub fn crossover(a: &Chromosome, b: &Chromosome, prob: f64, rng: &mut impl Rng) -> Result<(Chromosome, Chromosome)> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!("length mismatch: {} vs {}", a.len(), b.len())));
    }
    if a.len() < 2 || !rng.gen_bool(prob) {
        return Ok((a.clone(), b.clone()));
    }
    crossover_at(a, b, rng.gen_range(1..a.len()))
}

/// Flip each bit independently with probability `rate`.
pub fn mutate(c: &Chromosome, rate: f64, rng: &mut impl Rng) -> Chromosome {
    let rate = rate.clamp(0.0, 1.0);
    Chromosome::new(c.bits.iter().map(|&b| b ^ rng.gen_bool(rate)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    /// Individuals whose fitness evaluation failed (scored 0).
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub best: Chromosome,
    pub best_fitness: f64,
    /// Entry 0 is the initial population.
    pub history: Vec<GenerationStats>,
    /// Distinct genotypes evaluated.
    pub evaluations: usize,
}

impl Evolution {
    /// Evolutionary iterations performed after initialisation.
    pub fn generations(&self) -> usize {
        self.history.len().saturating_sub(1)
    }
}

/// Fitness value, or `None` for a failed evaluation (scored 0).
pub trait Fitness: Sync {
    fn fitness(&self, c: &Chromosome) -> Option<f64>;
}

impl<F: Fn(&Chromosome) -> Option<f64> + Sync> Fitness for F {
    fn fitness(&self, c: &Chromosome) -> Option<f64> {
        self(c)
    }
}

/// Maximise `fitness` over `len`-bit strings.
///
/// `seeds` replace the first individuals of the random initial population.
/// Fitness values are cached per genotype for the whole run.
pub fn evolve(len: usize, seeds: &[Chromosome], params: &GaParams, fitness: &impl Fitness) -> Result<Evolution> {
    params.validate()?;
    if seeds.iter().any(|s| s.len() != len) {
        return Err(Error::InvalidArgument("seed individual has the wrong length".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(params.seed, "evolution"));
    let rate = params.mutation_prob.unwrap_or(1.0 / len.max(1) as f64);
    let mut cache: HashMap<Chromosome, Option<f64>> = HashMap::new();

    let mut population: Vec<Chromosome> = seeds.iter().take(params.population).cloned().collect();
    while population.len() < params.population {
        population.push(Chromosome::new((0..len).map(|_| rng.gen_bool(0.5)).collect()));
    }

    let mut scores = score(&population, &mut cache, fitness);
    let mut history = vec![stats(0, &scores)];
    let (mut best, mut best_fitness) = fittest(&population, &scores);
    let mut stagnant = 0;

    for generation in 1..=params.generations {
        let mut ranked: Vec<usize> = (0..population.len()).collect();
        ranked.sort_by(|&a, &b| value(&scores[b]).total_cmp(&value(&scores[a])));
        let mut next: Vec<Chromosome> = ranked[..params.elitism].iter().map(|&i| population[i].clone()).collect();

        while next.len() < params.population {
            let a = tournament(&scores, params.tournament, &mut rng);
            let b = tournament(&scores, params.tournament, &mut rng);
            let (c1, c2) = crossover(&population[a], &population[b], params.crossover_prob, &mut rng)?;
            next.push(mutate(&c1, rate, &mut rng));
            if next.len() < params.population {
                next.push(mutate(&c2, rate, &mut rng));
            }
        }
        population = next;
        scores = score(&population, &mut cache, fitness);
        history.push(stats(generation, &scores));

        let (champion, champion_fitness) = fittest(&population, &scores);
        if champion_fitness > best_fitness {
            best = champion;
            best_fitness = champion_fitness;
            stagnant = 0;
        } else {
            stagnant += 1;
            if stagnant >= params.patience {
                break;
            }
        }
    }
    Ok(Evolution {
        best,
        best_fitness,
        history,
        evaluations: cache.len(),
    })
}

fn value(score: &Option<f64>) -> f64 {
    score.unwrap_or(0.0)
}

fn score(population: &[Chromosome], cache: &mut HashMap<Chromosome, Option<f64>>, fitness: &impl Fitness) -> Vec<Option<f64>> {
    let mut fresh: Vec<&Chromosome> = population.iter().filter(|c| !cache.contains_key(*c)).collect();
    fresh.sort_by(|a, b| a.bits.cmp(&b.bits));
    fresh.dedup();
    let computed: Vec<Option<f64>> = fresh.par_iter().map(|c| fitness.fitness(c)).collect();
    for (c, f) in fresh.into_iter().zip(computed) {
        cache.insert(c.clone(), f);
    }
    population.iter().map(|c| cache[c]).collect()
}

fn stats(generation: usize, scores: &[Option<f64>]) -> GenerationStats {
    GenerationStats {
        generation,
        best: scores.iter().map(value).fold(f64::NEG_INFINITY, f64::max),
        mean: scores.iter().map(value).sum::<f64>() / scores.len() as f64,
        failures: scores.iter().filter(|s| s.is_none()).count(),
    }
}

/// Highest fitness, earliest index on ties.
fn fittest(population: &[Chromosome], scores: &[Option<f64>]) -> (Chromosome, f64) {
    let mut best = 0;
    for i in 1..population.len() {
        if value(&scores[i]) > value(&scores[best]) {
            best = i;
        }
    }
    (population[best].clone(), value(&scores[best]))
}

fn tournament(scores: &[Option<f64>], size: usize, rng: &mut impl Rng) -> usize {
    let mut winner = rng.gen_range(0..scores.len());
    for _ in 1..size {
        let challenger = rng.gen_range(0..scores.len());
        if value(&scores[challenger]) > value(&scores[winner]) {
            winner = challenger;
        }
    }
    winner
}

/// Outcome of tuning one algorithm on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HpoResult {
    pub algorithm: AlgorithmId,
    pub config: Config,
    pub outcome: EvaluationOutcome,
    pub default_outcome: EvaluationOutcome,
    /// Seed of the evaluation split shared by every fitness call.
    pub split_seed: u64,
    pub history: Vec<GenerationStats>,
    pub generations: usize,
    pub evaluations: usize,
}

/// Tune the tunable hyperparameters of `spec` on `d`.
///
/// Fitness is the composite score on one split drawn with `params.seed`;
/// the default configuration seeds the initial population, so the result
/// never scores below it. Failed evaluations score 0.
pub fn optimize(spec: &AlgorithmSpec, d: &Dataset, params: &GaParams) -> Result<HpoResult> {
    let split_seed = params.seed;
    let default_outcome = evaluate(spec, &spec.default_config, d, split_seed)?;
    let len = chromosome_len(spec);
    if len == 0 {
        return Ok(HpoResult {
            algorithm: spec.id,
            config: spec.default_config.clone(),
            outcome: default_outcome,
            default_outcome,
            split_seed,
            history: Vec::new(),
            generations: 0,
            evaluations: 1,
        });
    }
    let default = encode(spec, &spec.default_config)?;
    let fitness = |c: &Chromosome| {
        let config = decode(spec, c).ok()?;
        evaluate(spec, &config, d, split_seed).ok().map(|o| o.f_score)
    };
    let run = evolve(len, std::slice::from_ref(&default), params, &fitness)?;
    let config = decode(spec, &run.best)?;
    let outcome = if run.best == default {
        default_outcome
    } else {
        evaluate(spec, &config, d, split_seed)?
    };
    Ok(HpoResult {
        algorithm: spec.id,
        config,
        outcome,
        default_outcome,
        split_seed,
        generations: run.generations(),
        evaluations: run.evaluations,
        history: run.history,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamImprovement {
    pub name: String,
    /// Mean of (tuned - default) composite score over the datasets.
    pub improvement: f64,
    pub tunable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningReport {
    pub spec: AlgorithmSpec,
    pub improvements: Vec<ParamImprovement>,
}

/// Tune each hyperparameter alone (others at their defaults) on every
/// dataset and keep it tunable when the mean gain reaches `threshold`.
pub fn screen_hyperparameters(
    spec: &AlgorithmSpec,
    datasets: &[Dataset],
    threshold: f64,
    params: &GaParams,
) -> Result<ScreeningReport> {
    if datasets.is_empty() {
        return Err(Error::InvalidArgument("screening needs at least one dataset".into()));
    }
    if spec.hyperparameters.is_empty() {
        return Err(Error::InvalidArgument(format!("`{}` has no hyperparameters", spec.id)));
    }
    let mut screened = spec.clone();
    let mut improvements = Vec::new();
    for (i, h) in spec.hyperparameters.iter().enumerate() {
        let mut solo = spec.clone();
        for (j, other) in solo.hyperparameters.iter_mut().enumerate() {
            other.tunable = i == j;
        }
        let mut total = 0.0;
        for (k, d) in datasets.iter().enumerate() {
            let run_params = GaParams {
                seed: derive_seed(params.seed, &format!("screen/{}/{k}", h.name)),
                ..*params
            };
            let result = optimize(&solo, d, &run_params)?;
            total += result.outcome.f_score - result.default_outcome.f_score;
        }
        let improvement = total / datasets.len() as f64;
        let tunable = improvement >= threshold;
        screened.hyperparameters[i].tunable = tunable;
        improvements.push(ParamImprovement {
            name: h.name.clone(),
            improvement,
            tunable,
        });
    }
    Ok(ScreeningReport {
        spec: screened,
        improvements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::portfolio::{ParamValue, Portfolio};

    fn bits(s: &str) -> Chromosome {
        Chromosome::new(s.chars().map(|c| c == '1').collect())
    }

    #[test]
    fn crossover_exchanges_tails() {
        let (c, d) = crossover_at(&bits("0000"), &bits("1111"), 2).unwrap();
        assert_eq!((c.to_string(), d.to_string()), ("0011".into(), "1100".into()));
        let a = bits("1010");
        let (c, d) = crossover(&a, &a, 1.0, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!((c, d), (a.clone(), a.clone()));
        assert!(crossover_at(&bits("01"), &bits("011"), 1).is_err());
        let (c, d) = crossover(&bits("0000"), &bits("1111"), 0.0, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!((c, d), (bits("0000"), bits("1111")));
    }

    #[test]
    fn mutation_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = bits("0110");
        assert_eq!(mutate(&c, 0.0, &mut rng), c);
        assert_eq!(mutate(&c, 1.0, &mut rng), bits("1001"));
    }

    #[test]
    fn mutation_rate_monte_carlo() {
        let c = Chromosome::new(vec![false; 32]);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let trials = 10_000;
        let flips: usize = (0..trials).map(|_| mutate(&c, 1.0 / 32.0, &mut rng).ones()).sum();
        let mean = flips as f64 / trials as f64;
        assert!((mean - 1.0).abs() <= 0.1, "mean flips {mean}");
    }

    #[test]
    fn encode_decode_every_algorithm() {
        for spec in Portfolio::standard().algorithms() {
            let c = encode(spec, &spec.default_config).unwrap();
            assert_eq!(c.len(), chromosome_len(spec));
            assert_eq!(decode(spec, &c).unwrap(), spec.default_config);
            // exhaustive over each parameter while the others stay at default
            for h in spec.tunable() {
                for v in h.domain.values() {
                    let mut config = spec.default_config.clone();
                    config.insert(h.name.clone(), v);
                    assert_eq!(decode(spec, &encode(spec, &config).unwrap()).unwrap(), config);
                }
            }
        }
    }

    #[test]
    fn encode_rejects_out_of_domain() {
        let p = Portfolio::standard();
        let spec = p.get(AlgorithmId::KNearestNeighbors).unwrap();
        let mut config = spec.default_config.clone();
        config.insert("k".into(), ParamValue::Int(40));
        assert!(encode(spec, &config).is_err());
        assert!(decode(spec, &bits("1")).is_err());
    }

    #[test]
    fn knn_field_layout() {
        let p = Portfolio::standard();
        let spec = p.get(AlgorithmId::KNearestNeighbors).unwrap();
        let mut config = spec.default_config.clone();
        config.insert("k".into(), ParamValue::Int(32));
        config.insert("weighting".into(), ParamValue::Text("inverse-distance".into()));
        assert_eq!(encode(spec, &config).unwrap().to_string(), "111111");
    }

    #[test]
    fn onemax_reaches_optimum_and_is_monotone() {
        let onemax = |c: &Chromosome| Some(c.ones() as f64);
        let params = GaParams { seed: 5, patience: 50, ..GaParams::default() };
        let run = evolve(32, &[], &params, &onemax).unwrap();
        assert_eq!(run.best_fitness, 32.0);
        assert!(run.history.windows(2).all(|w| w[1].best >= w[0].best));
        assert!(run.generations() <= 50);
    }

    #[test]
    fn frozen_population_is_a_fixed_point() {
        let same = bits("10110");
        let params = GaParams {
            crossover_prob: 0.0,
            mutation_prob: Some(0.0),
            population: 6,
            generations: 3,
            ..GaParams::default()
        };
        let fitness = |c: &Chromosome| Some(c.ones() as f64);
        let run = evolve(5, &vec![same.clone(); 6], &params, &fitness).unwrap();
        assert_eq!(run.best, same);
        assert_eq!(run.evaluations, 1);
        assert!(run.history.iter().all(|h| h.best == 3.0 && h.mean == 3.0));
    }

    #[test]
    fn failures_score_zero() {
        let fitness = |c: &Chromosome| if c.bits[0] { None } else { Some(1.0) };
        let params = GaParams { generations: 2, ..GaParams::default() };
        let run = evolve(4, &[], &params, &fitness).unwrap();
        assert_eq!(run.best_fitness, 1.0);
        assert!(run.history.iter().any(|h| h.failures > 0));
    }

    #[test]
    fn params_validation() {
        assert!(GaParams { population: 1, ..GaParams::default() }.validate().is_err());
        assert!(GaParams { generations: 0, ..GaParams::default() }.validate().is_err());
        assert!(GaParams { crossover_prob: 1.5, ..GaParams::default() }.validate().is_err());
        assert!(GaParams::default().validate().is_ok());
    }
}
