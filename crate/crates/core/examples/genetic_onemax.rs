//! The genetic optimiser on a bare bit-counting objective.

use autocash::ga::{evolve, Chromosome, GaParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let len = 32;
    let onemax = |c: &Chromosome| Some(c.ones() as f64);
    let mut solved = 0;
    for seed in 0..20 {
        let params = GaParams { seed, patience: 50, ..GaParams::default() };
        let run = evolve(len, &[], &params, &onemax)?;
        if run.best_fitness == len as f64 {
            solved += 1;
        }
        println!("seed {seed:>2}: {} after {:>2} generations  {}", run.best_fitness, run.generations(), run.best);
    }
    println!("optimum reached in {solved}/20 runs");
    Ok(())
}
