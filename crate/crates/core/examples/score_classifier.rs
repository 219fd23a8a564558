//! Accuracy, rank-based AUC and the composite score for one fitted model.

use autocash::metrics::{accuracy, auc_binary, evaluate, f_score};
use autocash::portfolio::{fit, AlgorithmId, Portfolio};
use autocash::synthetic;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // the cancer screening example: 99% accuracy, no ranking ability
    println!("f_score(0.99, 0.5) = {}", f_score(0.99, 0.5)?);

    let d = synthetic::imbalanced(300, 0.2, 8);
    let (train, test) = d.split_stratified(0.8, 8)?;
    let portfolio = Portfolio::standard();
    let spec = portfolio.get(AlgorithmId::LogisticRegression)?;
    let model = fit(spec, &spec.default_config, &train, 1)?;
    let p = model.predict_dataset(&test)?;
    let truth = test.labels();
    let acc = accuracy(&truth, &p.labels)?;
    let positives: Vec<bool> = truth.iter().map(|&t| t == 1).collect();
    let scores: Vec<f64> = p.probabilities.iter().map(|q| q[1]).collect();
    let auc = auc_binary(&positives, &scores)?;
    println!("accuracy {acc:.4}  auc {auc:.4}  f_score {:.4}", f_score(acc, auc)?);

    for id in AlgorithmId::ALL {
        let spec = portfolio.get(id)?;
        let o = evaluate(spec, &spec.default_config, &d, 8)?;
        println!("{:<22} accuracy {:.4}  auc {:.4}  f_score {:.4}", id.as_str(), o.accuracy, o.auc, o.f_score);
    }
    Ok(())
}
