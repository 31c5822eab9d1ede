//! Side-payment collusion: one agent inflates its report about a partner.
//!
//! cargo run --release --example collusion

use peershare::analysis::{
    belief_consistent_baseline, collusion_scan, default_truthful_predictions, CollusionBaseline, SizeCap,
};
use peershare::{DirectReport, MechanismConfig, PeerEvaluation, PeerPrediction, StrategyProfile};

fn main() -> peershare::Result<()> {
    // Peer evaluation: lying is free for the liar, so every inflation pays.
    let cfg = MechanismConfig::peer_evaluation(3, 6, 2);
    let truthful = StrategyProfile::new(
        vec![
            DirectReport::from_values(1, vec![1, 1], &cfg)?,
            DirectReport::from_values(2, vec![1, 1], &cfg)?,
            DirectReport::from_values(3, vec![1, 1], &cfg)?,
        ],
        &cfg,
    )?;
    let mech = PeerEvaluation::new(cfg)?;
    let found = collusion_scan(&mech, &CollusionBaseline::Profile(truthful), None, SizeCap::DEFAULT)?;
    println!("peer evaluation: {} profitable deviations", found.len());
    for c in found.iter().take(3) {
        println!(
            "  {} -> {}: {:?} liar {} partner {} window {:?}",
            c.liar, c.beneficiary, c.deviation.values(), c.liar_delta, c.beneficiary_delta, c.side_payment_window
        );
    }

    // Peer prediction with a small score weight is still exploitable.
    let cfg = MechanismConfig::peer_prediction(3, 12, 2, 1);
    let mech = PeerPrediction::new(cfg.clone())?;
    let truthful = default_truthful_predictions(&cfg)?;
    let beliefs = cfg
        .agents()
        .map(|a| belief_consistent_baseline(&mech, &truthful, a))
        .collect::<peershare::Result<Vec<_>>>()?;
    let baseline = CollusionBaseline::Beliefs { truthful, beliefs };
    let filter = |liar: usize, partner: usize| liar == 1 && partner == 2;
    for c in collusion_scan(&mech, &baseline, Some(&filter), SizeCap::DEFAULT)? {
        println!(
            "peer prediction alpha=1: 1 -> 2 via {:?}: joint gain {}",
            c.deviation.histogram(2),
            c.joint_gain
        );
    }
    Ok(())
}
