//! Peer prediction: agents forecast the histogram of evaluations each peer
//! receives and are paid for both the expected evaluation they get and the
//! accuracy of their own forecasts.
//!
//! cargo run --example peer_prediction

use peershare::io::load_document;
use peershare::{
    MechanismConfig, PeerPrediction, PredictionReport, Profile, SharingMechanism, StrategyProfile,
};

fn print(label: &str, result: &peershare::ShareResult) {
    println!("{label}");
    for i in 0..result.shares.len() {
        println!(
            "  agent {}: grade {} score {} share {}",
            i + 1,
            result.grades[i],
            result.scores[i],
            result.shares[i]
        );
    }
    println!("  surplus {}", result.surplus);
}

fn main() -> peershare::Result<()> {
    let doc = load_document(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/alg2_symmetric.json"))?;
    let Profile::Prediction(profile) = &doc.profile else { unreachable!() };
    let mech = PeerPrediction::new(doc.config.clone())?;
    print("symmetric forecasts", &mech.shares(profile)?);

    // Agent 1 now claims agent 2 will receive top marks from everyone.
    let cfg = &doc.config;
    let lie = PredictionReport::from_histograms(1, vec![vec![0, 0, 2], vec![0, 2, 0]], cfg)?;
    let result = mech.shares(&profile.with_report(lie))?;
    print("agent 1 inflates agent 2", &result);
    println!("  events scored for agent 1: {:?}", result.scored_events[0]);

    // A larger instance with a heavier score weight.
    let cfg = MechanismConfig::peer_prediction(4, 60, 2, 3);
    let reports = vec![
        PredictionReport::from_histograms(1, vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 1, 0]], &cfg)?,
        PredictionReport::from_histograms(2, vec![vec![1, 1, 1], vec![0, 3, 0], vec![1, 2, 0]], &cfg)?,
        PredictionReport::from_histograms(3, vec![vec![0, 2, 1], vec![0, 1, 2], vec![2, 1, 0]], &cfg)?,
        PredictionReport::from_histograms(4, vec![vec![1, 1, 1], vec![0, 1, 2], vec![0, 3, 0]], &cfg)?,
    ];
    let mech = PeerPrediction::new(cfg.clone())?;
    print("n=4, alpha=3", &mech.shares(&StrategyProfile::new(reports, &cfg)?)?);
    Ok(())
}
