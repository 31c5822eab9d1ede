//! Best responses under beliefs about the other agents' reports.
//!
//! cargo run --release --example best_response

use peershare::analysis::{best_response_scan, properness_check, Belief, SizeCap};
use peershare::io::load_document;
use peershare::{Distribution, MechanismConfig, PeerPrediction, Profile, Rational};

fn main() -> peershare::Result<()> {
    let doc = load_document(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/alg2_symmetric.json"))?;
    let Profile::Prediction(profile) = &doc.profile else { unreachable!() };
    let mech = PeerPrediction::new(doc.config.clone())?;

    let belief = Belief::from_profile(profile, 1);
    let best = best_response_scan(&mech, 1, &belief, SizeCap::DEFAULT)?;
    println!("agent 1 knows the others' forecasts: best value {} over {} reports", best.value, best.evaluated);
    for r in &best.reports {
        println!("  {r:?}");
    }

    // Uncertain about the others: half the time they forecast (1,1,0).
    let cfg = &doc.config;
    let low = peershare::PredictionReport::uniform(2, vec![1, 1, 0], cfg)?;
    let other = peershare::PredictionReport::uniform(3, vec![1, 1, 0], cfg)?;
    let mixed = Belief::new(vec![
        (profile.opponents(1), Rational::new(1, 2)),
        (vec![low, other], Rational::new(1, 2)),
    ])?;
    let best = best_response_scan(&mech, 1, &mixed, SizeCap::DEFAULT)?;
    println!("mixed belief: best value {}, {} maximizer(s)", best.value, best.reports.len());

    // Score-maximizing forecasts are the feasible histograms nearest to q.
    let cfg = MechanismConfig::peer_prediction(4, 12, 2, 1);
    let q = Distribution::new(vec![Rational::new(1, 5), Rational::new(1, 2), Rational::new(3, 10)])?;
    let p = properness_check(&cfg, &q, SizeCap::DEFAULT)?;
    println!("q = (1/5, 1/2, 3/10): argmax {:?} nearest {:?} agree {}", p.argmax, p.nearest, p.holds);
    Ok(())
}
