//! Direct peer evaluation on a small team, loaded from a JSON document.
//!
//! cargo run --example peer_evaluation

use peershare::io::load_document;
use peershare::{compute_shares, DirectReport, PeerEvaluation, SharingMechanism, StrategyProfile};

fn main() -> peershare::Result<()> {
    let doc = load_document(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/alg1_n3.json"))?;
    let result = compute_shares(&doc.config, &doc.profile)?;
    println!("n={} V={} M={}", doc.config.n, doc.config.reward, doc.config.cap);
    for agent in doc.config.agents() {
        println!("agent {agent}: points received {} -> share {}", result.grades[agent - 1], result.share(agent));
    }
    println!("surplus {}", result.surplus);

    // Agent 3 moves a point from agent 2 to agent 1. Its own share cannot move.
    let mech = PeerEvaluation::new(doc.config.clone())?;
    let peershare::Profile::Direct(profile) = &doc.profile else { unreachable!() };
    let shifted = DirectReport::from_values(3, vec![2, 1], &doc.config)?;
    let after = mech.shares(&profile.with_report(shifted))?;
    println!(
        "after agent 3 changes its report: shares {}",
        after.shares.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
    );
    assert_eq!(after.share(3), result.share(3));

    // Built in code instead of JSON.
    let config = peershare::MechanismConfig::peer_evaluation(4, 100, 10);
    let reports = vec![
        DirectReport::from_values(1, vec![5, 3, 2], &config)?,
        DirectReport::from_values(2, vec![4, 4, 2], &config)?,
        DirectReport::from_values(3, vec![6, 2, 2], &config)?,
        DirectReport::from_values(4, vec![3, 3, 4], &config)?,
    ];
    let result = PeerEvaluation::new(config.clone())?.shares(&StrategyProfile::new(reports, &config)?)?;
    for (i, share) in result.shares.iter().enumerate() {
        println!("team member {}: {} ({})", i + 1, share, share.to_decimal_string(2));
    }
    Ok(())
}
