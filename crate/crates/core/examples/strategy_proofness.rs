//! Exhaustive check that no agent can change its own peer-evaluation share.
//!
//! cargo run --release --example strategy_proofness

use peershare::analysis::{check_strategy_proofness_peer_eval, SizeCap, StrategyProofness};
use peershare::MechanismConfig;

fn main() -> peershare::Result<()> {
    for (n, m, v) in [(3, 2, 7), (4, 1, 10), (3, 4, 12), (4, 2, 8)] {
        let config = MechanismConfig::peer_evaluation(n, v, m);
        match check_strategy_proofness_peer_eval(&config, SizeCap::DEFAULT)? {
            StrategyProofness::Holds { profiles, replacements } => {
                println!("n={n} M={m} V={v}: holds over {profiles} profiles, {replacements} replacements")
            }
            StrategyProofness::Violated(w) => {
                println!("n={n} M={m} V={v}: agent {} moves {} -> {}", w.agent, w.before, w.after)
            }
        }
    }
    Ok(())
}
