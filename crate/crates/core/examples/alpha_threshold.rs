//! How large the score weight must be before collusion stops paying.
//!
//! cargo run --release --example alpha_threshold

use peershare::analysis::{threshold_check, SizeCap};
use peershare::{MechanismConfig, Rational};

fn main() -> peershare::Result<()> {
    for (n, m) in [(3usize, 2u32), (4, 1), (4, 2)] {
        let base = MechanismConfig::peer_prediction(n, 12, m, 1);
        let bound = Rational::from(m) * Rational::from(n - 1) / Rational::from(2);
        let alphas = [
            Rational::new(1, 2),
            &bound - Rational::new(1, 2),
            bound.clone(),
            &bound + Rational::new(1, 2),
        ];
        println!("n={n} M={m} bound {bound}");
        for row in threshold_check(&base, &alphas, None, SizeCap::DEFAULT)? {
            let worst = row.worst.as_ref().map(|c| c.joint_gain.to_string()).unwrap_or_default();
            println!(
                "  alpha {:>4}: resistant {:<8} worst joint gain {:>6} ({} of {} profitable)",
                row.alpha.to_string(),
                row.resistance.to_string(),
                worst,
                row.profitable,
                row.candidates
            );
        }
    }
    Ok(())
}
