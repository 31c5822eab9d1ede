//! The quadratic scoring rule behind peer prediction.
//!
//! cargo run --example scoring_rule

use peershare::scoring::expected_score;
use peershare::{distribution_from_histogram, nint, quadratic_score, Distribution, Rational};

fn main() -> peershare::Result<()> {
    let forecast = distribution_from_histogram(&[1, 2, 0], 3)?;
    for outcome in 0..3 {
        println!("R({forecast:?}, {outcome}) = {}", quadratic_score(&forecast, outcome)?);
    }

    // Expected score under a belief q peaks at the forecast closest to q.
    let q = Distribution::new(vec![Rational::new(1, 4), Rational::new(1, 2), Rational::new(1, 4)])?;
    for hist in [[0u32, 3, 0], [1, 1, 1], [1, 2, 0], [0, 2, 1]] {
        let p = distribution_from_histogram(&hist, 3)?;
        println!(
            "forecast {hist:?}: expected score {} distance² {}",
            expected_score(&p, &q)?,
            p.squared_distance(&q)
        );
    }

    for x in [Rational::new(1, 2), Rational::new(3, 2), Rational::new(7, 5), Rational::new(-1, 2)] {
        println!("nint({x}) = {}", nint(&x));
    }
    Ok(())
}
