//! Equivalence-theorem check of a hand-written design, for all parameters
//! and with the baseline treated as a nuisance parameter.
//!
//! `cargo run --release --example certify_custom_design [design.csv]`

use emaxpk::design::{equivalence_check, DesignMeasure, InterestSet, DEFAULT_CERT_TOL, DEFAULT_CHECK_GRID};
use emaxpk::models::{Model, ModelId};
use emaxpk::numerics::Interval;

const ROUNDED_LD: &str = "t_hours,weight
0,0.25
13.48,0.25
31.62,0.25
160,0.25
";

fn main() -> emaxpk::Result<()> {
    let space = Interval::new(0.0, 160.0)?;
    let design = match std::env::args().nth(1) {
        Some(path) => DesignMeasure::read_csv(path.as_ref(), space)?,
        None => DesignMeasure::from_csv(ROUNDED_LD, space)?,
    };
    let model = Model::nominal(ModelId::Pk1);
    for (label, interest) in [
        ("all", InterestSet::all(4)),
        ("no baseline", InterestSet::without_baseline(4)),
    ] {
        let rep = equivalence_check(&model, &design, &interest, DEFAULT_CHECK_GRID, DEFAULT_CERT_TOL)?;
        println!(
            "{label:>12}: sup d = {:.6} at t = {:.3}, threshold {}, passed = {}",
            rep.sup_d, rep.argmax_t, rep.threshold, rep.passed
        );
    }
    Ok(())
}
