//! Efficiency of expanded designs as a function of the step length r, with
//! infeasible r shown as gaps.
//!
//! `cargo run --release --example efficiency_curve`

use emaxpk::models::{Model, ModelId};
use emaxpk::numerics::Interval;
use emaxpk::robust::{default_schedule, efficiency_vs_r};
use emaxpk::search::{ld_design, SearchConfig};

fn main() -> emaxpk::Result<()> {
    let model = Model::nominal(ModelId::Pk1);
    let ld = ld_design(
        &model,
        Interval::new(0.0, 160.0)?,
        &SearchConfig::for_model(ModelId::Pk1),
    )?
    .design;
    let rs: Vec<f64> = (0..=40).map(|i| i as f64 * 0.25).collect();
    for size in 5..=10 {
        let sched = default_schedule(ModelId::Pk1, 4, size)?;
        let curve = efficiency_vs_r(&model, &ld, &sched, &ld, &rs)?;
        let cells: Vec<String> = curve
            .iter()
            .step_by(4)
            .map(|p| p.efficiency.map_or("  -   ".to_string(), |e| format!("{e:.4}")))
            .collect();
        println!("{size:>2} points, r = 0,1,..,10: {}", cells.join(" "));
    }
    Ok(())
}
