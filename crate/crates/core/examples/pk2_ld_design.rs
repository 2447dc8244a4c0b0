//! LD design for the first-order absorption model, with the local maxima of d(t).
//!
//! `cargo run --release --example pk2_ld_design`

use emaxpk::models::{Model, ModelId};
use emaxpk::numerics::Interval;
use emaxpk::search::{ld_design, SearchConfig};

fn main() -> emaxpk::Result<()> {
    let model = Model::nominal(ModelId::Pk2);
    let r = ld_design(
        &model,
        Interval::new(0.0, 200.0)?,
        &SearchConfig::for_model(ModelId::Pk2),
    )?;
    for p in r.design.points() {
        println!("t = {:>9.4} h  weight = {:.4}", p.t, p.weight);
    }
    println!("sup d = {:.6} (threshold {})", r.report.sup_d, r.report.threshold);
    for (t, d) in &r.report.local_maxima {
        println!("  interior maximum d({t:.4}) = {d:.6}");
    }
    Ok(())
}
