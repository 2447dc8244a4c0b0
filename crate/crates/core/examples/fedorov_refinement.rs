//! Fedorov-Wynn refinement from a poor starting design.
//!
//! `cargo run --release --example fedorov_refinement`

use emaxpk::design::{d_criterion, fisher_info, DesignMeasure};
use emaxpk::models::{Model, ModelId};
use emaxpk::numerics::Interval;
use emaxpk::search::{fedorov_v, SearchConfig};

fn main() -> emaxpk::Result<()> {
    let model = Model::nominal(ModelId::Pk1);
    let init = DesignMeasure::uniform(&[0.0, 40.0, 80.0, 160.0], Interval::new(0.0, 160.0)?)?;
    println!("start: det M = {:.6}", d_criterion(&fisher_info(&model, &init)));

    let r = fedorov_v(&model, &init, &SearchConfig::for_model(ModelId::Pk1))?;
    for p in r.design.points() {
        println!("t = {:>8.4}  weight = {:.6}", p.t, p.weight);
    }
    println!(
        "det M = {:.6}, sup d = {:.6}, {} steps",
        r.criterion, r.report.sup_d, r.iterations
    );
    Ok(())
}
