//! LD designs for the IV-bolus model on three horizons.
//!
//! `cargo run --release --example pk1_ld_design`

use emaxpk::models::{Model, ModelId};
use emaxpk::numerics::Interval;
use emaxpk::search::{ld_design, SearchConfig};

fn main() -> emaxpk::Result<()> {
    let model = Model::nominal(ModelId::Pk1);
    let cfg = SearchConfig::for_model(ModelId::Pk1);
    for u in [160.0, 72.0, 24.0] {
        let r = ld_design(&model, Interval::new(0.0, u)?, &cfg)?;
        let times: Vec<String> = r.design.times().iter().map(|t| format!("{t:.3}")).collect();
        println!(
            "u = {u:>5}: t = [{}]  det M = {:.6}  sup d = {:.6}  certified = {}",
            times.join(", "),
            r.criterion,
            r.report.sup_d,
            r.converged
        );
    }
    Ok(())
}
