//! Equally spaced uniform designs: best spacing, efficiency and robustness
//! index for support sizes 5 to 12.
//!
//! `cargo run --release --example esuld_table`

use emaxpk::models::{Model, ModelId};
use emaxpk::numerics::Interval;
use emaxpk::robust::{esuld, lri_report, DEFAULT_LRI_STEP};
use emaxpk::search::{ld_design, SearchConfig};

fn main() -> emaxpk::Result<()> {
    let model = Model::nominal(ModelId::Pk1);
    let space = Interval::new(0.0, 160.0)?;
    let ld = ld_design(&model, space, &SearchConfig::for_model(ModelId::Pk1))?.design;
    println!("size  spacing  efficiency   LRI b1      LRI b2      LRI b3");
    for s in 5..=12 {
        let r = esuld(&model, space, s, &ld)?;
        let lri = lri_report(&model, &r.spec.design, DEFAULT_LRI_STEP)?;
        let v: Vec<f64> = lri.values[1..].iter().filter_map(|v| v.finite()).collect();
        println!(
            "{s:>4}  {:>7.3}  {:.6}   {:.6}  {:.6}  {:.6}",
            r.spec.h, r.efficiency, v[0], v[1], v[2]
        );
    }
    Ok(())
}
