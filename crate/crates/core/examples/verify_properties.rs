//! Randomized structural checks plus the nuisance-parameter equivalence of
//! both LD designs.
//!
//! `cargo run --release --example verify_properties [trials] [seed]`

use emaxpk::models::{Model, ModelId};
use emaxpk::numerics::Interval;
use emaxpk::search::{ld_design, SearchConfig};
use emaxpk::verify::{check_interior_maxima_count, check_nuisance_equivalence, run_suite, SuiteConfig};

fn main() -> emaxpk::Result<()> {
    let mut args = std::env::args().skip(1);
    let trials = args.next().and_then(|s| s.parse().ok()).unwrap_or(1000);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    for o in run_suite(&SuiteConfig::new(trials, seed))? {
        println!("{:<22} {:>6} trials, {} failures", o.name, o.trials, o.failures);
        for w in o.witnesses.iter().take(3) {
            println!("    {w}");
        }
    }
    for (id, u) in [(ModelId::Pk1, 160.0), (ModelId::Pk2, 200.0)] {
        let model = Model::nominal(id);
        let ld = ld_design(&model, Interval::new(0.0, u)?, &SearchConfig::for_model(id))?.design;
        let rep = check_nuisance_equivalence(&model, &ld, 1e-3)?;
        let maxima = check_interior_maxima_count(&model, &ld)?;
        println!(
            "{id}: sup d_s = {:.6} (s = {}), interior maxima = {maxima}",
            rep.sup_d, rep.threshold
        );
    }
    Ok(())
}
