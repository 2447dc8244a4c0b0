//! Equal-step expansions of both LD designs at the step lengths used for
//! robustness comparisons (r = 1 h and r = 0.2 h).
//!
//! `cargo run --release --example eseuld_tables`

use emaxpk::design::{d_criterion, fisher_info, fmt_sig, DesignMeasure};
use emaxpk::models::{Model, ModelId};
use emaxpk::numerics::Interval;
use emaxpk::robust::{default_schedule, eseuld, lri_report, DEFAULT_LRI_STEP};
use emaxpk::search::{ld_design, SearchConfig};

fn table(id: ModelId, u: f64, base_times: &[f64], r: f64) -> emaxpk::Result<()> {
    let model = Model::nominal(id);
    let space = Interval::new(0.0, u)?;
    let ld = ld_design(&model, space, &SearchConfig::for_model(id))?.design;
    let ref_det = d_criterion(&fisher_info(&model, &ld));
    // Base support as reported to table precision.
    let base = DesignMeasure::uniform(base_times, space)?;
    println!("{id}, r = {r}");
    for size in base.len()..=base.len() + 6 {
        let Ok(sched) = default_schedule(id, base.len(), size) else {
            break;
        };
        let xi = eseuld(&base, r, &sched)?;
        let eff = d_criterion(&fisher_info(&model, &xi)) / ref_det;
        let lri: Vec<String> = lri_report(&model, &xi, DEFAULT_LRI_STEP)?.values[1..]
            .iter()
            .filter_map(|v| v.finite())
            .map(|v| format!("{v:.6}"))
            .collect();
        let times: Vec<String> = xi.times().iter().map(|t| fmt_sig(*t)).collect();
        println!(
            "  {size:>2}: eff {eff:.4}  LRI [{}]  t = {{{}}}",
            lri.join(", "),
            times.join(", ")
        );
    }
    Ok(())
}

fn main() -> emaxpk::Result<()> {
    table(ModelId::Pk1, 160.0, &[0.0, 13.48, 31.62, 160.0], 1.0)?;
    table(ModelId::Pk2, 200.0, &[0.0, 0.275, 2.999, 14.75, 32.695], 0.2)
}
