//! Drives the command-line front end from code: computes the LD design for
//! a scenario file and writes the usual output files.
//!
//! `cargo run --release --example scenario_run [scenario] [out_dir]`

fn main() {
    let mut args = std::env::args().skip(1);
    let scenario = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenarios/pk2_nominal.txt").into());
    let out = args
        .next()
        .unwrap_or_else(|| std::env::temp_dir().join("emaxpk-scenario").display().to_string());
    let code = emaxpk::cli::main_with_args(["emaxpk", "ld", "--scenario", &scenario, "--out", &out]);
    println!("outputs in {out}");
    std::process::exit(code);
}
