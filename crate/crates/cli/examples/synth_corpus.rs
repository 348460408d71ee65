//! Writes a seeded synthetic human/spoof corpus plus its manifest.
//!
//! `cargo run --example synth_corpus -- OUT_DIR [N_PER_CLASS] [SEED]`

use std::path::PathBuf;

use spoofguard_cli::synth::{write_corpus, SynthSpec};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "synthetic".into()));
    let n: usize = args.next().map_or(Ok(200), |s| s.parse())?;
    let seed: u64 = args.next().map_or(Ok(0), |s| s.parse())?;
    let manifest = write_corpus(
        &dir,
        &SynthSpec {
            n_human: n,
            n_spoof: n,
            seed,
            ..Default::default()
        },
    )?;
    println!("{}", manifest.display());
    Ok(())
}
