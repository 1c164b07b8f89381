//! Regenerates the seeded machine-model fixtures under `models/`.
//!
//! cargo run -p obsgraph-core --example gen_fixtures

use std::path::Path;

use obsgraph_core::builtin::generate::{
    centralized_synthetic_source, decentralized_source, FIXTURE_SEED,
};

fn main() -> std::io::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models");
    std::fs::write(
        dir.join("wscc_decentralized.dyn"),
        decentralized_source(FIXTURE_SEED),
    )?;
    std::fs::write(
        dir.join("wscc_centralized_synthetic.dyn"),
        centralized_synthetic_source(FIXTURE_SEED),
    )?;
    Ok(())
}
