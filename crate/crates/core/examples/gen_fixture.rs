//! Regenerates `data/fixture/` (records, thesaurus, query).
//!
//! cargo run -p bibliomap --example gen_fixture [-- <dir>]

#[path = "../tests/support/fixture.rs"]
mod fixture;

fn main() {
    let dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/fixture").to_owned());
    let f = fixture::generate(fixture::SEED);
    fixture::write_fixture(std::path::Path::new(&dir), &f);
    println!(
        "{} A records, {} B records -> {dir}",
        f.source_a.len(),
        f.source_b.len()
    );
}
