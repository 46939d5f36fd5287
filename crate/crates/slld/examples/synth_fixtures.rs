//! Regenerate `tests/fixtures/`. Run with `cargo run -p slld --example synth_fixtures`.

#[path = "../tests/common/synth.rs"]
#[allow(dead_code)]
mod synth;

fn main() {
    let dir = synth::fixtures_dir();
    std::fs::create_dir_all(dir).expect("create fixtures dir");
    for (name, contents) in synth::fixture_files() {
        let path = dir.join(name);
        std::fs::write(&path, contents).expect("write fixture");
        println!("wrote {}", path.display());
    }
}
