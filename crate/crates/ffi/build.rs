use std::env;
use std::path::PathBuf;

// Regenerates include/logbandit.h from the exported surface in src/lib.rs.
// The header is committed so C consumers can use it without running cargo;
// cbindgen only rewrites the file when the content actually changes.
fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());

    let config = cbindgen::Config::from_file(crate_dir.join("cbindgen.toml"))
        .expect("cbindgen.toml is malformed");
    cbindgen::generate_with_config(&crate_dir, config)
        .expect("header generation failed")
        .write_to_file(crate_dir.join("include/logbandit.h"));

    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
}
