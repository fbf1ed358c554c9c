use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = env::var("CARGO_MANIFEST_DIR").unwrap();
    let header = PathBuf::from(&crate_dir).join("include").join("entropy_gap.h");

    cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_language(cbindgen::Language::C)
        .with_include_guard("ENTROPY_GAP_H")
        .with_cpp_compat(true)
        .with_documentation(true)
        .generate()
        .expect("failed to generate the C header")
        .write_to_file(header);

    println!("cargo:rerun-if-changed=src/lib.rs");
}
