use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = env::var("CARGO_MANIFEST_DIR").unwrap();
    let header = PathBuf::from(&crate_dir).join("include").join("tempsec.h");
    std::fs::create_dir_all(header.parent().unwrap()).expect("create include directory");

    let mut config = cbindgen::Config::default();
    config.enumeration.prefix_with_name = true;

    cbindgen::Builder::new()
        .with_config(config)
        .with_crate(&crate_dir)
        .with_language(cbindgen::Language::C)
        .with_include_guard("TEMPSEC_H")
        .with_documentation(true)
        .with_cpp_compat(true)
        .with_parse_deps(false)
        .generate()
        .expect("generate C bindings")
        .write_to_file(&header);

    println!("cargo:rerun-if-changed=src/");
}
