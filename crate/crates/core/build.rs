fn main() {
    println!("cargo:rerun-if-changed=build.rs");
    // The `lapack` crate declares the FFI symbols but links no provider;
    // with the system-openblas feature the system library supplies them.
    if std::env::var_os("CARGO_FEATURE_SYSTEM_OPENBLAS").is_some() {
        println!("cargo:rustc-link-lib=dylib=openblas");
    }
}
