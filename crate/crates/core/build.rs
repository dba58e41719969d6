fn main() {
    // Dense symmetric eigensolves go through LAPACK's dsyev; OpenBLAS ships it.
    println!("cargo:rustc-link-lib=dylib=openblas");
}
