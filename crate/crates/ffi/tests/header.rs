//! Compiles and runs a small C program against the generated header and the
//! static library.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "mopchr.h"

int main(void) {
    MopchrSystem *sys = NULL;
    if (mopchr_system_parse("charlier:a=1,2", &sys) != MOPCHR_STATUS_OK) return 10;
    MopchrLattice *lat = NULL;
    if (mopchr_nnrr(sys, 4, &lat) != MOPCHR_STATUS_OK) return 11;
    size_t n[2] = {2, 1};
    double b = 0.0;
    if (mopchr_lattice_b(lat, n, 2, 0, &b) != MOPCHR_STATUS_OK || b != 4.0) return 12;
    MopchrSystem *bad = NULL;
    if (mopchr_system_parse("charlier:a=-1", &bad) != MOPCHR_STATUS_DOMAIN) return 13;
    if (strlen(mopchr_last_error()) == 0) return 14;
    mopchr_lattice_free(lat);
    mopchr_system_free(sys);
    printf("ok %s\n", mopchr_version());
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // target/<profile>/deps/header-<hash>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let dir = target_dir();
    let lib = dir.join("libmopchr_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let work = std::env::temp_dir().join(format!("mopchr-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&work).unwrap();
    let src = work.join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let exe = work.join("main");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "{cc} failed");
    let out = Command::new(&exe).output().unwrap();
    let _ = std::fs::remove_dir_all(&work);
    assert!(out.status.success(), "C program exited with {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
