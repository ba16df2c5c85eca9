//! Compiles and runs a small C program against the generated header and
//! the static library. Skipped when no C compiler is on the PATH.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "disclab.h"

int main(void) {
    double data[4] = {1.0, 0.0, 0.0, 1.0};
    DisclabMatrix *m = NULL;
    if (disclab_matrix_new(2, 2, data, &m) != DISCLAB_STATUS_OK) return 10;
    double value = 0.0;
    if (disclab_solve_vecdisc(m, 2, 400, 1, &value, NULL, 0) != DISCLAB_STATUS_OK) return 11;
    if (fabs(value - 1.0) > 1e-12) return 12;
    double p[2] = {0.5, 0.5}, w[2] = {0.6, 0.6};
    DisclabCertificate *c = NULL;
    if (disclab_cert_new(p, 2, w, 2, 1.0, &c) != DISCLAB_STATUS_OK) return 13;
    if (disclab_cert_verify(m, c, 1e-8, NULL) != DISCLAB_STATUS_REFUTED) return 14;
    double z[2], lhs, rhs;
    if (disclab_extract_witness(m, c, z, 2, &lhs, &rhs) != DISCLAB_STATUS_OK) return 15;
    if (!(lhs < rhs)) return 16;
    if (disclab_matrix_new(2, 2, NULL, &m) != DISCLAB_STATUS_NULL_POINTER) return 17;
    printf("%s %s\n", disclab_version(), disclab_last_error_message());
    disclab_cert_free(c);
    disclab_matrix_free(m);
    return 0;
}
"#;

fn have_cc() -> bool {
    Command::new("cc").arg("--version").output().is_ok_and(|o| o.status.success())
}

#[test]
fn c_program_links_and_runs() {
    if !have_cc() {
        eprintln!("no C compiler; skipping");
        return;
    }
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let include = crate_dir.join("include");
    assert!(include.join("disclab.h").exists());

    // target/<profile>/deps/<this test> → target/<profile>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf();
    let lib = profile_dir.join("libdisclab_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }

    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    let bin = dir.path().join("smoke");
    std::fs::write(&src, PROGRAM).unwrap();
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    let stdout = String::from_utf8(run.stdout).unwrap();
    assert!(stdout.starts_with(env!("CARGO_PKG_VERSION")));
    assert!(stdout.contains("data is null"));
}
