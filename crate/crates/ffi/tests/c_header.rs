//! Compiles `tests/c/smoke.c` against the generated header and the static library.

use std::path::{Path, PathBuf};
use std::process::Command;

fn static_lib() -> Option<PathBuf> {
    // The archive built alongside this test sits next to it in target/<profile>/deps; the
    // copy one level up is only refreshed by `cargo build`.
    let exe = std::env::current_exe().ok()?;
    let lib = exe.parent()?.join("libhb_ffi.a");
    lib.exists().then_some(lib)
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/hb.h")).unwrap();
    for name in [
        "typedef struct HbTable HbTable",
        "typedef struct HbPath HbPath",
        "HbCertificate",
        "#define HB_OK 0",
        "hb_last_error",
        "hb_table_disc",
        "hb_table_from_json",
        "hb_table_free",
        "hb_forward_map",
        "hb_inverse_map",
        "hb_chord_length",
        "hb_c0_distance",
        "hb_path_from_json",
        "hb_path_free",
        "hb_hofer_certificate",
    ] {
        assert!(header.contains(name), "hb.h lacks {name}");
    }
}

#[test]
fn c_program_links_and_runs() {
    let Some(lib) = static_lib() else {
        eprintln!("libhb_ffi.a not found next to the test binary; skipping");
        return;
    };
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let tmp = tempfile::tempdir().unwrap();
    let exe = tmp.path().join("smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(dir.join("include"))
        .arg(dir.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status();
    let status = match status {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{cc} unavailable ({e}); skipping");
            return;
        }
    };
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
