//! Compiles and runs the C example against the committed header and the
//! freshly built static library, proving the ABI end to end.

use std::path::PathBuf;
use std::process::Command;

fn target_dir() -> PathBuf {
    // tests run from the crate root; the workspace target dir is two up
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    if let Ok(dir) = std::env::var("CARGO_TARGET_DIR") {
        return PathBuf::from(dir);
    }
    manifest.parent().unwrap().parent().unwrap().join("target")
}

#[test]
fn c_consumer_builds_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let profile_dir = target_dir().join(if cfg!(debug_assertions) {
        "debug"
    } else {
        "release"
    });
    let staticlib = profile_dir.join("libfsishape_capi.a");
    if !staticlib.exists() {
        // `cargo test` compiles only the rlib; produce the staticlib
        let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
        let mut cmd = Command::new(cargo);
        cmd.args(["build", "-p", "fsishape-capi"]);
        if !cfg!(debug_assertions) {
            cmd.arg("--release");
        }
        let status = cmd.current_dir(&manifest).status().expect("cargo build");
        assert!(status.success(), "building the static library failed");
    }
    assert!(
        staticlib.exists(),
        "static library missing at {staticlib:?}"
    );

    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler available");
        return;
    }

    let out = std::env::temp_dir().join(format!("fsishape-smoke-{}", std::process::id()));
    std::fs::create_dir_all(&out).unwrap();
    let exe = out.join("smoke");

    let status = Command::new(&cc)
        .arg(manifest.join("examples/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&staticlib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&exe)
        .status()
        .expect("compiler invocation");
    assert!(status.success(), "C compilation failed");

    let output = Command::new(&exe).output().expect("smoke binary runs");
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(output.status.success(), "smoke exited nonzero: {stdout}");
    assert!(stdout.contains("smoke test passed"), "stdout: {stdout}");

    std::fs::remove_dir_all(&out).ok();
}
