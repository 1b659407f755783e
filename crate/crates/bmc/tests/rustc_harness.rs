//! Harnesses written in Rust and compiled by rustc, the way the pipeline
//! produces them. Skipped when the wasm32 target is unavailable.

use std::path::Path;
use std::process::Command;

use vert_bmc::{check, Options, Status};

const PRELUDE: &str = r#"
#[link(wasm_import_module = "vert")]
extern "C" {
    fn any_i32(tag: i32) -> i32;
    #[allow(dead_code)]
    fn assume(c: i32);
    fn check(ok: i32, code: i32);
}
"#;

fn compile(dir: &Path, name: &str, body: &str) -> Option<Vec<u8>> {
    let src = dir.join(format!("{name}.rs"));
    std::fs::write(&src, format!("{PRELUDE}\n{body}")).unwrap();
    let out = dir.join(format!("{name}.wasm"));
    let status = Command::new("rustc")
        .args(["--edition", "2021", "--crate-type", "cdylib", "--target", "wasm32-unknown-unknown"])
        .args(["-C", "opt-level=2", "-C", "overflow-checks=on", "-C", "panic=abort"])
        .arg(&src)
        .arg("-o")
        .arg(&out)
        .status()
        .ok()?;
    if !status.success() {
        eprintln!("skipping: rustc cannot build for wasm32-unknown-unknown");
        return None;
    }
    Some(std::fs::read(out).unwrap())
}

const DIGIT_SUM: &str = r#"
fn digit_sum_ref(mut x: i32) -> i32 {
    let mut s = 0;
    while x != 0 {
        s += (x % 10).abs();
        x /= 10;
    }
    s
}

fn digit_sum(mut x: i32) -> i32 {
    let mut s = 0;
    loop {
        if x == 0 {
            break s;
        }
        let d = x % 10;
        s += if d < 0 { -d } else { d };
        x /= 10;
    }
}

#[no_mangle]
pub extern "C" fn vert_bmc_entry() {
    let x = unsafe { any_i32(0) };
    unsafe { check((digit_sum(x) == digit_sum_ref(x)) as i32, 1) };
}
"#;

#[test]
fn equivalent_implementations_verify() {
    let dir = tempfile::tempdir().unwrap();
    let Some(wasm) = compile(dir.path(), "digits", DIGIT_SUM) else { return };
    let r = check(&wasm, &Options::default());
    assert_eq!(r.status, Status::Success, "{r:?}");
}

#[test]
fn arithmetic_overflow_panics_are_found() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
#[inline(never)]
fn scale(x: i32) -> i32 { x * 3 }

#[no_mangle]
pub extern "C" fn vert_bmc_entry() {
    let x = unsafe { any_i32(0) };
    unsafe { assume((x > 0) as i32) };
    let y = scale(x);
    unsafe { check((y > 0) as i32, 1) };
}
"#;
    let Some(wasm) = compile(dir.path(), "overflow", body) else { return };
    let r = check(&wasm, &Options::default());
    assert_eq!(r.status, Status::Failure, "{r:?}");
    let x = r.inputs[0].value as i32;
    assert!(x > 0 && x.checked_mul(3).is_none(), "x = {x}");
    assert!(r.reason.unwrap().contains("panic"), "overflow must surface as a panic");
}

#[test]
fn short_unwind_bound_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let Some(wasm) = compile(dir.path(), "digits", DIGIT_SUM) else { return };
    let opts = Options {
        unwind: 4,
        ..Options::default()
    };
    assert_eq!(check(&wasm, &opts).status, Status::Unwind);
}
