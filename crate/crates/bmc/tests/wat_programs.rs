//! Small hand-written modules with known verdicts.

use vert_bmc::{check, Options, Status};

const IMPORTS: &str = r#"
  (import "vert" "any_i32" (func $any_i32 (param i32) (result i32)))
  (import "vert" "any_i64" (func $any_i64 (param i32) (result i64)))
  (import "vert" "assume" (func $assume (param i32)))
  (import "vert" "check" (func $check (param i32 i32)))
"#;

fn run_with(body: &str, opts: &Options) -> vert_bmc::Report {
    let text = format!("(module {IMPORTS} {body})");
    let wasm = wat::parse_str(&text).expect("valid wat");
    check(&wasm, opts)
}

fn run(body: &str) -> vert_bmc::Report {
    run_with(body, &Options::default())
}

#[test]
fn finds_the_single_failing_input() {
    let r = run(r#"
      (func (export "vert_bmc_entry")
        (local $x i32)
        (local.set $x (call $any_i32 (i32.const 0)))
        (call $check
          (i32.ne (i32.mul (local.get $x) (i32.const 7)) (i32.const 0x1234567))
          (i32.const 3)))
    "#);
    assert_eq!(r.status, Status::Failure, "{r:?}");
    assert_eq!(r.inputs.len(), 1);
    let x = r.inputs[0].value as i32;
    assert_eq!(x.wrapping_mul(7), 0x1234567);
    assert_eq!(r.reason.as_deref(), Some("check 3 failed"));
}

#[test]
fn proves_a_true_identity() {
    // (x ^ y) ^ y == x for all inputs.
    let r = run(r#"
      (func (export "vert_bmc_entry")
        (local $x i64) (local $y i64)
        (local.set $x (call $any_i64 (i32.const 0)))
        (local.set $y (call $any_i64 (i32.const 1)))
        (call $check
          (i64.eq (i64.xor (i64.xor (local.get $x) (local.get $y)) (local.get $y)) (local.get $x))
          (i32.const 1)))
    "#);
    assert_eq!(r.status, Status::Success, "{r:?}");
}

#[test]
fn assumptions_restrict_the_input_space() {
    let body = |assume: bool| {
        format!(
            r#"
      (func (export "vert_bmc_entry")
        (local $x i32)
        (local.set $x (call $any_i32 (i32.const 0)))
        {}
        (call $check (i32.ne (i32.div_s (i32.const 100) (local.get $x)) (i32.const 0)) (i32.const 1)))
    "#,
            if assume {
                "(call $assume (i32.and (i32.gt_s (local.get $x) (i32.const 0)) (i32.le_s (local.get $x) (i32.const 100))))"
            } else {
                ""
            }
        )
    };
    assert_eq!(run(&body(true)).status, Status::Success);
    let r = run(&body(false));
    assert_eq!(r.status, Status::Failure);
    // Division by zero or a quotient of zero: either is a genuine failure.
    let x = r.inputs[0].value as i32;
    assert!(x == 0 || 100i32.checked_div(x) == Some(0), "x = {x}");
}

#[test]
fn traps_are_failures() {
    let r = run(r#"
      (func (export "vert_bmc_entry")
        (local $x i32)
        (local.set $x (call $any_i32 (i32.const 0)))
        (if (i32.eq (local.get $x) (i32.const -5)) (then unreachable)))
    "#);
    assert_eq!(r.status, Status::Failure);
    assert_eq!(r.inputs[0].value, -5);

    let r = run(r#"
      (func (export "vert_bmc_entry")
        (drop (i32.div_s (call $any_i32 (i32.const 0)) (i32.const -1))))
    "#);
    assert_eq!(r.status, Status::Failure);
    assert_eq!(r.reason.as_deref(), Some("integer overflow"));
    assert_eq!(r.inputs[0].value, i32::MIN as i64);
}

#[test]
fn memory_holds_symbolic_values() {
    let r = run(r#"
      (memory 1)
      (func (export "vert_bmc_entry")
        (local $x i32)
        (local.set $x (call $any_i32 (i32.const 0)))
        (i32.store (i32.const 16) (local.get $x))
        (i32.store8 (i32.const 17) (i32.const 0))
        (call $check
          (i32.eq (i32.load (i32.const 16)) (i32.and (local.get $x) (i32.const 0xffff00ff)))
          (i32.const 1))
        (call $check
          (i32.eq (i32.load16_s (i32.const 18)) (i32.shr_s (local.get $x) (i32.const 16)))
          (i32.const 2)))
    "#);
    assert_eq!(r.status, Status::Success, "{r:?}");
}

const COUNT_DOWN: &str = r#"
  (func (export "vert_bmc_entry")
    (local $n i32) (local $acc i32)
    (local.set $n (call $any_i32 (i32.const 0)))
    (call $assume (i32.and (i32.ge_s (local.get $n) (i32.const 0)) (i32.le_s (local.get $n) (i32.const 6))))
    (block $done
      (loop $top
        (br_if $done (i32.eqz (local.get $n)))
        (local.set $acc (i32.add (local.get $acc) (local.get $n)))
        (local.set $n (i32.sub (local.get $n) (i32.const 1)))
        (br $top)))
    (call $check (i32.le_s (local.get $acc) (i32.const 21)) (i32.const 1)))
"#;

#[test]
fn loops_respect_the_unwind_bound() {
    let mut opts = Options {
        unwind: 10,
        ..Options::default()
    };
    assert_eq!(run_with(COUNT_DOWN, &opts).status, Status::Success);
    opts.unwind = 3;
    assert_eq!(run_with(COUNT_DOWN, &opts).status, Status::Unwind);
    opts.unwind_checks = false;
    assert_eq!(run_with(COUNT_DOWN, &opts).status, Status::Success);
}

#[test]
fn concrete_loops_are_not_bounded() {
    let r = run(r#"
      (func (export "vert_bmc_entry")
        (local $i i32) (local $acc i32)
        (loop $top
          (local.set $acc (i32.add (local.get $acc) (local.get $i)))
          (local.set $i (i32.add (local.get $i) (i32.const 1)))
          (br_if $top (i32.lt_u (local.get $i) (i32.const 1000))))
        (call $check (i32.eq (local.get $acc) (i32.const 499500)) (i32.const 1)))
    "#);
    assert_eq!(r.status, Status::Success, "{r:?}");
}

#[test]
fn panic_markers_fail_the_path() {
    let r = run(r#"
      (func $core::panicking::panic (unreachable))
      (func (export "vert_bmc_entry")
        (if (i32.gt_u (call $any_i32 (i32.const 0)) (i32.const 10)) (then (call $core::panicking::panic))))
    "#);
    assert_eq!(r.status, Status::Failure);
    assert!(r.reason.unwrap().contains("panicking"));
    assert!(r.inputs[0].value as u32 > 10);
}

#[test]
fn br_table_and_indirect_calls() {
    let r = run(r#"
      (type $t (func (param i32) (result i32)))
      (table 2 funcref)
      (elem (i32.const 0) $double $negate)
      (func $double (type $t) (i32.mul (local.get 0) (i32.const 2)))
      (func $negate (type $t) (i32.sub (i32.const 0) (local.get 0)))
      (func (export "vert_bmc_entry")
        (local $s i32) (local $x i32) (local $r i32)
        (local.set $s (call $any_i32 (i32.const 0)))
        (local.set $x (call $any_i32 (i32.const 1)))
        (block $b2 (block $b1 (block $b0
          (br_table $b0 $b1 $b2 (local.get $s)))
          (local.set $r (call_indirect (type $t) (local.get $x) (i32.const 0)))
          (br $b2))
          (local.set $r (call_indirect (type $t) (local.get $x) (i32.const 1))))
        (call $check (i32.ne (local.get $r) (i32.const 84)) (i32.const 9)))
    "#);
    assert_eq!(r.status, Status::Failure, "{r:?}");
    let s = r.inputs.iter().find(|i| i.tag == 0).unwrap().value;
    let x = r.inputs.iter().find(|i| i.tag == 1).unwrap().value as i32;
    match s {
        0 => assert_eq!(x.wrapping_mul(2), 84),
        1 => assert_eq!(x.wrapping_neg(), 84),
        other => panic!("unexpected selector {other}"),
    }
}

#[test]
fn bit_counting_matches_native() {
    let r = run(r#"
      (func (export "vert_bmc_entry")
        (local $x i32)
        (local.set $x (call $any_i32 (i32.const 0)))
        (call $check
          (i32.eq (i32.add (i32.popcnt (local.get $x)) (i32.popcnt (i32.xor (local.get $x) (i32.const -1))))
                  (i32.const 32))
          (i32.const 1))
        (call $check
          (i32.ne (i32.clz (local.get $x)) (i32.ctz (i32.const 0x40000000)))
          (i32.const 2)))
    "#);
    assert_eq!(r.status, Status::Failure, "{r:?}");
    assert_eq!(r.reason.as_deref(), Some("check 2 failed"));
    assert_eq!((r.inputs[0].value as u32).leading_zeros(), 30);
}

#[test]
fn malformed_and_unsupported_modules_are_errors() {
    assert_eq!(check(b"not wasm", &Options::default()).status, Status::Error);
    let r = run(r#"(func (export "other"))"#);
    assert_eq!(r.status, Status::Error);
    let text = r#"(module (import "env" "f" (func)) (func (export "vert_bmc_entry") (call 0)))"#;
    let r = check(&wat::parse_str(text).unwrap(), &Options::default());
    assert_eq!(r.status, Status::Error);
}

#[test]
fn report_round_trips_through_json() {
    let r = run(r#"
      (func (export "vert_bmc_entry")
        (call $check (i32.ne (call $any_i32 (i32.const 65537)) (i32.const -2)) (i32.const 1)))
    "#);
    let json = serde_json::to_string(&r).unwrap();
    assert!(json.contains("\"status\":\"FAILURE\""), "{json}");
    let back: vert_bmc::Report = serde_json::from_str(&json).unwrap();
    assert_eq!(back.inputs, r.inputs);
    assert_eq!(back.inputs[0].tag, 65537);
    assert_eq!(back.inputs[0].value, -2);
}
