//! Benchmark inputs shared by the criterion benches.

use std::fmt::Write as _;

/// rustc's JSON diagnostics for a two-sum with a by-value map lookup.
pub const BORROW_DIAGNOSTICS: &[u8] = include_bytes!("../data/borrow-diagnostics.jsonl");

/// The program those diagnostics were produced for.
pub const BORROW_SOURCE: &str = include_str!("../../cli/tests/fixtures/repair/borrow.rs");

/// A C translation unit with `functions` functions, interleaved with the
/// declarations a real file carries: macros, structs, globals, prototypes.
pub fn c_file(functions: usize) -> String {
    let mut out = String::from("#include <stdio.h>\n#define MAX(a, b) ((a) > (b) ? (a) : (b))\n\n");
    for i in 0..functions {
        let _ = writeln!(out, "struct pair_{i} {{ int left; int right; }};");
        let _ = writeln!(out, "static int table_{i}[4] = {{1, 2, 3, 4}};");
        let _ = writeln!(out, "int helper_{i}(int x);");
        let _ = writeln!(
            out,
            "/* sums with a twist: {{ */\nint fn_{i}(int n, const char *label) {{\n    int s = 0;\n    for (int k = 0; k < n; k++) {{\n        if (label[k % 4] == '}}') {{ s += table_{i}[k % 4]; }}\n        else {{ s = MAX(s, k); }}\n    }}\n    // done }}\n    return s;\n}}\n"
        );
    }
    out
}

/// A wasm module whose checker run has to reason through a 32-bit
/// multiply: it fails only for the one input with `x * 7 == 0x1234567`.
pub const MUL_WAT: &str = r#"(module
  (import "vert" "any_i32" (func $any_i32 (param i32) (result i32)))
  (import "vert" "check" (func $check (param i32 i32)))
  (func (export "vert_bmc_entry")
    (local $x i32)
    (local.set $x (call $any_i32 (i32.const 0)))
    (call $check
      (i32.ne (i32.mul (local.get $x) (i32.const 7)) (i32.const 0x1234567))
      (i32.const 1))))
"#;

/// A loop summing the digits of a 32-bit input, for lifting.
pub const DIGITS_WAT: &str = r#"(module
  (func (export "digits") (param $x i32) (result i32)
    (local $s i32)
    (block $done
      (loop $next
        (br_if $done (i32.eqz (local.get $x)))
        (local.set $s (i32.add (local.get $s) (i32.rem_u (local.get $x) (i32.const 10))))
        (local.set $x (i32.div_u (local.get $x) (i32.const 10)))
        (br $next)))
    (local.get $s)))
"#;
