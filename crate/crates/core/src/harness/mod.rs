//! Oracle wrapping and equivalence-harness generation.
//!
//! A harness is a small crate: `harness.rs` includes the candidate, mounts
//! the reference as a module and drives both through `vert_runtime.rs`.
//! The same files build as a native property test or as a wasm32 module for
//! the model checker.

pub mod signature;
pub mod strategy;

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{InjectionKind, InjectionPoint, LiteralType, OracleModule};
use crate::scan::{self, Syntax};
pub use signature::{parse_signature, Fields, FnSignature, Param, Passing, Scalar, TypeDesc};
pub use strategy::{carrier, derive_input_strategy, Carrier, FieldStrategies, InputStrategy, SlotStrategy, Strategy};

/// Source of the runtime module shared by every harness.
pub const RUNTIME_SOURCE: &str = include_str!("runtime.rs");

pub const HARNESS_FILE: &str = "harness.rs";
pub const CANDIDATE_FILE: &str = "candidate.rs";
pub const ORACLE_FILE: &str = "oracle.rs";
pub const REFERENCE_FILE: &str = "reference.rs";
pub const RUNTIME_FILE: &str = "vert_runtime.rs";
/// Name of the harness function in every build mode.
pub const HARNESS_FN: &str = "__vert_equivalence";
/// Exported entry of the wasm32 build.
pub const BMC_ENTRY: &str = "vert_bmc_entry";

/// A global cell that replaces one constant of the lifted oracle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub name: String,
    pub ty: LiteralType,
    pub slot_index: usize,
    pub original: i64,
}

/// Lifted oracle with its injection points turned into global cells.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WrappedOracle {
    pub text: String,
    pub entry_fn_symbol: String,
    /// Input cells ordered by argument position.
    pub inputs: Vec<Cell>,
    pub output: Cell,
}

/// Replace every injection point's literal with a load from a global cell.
pub fn generate_wrapper(oracle: &OracleModule, points: &[InjectionPoint]) -> Result<WrappedOracle> {
    let masked = scan::mask(&oracle.lifted_text, Syntax::Rust);
    let unique = |base: String| -> String {
        let mut name = base.clone();
        let mut n = 1;
        while scan::has_word(&masked, &name) {
            n += 1;
            name = format!("{base}_{n}");
        }
        name
    };
    let mut lines: Vec<String> = oracle.lifted_text.lines().map(str::to_string).collect();
    let mut inputs = Vec::new();
    let mut output = None;
    for p in points {
        let name = match p.kind {
            InjectionKind::Input => unique(format!("INPUT_{}", p.slot_index + 1)),
            InjectionKind::OutputBaseline => unique("OUTPUT_1".to_string()),
        };
        let line = lines.get_mut(p.line.wrapping_sub(1)).ok_or(Error::PointStale { line: p.line })?;
        let token = p.original_literal.token();
        let at = find_token(line, &token).ok_or(Error::PointStale { line: p.line })?;
        line.replace_range(at..at + token.len(), &format!("{name}.load(::std::sync::atomic::Ordering::Relaxed)"));
        let cell = Cell {
            name,
            ty: p.original_literal.ty,
            slot_index: p.slot_index,
            original: p.original_literal.value,
        };
        match p.kind {
            InjectionKind::Input => inputs.push(cell),
            InjectionKind::OutputBaseline => output = Some(cell),
        }
    }
    let output = output.ok_or(Error::NoEntryConstants)?;
    inputs.sort_by_key(|c| c.slot_index);
    let mut text = lines.join("\n");
    text.push_str("\n\n// Injected cells.\n");
    for c in inputs.iter().chain(std::iter::once(&output)) {
        let atomic = atomic_type(c.ty);
        let _ = writeln!(
            text,
            "pub static {}: ::std::sync::atomic::{atomic} = ::std::sync::atomic::{atomic}::new({});",
            c.name, c.original
        );
    }
    Ok(WrappedOracle {
        text,
        entry_fn_symbol: oracle.entry_fn_symbol.clone(),
        inputs,
        output,
    })
}

fn atomic_type(ty: LiteralType) -> &'static str {
    match ty {
        LiteralType::I32 => "AtomicI32",
        LiteralType::I64 => "AtomicI64",
    }
}

/// Byte offset of `token` where it is not part of a longer number or name.
fn find_token(line: &str, token: &str) -> Option<usize> {
    let b = line.as_bytes();
    line.match_indices(token).map(|(i, _)| i).find(|&i| {
        let before = i.checked_sub(1).map(|j| b[j]);
        let after = b.get(i + token.len()).copied();
        let word = |c: u8| c.is_ascii_alphanumeric() || c == b'_';
        !before.is_some_and(|c| word(c) || (c == b'-' && !token.starts_with('-'))) && !after.is_some_and(word)
    })
}

/// What the candidate is compared against.
#[derive(Debug, Clone, Copy)]
pub enum Reference<'a> {
    Oracle(&'a WrappedOracle),
    /// A Rust function with the candidate's signature.
    Rust { source: &'a str, name: &'a str },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarnessFile {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Harness {
    pub files: Vec<HarnessFile>,
    pub signature: FnSignature,
    pub strategy: InputStrategy,
}

impl Harness {
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
        for f in &self.files {
            let path = dir.join(&f.name);
            std::fs::write(&path, &f.contents).map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
        }
        Ok(())
    }

    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|f| f.name == name).map(|f| f.contents.as_str())
    }
}

/// Generate the equivalence harness for `candidate` against `reference`.
pub fn generate_equivalence_harness(
    candidate: &str,
    sig: &FnSignature,
    strategy: &InputStrategy,
    reference: Reference<'_>,
) -> Result<Harness> {
    if strategy.slots.len() != sig.params.len() {
        return Err(Error::UnsupportedType(format!(
            "strategy has {} slots for {} parameters",
            strategy.slots.len(),
            sig.params.len()
        )));
    }
    if sig.ret == TypeDesc::Unit {
        return Err(Error::UnsupportedType("functions without a return value".into()));
    }
    let mut files = vec![HarnessFile {
        name: CANDIDATE_FILE.into(),
        contents: strip_inner_attributes(candidate),
    }];
    let mut out = String::new();
    out.push_str("// Equivalence harness. Generated, do not edit.\n");
    out.push_str("#![allow(unused, dead_code, non_snake_case, non_camel_case_types, non_upper_case_globals, unreachable_code, unused_parens, unconditional_panic, arithmetic_overflow, clippy::all)]\n\n");
    let _ = writeln!(out, "include!(\"{CANDIDATE_FILE}\");\n");
    let _ = writeln!(out, "#[path = \"{RUNTIME_FILE}\"]\nmod __vert_rt;\n");

    let cand_tys: Vec<String> = sig.params.iter().map(|p| p.ty.rust("")).collect();
    let names: Vec<String> = (0..sig.params.len()).map(|i| format!("a{i}")).collect();
    let tuple = |items: &[String]| -> String {
        match items.len() {
            1 => format!("({},)", items[0]),
            _ => format!("({})", items.join(", ")),
        }
    };
    let draws = |prefix: &str| -> Vec<String> {
        strategy
            .slots
            .iter()
            .enumerate()
            .map(|(i, s)| draw_expr(&s.strategy, &InputStrategy::tag_base(i).to_string(), prefix, 0))
            .collect()
    };
    let call = |path: &str| -> String {
        let args: Vec<String> = sig
            .params
            .iter()
            .zip(&names)
            .map(|(p, n)| match p.passing {
                Passing::Value => format!("{n}.clone()"),
                Passing::Ref => format!("&{n}"),
                Passing::RefMut => format!("&mut {n}.clone()"),
            })
            .collect();
        format!("{path}({})", args.join(", "))
    };

    let case_body = match reference {
        Reference::Oracle(w) => {
            for p in &sig.params {
                if !matches!(p.ty, TypeDesc::Scalar(_)) || p.passing != Passing::Value {
                    return Err(Error::UnsupportedType(format!(
                        "parameter `{}` cannot be injected into the oracle",
                        p.name
                    )));
                }
            }
            if !matches!(sig.ret, TypeDesc::Scalar(_)) {
                return Err(Error::UnsupportedType("non-scalar return against the oracle".into()));
            }
            if w.inputs.len() != sig.params.len() || w.inputs.iter().enumerate().any(|(i, c)| c.slot_index != i) {
                return Err(Error::UnsupportedType(format!(
                    "entry call supplies {} inputs for {} parameters",
                    w.inputs.len(),
                    sig.params.len()
                )));
            }
            files.push(HarnessFile {
                name: ORACLE_FILE.into(),
                contents: w.text.clone(),
            });
            let _ = writeln!(out, "#[path = \"{ORACLE_FILE}\"]\nmod __vert_oracle;\n");
            let _ = writeln!(out, "type __VertArgs = {};\n", tuple(&cand_tys));
            emit_draw(&mut out, &tuple(&draws("")));
            emit_show(&mut out, strategy, &tuple(&names), &names);
            let mut body = String::new();
            let _ = writeln!(body, "    let {} = args;", tuple(&names));
            let _ = writeln!(body, "    let out = {};", call(&sig.name));
            let store = |cell: &Cell, value: &str| {
                let cast = match cell.ty {
                    LiteralType::I32 => "i32",
                    LiteralType::I64 => "i64",
                };
                format!("    __vert_oracle::{}.store(({value}) as {cast}, ::std::sync::atomic::Ordering::Relaxed);\n", cell.name)
            };
            body.push_str(&store(&w.output, "out"));
            for (cell, n) in w.inputs.iter().zip(&names) {
                body.push_str(&store(cell, n));
            }
            body.push_str("    let mut oracle = __vert_oracle::WasmModule::new();\n");
            body.push_str("    __vert_rt::check(oracle._start().is_some(), 2);\n");
            let _ = writeln!(body, "    __vert_rt::check(oracle.{}() == Some(0), 1);", w.entry_fn_symbol);
            body
        }
        Reference::Rust { source, name } => {
            let rsig = parse_signature(source, name)?;
            let same = rsig.params.len() == sig.params.len()
                && rsig.params.iter().zip(&sig.params).all(|(a, b)| a.ty == b.ty && a.passing == b.passing)
                && rsig.ret == sig.ret;
            if !same {
                return Err(Error::UnsupportedType(format!("reference `{name}` has a different signature")));
            }
            if sig.ret.is_user_type() {
                return Err(Error::UnsupportedType("user-defined return types".into()));
            }
            files.push(HarnessFile {
                name: REFERENCE_FILE.into(),
                contents: strip_inner_attributes(source),
            });
            // The glue module is a child of the reference, so it sees the
            // reference's private items; the parent only handles `dyn Any`.
            let ref_tys: Vec<String> = sig.params.iter().map(|p| p.ty.rust("")).collect();
            let _ = writeln!(out, "mod __vert_reference {{\n    include!(\"{REFERENCE_FILE}\");\n");
            out.push_str("    pub(crate) mod __vert_glue {\n        use super::*;\n\n");
            let _ = writeln!(
                out,
                "        pub(crate) fn draw(src: &mut dyn crate::__vert_rt::Source) -> Box<dyn ::std::any::Any> {{\n            Box::new({})\n        }}\n",
                tuple(&draws(""))
            );
            let _ = writeln!(
                out,
                "        pub(crate) fn call(args: Box<dyn ::std::any::Any>) -> {} {{\n            let {}: {} = *args.downcast().unwrap();\n            {}\n        }}\n    }}\n}}\n",
                sig.ret.rust(""),
                tuple(&names),
                tuple(&ref_tys),
                call(&format!("super::{name}"))
            );
            let _ = writeln!(out, "type __VertArgs = ({}, Box<dyn ::std::any::Any>);\n", tuple(&cand_tys));
            emit_draw(&mut out, &format!("({}, __vert_reference::__vert_glue::draw(src))", tuple(&draws(""))));
            emit_show(&mut out, strategy, &format!("({}, _)", tuple(&names)), &names);
            let mut body = String::new();
            let _ = writeln!(body, "    let ({}, r) = args;", tuple(&names));
            let _ = writeln!(body, "    let out = {};", call(&sig.name));
            body.push_str("    let expected = __vert_reference::__vert_glue::call(r);\n");
            body.push_str("    __vert_rt::check(out == expected, 1);\n");
            body
        }
    };
    let _ = writeln!(out, "fn __vert_case(args: __VertArgs) {{\n{case_body}}}\n");
    let _ = writeln!(
        out,
        "#[cfg_attr(kani, kani::proof)]\n#[cfg_attr(not(any(kani, vert_bmc)), test)]\nfn {HARNESS_FN}() {{\n    __vert_rt::drive({}, __vert_draw, __vert_case, __vert_show);\n}}\n",
        sig.params.len()
    );
    let _ = writeln!(
        out,
        "#[cfg(vert_bmc)]\n#[no_mangle]\npub extern \"C\" fn {BMC_ENTRY}() {{\n    {HARNESS_FN}();\n}}"
    );
    files.insert(
        0,
        HarnessFile {
            name: HARNESS_FILE.into(),
            contents: out,
        },
    );
    files.push(HarnessFile {
        name: RUNTIME_FILE.into(),
        contents: RUNTIME_SOURCE.into(),
    });
    Ok(Harness {
        files,
        signature: sig.clone(),
        strategy: strategy.clone(),
    })
}

/// Inner attributes are only legal at the crate root, so included files
/// must not carry them.
fn strip_inner_attributes(source: &str) -> String {
    let mut out: String = source
        .lines()
        .filter(|l| !l.trim_start().starts_with("#!["))
        .collect::<Vec<_>>()
        .join("\n");
    out.push('\n');
    out
}

fn emit_draw(out: &mut String, expr: &str) {
    let _ = writeln!(
        out,
        "fn __vert_draw(src: &mut dyn __vert_rt::Source) -> __VertArgs {{\n    {expr}\n}}\n"
    );
}

fn emit_show(out: &mut String, strategy: &InputStrategy, pattern: &str, names: &[String]) {
    let shown: Vec<String> = strategy
        .slots
        .iter()
        .zip(names)
        .map(|(s, n)| show_expr(&s.strategy, n, 0))
        .collect();
    let _ = writeln!(
        out,
        "fn __vert_show(args: &__VertArgs) -> Vec<String> {{\n    let {pattern} = args;\n    vec![{}]\n}}\n",
        shown.join(", ")
    );
}

/// Expression drawing a value of `s` starting at tag expression `tag`.
fn draw_expr(s: &Strategy, tag: &str, prefix: &str, depth: usize) -> String {
    let at = |offset: usize| {
        if offset == 0 {
            tag.to_string()
        } else {
            format!("({tag} + {offset})")
        }
    };
    match s {
        Strategy::Int { scalar, min, max } => {
            let raw = format!("src.int({tag} as i32, {min}, {max})");
            match scalar {
                Scalar::Bool => format!("({raw} != 0)"),
                Scalar::Char => format!("({raw} as u8 as char)"),
                other => format!("({raw} as {})", other.rust()),
            }
        }
        Strategy::Str { capacity } => {
            let (n, i, v) = (format!("n{depth}"), format!("i{depth}"), format!("v{depth}"));
            format!(
                "{{ let {n} = src.int({tag} as i32, 0, {capacity}) as usize; let mut {v} = String::new(); for {i} in 0..{n} {{ {v}.push(src.int(({tag} + 1 + {i} as i64) as i32, 0, {}) as u8 as char); }} {v} }}",
                strategy::ASCII_MAX
            )
        }
        Strategy::Vec { elem, capacity } => {
            let (n, i, v) = (format!("n{depth}"), format!("i{depth}"), format!("v{depth}"));
            let size = elem.size();
            let elem_tag = format!("({tag} + 1 + {i} as i64 * {size})");
            format!(
                "{{ let {n} = src.int({tag} as i32, 0, {capacity}) as usize; let mut {v} = Vec::new(); for {i} in 0..{n} {{ {v}.push({}); }} {v} }}",
                draw_expr(elem, &elem_tag, prefix, depth + 1)
            )
        }
        Strategy::Struct { name, fields } => {
            format!("{prefix}{name}{}", draw_fields(fields, tag, 0, prefix, depth))
        }
        Strategy::Enum { name, variants } => {
            let mut arms = String::new();
            let mut offset = 1;
            for (k, (v, fields)) in variants.iter().enumerate() {
                let pat = if k + 1 == variants.len() { "_".to_string() } else { k.to_string() };
                let _ = write!(arms, "{pat} => {prefix}{name}::{v}{}, ", draw_fields(fields, tag, offset, prefix, depth));
                offset += fields.all().iter().map(|f| f.size()).sum::<usize>();
            }
            format!("match src.int({} as i32, 0, {}) {{ {arms}}}", at(0), variants.len() - 1)
        }
    }
}

fn draw_fields(fields: &FieldStrategies, tag: &str, mut offset: usize, prefix: &str, depth: usize) -> String {
    let mut next = |s: &Strategy| {
        let t = format!("({tag} + {offset})");
        offset += s.size();
        draw_expr(s, &t, prefix, depth + 1)
    };
    match fields {
        FieldStrategies::Unit => String::new(),
        FieldStrategies::Tuple(t) => format!("({})", t.iter().map(&mut next).collect::<Vec<_>>().join(", ")),
        FieldStrategies::Named(n) => format!(
            " {{ {} }}",
            n.iter().map(|(k, s)| format!("{k}: {}", next(s))).collect::<Vec<_>>().join(", ")
        ),
    }
}

/// Expression rendering the value at place `v` as a `String`. The format
/// matches [`render_value`].
fn show_expr(s: &Strategy, v: &str, depth: usize) -> String {
    match s {
        Strategy::Int { scalar: Scalar::Char, .. } | Strategy::Str { .. } => format!("format!(\"{{:?}}\", {v})"),
        Strategy::Int { .. } => format!("format!(\"{{}}\", {v})"),
        Strategy::Vec { elem, .. } => {
            let e = format!("e{depth}");
            format!(
                "format!(\"[{{}}]\", {v}.iter().map(|{e}| {}).collect::<Vec<String>>().join(\", \"))",
                show_expr(elem, &e, depth + 1)
            )
        }
        Strategy::Struct { name, fields } => match fields {
            FieldStrategies::Unit => format!("String::from(\"{name}\")"),
            FieldStrategies::Tuple(t) => {
                let parts: Vec<String> =
                    t.iter().enumerate().map(|(i, f)| show_expr(f, &format!("{v}.{i}"), depth + 1)).collect();
                format!("format!(\"{name}({{}})\", [{}].join(\", \"))", parts.join(", "))
            }
            FieldStrategies::Named(n) => {
                let parts: Vec<String> = n
                    .iter()
                    .map(|(k, f)| format!("format!(\"{k}: {{}}\", {})", show_expr(f, &format!("{v}.{k}"), depth + 1)))
                    .collect();
                format!("format!(\"{name} {{{{ {{}} }}}}\", [{}].join(\", \"))", parts.join(", "))
            }
        },
        Strategy::Enum { name, variants } => {
            let mut arms = String::new();
            for (var, fields) in variants {
                let label = format!("{name}::{var}");
                match fields {
                    FieldStrategies::Unit => {
                        let _ = write!(arms, "{name}::{var} => String::from(\"{label}\"), ");
                    }
                    FieldStrategies::Tuple(t) => {
                        let binds: Vec<String> = (0..t.len()).map(|i| format!("f{depth}_{i}")).collect();
                        let parts: Vec<String> =
                            t.iter().zip(&binds).map(|(f, b)| show_expr(f, b, depth + 1)).collect();
                        let _ = write!(
                            arms,
                            "{name}::{var}({}) => format!(\"{label}({{}})\", [{}].join(\", \")), ",
                            binds.join(", "),
                            parts.join(", ")
                        );
                    }
                    FieldStrategies::Named(n) => {
                        let binds: Vec<String> = n.iter().map(|(k, _)| format!("{k}: f{depth}_{k}")).collect();
                        let parts: Vec<String> = n
                            .iter()
                            .map(|(k, f)| format!("format!(\"{k}: {{}}\", {})", show_expr(f, &format!("f{depth}_{k}"), depth + 1)))
                            .collect();
                        let _ = write!(
                            arms,
                            "{name}::{var} {{ {} }} => format!(\"{label} {{{{ {{}} }}}}\", [{}].join(\", \")), ",
                            binds.join(", "),
                            parts.join(", ")
                        );
                    }
                }
            }
            format!("match &{v} {{ {arms}}}")
        }
    }
}

/// Render the drawn value of one slot from its tag assignments. Tags that
/// were never drawn take the value closest to zero, as on replay.
pub fn render_value(s: &Strategy, base: i64, lookup: &dyn Fn(i64) -> Option<i128>) -> String {
    let get = |tag: i64, min: i128, max: i128| lookup(tag).map_or_else(|| closest_to_zero(min, max), |v| v.clamp(min, max));
    match s {
        Strategy::Int { scalar, min, max } => {
            let v = match carrier(*min, *max) {
                // Checkers report 64-bit draws signed.
                Carrier::U64 => lookup(base).map_or(0, |v| v as i64 as u64 as i128),
                _ => get(base, *min, *max),
            };
            match scalar {
                Scalar::Bool => (v != 0).to_string(),
                Scalar::Char => format!("{:?}", v as u8 as char),
                _ => v.to_string(),
            }
        }
        Strategy::Str { capacity } => {
            let n = get(base, 0, *capacity as i128) as i64;
            let text: String = (0..n).map(|i| get(base + 1 + i, 0, strategy::ASCII_MAX) as u8 as char).collect();
            format!("{text:?}")
        }
        Strategy::Vec { elem, capacity } => {
            let n = get(base, 0, *capacity as i128) as i64;
            let size = elem.size() as i64;
            let items: Vec<String> = (0..n).map(|i| render_value(elem, base + 1 + i * size, lookup)).collect();
            format!("[{}]", items.join(", "))
        }
        Strategy::Struct { name, fields } => format!("{name}{}", render_fields(fields, base, lookup)),
        Strategy::Enum { name, variants } => {
            let k = get(base, 0, variants.len() as i128 - 1) as usize;
            let offset: usize = variants[..k].iter().map(|(_, f)| f.all().iter().map(|s| s.size()).sum::<usize>()).sum();
            let (var, fields) = &variants[k];
            format!("{name}::{var}{}", render_fields(fields, base + 1 + offset as i64, lookup))
        }
    }
}

fn render_fields(fields: &FieldStrategies, base: i64, lookup: &dyn Fn(i64) -> Option<i128>) -> String {
    let mut offset = 0i64;
    let mut next = |s: &Strategy| {
        let r = render_value(s, base + offset, lookup);
        offset += s.size() as i64;
        r
    };
    match fields {
        FieldStrategies::Unit => String::new(),
        FieldStrategies::Tuple(t) => format!("({})", t.iter().map(&mut next).collect::<Vec<_>>().join(", ")),
        FieldStrategies::Named(n) => format!(
            " {{ {} }}",
            n.iter().map(|(k, s)| format!("{k}: {}", next(s))).collect::<Vec<_>>().join(", ")
        ),
    }
}

/// Render every slot of `strategy`.
pub fn render_inputs(strategy: &InputStrategy, lookup: &dyn Fn(i64) -> Option<i128>) -> Vec<String> {
    strategy
        .slots
        .iter()
        .enumerate()
        .map(|(i, s)| render_value(&s.strategy, InputStrategy::tag_base(i), lookup))
        .collect()
}

pub fn closest_to_zero(min: i128, max: i128) -> i128 {
    if min > 0 {
        min
    } else if max < 0 {
        max
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Literal;

    fn module() -> OracleModule {
        OracleModule {
            lifted_text: "fn a() {\n    v0 = TaggedVal::from(123i32);\n    v1 = TaggedVal::from(1123i32);\n    v2 = TaggedVal::from(321i32);\n}\n".into(),
            entry_fn_symbol: "func_2".into(),
            build_fingerprint: "0".into(),
        }
    }

    fn point(kind: InjectionKind, line: usize, value: i64, slot: usize) -> InjectionPoint {
        InjectionPoint {
            kind,
            line,
            original_literal: Literal {
                value,
                ty: LiteralType::I32,
            },
            slot_index: slot,
        }
    }

    #[test]
    fn wrapper_replaces_only_the_point_literals() {
        let m = module();
        let w = generate_wrapper(
            &m,
            &[point(InjectionKind::Input, 2, 123, 0), point(InjectionKind::OutputBaseline, 4, 321, 0)],
        )
        .unwrap();
        assert!(w.text.contains("v0 = TaggedVal::from(INPUT_1.load(::std::sync::atomic::Ordering::Relaxed));"));
        assert!(w.text.contains("TaggedVal::from(1123i32)"));
        assert!(w.text.contains("pub static OUTPUT_1: ::std::sync::atomic::AtomicI32 = ::std::sync::atomic::AtomicI32::new(321);"));
        let before: Vec<&str> = m.lifted_text.lines().collect();
        let after: Vec<&str> = w.text.lines().collect();
        let changed = before.iter().zip(&after).filter(|(a, b)| a != b).count();
        assert_eq!(changed, 2);
    }

    #[test]
    fn stale_points_are_rejected() {
        let err = generate_wrapper(
            &module(),
            &[point(InjectionKind::Input, 3, 123, 0), point(InjectionKind::OutputBaseline, 4, 321, 0)],
        )
        .unwrap_err();
        assert!(matches!(err, Error::PointStale { line: 3 }));
    }

    #[test]
    fn cell_names_avoid_existing_identifiers() {
        let mut m = module();
        m.lifted_text.push_str("static INPUT_1: i32 = 0;\n");
        let w = generate_wrapper(
            &m,
            &[point(InjectionKind::Input, 2, 123, 0), point(InjectionKind::OutputBaseline, 4, 321, 0)],
        )
        .unwrap();
        assert_eq!(w.inputs[0].name, "INPUT_1_2");
    }

    #[test]
    fn tokens_respect_number_boundaries() {
        assert_eq!(find_token("from(1123i32) + from(123i32)", "123i32"), Some(21));
        assert_eq!(find_token("from(-123i32)", "123i32"), None);
        assert_eq!(find_token("from(-123i32)", "-123i32"), Some(5));
    }

    #[test]
    fn rendering_follows_the_tag_layout() {
        let sig = parse_signature("enum E { A(i32, char), B { s: String } }\nfn f(e: E, v: Vec<u8>) -> i32 { 0 }", "f").unwrap();
        let s = derive_input_strategy(&sig, &[None, Some(2)]).unwrap();
        let tags = [(0, 1), (3, 2), (4, 104), (5, 105), (65536, 2), (65537, 7)];
        let lookup = |t: i64| tags.iter().find(|(k, _)| *k == t).map(|&(_, v)| v as i128);
        assert_eq!(render_inputs(&s, &lookup), ["E::B { s: \"hi\" }", "[7, 0]"]);
    }

    #[test]
    fn oracle_mode_rejects_composite_parameters() {
        let sig = parse_signature("fn f(s: &str) -> i32 { 0 }", "f").unwrap();
        let s = derive_input_strategy(&sig, &[]).unwrap();
        let w = generate_wrapper(
            &module(),
            &[point(InjectionKind::Input, 2, 123, 0), point(InjectionKind::OutputBaseline, 4, 321, 0)],
        )
        .unwrap();
        let err = generate_equivalence_harness("fn f(s: &str) -> i32 { 0 }", &sig, &s, Reference::Oracle(&w)).unwrap_err();
        assert!(matches!(err, Error::UnsupportedType(_)));
    }
}
