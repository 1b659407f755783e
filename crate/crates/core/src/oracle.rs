//! Oracle construction: compile the source program to WebAssembly, lift it
//! back into Rust, and find the lines holding the entry call's constants by
//! mutating one literal per rebuild and diffing the lifted texts.

use std::hash::{Hash, Hasher};
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use similar::{DiffTag, TextDiff};
use tracing::{debug, info};

use crate::error::{Error, Result};
use crate::pipeline::{split_units, Language};
use crate::process;
use crate::scan::{self, Syntax};
use crate::toolchain::{Lifter, Toolchain};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleModule {
    pub lifted_text: String,
    pub entry_fn_symbol: String,
    pub build_fingerprint: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InjectionKind {
    Input,
    OutputBaseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LiteralType {
    I32,
    I64,
}

impl LiteralType {
    pub fn suffix(self) -> &'static str {
        match self {
            LiteralType::I32 => "i32",
            LiteralType::I64 => "i64",
        }
    }

    pub fn bits(self) -> u32 {
        match self {
            LiteralType::I32 => 32,
            LiteralType::I64 => 64,
        }
    }
}

/// A typed integer constant as it appears in lifted text, e.g. `123i32`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub value: i64,
    pub ty: LiteralType,
}

impl Literal {
    pub fn token(&self) -> String {
        format!("{}{}", self.value, self.ty.suffix())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InjectionPoint {
    pub kind: InjectionKind,
    /// 1-based line in the lifted text.
    pub line: usize,
    pub original_literal: Literal,
    /// Argument position for inputs; 0 for the output baseline.
    pub slot_index: usize,
}

/// A literal found in the entry call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryLiteral {
    /// Byte range in the entry-call text.
    pub range: std::ops::Range<usize>,
    pub value: i64,
    pub bits: u32,
    pub kind: InjectionKind,
    pub slot_index: usize,
    /// Length of a string or array literal argument, for sample sizes.
    pub sample_len: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryCall {
    /// Name of the function the entry call defines.
    pub entry_name: String,
    /// Function called with the literal inputs.
    pub target_name: String,
    pub literals: Vec<EntryLiteral>,
    /// Number of arguments of the target call.
    pub arity: usize,
    /// Per-argument sample lengths for string and array literals.
    pub sample_lengths: Vec<Option<usize>>,
}

fn syntax_for(language: Language) -> Syntax {
    Syntax::CLike {
        go_raw_strings: language == Language::Go,
    }
}

/// Parse the entry call: the defined function, the call to `target` and
/// its literal arguments, and the literal the result is compared against.
pub fn parse_entry_call(entry: &str, target: &str, language: Language) -> Result<EntryCall> {
    let masked = scan::mask(entry, syntax_for(language));
    let units = split_units(entry, language)?;
    let unit = units.first().ok_or(Error::NoEntryConstants)?;
    let body = unit.range.clone();
    let call = find_call(&masked, target, body.clone()).ok_or(Error::NoEntryConstants)?;
    let args = split_args(&masked, call.clone());
    let mut literals = Vec::new();
    let mut sample_lengths = Vec::new();
    for (slot, arg) in args.iter().enumerate() {
        let text = entry[arg.clone()].trim();
        let lead = entry[arg.clone()].len() - entry[arg.clone()].trim_start().len();
        let start = arg.start + lead;
        sample_lengths.push(sample_len(text));
        if let Some((value, bits)) = parse_literal(text) {
            literals.push(EntryLiteral {
                range: start..start + text.len(),
                value,
                bits,
                kind: InjectionKind::Input,
                slot_index: slot,
                sample_len: None,
            });
        }
    }
    if literals.is_empty() {
        return Err(Error::NoEntryConstants);
    }
    let expected = find_expected(entry, &masked, body, call.clone()).ok_or(Error::NoEntryConstants)?;
    literals.push(expected);
    Ok(EntryCall {
        entry_name: unit.name.clone(),
        target_name: target.to_string(),
        literals,
        arity: args.len(),
        sample_lengths,
    })
}

/// Byte range strictly inside the parentheses of the first call to `name`.
fn find_call(masked: &str, name: &str, within: std::ops::Range<usize>) -> Option<std::ops::Range<usize>> {
    let b = masked.as_bytes();
    let is_ident = |c: u8| c.is_ascii_alphanumeric() || c == b'_';
    for (i, _) in masked[within.clone()].match_indices(name) {
        let at = within.start + i;
        let end = at + name.len();
        if (at > 0 && is_ident(b[at - 1])) || b.get(end).is_some_and(|&c| is_ident(c)) {
            continue;
        }
        let mut j = end;
        while b.get(j).is_some_and(u8::is_ascii_whitespace) {
            j += 1;
        }
        if b.get(j) != Some(&b'(') {
            continue;
        }
        let open = j;
        let mut depth = 0;
        for (k, &c) in b.iter().enumerate().skip(open) {
            match c {
                b'(' | b'[' | b'{' => depth += 1,
                b')' | b']' | b'}' => {
                    depth -= 1;
                    if depth == 0 {
                        return Some(open + 1..k);
                    }
                }
                _ => {}
            }
        }
    }
    None
}

fn split_args(masked: &str, inner: std::ops::Range<usize>) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    if masked[inner.clone()].trim().is_empty() {
        return out;
    }
    let mut depth = 0;
    let mut start = inner.start;
    for (k, c) in masked[inner.clone()].bytes().enumerate() {
        let at = inner.start + k;
        match c {
            b'(' | b'[' | b'{' => depth += 1,
            b')' | b']' | b'}' => depth -= 1,
            b',' if depth == 0 => {
                out.push(start..at);
                start = at + 1;
            }
            _ => {}
        }
    }
    out.push(start..inner.end);
    out
}

/// Integer, character or boolean literal, with its width in bits.
pub fn parse_literal(text: &str) -> Option<(i64, u32)> {
    let t = text.trim();
    let t = t.strip_prefix('(').and_then(|s| s.strip_suffix(')')).map(str::trim).unwrap_or(t);
    match t {
        "true" => return Some((1, 1)),
        "false" => return Some((0, 1)),
        _ => {}
    }
    if let Some(inner) = t.strip_prefix('\'').and_then(|s| s.strip_suffix('\'')) {
        let v = match inner {
            "\\n" => b'\n' as i64,
            "\\t" => b'\t' as i64,
            "\\0" => 0,
            "\\\\" => b'\\' as i64,
            "\\'" => b'\'' as i64,
            s if s.chars().count() == 1 => s.chars().next()? as i64,
            _ => return None,
        };
        return Some((v, 32));
    }
    let (neg, digits) = match t.strip_prefix('-') {
        Some(rest) => (true, rest.trim_start()),
        None => (false, t),
    };
    let lower = digits.to_ascii_lowercase();
    let core = lower.trim_end_matches(['u', 'l']);
    let suffix_long = lower[core.len()..].contains('l');
    let magnitude = if let Some(hex) = core.strip_prefix("0x") {
        u64::from_str_radix(hex, 16).ok()?
    } else if core.len() > 1 && core.starts_with('0') && core.bytes().all(|c| c.is_ascii_digit()) {
        u64::from_str_radix(&core[1..], 8).ok()?
    } else if !core.is_empty() && core.bytes().all(|c| c.is_ascii_digit()) {
        core.parse::<u64>().ok()?
    } else {
        return None;
    };
    let value = if neg {
        (magnitude as i64).wrapping_neg()
    } else {
        magnitude as i64
    };
    let fits32 = i32::try_from(value).is_ok() || (!neg && magnitude <= u32::MAX as u64);
    let bits = if suffix_long || !fits32 { 64 } else { 32 };
    Some((value, bits))
}

fn sample_len(text: &str) -> Option<usize> {
    let t = text.trim();
    if t.starts_with('"') && t.ends_with('"') && t.len() >= 2 {
        return Some(t[1..t.len() - 1].chars().count());
    }
    let inner = t.strip_prefix('{').or_else(|| t.strip_prefix('['))?;
    let inner = inner.strip_suffix('}').or_else(|| inner.strip_suffix(']'))?;
    Some(inner.split(',').filter(|s| !s.trim().is_empty()).count())
}

/// The literal compared against the result with `==` or `!=`.
fn find_expected(
    entry: &str,
    masked: &str,
    body: std::ops::Range<usize>,
    call: std::ops::Range<usize>,
) -> Option<EntryLiteral> {
    let b = masked.as_bytes();
    let mut i = body.start;
    while i + 1 < body.end {
        let op = &b[i..i + 2];
        if (op == b"==" || op == b"!=") && !call.contains(&i) {
            if let Some(lit) = literal_after(entry, masked, i + 2).or_else(|| literal_before(entry, masked, i)) {
                return Some(lit);
            }
        }
        i += 1;
    }
    None
}

fn token_end(b: &[u8], start: usize) -> usize {
    let mut j = start;
    if b.get(j) == Some(&b'\'') {
        j += 1;
        while j < b.len() && b[j] != b'\'' {
            j += if b[j] == b'\\' { 2 } else { 1 };
        }
        return (j + 1).min(b.len());
    }
    while j < b.len() && (b[j].is_ascii_alphanumeric() || b[j] == b'_') {
        j += 1;
    }
    j
}

fn literal_after(entry: &str, masked: &str, from: usize) -> Option<EntryLiteral> {
    let b = masked.as_bytes();
    let mut s = from;
    while b.get(s).is_some_and(u8::is_ascii_whitespace) {
        s += 1;
    }
    let mut start = s;
    if b.get(s) == Some(&b'-') {
        s += 1;
        while b.get(s).is_some_and(u8::is_ascii_whitespace) {
            s += 1;
        }
    } else {
        start = s;
    }
    let end = token_end(b, s);
    expected_literal(entry, start..end)
}

fn literal_before(entry: &str, masked: &str, op: usize) -> Option<EntryLiteral> {
    let b = masked.as_bytes();
    let mut e = op;
    while e > 0 && b[e - 1].is_ascii_whitespace() {
        e -= 1;
    }
    let mut s = e;
    if s > 0 && b[s - 1] == b'\'' {
        s -= 1;
        while s > 0 && b[s - 1] != b'\'' {
            s -= 1;
        }
        s = s.saturating_sub(1);
    } else {
        while s > 0 && (b[s - 1].is_ascii_alphanumeric() || b[s - 1] == b'_') {
            s -= 1;
        }
    }
    let mut start = s;
    let mut k = s;
    while k > 0 && b[k - 1].is_ascii_whitespace() {
        k -= 1;
    }
    let prev_is_operand = k >= 2 && (b[k - 2].is_ascii_alphanumeric() || b[k - 2] == b')');
    if k > 0 && b[k - 1] == b'-' && !prev_is_operand {
        start = k - 1;
    }
    expected_literal(entry, start..e)
}

fn expected_literal(entry: &str, range: std::ops::Range<usize>) -> Option<EntryLiteral> {
    if range.is_empty() {
        return None;
    }
    let (value, bits) = parse_literal(&entry[range.clone()])?;
    Some(EntryLiteral {
        range,
        value,
        bits,
        kind: InjectionKind::OutputBaseline,
        slot_index: 0,
        sample_len: None,
    })
}

/// Source text handed to the compiler: program plus entry call, with the
/// entry function exported under its own name.
pub fn assemble_source(text: &str, entry_call: &str, entry_name: &str, language: Language) -> String {
    match language {
        Language::C => format!("{text}\n\n{entry_call}\n"),
        Language::Cpp => format!("{text}\n\nextern \"C\" {entry_call}\n"),
        Language::Go => {
            if entry_call.contains(&format!("//export {entry_name}")) {
                format!("{text}\n\n{entry_call}\n")
            } else {
                format!("{text}\n\n//export {entry_name}\n{entry_call}\n")
            }
        }
    }
}

/// Compile assembled source to a WebAssembly module inside `dir`.
pub fn compile_to_wasm(source: &str, language: Language, tools: &Toolchain, dir: &Path, limit: Duration) -> Result<Vec<u8>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    let input = dir.join(format!("program.{}", language.extension()));
    let output = dir.join("program.wasm");
    std::fs::write(&input, source).map_err(|e| Error::io("writing oracle source", e))?;
    let mut cmd = tools.source_compiler(language).command(&[
        ("input", &input.to_string_lossy()),
        ("output", &output.to_string_lossy()),
    ])?;
    cmd.current_dir(dir);
    let out = process::run(cmd, limit)?;
    if !out.success() {
        let why = if out.timed_out {
            "compiler timed out".to_string()
        } else {
            out.stderr_text()
        };
        return Err(Error::OracleBuildFailed(why));
    }
    std::fs::read(&output).map_err(|e| Error::io("reading compiled module", e))
}

/// Lift a module and resolve the symbol of `entry_name`.
pub fn lift_to_target(wasm: &[u8], entry_name: &str, tools: &Toolchain, dir: &Path, limit: Duration) -> Result<OracleModule> {
    let text = match &tools.lifter {
        Lifter::Builtin => vert_lift::lift(wasm).map_err(|e| Error::LiftFailed(e.to_string()))?.text,
        Lifter::Command(cmd) => {
            let input = dir.join("lift_input.wasm");
            let output = dir.join("lifted.rs");
            std::fs::write(&input, wasm).map_err(|e| Error::io("writing lifter input", e))?;
            let c = cmd.command(&[("input", &input.to_string_lossy()), ("output", &output.to_string_lossy())])?;
            let out = process::run(c, limit)?;
            if !out.success() {
                return Err(Error::LiftFailed(out.stderr_text()));
            }
            std::fs::read_to_string(&output).map_err(|e| Error::LiftFailed(e.to_string()))?
        }
    };
    let entry_fn_symbol = vert_lift::parse_export_header(&text)
        .into_iter()
        .find(|(name, _)| name == entry_name)
        .map(|(_, sym)| sym)
        .ok_or_else(|| Error::LiftFailed(format!("lifted module does not export `{entry_name}`")))?;
    let mut h = std::collections::hash_map::DefaultHasher::new();
    wasm.hash(&mut h);
    Ok(OracleModule {
        lifted_text: text,
        entry_fn_symbol,
        build_fingerprint: format!("{:016x}", h.finish()),
    })
}

/// A built oracle and everything derived from the entry call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Oracle {
    pub module: OracleModule,
    pub points: Vec<InjectionPoint>,
    pub entry_name: String,
    pub sample_lengths: Vec<Option<usize>>,
    pub arity: usize,
}

/// Build, lift and localize constants for one program.
pub fn build_oracle(
    text: &str,
    entry_call: &str,
    target: &str,
    language: Language,
    tools: &Toolchain,
    dir: &Path,
    limit: Duration,
) -> Result<Oracle> {
    let entry = parse_entry_call(entry_call, target, language)?;
    let base_dir = dir.join("base");
    let source = assemble_source(text, entry_call, &entry.entry_name, language);
    let wasm = compile_to_wasm(&source, language, tools, &base_dir, limit)?;
    let mut module = lift_to_target(&wasm, &entry.entry_name, tools, &base_dir, limit)?;
    let mut fp = std::collections::hash_map::DefaultHasher::new();
    (&module.build_fingerprint, tools.versions(language)).hash(&mut fp);
    module.build_fingerprint = format!("{:016x}", fp.finish());
    let points = identify_injection_points(&module, text, entry_call, &entry, language, tools, dir, limit)?;
    info!(points = points.len(), symbol = %module.entry_fn_symbol, "oracle ready");
    Ok(Oracle {
        module,
        points,
        entry_name: entry.entry_name,
        sample_lengths: entry.sample_lengths,
        arity: entry.arity,
    })
}

/// Replacement values tried for a literal: its complement, then its
/// successor, skipping values already present in the lifted text.
pub fn fresh_literals(value: i64, bits: u32, lifted: &str) -> Vec<i64> {
    let trunc = |v: i64| -> i64 {
        match bits {
            1 => v & 1,
            32 => v as i32 as i64,
            _ => v,
        }
    };
    let mut out = Vec::new();
    for v in [trunc(!value), trunc(value.wrapping_add(1)), trunc(value.wrapping_add(2))] {
        let present = [format!("({v}i32)"), format!("({v}i64)")].iter().any(|t| lifted.contains(t.as_str()));
        if v != value && !present && !out.contains(&v) {
            out.push(v);
        }
        if out.len() == 2 {
            break;
        }
    }
    out
}

fn render_literal(v: i64, bits: u32, language: Language) -> String {
    if bits == 1 {
        return if v != 0 { "true".into() } else { "false".into() };
    }
    let suffix = if bits == 64 && language != Language::Go { "LL" } else { "" };
    if v < 0 {
        format!("({v}{suffix})")
    } else {
        format!("{v}{suffix}")
    }
}

/// Old-side line numbers (1-based) changed between two texts, plus whether
/// any pure insertion occurred.
pub fn changed_lines(old: &str, new: &str) -> (Vec<usize>, bool) {
    let diff = TextDiff::from_lines(old, new);
    let mut lines = Vec::new();
    let mut inserted = false;
    for op in diff.ops() {
        match op.tag() {
            DiffTag::Equal => {}
            DiffTag::Insert => inserted = true,
            DiffTag::Delete | DiffTag::Replace => {
                let r = op.old_range();
                if op.tag() == DiffTag::Replace && op.new_range().len() != r.len() {
                    inserted = true;
                }
                lines.extend(r.map(|l| l + 1));
            }
        }
    }
    (lines, inserted)
}

/// First `<int>i32` or `<int>i64` token on a lifted line.
pub fn literal_on_line(line: &str) -> Option<Literal> {
    let b = line.as_bytes();
    let mut i = 0;
    while i < b.len() {
        let starts = b[i].is_ascii_digit() || (b[i] == b'-' && b.get(i + 1).is_some_and(u8::is_ascii_digit));
        let boundary = i == 0 || !(b[i - 1].is_ascii_alphanumeric() || b[i - 1] == b'_');
        if starts && boundary {
            let mut j = i + 1;
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            let ty = match &line[j..] {
                s if s.starts_with("i32") => Some(LiteralType::I32),
                s if s.starts_with("i64") => Some(LiteralType::I64),
                _ => None,
            };
            if let (Some(ty), Ok(value)) = (ty, line[i..j].parse::<i64>()) {
                return Some(Literal { value, ty });
            }
            i = j;
        } else {
            i += 1;
        }
    }
    None
}

/// Localize each entry-call literal by rebuilding with it replaced.
#[allow(clippy::too_many_arguments)]
pub fn identify_injection_points(
    oracle: &OracleModule,
    text: &str,
    entry_call: &str,
    entry: &EntryCall,
    language: Language,
    tools: &Toolchain,
    dir: &Path,
    limit: Duration,
) -> Result<Vec<InjectionPoint>> {
    let base_lines: Vec<&str> = oracle.lifted_text.lines().collect();
    let mut points = Vec::new();
    for (n, lit) in entry.literals.iter().enumerate() {
        let mut found = 0;
        let mut located = None;
        for (attempt, fresh) in fresh_literals(lit.value, lit.bits, &oracle.lifted_text).into_iter().enumerate() {
            let mut mutated = entry_call.to_string();
            mutated.replace_range(lit.range.clone(), &render_literal(fresh, lit.bits, language));
            let sub = dir.join(format!("mutant-{n}-{attempt}"));
            let source = assemble_source(text, &mutated, &entry.entry_name, language);
            let wasm = compile_to_wasm(&source, language, tools, &sub, limit)?;
            let lifted = lift_to_target(&wasm, &entry.entry_name, tools, &sub, limit)?;
            let (lines, inserted) = changed_lines(&oracle.lifted_text, &lifted.lifted_text);
            debug!(literal = lit.value, fresh, changed = lines.len(), inserted, "mutant diff");
            found = lines.len();
            if lines.len() == 1 && !inserted {
                located = Some(lines[0]);
                break;
            }
        }
        let line = located.ok_or(Error::AmbiguousDiff { expected: 1, found })?;
        let original_literal = literal_on_line(base_lines[line - 1]).ok_or(Error::AmbiguousDiff { expected: 1, found: 0 })?;
        points.push(InjectionPoint {
            kind: lit.kind,
            line,
            original_literal,
            slot_index: lit.slot_index,
        });
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ENTRY: &str = "int callReverse() {\n  int result = reverse(123);\n  if (result == 321) {\n    return 0;\n  } else {\n    return 1;\n  }\n}\n";

    #[test]
    fn parses_the_reverse_entry_call() {
        let e = parse_entry_call(ENTRY, "reverse", Language::C).unwrap();
        assert_eq!(e.entry_name, "callReverse");
        assert_eq!(e.arity, 1);
        assert_eq!(e.literals.len(), 2);
        assert_eq!(e.literals[0].value, 123);
        assert_eq!(e.literals[0].kind, InjectionKind::Input);
        assert_eq!(&ENTRY[e.literals[0].range.clone()], "123");
        assert_eq!(e.literals[1].value, 321);
        assert_eq!(e.literals[1].kind, InjectionKind::OutputBaseline);
    }

    #[test]
    fn negative_and_reversed_comparisons() {
        let entry = "int check() { return -7 != add(-3, 'a', 0x10); }";
        let e = parse_entry_call(entry, "add", Language::C).unwrap();
        let values: Vec<i64> = e.literals.iter().map(|l| l.value).collect();
        assert_eq!(values, [-3, 97, 16, -7]);
        assert_eq!(&entry[e.literals[3].range.clone()], "-7");
    }

    #[test]
    fn go_entry_calls() {
        let entry = "func callAbs() int {\n\tif abs(-4) == 4 {\n\t\treturn 0\n\t}\n\treturn 1\n}\n";
        let e = parse_entry_call(entry, "abs", Language::Go).unwrap();
        assert_eq!(e.entry_name, "callAbs");
        assert_eq!(e.literals.iter().map(|l| l.value).collect::<Vec<_>>(), [-4, 4]);
    }

    #[test]
    fn entry_calls_without_constants_are_rejected() {
        let entry = "int f(int x) { return g(x) == x; }";
        assert!(matches!(parse_entry_call(entry, "g", Language::C), Err(Error::NoEntryConstants)));
        let entry = "int f() { return g(1); }";
        assert!(matches!(parse_entry_call(entry, "g", Language::C), Err(Error::NoEntryConstants)));
    }

    #[test]
    fn literal_forms() {
        assert_eq!(parse_literal("123"), Some((123, 32)));
        assert_eq!(parse_literal("-5"), Some((-5, 32)));
        assert_eq!(parse_literal("10L"), Some((10, 64)));
        assert_eq!(parse_literal("4294967295u"), Some((4294967295, 32)));
        assert_eq!(parse_literal("8589934592"), Some((8589934592, 64)));
        assert_eq!(parse_literal("true"), Some((1, 1)));
        assert_eq!(parse_literal("x"), None);
    }

    #[test]
    fn fresh_literals_avoid_collisions() {
        assert_eq!(fresh_literals(123, 32, ""), [-124, 124]);
        assert_eq!(fresh_literals(123, 32, "v0 = TaggedVal::from(-124i32);"), [124, 125]);
        assert_eq!(fresh_literals(1, 1, ""), [0]);
    }

    #[test]
    fn lifted_literal_tokens() {
        assert_eq!(
            literal_on_line("        v0 = TaggedVal::from(-124i32);"),
            Some(Literal { value: -124, ty: LiteralType::I32 })
        );
        assert_eq!(literal_on_line("    v3 = v1 + 2;"), None);
        assert_eq!(literal_on_line("func_12(5i64)").map(|l| l.value), Some(5));
    }

    #[test]
    fn diff_reports_old_lines() {
        let (lines, ins) = changed_lines("a\nb\nc\n", "a\nB\nc\n");
        assert_eq!(lines, [2]);
        assert!(!ins);
        let (_, ins) = changed_lines("a\nc\n", "a\nb\nc\n");
        assert!(ins);
    }
}
