//! Compiler diagnostics: parsing rustc's JSON stream, classifying errors and
//! turning suggestion lines into text edits.

use serde::{Deserialize, Serialize};
use tracing::debug;

use crate::error::{Error, Result};
use crate::scan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Level {
    Error,
    Warning,
}

/// A source region in 1-based lines and 1-based character columns; the end
/// column is exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub line: usize,
    pub col_start: usize,
    pub line_end: usize,
    pub col_end: usize,
}

impl Span {
    pub fn on_line(line: usize, col_start: usize, col_end: usize) -> Self {
        Span {
            line,
            col_start,
            line_end: line,
            col_end,
        }
    }

    /// Byte range of the span within `text`, if it lies inside it.
    pub fn byte_range(&self, text: &str) -> Option<std::ops::Range<usize>> {
        let start = byte_offset(text, self.line, self.col_start)?;
        let end = byte_offset(text, self.line_end, self.col_end)?;
        (start <= end).then_some(start..end)
    }
}

fn byte_offset(text: &str, line: usize, col: usize) -> Option<usize> {
    if line == 0 || col == 0 {
        return None;
    }
    let line_start = if line == 1 {
        0
    } else {
        text.match_indices('\n').nth(line - 2)?.0 + 1
    };
    let line_text = text[line_start..].split('\n').next().unwrap_or("");
    let mut chars = line_text.char_indices().map(|(i, _)| i).chain([line_text.len()]);
    chars.nth(col - 1).map(|i| line_start + i)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Applicability {
    MachineApplicable,
    MaybeIncorrect,
    HasPlaceholders,
    Unspecified,
    /// Taken from a backquoted fragment in a help message.
    Quoted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Suggestion {
    pub span: Span,
    pub replacement: String,
    pub applicability: Applicability,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSpan {
    pub span: Span,
    pub primary: bool,
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: Option<String>,
    pub level: Level,
    pub message: String,
    pub primary_span: Span,
    /// Every span of the record in the compiled file, primary ones included.
    pub spans: Vec<LabeledSpan>,
    pub suggestions: Vec<Suggestion>,
    pub rendered: String,
}

impl Diagnostic {
    pub fn is_error(&self) -> bool {
        self.level == Level::Error
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedDiagnostics {
    pub diagnostics: Vec<Diagnostic>,
    /// Lines that were not JSON diagnostic records.
    pub malformed: usize,
}

impl ParsedDiagnostics {
    pub fn error_count(&self) -> usize {
        self.diagnostics.iter().filter(|d| d.is_error()).count()
    }
}

#[derive(Deserialize)]
struct RawCode {
    code: String,
}

#[derive(Deserialize)]
struct RawSpan {
    file_name: String,
    line_start: usize,
    line_end: usize,
    column_start: usize,
    column_end: usize,
    is_primary: bool,
    label: Option<String>,
    suggested_replacement: Option<String>,
    suggestion_applicability: Option<String>,
}

#[derive(Deserialize)]
struct RawDiagnostic {
    message: String,
    code: Option<RawCode>,
    level: String,
    spans: Vec<RawSpan>,
    #[serde(default)]
    children: Vec<RawDiagnostic>,
    rendered: Option<String>,
}

impl RawSpan {
    fn span(&self) -> Span {
        Span {
            line: self.line_start,
            col_start: self.column_start,
            line_end: self.line_end,
            col_end: self.column_end,
        }
    }
}

/// Parse rustc's `--error-format=json` output.
///
/// `compiled_ok` is the compiler's exit status; a failed compile that
/// produced no usable record is an error.
pub fn parse_diagnostics(output: &[u8], compiled_ok: bool) -> Result<ParsedDiagnostics> {
    let mut parsed = ParsedDiagnostics::default();
    for line in output.split(|&b| b == b'\n') {
        if line.iter().all(u8::is_ascii_whitespace) {
            continue;
        }
        let raw: RawDiagnostic = match serde_json::from_slice(line) {
            Ok(r) => r,
            Err(_) => {
                parsed.malformed += 1;
                continue;
            }
        };
        let level = match raw.level.as_str() {
            "error" | "error: internal compiler error" => Level::Error,
            "warning" => Level::Warning,
            _ => continue,
        };
        // Summary records ("aborting due to ...") carry no location.
        let Some(file) = raw.spans.iter().find(|s| s.is_primary).map(|s| s.file_name.clone()) else {
            continue;
        };
        parsed.diagnostics.push(convert(raw, level, &file));
    }
    if parsed.diagnostics.is_empty() && !compiled_ok {
        return Err(Error::NoDiagnostics);
    }
    debug!(count = parsed.diagnostics.len(), malformed = parsed.malformed, "parsed diagnostics");
    Ok(parsed)
}

fn convert(raw: RawDiagnostic, level: Level, file: &str) -> Diagnostic {
    let local: Vec<&RawSpan> = raw.spans.iter().filter(|s| s.file_name == file).collect();
    let primary_span = local
        .iter()
        .find(|s| s.is_primary)
        .map(|s| s.span())
        .unwrap_or(Span::on_line(1, 1, 1));
    let spans = local
        .iter()
        .map(|s| LabeledSpan {
            span: s.span(),
            primary: s.is_primary,
            label: s.label.clone(),
        })
        .collect();
    let mut suggestions = Vec::new();
    collect_suggestions(&raw.spans, file, &mut suggestions);
    for child in &raw.children {
        let before = suggestions.len();
        collect_suggestions(&child.spans, file, &mut suggestions);
        if suggestions.len() == before && child.level == "help" {
            if let (Some(code), Some(span)) = (
                quoted_fragment(&child.message),
                child.spans.iter().find(|s| s.file_name == file && s.is_primary),
            ) {
                suggestions.push(Suggestion {
                    span: span.span(),
                    replacement: code,
                    applicability: Applicability::Quoted,
                });
            }
        }
    }
    Diagnostic {
        code: raw.code.map(|c| c.code),
        level,
        message: raw.message,
        primary_span,
        spans,
        suggestions,
        rendered: raw.rendered.unwrap_or_default(),
    }
}

fn collect_suggestions(spans: &[RawSpan], file: &str, out: &mut Vec<Suggestion>) {
    for s in spans.iter().filter(|s| s.file_name == file) {
        if let Some(replacement) = &s.suggested_replacement {
            let applicability = match s.suggestion_applicability.as_deref() {
                Some("MachineApplicable") => Applicability::MachineApplicable,
                Some("MaybeIncorrect") => Applicability::MaybeIncorrect,
                Some("HasPlaceholders") => Applicability::HasPlaceholders,
                _ => Applicability::Unspecified,
            };
            out.push(Suggestion {
                span: s.span(),
                replacement: replacement.clone(),
                applicability,
            });
        }
    }
}

/// The backquoted (or single-quoted) code after the last colon of a help
/// message, as in "consider making this binding mutable: `mut x`".
fn quoted_fragment(message: &str) -> Option<String> {
    let (_, tail) = message.rsplit_once(": ")?;
    let tail = tail.trim();
    for q in ['`', '\''] {
        if let Some(inner) = tail.strip_prefix(q).and_then(|t| t.strip_suffix(q)) {
            if !inner.is_empty() {
                return Some(inner.to_string());
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorCategory {
    Syntax,
    Typing,
    DomainSpecific,
}

/// Error codes whose messages describe a type mismatch.
const TYPING_CODES: &[&str] = &[
    "E0053", "E0061", "E0069", "E0277", "E0282", "E0308", "E0369", "E0604", "E0605", "E0606", "E0614",
    "E0631",
];

pub fn classify(d: &Diagnostic) -> ErrorCategory {
    let msg = d.message.as_str();
    let parse_shaped = d.code.is_none()
        && (msg.contains("delimiter")
            || msg.starts_with("expected ")
            || msg.starts_with("unexpected ")
            || msg.starts_with("unterminated ")
            || msg.starts_with("unknown start of token")
            || msg.contains("this file contains an unclosed"));
    if parse_shaped {
        return ErrorCategory::Syntax;
    }
    let code_is_typing = d.code.as_deref().is_some_and(|c| TYPING_CODES.contains(&c));
    let expected_found = |s: &str| {
        s.find("expected ")
            .is_some_and(|i| s[i..].contains("found "))
    };
    let labels_expect = d.spans.iter().filter_map(|s| s.label.as_deref()).any(expected_found);
    if code_is_typing || expected_found(msg) || labels_expect || msg == "mismatched types" {
        return ErrorCategory::Typing;
    }
    ErrorCategory::DomainSpecific
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairAction {
    pub span: Span,
    pub replacement: String,
    /// Code of the diagnostic answered, or its message when it has none.
    pub origin: String,
}

/// Derive edits from the Error-level diagnostics of `text`.
pub fn plan_repairs(diags: &[Diagnostic], text: &str) -> Vec<RepairAction> {
    let mut actions: Vec<(std::ops::Range<usize>, RepairAction)> = Vec::new();
    for d in diags.iter().filter(|d| d.is_error()) {
        let origin = d.code.clone().unwrap_or_else(|| d.message.clone());
        let action = match classify(d) {
            ErrorCategory::Syntax => delimiter_repair(d, text, &origin).or_else(|| adopt(d, text, &origin)),
            ErrorCategory::Typing | ErrorCategory::DomainSpecific => adopt(d, text, &origin),
        };
        if let Some(a) = action {
            if let Some(range) = a.span.byte_range(text) {
                actions.push((range, a));
            }
        }
    }
    actions.sort_by_key(|(r, _)| (r.start, r.end));
    let mut kept: Vec<(std::ops::Range<usize>, RepairAction)> = Vec::new();
    for (range, a) in actions {
        if kept.iter().all(|(k, _)| !overlaps(k, &range)) {
            kept.push((range, a));
        }
    }
    kept.into_iter().map(|(_, a)| a).collect()
}

/// Replace the mismatched closer with the one matching the unclosed opener.
fn delimiter_repair(d: &Diagnostic, text: &str, origin: &str) -> Option<RepairAction> {
    if !d.message.contains("mismatched closing delimiter") {
        return None;
    }
    let closer_span = d
        .spans
        .iter()
        .find(|s| s.label.as_deref() == Some("mismatched closing delimiter"))
        .map(|s| s.span)
        .unwrap_or(d.primary_span);
    let closer_at = closer_span.byte_range(text)?.start;
    let opener = d
        .spans
        .iter()
        .filter(|s| s.label.as_deref() == Some("unclosed delimiter"))
        .filter_map(|s| s.span.byte_range(text))
        .filter(|r| r.start < closer_at)
        .max_by_key(|r| r.start)?;
    let open = *text.as_bytes().get(opener.start)?;
    if !matches!(open, b'(' | b'[' | b'{') {
        return None;
    }
    Some(RepairAction {
        span: closer_span,
        replacement: (scan::closer(open) as char).to_string(),
        origin: origin.to_string(),
    })
}

/// First usable suggestion of the diagnostic.
fn adopt(d: &Diagnostic, text: &str, origin: &str) -> Option<RepairAction> {
    d.suggestions
        .iter()
        .filter(|s| s.applicability != Applicability::HasPlaceholders)
        .find(|s| s.span.byte_range(text).is_some())
        .map(|s| RepairAction {
            span: s.span,
            replacement: s.replacement.clone(),
            origin: origin.to_string(),
        })
}

fn overlaps(a: &std::ops::Range<usize>, b: &std::ops::Range<usize>) -> bool {
    (a.start < b.end && b.start < a.end) || a.start == b.start
}

/// Apply non-overlapping edits, last span first.
pub fn apply_repairs(text: &str, actions: &[RepairAction]) -> Result<String> {
    let mut edits = Vec::with_capacity(actions.len());
    for a in actions {
        let range = a.span.byte_range(text).ok_or(Error::OverlappingActions { line: a.span.line })?;
        edits.push((range, a));
    }
    edits.sort_by_key(|(r, _)| std::cmp::Reverse((r.start, r.end)));
    for pair in edits.windows(2) {
        if overlaps(&pair[0].0, &pair[1].0) {
            return Err(Error::OverlappingActions { line: pair[1].1.span.line });
        }
    }
    let mut out = text.to_string();
    for (range, a) in edits {
        out.replace_range(range, &a.replacement);
    }
    Ok(out)
}

/// Result of one compile attempt, as seen by the repair loop.
#[derive(Debug, Clone)]
pub struct CompileOutcome {
    pub success: bool,
    /// The compiler's JSON diagnostic stream.
    pub diagnostics: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairOutcome {
    pub text: String,
    pub compiled: bool,
    pub rounds: usize,
    /// Error-level diagnostic count after each compile.
    pub error_counts: Vec<usize>,
}

pub const DEFAULT_MAX_ROUNDS: usize = 5;

/// Compile, and while that fails apply planned repairs, up to `max_rounds`.
pub fn repair_loop(
    candidate: &str,
    compile: &mut dyn FnMut(&str) -> CompileOutcome,
    max_rounds: usize,
) -> RepairOutcome {
    let mut text = candidate.to_string();
    let mut rounds = 0;
    let mut error_counts = Vec::new();
    loop {
        let outcome = compile(&text);
        if outcome.success {
            error_counts.push(0);
            return RepairOutcome {
                text,
                compiled: true,
                rounds,
                error_counts,
            };
        }
        let parsed = parse_diagnostics(&outcome.diagnostics, false).unwrap_or_default();
        error_counts.push(parsed.error_count());
        if rounds >= max_rounds {
            break;
        }
        let actions = plan_repairs(&parsed.diagnostics, &text);
        if actions.is_empty() {
            break;
        }
        match apply_repairs(&text, &actions) {
            Ok(next) => text = next,
            Err(_) => break,
        }
        rounds += 1;
        debug!(round = rounds, actions = actions.len(), "applied repairs");
    }
    RepairOutcome {
        text,
        compiled: false,
        rounds,
        error_counts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(message: &str, code: Option<&str>) -> Diagnostic {
        Diagnostic {
            code: code.map(str::to_string),
            level: Level::Error,
            message: message.to_string(),
            primary_span: Span::on_line(1, 1, 2),
            spans: Vec::new(),
            suggestions: Vec::new(),
            rendered: String::new(),
        }
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify(&diag("mismatched closing delimiter: `]`", None)), ErrorCategory::Syntax);
        assert_eq!(classify(&diag("mismatched types", Some("E0308"))), ErrorCategory::Typing);
        assert_eq!(classify(&diag("expected `&i32`, found `i32`", Some("E0999"))), ErrorCategory::Typing);
        assert_eq!(
            classify(&diag("cannot assign to immutable argument `x`", Some("E0384"))),
            ErrorCategory::DomainSpecific
        );
        assert_eq!(classify(&diag("expected one of `;` or `}`, found `x`", None)), ErrorCategory::Syntax);
    }

    #[test]
    fn empty_stream() {
        assert!(parse_diagnostics(b"", true).unwrap().diagnostics.is_empty());
        assert!(matches!(parse_diagnostics(b"", false), Err(Error::NoDiagnostics)));
        let p = parse_diagnostics(b"garbage\n{\"x\":1}\n", true).unwrap();
        assert_eq!(p.malformed, 2);
    }

    #[test]
    fn quoted_help_fragments() {
        assert_eq!(
            quoted_fragment("consider making this binding mutable: `mut x`").as_deref(),
            Some("mut x")
        );
        assert_eq!(quoted_fragment("consider borrowing here: '&num'").as_deref(), Some("&num"));
        assert_eq!(quoted_fragment("consider borrowing here"), None);
    }

    #[test]
    fn spans_use_character_columns() {
        let text = "é = 1;\nab";
        assert_eq!(Span::on_line(1, 2, 3).byte_range(text), Some(2..3));
        assert_eq!(Span::on_line(2, 3, 3).byte_range(text), Some(10..10));
        assert_eq!(Span::on_line(3, 1, 1).byte_range(text), None);
    }

    #[test]
    fn overlapping_actions_are_rejected() {
        let a = RepairAction {
            span: Span::on_line(1, 1, 3),
            replacement: "x".into(),
            origin: "t".into(),
        };
        let b = RepairAction {
            span: Span::on_line(1, 2, 4),
            ..a.clone()
        };
        assert!(matches!(apply_repairs("abcdef", &[a.clone(), b]), Err(Error::OverlappingActions { .. })));
        assert_eq!(apply_repairs("abcdef", &[a]).unwrap(), "xcdef");
    }

    #[test]
    fn planning_keeps_the_earliest_of_overlapping_actions() {
        let mut d1 = diag("first", Some("E1"));
        d1.suggestions.push(Suggestion {
            span: Span::on_line(1, 1, 3),
            replacement: "A".into(),
            applicability: Applicability::MachineApplicable,
        });
        let mut d2 = diag("second", Some("E2"));
        d2.suggestions.push(Suggestion {
            span: Span::on_line(1, 2, 4),
            replacement: "B".into(),
            applicability: Applicability::MachineApplicable,
        });
        let actions = plan_repairs(&[d2, d1], "abcdef");
        assert_eq!(actions.len(), 1);
        assert_eq!(actions[0].origin, "E1");
    }

    #[test]
    fn placeholder_suggestions_are_ignored() {
        let mut d = diag("needs a value", Some("E0000"));
        d.suggestions.push(Suggestion {
            span: Span::on_line(1, 1, 1),
            replacement: "/* value */".into(),
            applicability: Applicability::HasPlaceholders,
        });
        assert!(plan_repairs(&[d], "abc").is_empty());
    }
}
