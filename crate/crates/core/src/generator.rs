//! Candidate generation: prompt rendering, backends and response cleanup.

use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use tracing::{debug, warn};

use crate::error::{Error, Result};
use crate::pipeline::Language;
use crate::scan::{self, Syntax};
use crate::verifier::CounterExample;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub original_code: String,
    pub language_label: String,
    pub counterexamples: Vec<CounterExample>,
    pub rendered: String,
}

/// Render the few-shot prompt. The equivalence line appears only when
/// there are counterexamples.
pub fn render_prompt(original_code: &str, language: Language, counterexamples: &[CounterExample]) -> Prompt {
    let label = language.label();
    let mut rendered = String::with_capacity(original_code.len() + 256);
    rendered.push_str(original_code.trim_end());
    rendered.push('\n');
    rendered.push_str(&format!(
        "Safe Rust refactoring of above code in {label}, with code only, no comments.\n"
    ));
    rendered.push_str("Use the same function name, same argument and return types.\n");
    rendered.push_str("Make sure the output program can compile on its own.\n");
    if !counterexamples.is_empty() {
        let listed: Vec<String> = counterexamples.iter().map(CounterExample::render).collect();
        rendered.push_str(&format!(
            "Test that outputs from inputs {} are equivalent to source program.\n",
            listed.join(", ")
        ));
    }
    Prompt {
        original_code: original_code.to_string(),
        language_label: label.to_string(),
        counterexamples: counterexamples.to_vec(),
        rendered,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateResponse {
    pub raw: String,
    pub extracted: String,
    pub safe: bool,
}

impl CandidateResponse {
    pub fn from_raw(raw: String) -> Self {
        let extracted = extract_code_block(&raw);
        let safe = is_safe(&extracted);
        CandidateResponse { raw, extracted, safe }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteConfig {
    /// Chat-completion endpoint accepting `{model, messages, temperature}`.
    pub endpoint: String,
    pub model: String,
    pub temperature: f32,
    /// Environment variable holding the bearer token.
    pub api_key_env: String,
    pub timeout_secs: u64,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        RemoteConfig {
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            model: "gpt-4o".into(),
            temperature: 0.2,
            api_key_env: "VERT_API_KEY".into(),
            timeout_secs: 120,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Backend {
    /// Pre-recorded responses in `<dir>/<program-id>/attempt-<n>.rs`.
    Scripted { dir: PathBuf },
    Remote(RemoteConfig),
}

const REMOTE_ATTEMPTS: usize = 3;

/// Ask the backend for attempt `attempt` (1-based) of program `program_id`.
pub fn generate_candidate(prompt: &Prompt, backend: &Backend, program_id: &str, attempt: usize) -> Result<CandidateResponse> {
    let raw = match backend {
        Backend::Scripted { dir } => {
            let path = dir.join(program_id).join(format!("attempt-{attempt}.rs"));
            std::fs::read_to_string(&path).map_err(|_| Error::FixtureExhausted(path))?
        }
        Backend::Remote(cfg) => remote_completion(&prompt.rendered, cfg)?,
    };
    Ok(CandidateResponse::from_raw(raw))
}

fn remote_completion(prompt: &str, cfg: &RemoteConfig) -> Result<String> {
    let key = std::env::var(&cfg.api_key_env)
        .map_err(|_| Error::BackendUnavailable(format!("environment variable {} is not set", cfg.api_key_env)))?;
    let body = serde_json::json!({
        "model": cfg.model,
        "temperature": cfg.temperature,
        "messages": [{"role": "user", "content": prompt}],
    });
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_secs(cfg.timeout_secs)))
        .http_status_as_error(false)
        .build()
        .into();
    let mut last = String::new();
    for attempt in 1..=REMOTE_ATTEMPTS {
        debug!(endpoint = %cfg.endpoint, attempt, request = %body, authorization = "[redacted]", "completion request");
        let sent = agent
            .post(&cfg.endpoint)
            .header("Authorization", &format!("Bearer {key}"))
            .header("Content-Type", "application/json")
            .send(body.to_string());
        match sent {
            Ok(mut resp) => {
                let status = resp.status().as_u16();
                let text = resp
                    .body_mut()
                    .read_to_string()
                    .map_err(|e| Error::BackendUnavailable(e.to_string()))?;
                debug!(status, response = %text, "completion response");
                if status != 200 {
                    return Err(Error::BackendUnavailable(format!("HTTP {status}: {text}")));
                }
                return completion_text(&text);
            }
            Err(e) => {
                warn!(attempt, error = %e, "completion request failed");
                last = e.to_string();
            }
        }
    }
    Err(Error::BackendUnavailable(last))
}

/// Pull the message text out of a chat-completion response body.
pub fn completion_text(body: &str) -> Result<String> {
    let v: serde_json::Value =
        serde_json::from_str(body).map_err(|e| Error::BackendUnavailable(format!("malformed response: {e}")))?;
    v.pointer("/choices/0/message/content")
        .or_else(|| v.pointer("/choices/0/text"))
        .or_else(|| v.pointer("/content/0/text"))
        .and_then(|c| c.as_str())
        .map(str::to_string)
        .ok_or_else(|| Error::BackendUnavailable("response carries no completion text".into()))
}

/// First fenced block; else the longest brace-balanced run of code lines.
pub fn extract_code_block(raw: &str) -> String {
    if let Some(body) = first_fence(raw) {
        return body;
    }
    longest_code_run(raw).unwrap_or_default()
}

fn first_fence(raw: &str) -> Option<String> {
    let mut lines = raw.lines();
    while let Some(l) = lines.next() {
        if l.trim_start().starts_with("```") {
            let body: Vec<&str> = lines.by_ref().take_while(|l| !l.trim_start().starts_with("```")).collect();
            return Some(body.join("\n"));
        }
    }
    None
}

const ITEM_STARTS: &[&str] = &[
    "fn ", "pub ", "use ", "struct ", "enum ", "impl ", "impl<", "trait ", "const ", "static ", "type ", "mod ",
    "#[", "#![", "extern ", "//",
];

fn longest_code_run(raw: &str) -> Option<String> {
    let lines: Vec<&str> = raw.lines().collect();
    let masked = scan::mask(raw, Syntax::Rust);
    let masked_lines: Vec<&str> = masked.lines().collect();
    let depth_delta = |i: usize| -> i64 {
        masked_lines.get(i).map_or(0, |l| {
            l.bytes()
                .map(|c| match c {
                    b'{' | b'(' | b'[' => 1,
                    b'}' | b')' | b']' => -1,
                    _ => 0,
                })
                .sum()
        })
    };
    let starts_item = |i: usize| ITEM_STARTS.iter().any(|s| lines[i].trim_start().starts_with(s));
    let mut best: Option<(usize, usize)> = None;
    let mut i = 0;
    while i < lines.len() {
        if !starts_item(i) {
            i += 1;
            continue;
        }
        let start = i;
        let mut depth = 0i64;
        let mut end = None;
        let mut j = i;
        while j < lines.len() {
            depth += depth_delta(j);
            if depth < 0 {
                break;
            }
            if depth == 0 {
                end = Some(j);
                // Continue through following items separated by blank lines.
                let mut k = j + 1;
                while k < lines.len() && lines[k].trim().is_empty() {
                    k += 1;
                }
                if k < lines.len() && starts_item(k) {
                    j = k;
                    continue;
                }
                break;
            }
            j += 1;
        }
        match end {
            Some(e) => {
                if best.map_or(true, |(s, b)| e - start > b - s) {
                    best = Some((start, e));
                }
                i = e + 1;
            }
            None => i += 1,
        }
    }
    best.map(|(s, e)| lines[s..=e].join("\n"))
}

/// True when the code has no `unsafe` token outside comments and literals.
pub fn is_safe(code: &str) -> bool {
    !scan::has_word(&scan::mask(code, Syntax::Rust), "unsafe")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fences_win() {
        assert_eq!(extract_code_block("here is the code:\n```\nfn f(){}\n```"), "fn f(){}");
        assert_eq!(
            extract_code_block("```rust\nfn a() {}\n```\ntext\n```rust\nfn b() {}\n```"),
            "fn a() {}"
        );
    }

    #[test]
    fn bare_function_in_prose() {
        let raw = "Sure! Here is the function:\n\nfn add(a: i32, b: i32) -> i32 {\n    a + b\n}\n\nHope this helps.";
        assert_eq!(extract_code_block(raw), "fn add(a: i32, b: i32) -> i32 {\n    a + b\n}");
    }

    #[test]
    fn adjacent_items_join_one_run() {
        let raw = "use std::cmp::max;\n\nfn f(a: i32) -> i32 {\n    max(a, 0)\n}\nThat's it.";
        assert_eq!(extract_code_block(raw), "use std::cmp::max;\n\nfn f(a: i32) -> i32 {\n    max(a, 0)\n}");
    }

    #[test]
    fn no_code_yields_empty() {
        assert_eq!(extract_code_block("I cannot help with that."), "");
    }

    #[test]
    fn unsafe_detection_is_token_level() {
        assert!(is_safe("#![forbid(unsafe_code)]\nfn is_unsafe() -> bool { false } // unsafe\n"));
        assert!(is_safe("fn f() -> &'static str { \"unsafe { }\" }"));
        assert!(!is_safe("fn f(p: *const i32) -> i32 { unsafe { *p } }"));
        assert!(!is_safe("unsafe fn g() {}"));
    }

    #[test]
    fn equivalence_line_only_with_counterexamples() {
        let p = render_prompt("int f(int x) { return x; }", Language::C, &[]);
        assert!(!p.rendered.contains("Test that outputs"));
        let ce = CounterExample::from_values(vec!["-5".into()]);
        let p = render_prompt("int f(int x) { return x; }", Language::C, &[ce]);
        assert!(p.rendered.contains("Test that outputs from inputs -5 are equivalent to source program."));
    }

    #[test]
    fn completion_bodies() {
        let body = r#"{"choices":[{"message":{"role":"assistant","content":"fn f() {}"}}]}"#;
        assert_eq!(completion_text(body).unwrap(), "fn f() {}");
        assert!(matches!(completion_text("{}"), Err(Error::BackendUnavailable(_))));
    }
}
