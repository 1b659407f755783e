//! Lexical masking: comments and literal contents become spaces so that
//! delimiter and keyword scans can work on plain bytes. Offsets and line
//! structure are preserved.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Syntax {
    /// C, C++ and Go: flat block comments, `'x'` character literals.
    CLike { go_raw_strings: bool },
    /// Nested block comments, raw strings and lifetimes.
    Rust,
}

/// Return `text` with comments and the insides of string and character
/// literals replaced by spaces. Quotes are kept so literals stay visible.
pub fn mask(text: &str, syntax: Syntax) -> String {
    let b = text.as_bytes();
    let mut out = b.to_vec();
    let blank = |out: &mut Vec<u8>, from: usize, to: usize| {
        for c in &mut out[from..to.min(b.len())] {
            if *c != b'\n' {
                *c = b' ';
            }
        }
    };
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        let next = b.get(i + 1).copied();
        if c == b'/' && next == Some(b'/') {
            let end = b[i..].iter().position(|&x| x == b'\n').map_or(b.len(), |p| i + p);
            blank(&mut out, i, end);
            i = end;
        } else if c == b'/' && next == Some(b'*') {
            let end = block_comment_end(b, i, syntax == Syntax::Rust);
            blank(&mut out, i, end);
            i = end;
        } else if c == b'"' {
            let end = quoted_end(b, i + 1, b'"');
            blank(&mut out, i + 1, end.saturating_sub(1));
            i = end;
        } else if syntax == Syntax::Rust && (c == b'r' || c == b'b') && !ident_before(b, i) {
            if let Some((body_start, end)) = rust_raw_string(b, i) {
                blank(&mut out, body_start, end.saturating_sub(1));
                i = end;
            } else {
                i += 1;
            }
        } else if c == b'`' && syntax == (Syntax::CLike { go_raw_strings: true }) {
            let end = b[i + 1..].iter().position(|&x| x == b'`').map_or(b.len(), |p| i + 2 + p);
            blank(&mut out, i + 1, end.saturating_sub(1));
            i = end;
        } else if c == b'\'' {
            match char_literal_end(b, i, syntax) {
                Some(end) => {
                    blank(&mut out, i + 1, end - 1);
                    i = end;
                }
                None => i += 1,
            }
        } else {
            i += 1;
        }
    }
    String::from_utf8(out).unwrap_or_else(|e| String::from_utf8_lossy(e.as_bytes()).into_owned())
}

fn ident_before(b: &[u8], i: usize) -> bool {
    i > 0 && (b[i - 1].is_ascii_alphanumeric() || b[i - 1] == b'_')
}

fn block_comment_end(b: &[u8], start: usize, nested: bool) -> usize {
    let mut depth = 0usize;
    let mut i = start;
    while i + 1 < b.len() {
        if b[i] == b'/' && b[i + 1] == b'*' {
            depth += 1;
            i += 2;
            if !nested && depth > 1 {
                depth = 1;
            }
        } else if b[i] == b'*' && b[i + 1] == b'/' {
            depth -= 1;
            i += 2;
            if depth == 0 {
                return i;
            }
        } else {
            i += 1;
        }
    }
    b.len()
}

/// End (exclusive, past the closing quote) of an escaped literal.
fn quoted_end(b: &[u8], mut i: usize, quote: u8) -> usize {
    while i < b.len() {
        match b[i] {
            b'\\' => i += 2,
            c if c == quote => return i + 1,
            _ => i += 1,
        }
    }
    b.len()
}

/// Raw or byte string starting at `i`: returns (body start, end).
fn rust_raw_string(b: &[u8], i: usize) -> Option<(usize, usize)> {
    let mut j = i;
    if b[j] == b'b' {
        j += 1;
        if b.get(j) == Some(&b'"') {
            return Some((j + 1, quoted_end(b, j + 1, b'"')));
        }
    }
    if b.get(j) != Some(&b'r') {
        return None;
    }
    j += 1;
    let hashes = b[j..].iter().take_while(|&&c| c == b'#').count();
    j += hashes;
    if b.get(j) != Some(&b'"') {
        return None;
    }
    let body = j + 1;
    let mut k = body;
    while k < b.len() {
        if b[k] == b'"' && b[k + 1..].iter().take(hashes).filter(|&&c| c == b'#').count() == hashes {
            return Some((body, k + 1 + hashes));
        }
        k += 1;
    }
    Some((body, b.len()))
}

/// End of a character literal at `i`, or `None` for a Rust lifetime.
fn char_literal_end(b: &[u8], i: usize, syntax: Syntax) -> Option<usize> {
    match syntax {
        Syntax::CLike { .. } => Some(quoted_end(b, i + 1, b'\'')),
        Syntax::Rust => {
            if b.get(i + 1) == Some(&b'\\') {
                return Some(quoted_end(b, i + 1, b'\''));
            }
            // One character (possibly multi-byte) followed by a quote.
            let rest = std::str::from_utf8(&b[i + 1..]).ok()?;
            let ch = rest.chars().next()?;
            let after = i + 1 + ch.len_utf8();
            (b.get(after) == Some(&b'\'')).then_some(after + 1)
        }
    }
}

/// Byte offsets of matching delimiter pairs in masked text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mismatch {
    pub offset: usize,
}

/// Check `()[]{}` balance in masked text. Returns the first offending offset.
pub fn check_balance(masked: &str) -> Result<(), Mismatch> {
    let mut stack = Vec::new();
    for (i, c) in masked.bytes().enumerate() {
        match c {
            b'(' | b'[' | b'{' => stack.push((c, i)),
            b')' | b']' | b'}' => match stack.pop() {
                Some((open, _)) if closer(open) == c => {}
                _ => return Err(Mismatch { offset: i }),
            },
            _ => {}
        }
    }
    match stack.first() {
        Some(&(_, i)) => Err(Mismatch { offset: i }),
        None => Ok(()),
    }
}

pub fn closer(open: u8) -> u8 {
    match open {
        b'(' => b')',
        b'[' => b']',
        _ => b'}',
    }
}

/// Whether `word` occurs as a whole identifier in masked text.
pub fn has_word(masked: &str, word: &str) -> bool {
    let b = masked.as_bytes();
    masked.match_indices(word).any(|(i, _)| {
        let end = i + word.len();
        let is_ident = |c: u8| c.is_ascii_alphanumeric() || c == b'_';
        (i == 0 || !is_ident(b[i - 1])) && (end == b.len() || !is_ident(b[end]))
    })
}
