//! Runtime support compiled into every equivalence harness.
//!
//! The same harness builds in three modes: natively as a property-based test
//! (the default), for wasm32 as a model-checking entry (`--cfg vert_bmc`),
//! and under Kani (`cfg(kani)`). Only the source of draws and the meaning of
//! `check` change between them.
//!
//! Property-based runs are configured through the environment:
//! `VERT_PBT_SEED`, `VERT_PBT_CASES`, `VERT_PBT_DEADLINE_MS`,
//! `VERT_PBT_DUMP` (write every generated case as a JSON line) and
//! `VERT_PBT_REPLAY` (run one case from a `tag:value,...` tape).

#![allow(dead_code)]

/// Source of integer draws, each identified by a tag.
pub trait Source {
    fn int(&mut self, tag: i32, min: i128, max: i128) -> i128;
}

/// Returns the first value drawn for a tag on every later draw of it.
pub struct Memo<S> {
    pub inner: S,
    seen: Vec<(i32, i128)>,
}

impl<S: Source> Memo<S> {
    pub fn new(inner: S) -> Self {
        Memo { inner, seen: Vec::new() }
    }
}

impl<S: Source> Source for Memo<S> {
    fn int(&mut self, tag: i32, min: i128, max: i128) -> i128 {
        if let Some(&(_, v)) = self.seen.iter().find(|(t, _)| *t == tag) {
            return v;
        }
        let v = self.inner.int(tag, min, max);
        self.seen.push((tag, v));
        v
    }
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

#[cfg(vert_bmc)]
mod bmc {
    use super::{Memo, Source};

    #[link(wasm_import_module = "vert")]
    extern "C" {
        fn any_i32(tag: i32) -> i32;
        fn any_i64(tag: i32) -> i64;
        fn assume(cond: i32);
        #[link_name = "check"]
        fn check_raw(ok: i32, code: i32);
    }

    pub struct Nondet;

    impl Source for Nondet {
        fn int(&mut self, tag: i32, min: i128, max: i128) -> i128 {
            if min >= i32::MIN as i128 && max <= i32::MAX as i128 {
                let v = unsafe { any_i32(tag) };
                if min > i32::MIN as i128 || max < i32::MAX as i128 {
                    let ok = (v >= min as i32) as i32 & (v <= max as i32) as i32;
                    unsafe { assume(ok) };
                }
                v as i128
            } else if min >= i64::MIN as i128 && max <= i64::MAX as i128 {
                let v = unsafe { any_i64(tag) };
                if min > i64::MIN as i128 || max < i64::MAX as i128 {
                    let ok = (v >= min as i64) as i32 & (v <= max as i64) as i32;
                    unsafe { assume(ok) };
                }
                v as i128
            } else {
                unsafe { any_i64(tag) as u64 as i128 }
            }
        }
    }

    pub fn check(ok: bool, code: i32) {
        unsafe { check_raw(ok as i32, code) }
    }

    pub fn drive<T>(
        _slots: usize,
        draw: impl Fn(&mut dyn Source) -> T,
        case: impl Fn(T),
        _show: impl Fn(&T) -> Vec<String>,
    ) {
        let mut src = Memo::new(Nondet);
        case(draw(&mut src));
    }
}

#[cfg(vert_bmc)]
pub use bmc::{check, drive};

#[cfg(kani)]
mod model {
    use super::{Memo, Source};

    pub struct Nondet;

    impl Source for Nondet {
        fn int(&mut self, _tag: i32, min: i128, max: i128) -> i128 {
            if min >= i32::MIN as i128 && max <= i32::MAX as i128 {
                let v: i32 = kani::any();
                kani::assume(v as i128 >= min && v as i128 <= max);
                v as i128
            } else if min >= i64::MIN as i128 && max <= i64::MAX as i128 {
                let v: i64 = kani::any();
                kani::assume(v as i128 >= min && v as i128 <= max);
                v as i128
            } else {
                kani::any::<u64>() as i128
            }
        }
    }

    pub fn check(ok: bool, code: i32) {
        assert!(ok, "equivalence check {} failed", code);
    }

    pub fn drive<T>(
        _slots: usize,
        draw: impl Fn(&mut dyn Source) -> T,
        case: impl Fn(T),
        _show: impl Fn(&T) -> Vec<String>,
    ) {
        let mut src = Memo::new(Nondet);
        case(draw(&mut src));
    }
}

#[cfg(kani)]
pub use model::{check, drive};

#[cfg(not(any(kani, vert_bmc)))]
mod pbt {
    use std::io::Write;
    use std::panic::{self, AssertUnwindSafe};
    use std::sync::Mutex;
    use std::time::{Duration, Instant};

    use super::{closest_to_zero, Memo, Source};

    const DEFAULT_CASES: u64 = 100_000;
    const MAX_SHRINK_RUNS: u32 = 2_000;

    static LAST_PANIC: Mutex<Option<String>> = Mutex::new(None);

    pub fn check(ok: bool, code: i32) {
        assert!(ok, "equivalence check {} failed", code);
    }

    struct Rng(u64);

    impl Rng {
        fn next(&mut self) -> u64 {
            self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
            let mut z = self.0;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
            z ^ (z >> 31)
        }

        fn below(&mut self, n: u128) -> u128 {
            let r = ((self.next() as u128) << 64) | self.next() as u128;
            r % n
        }
    }

    /// Random value in `[min, max]`, biased towards edges and small values.
    fn pick(rng: &mut Rng, min: i128, max: i128) -> i128 {
        let span = (max - min) as u128 + 1;
        match rng.next() % 8 {
            0 | 1 => {
                let edges = [min, max, 0, 1, -1, min + 1, max - 1];
                let usable: Vec<i128> = edges.iter().copied().filter(|v| *v >= min && *v <= max).collect();
                usable[(rng.next() % usable.len() as u64) as usize]
            }
            2 | 3 => {
                let v = (rng.next() % 65) as i128 - 32;
                if v >= min && v <= max {
                    v
                } else {
                    min + rng.below(span) as i128
                }
            }
            _ => min + rng.below(span) as i128,
        }
    }

    #[derive(Clone, Copy)]
    struct Draw {
        tag: i32,
        min: i128,
        max: i128,
        value: i128,
    }

    struct Random {
        rng: Rng,
        tape: Vec<Draw>,
    }

    impl Source for Random {
        fn int(&mut self, tag: i32, min: i128, max: i128) -> i128 {
            let value = pick(&mut self.rng, min, max);
            self.tape.push(Draw { tag, min, max, value });
            value
        }
    }

    struct Replay {
        values: Vec<(i32, i128)>,
        tape: Vec<Draw>,
    }

    impl Source for Replay {
        fn int(&mut self, tag: i32, min: i128, max: i128) -> i128 {
            let value = self
                .values
                .iter()
                .find(|(t, _)| *t == tag)
                .map(|&(_, v)| v.clamp(min, max))
                .unwrap_or_else(|| closest_to_zero(min, max));
            self.tape.push(Draw { tag, min, max, value });
            value
        }
    }

    struct Config {
        seed: u64,
        cases: u64,
        deadline: Option<Duration>,
        dump: Option<String>,
        replay: Option<Vec<(i32, i128)>>,
    }

    fn env<T: std::str::FromStr>(name: &str) -> Option<T> {
        std::env::var(name).ok().and_then(|v| v.trim().parse().ok())
    }

    fn config() -> Config {
        Config {
            seed: env("VERT_PBT_SEED").unwrap_or(0),
            cases: env("VERT_PBT_CASES").unwrap_or(DEFAULT_CASES),
            deadline: env::<u64>("VERT_PBT_DEADLINE_MS").map(Duration::from_millis),
            dump: std::env::var("VERT_PBT_DUMP").ok().filter(|s| !s.is_empty()),
            replay: std::env::var("VERT_PBT_REPLAY").ok().map(|s| parse_tape(&s)),
        }
    }

    pub fn parse_tape(s: &str) -> Vec<(i32, i128)> {
        s.split(',')
            .filter_map(|kv| {
                let (k, v) = kv.split_once(':')?;
                Some((k.trim().parse().ok()?, v.trim().parse().ok()?))
            })
            .collect()
    }

    fn format_tape(tape: &[Draw]) -> String {
        tape.iter().map(|d| format!("{}:{}", d.tag, d.value)).collect::<Vec<_>>().join(",")
    }

    fn json_string(s: &str) -> String {
        let mut out = String::with_capacity(s.len() + 2);
        out.push('"');
        for c in s.chars() {
            match c {
                '"' => out.push_str("\\\""),
                '\\' => out.push_str("\\\\"),
                c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
                c => out.push(c),
            }
        }
        out.push('"');
        out
    }

    fn panic_message(payload: &(dyn std::any::Any + Send)) -> String {
        if let Some(s) = payload.downcast_ref::<&str>() {
            s.to_string()
        } else if let Some(s) = payload.downcast_ref::<String>() {
            s.clone()
        } else {
            "panic".to_string()
        }
    }

    /// Run one case; `Some(message)` when it panicked.
    fn run_one<T>(case: &impl Fn(T), args: T) -> Option<String> {
        *LAST_PANIC.lock().unwrap_or_else(|e| e.into_inner()) = None;
        match panic::catch_unwind(AssertUnwindSafe(|| case(args))) {
            Ok(()) => None,
            Err(payload) => Some(
                LAST_PANIC
                    .lock()
                    .unwrap_or_else(|e| e.into_inner())
                    .take()
                    .unwrap_or_else(|| panic_message(&*payload)),
            ),
        }
    }

    fn report(label: &str, shown: &[String], tape: &[Draw], failure: &str) {
        println!("vert-pbt: counterexample ({label})");
        for (i, s) in shown.iter().enumerate() {
            println!("vert-pbt: input[{i}] = {s}");
        }
        println!("vert-pbt: tape = {}", format_tape(tape));
        println!("vert-pbt: failure = {}", failure.replace('\n', " "));
    }

    pub fn drive<T, D, C, S>(slots: usize, draw: D, case: C, show: S)
    where
        D: Fn(&mut dyn Source) -> T,
        C: Fn(T),
        S: Fn(&T) -> Vec<String>,
    {
        let cfg = config();
        let started = Instant::now();
        let previous = panic::take_hook();
        panic::set_hook(Box::new(|info| {
            let msg = panic_message(info.payload());
            let at = info.location().map(|l| format!(" at {}:{}", l.file(), l.line())).unwrap_or_default();
            *LAST_PANIC.lock().unwrap_or_else(|e| e.into_inner()) = Some(format!("{msg}{at}"));
        }));
        let replay = |values: Vec<(i32, i128)>| {
            let mut src = Memo::new(Replay { values, tape: Vec::new() });
            let args = draw(&mut src);
            let shown = show(&args);
            let failure = run_one(&case, args);
            (shown, src.inner.tape, failure)
        };

        if let Some(values) = cfg.replay {
            let (shown, tape, failure) = replay(values);
            panic::set_hook(previous);
            match failure {
                Some(msg) => {
                    report("replay", &shown, &tape, &msg);
                    panic!("vert-pbt: counterexample reproduced");
                }
                None => {
                    println!("vert-pbt: replay passed");
                    return;
                }
            }
        }

        let mut dump = cfg.dump.as_ref().and_then(|p| std::fs::File::create(p).ok()).map(std::io::BufWriter::new);
        let cases = if slots == 0 { 1 } else { cfg.cases };
        let mut ran = 0;
        for i in 0..cases {
            if cfg.deadline.is_some_and(|d| started.elapsed() >= d) {
                println!("vert-pbt: deadline reached");
                break;
            }
            let seed = cfg.seed ^ (i.wrapping_add(1)).wrapping_mul(0xd1b5_4a32_d192_ed03);
            let mut src = Memo::new(Random {
                rng: Rng(seed),
                tape: Vec::new(),
            });
            let args = draw(&mut src);
            if let Some(out) = dump.as_mut() {
                let inputs: Vec<String> = show(&args).iter().map(|s| json_string(s)).collect();
                let tape: Vec<String> = src.inner.tape.iter().map(|d| format!("[{},{}]", d.tag, d.value)).collect();
                let _ = writeln!(out, "{{\"case\":{},\"inputs\":[{}],\"tape\":[{}]}}", i, inputs.join(","), tape.join(","));
            }
            ran += 1;
            let Some(msg) = run_one(&case, args) else { continue };
            if let Some(mut out) = dump.take() {
                let _ = out.flush();
            }
            let found = src.inner.tape;
            let (shown, _, _) = replay(found.iter().map(|d| (d.tag, d.value)).collect());
            report(&format!("case {i}"), &shown, &found, &msg);
            let shrunk = shrink(found, &replay, started, cfg.deadline);
            let (shown, tape, failure) = replay(shrunk.iter().map(|d| (d.tag, d.value)).collect());
            report("shrunk", &shown, &tape, failure.as_deref().unwrap_or(&msg));
            panic::set_hook(previous);
            panic!("vert-pbt: equivalence violated after {} cases", ran);
        }
        if let Some(mut out) = dump {
            let _ = out.flush();
        }
        panic::set_hook(previous);
        println!("vert-pbt: passed {ran} cases");
    }

    /// Move each draw towards zero while the case keeps failing.
    fn shrink(
        mut cur: Vec<Draw>,
        replay: &impl Fn(Vec<(i32, i128)>) -> (Vec<String>, Vec<Draw>, Option<String>),
        started: Instant,
        deadline: Option<Duration>,
    ) -> Vec<Draw> {
        let runs = std::cell::Cell::new(0u32);
        let fails = |tape: &[Draw], i: usize, v: i128| {
            runs.set(runs.get() + 1);
            let values = tape
                .iter()
                .enumerate()
                .map(|(k, d)| (d.tag, if k == i { v } else { d.value }))
                .collect();
            replay(values).2.is_some()
        };
        let exhausted = || runs.get() >= MAX_SHRINK_RUNS || deadline.is_some_and(|d| started.elapsed() >= d);
        loop {
            let mut improved = false;
            for i in 0..cur.len() {
                let d = cur[i];
                let target = closest_to_zero(d.min, d.max);
                if d.value == target || exhausted() {
                    continue;
                }
                if fails(&cur, i, target) {
                    cur[i].value = target;
                    improved = true;
                    continue;
                }
                let (mut lo, mut hi) = (target, d.value);
                while (hi - lo).abs() > 1 && !exhausted() {
                    let mid = lo + (hi - lo) / 2;
                    if fails(&cur, i, mid) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                if hi != d.value {
                    cur[i].value = hi;
                    improved = true;
                }
            }
            if !improved || exhausted() {
                return cur;
            }
        }
    }
}

#[cfg(not(any(kani, vert_bmc)))]
pub use pbt::{check, drive, parse_tape};
