//! Depth-first symbolic execution of a decoded module.
//!
//! Each path carries a set of branch facts and a model satisfying them. A
//! branch whose condition holds under the model follows that side without a
//! solver call; the other side is forked only if the solver finds it
//! feasible. Forked states re-execute the branching instruction, and because
//! the forced fact is already recorded they take the other side.

use std::collections::{HashMap, HashSet};
use std::rc::Rc;
use std::time::Instant;

use crate::memory::Memory;
use crate::solver::{BitSolver, Sat};
use crate::term::{sext, Bv, Op, Pool, TermId};
use crate::wasm::{ConstVal, Conv, FloatOp, Instr, IntOp, MemAccess, Module, Ty, NO_ELSE};
use crate::{InputValue, Options};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Value {
    I32(Bv),
    I64(Bv),
    F32(u32),
    F64(u64),
}

impl Value {
    fn zero(t: Ty) -> Value {
        match t {
            Ty::I32 => Value::I32(Bv::C(0)),
            Ty::I64 => Value::I64(Bv::C(0)),
            Ty::F32 => Value::F32(0),
            Ty::F64 => Value::F64(0),
        }
    }

    fn int(self) -> (Bv, u8) {
        match self {
            Value::I32(b) => (b, 32),
            Value::I64(b) => (b, 64),
            Value::F32(b) => (Bv::C(b as u64), 32),
            Value::F64(b) => (Bv::C(b), 64),
        }
    }
}

#[derive(Debug, Clone)]
struct Label {
    cont: u32,
    height: u32,
    arity: u16,
    is_loop: bool,
    iters: u32,
    symbolic: bool,
}

#[derive(Debug, Clone)]
struct Frame {
    func: u32,
    pc: u32,
    locals: Vec<Value>,
    stack: Vec<Value>,
    labels: Vec<Label>,
}

#[derive(Clone)]
struct State {
    frames: Vec<Frame>,
    mem: Memory,
    globals: Vec<Value>,
    path: Vec<TermId>,
    facts: HashSet<TermId>,
    model: Rc<HashMap<u32, u64>>,
    inputs: Vec<(i64, u32, u8)>,
    concretized: u32,
}

/// Why a path stopped.
pub enum Stop {
    Done,
    Pruned,
    Failure(String),
    Unwind(String),
    Error(String),
    Timeout,
}

pub struct Stats {
    pub paths: u64,
    pub pruned: u64,
    pub instructions: u64,
    pub solver_calls: u64,
}

pub struct Outcome {
    pub stop: Stop,
    pub inputs: Vec<InputValue>,
    pub stats: Stats,
}

struct Engine<'m> {
    module: &'m Module,
    opts: &'m Options,
    pool: Pool,
    solver: BitSolver,
    work: Vec<State>,
    started: Instant,
    steps: u64,
}

type Flow = Result<(), Stop>;

pub fn explore(module: &Module, opts: &Options) -> Outcome {
    let mut eng = Engine {
        module,
        opts,
        pool: Pool::new(),
        solver: BitSolver::new(),
        work: Vec::new(),
        started: Instant::now(),
        steps: 0,
    };
    let mut stats = Stats {
        paths: 0,
        pruned: 0,
        instructions: 0,
        solver_calls: 0,
    };
    let finish = |eng: &Engine<'_>, mut stats: Stats, stop, inputs| {
        stats.instructions = eng.steps;
        stats.solver_calls = eng.solver.calls;
        Outcome { stop, inputs, stats }
    };
    match eng.initial_state() {
        Ok(st) => eng.work.push(st),
        Err(stop) => return finish(&eng, stats, stop, Vec::new()),
    }
    while let Some(mut st) = eng.work.pop() {
        match eng.run(&mut st) {
            Stop::Done => stats.paths += 1,
            Stop::Pruned => stats.pruned += 1,
            stop @ Stop::Failure(_) => {
                let inputs = eng.report_inputs(&st);
                return finish(&eng, stats, stop, inputs);
            }
            stop => return finish(&eng, stats, stop, Vec::new()),
        }
    }
    finish(&eng, stats, Stop::Done, Vec::new())
}

impl<'m> Engine<'m> {
    fn report_inputs(&self, st: &State) -> Vec<InputValue> {
        st.inputs
            .iter()
            .map(|&(tag, var, width)| {
                let raw = st.model.get(&var).copied().unwrap_or(0);
                InputValue {
                    tag,
                    width,
                    value: sext(raw, width),
                }
            })
            .collect()
    }

    fn initial_state(&mut self) -> Result<State, Stop> {
        let m = self.module;
        let (pages, max) = m.memory.unwrap_or((0, Some(0)));
        let max = max.unwrap_or(65536).min(65536) as u32;
        let mut mem = Memory::new(pages as u32, max);
        for (off, bytes) in &m.data {
            if !mem.init(*off, bytes) {
                return Err(Stop::Error("data segment out of bounds".into()));
            }
        }
        let globals = m
            .globals
            .iter()
            .map(|(_, v)| match *v {
                ConstVal::I32(x) => Value::I32(Bv::C(x as u32 as u64)),
                ConstVal::I64(x) => Value::I64(Bv::C(x as u64)),
                ConstVal::F32(x) => Value::F32(x),
                ConstVal::F64(x) => Value::F64(x),
            })
            .collect();
        let entry = *m
            .exports
            .get(&self.opts.entry)
            .ok_or_else(|| Stop::Error(format!("no exported function `{}`", self.opts.entry)))?;
        if !m.func_type(entry).params.is_empty() {
            return Err(Stop::Error("entry function must not take parameters".into()));
        }
        let mut st = State {
            frames: Vec::new(),
            mem,
            globals,
            path: Vec::new(),
            facts: HashSet::new(),
            model: Rc::new(HashMap::new()),
            inputs: Vec::new(),
            concretized: 0,
        };
        self.push_frame(&mut st, entry, Vec::new())?;
        if let Some(start) = m.start {
            self.push_frame(&mut st, start, Vec::new())?;
        }
        Ok(st)
    }

    fn push_frame(&mut self, st: &mut State, func: u32, args: Vec<Value>) -> Flow {
        let m = self.module;
        let n_imports = m.imports.len() as u32;
        let f = &m.funcs[(func - n_imports) as usize];
        if st.frames.len() >= self.opts.max_call_depth {
            return Err(Stop::Error("call depth limit exceeded".into()));
        }
        let active = st.frames.iter().filter(|fr| fr.func == func).count() as u32;
        if active >= self.opts.unwind.max(1) && !st.path.is_empty() {
            let name = self.func_name(func);
            return Err(self.unwind_stop(format!("recursion in {name}")));
        }
        let mut locals = args;
        for &t in &f.locals[locals.len()..] {
            locals.push(Value::zero(t));
        }
        let results = m.types[f.ty as usize].results.len() as u16;
        st.frames.push(Frame {
            func,
            pc: 0,
            locals,
            stack: Vec::with_capacity(16),
            labels: vec![Label {
                cont: u32::MAX,
                height: 0,
                arity: results,
                is_loop: false,
                iters: 0,
                symbolic: false,
            }],
        });
        Ok(())
    }

    fn func_name(&self, func: u32) -> String {
        self.module
            .name(func)
            .map(str::to_string)
            .unwrap_or_else(|| format!("func_{func}"))
    }

    fn unwind_stop(&self, what: String) -> Stop {
        if self.opts.unwind_checks {
            Stop::Unwind(what)
        } else {
            Stop::Pruned
        }
    }

    fn timed_out(&self) -> bool {
        self.opts
            .timeout
            .is_some_and(|t| self.started.elapsed() >= t)
    }

    fn run(&mut self, st: &mut State) -> Stop {
        if self.timed_out() {
            return Stop::Timeout;
        }
        loop {
            self.steps += 1;
            if self.steps & 0xfff == 0 && self.timed_out() {
                return Stop::Timeout;
            }
            if let Err(stop) = self.step(st) {
                return stop;
            }
        }
    }

    // ----- solver-facing helpers -----

    fn query(&mut self, st: &State, extra: TermId) -> Result<Option<HashMap<u32, u64>>, Stop> {
        let mut conds = st.path.clone();
        conds.push(extra);
        match self.solver.check(&self.pool, &conds) {
            Ok(Sat::Sat(m)) => Ok(Some(m)),
            Ok(Sat::Unsat) => Ok(None),
            Err(e) => Err(Stop::Error(format!("solver: {e}"))),
        }
    }

    fn add_fact(st: &mut State, t: TermId) {
        if st.facts.insert(t) {
            st.path.push(t);
        }
    }

    /// Decide a 1-bit condition, forking the other side when feasible.
    /// Must be called before the current instruction mutates the state.
    fn branch_on(&mut self, st: &mut State, c: Bv) -> Result<bool, Stop> {
        let t = match c {
            Bv::C(v) => return Ok(v & 1 == 1),
            Bv::S(t) => t,
        };
        if st.facts.contains(&t) {
            return Ok(true);
        }
        let Bv::S(nt) = self.pool.not(c, 1) else {
            unreachable!("negation of a symbolic term is symbolic")
        };
        if st.facts.contains(&nt) {
            return Ok(false);
        }
        if let Some(f) = st.frames.last_mut() {
            for l in f.labels.iter_mut().filter(|l| l.is_loop) {
                l.symbolic = true;
            }
        }
        let val = self.pool.eval(c, &st.model) == 1;
        let (taken, other) = if val { (t, nt) } else { (nt, t) };
        if let Some(m) = self.query(st, other)? {
            let mut fork = st.clone();
            Self::add_fact(&mut fork, other);
            fork.model = Rc::new(m);
            self.work.push(fork);
        }
        Self::add_fact(st, taken);
        Ok(val)
    }

    /// Pick a concrete value for `v`, forking the remaining values.
    fn concretize(&mut self, st: &mut State, v: Bv, w: u8) -> Result<u64, Stop> {
        if let Bv::C(x) = v {
            return Ok(x);
        }
        let x = self.pool.eval(v, &st.model);
        let eq = self.pool.bin(Op::Eq, v, Bv::C(x), w);
        if let Bv::S(t) = eq {
            if !st.facts.contains(&t) {
                st.concretized += 1;
                if st.concretized > self.opts.max_concretizations {
                    return Err(Stop::Error("too many symbolic addresses on one path".into()));
                }
            }
        }
        let holds = self.branch_on(st, eq)?;
        debug_assert!(holds);
        Ok(x)
    }

    /// Report a failure if the 1-bit condition `bad` can hold on this path.
    fn must_not(&mut self, st: &mut State, bad: Bv, reason: &str) -> Flow {
        match bad {
            Bv::C(0) => Ok(()),
            Bv::C(_) => Err(Stop::Failure(reason.to_string())),
            Bv::S(t) => {
                if st.facts.contains(&t) || self.pool.eval(bad, &st.model) == 1 {
                    return Err(Stop::Failure(reason.to_string()));
                }
                if let Some(m) = self.query(st, t)? {
                    st.model = Rc::new(m);
                    return Err(Stop::Failure(reason.to_string()));
                }
                if let Bv::S(nt) = self.pool.not(bad, 1) {
                    Self::add_fact(st, nt);
                }
                Ok(())
            }
        }
    }

    fn assume(&mut self, st: &mut State, c: Bv) -> Flow {
        match c {
            Bv::C(0) => Err(Stop::Pruned),
            Bv::C(_) => Ok(()),
            Bv::S(t) => {
                if st.facts.contains(&t) {
                    return Ok(());
                }
                if self.pool.eval(c, &st.model) != 1 {
                    match self.query(st, t)? {
                        Some(m) => st.model = Rc::new(m),
                        None => return Err(Stop::Pruned),
                    }
                }
                Self::add_fact(st, t);
                Ok(())
            }
        }
    }

    // ----- interpreter -----

    fn frame(st: &mut State) -> &mut Frame {
        st.frames.last_mut().expect("active frame")
    }

    fn peek(st: &State, depth: usize) -> Value {
        let f = st.frames.last().expect("active frame");
        f.stack[f.stack.len() - 1 - depth]
    }

    fn pop(st: &mut State) -> Value {
        Self::frame(st).stack.pop().expect("operand")
    }

    fn push(st: &mut State, v: Value) {
        Self::frame(st).stack.push(v);
    }

    fn next(st: &mut State) {
        Self::frame(st).pc += 1;
    }

    fn branch(&mut self, st: &mut State, depth: u32) -> Flow {
        let f = Self::frame(st);
        let idx = f.labels.len() - 1 - depth as usize;
        if idx == 0 {
            return self.do_return(st);
        }
        let label = f.labels[idx].clone();
        let keep = f.stack.len() - label.arity as usize;
        let vals: Vec<Value> = f.stack.drain(keep..).collect();
        f.stack.truncate(label.height as usize);
        f.stack.extend(vals);
        if label.is_loop {
            f.labels.truncate(idx + 1);
            let l = &mut f.labels[idx];
            l.iters += 1;
            if l.symbolic && l.iters > self.opts.unwind {
                let func = f.func;
                let name = self.func_name(func);
                return Err(self.unwind_stop(format!("loop in {name}")));
            }
        } else {
            f.labels.truncate(idx);
        }
        f.pc = label.cont;
        Ok(())
    }

    fn do_return(&mut self, st: &mut State) -> Flow {
        let mut f = st.frames.pop().expect("active frame");
        let arity = f.labels[0].arity as usize;
        let results: Vec<Value> = f.stack.drain(f.stack.len() - arity..).collect();
        match st.frames.last_mut() {
            Some(caller) => {
                caller.stack.extend(results);
                Ok(())
            }
            None => Err(Stop::Done),
        }
    }

    fn call(&mut self, st: &mut State, func: u32) -> Flow {
        let m = self.module;
        let n_imports = m.imports.len() as u32;
        if func < n_imports {
            return self.host_call(st, func);
        }
        if let Some(name) = m.name(func) {
            if self.opts.panic_markers.iter().any(|p| name.contains(p.as_str())) {
                return Err(Stop::Failure(format!("panic reached via {name}")));
            }
        }
        let n = m.func_type(func).params.len();
        let f = Self::frame(st);
        let args: Vec<Value> = f.stack.drain(f.stack.len() - n..).collect();
        f.pc += 1;
        self.push_frame(st, func, args)
    }

    fn host_call(&mut self, st: &mut State, func: u32) -> Flow {
        let imp = &self.module.imports[func as usize];
        if imp.module != "vert" {
            return Err(Stop::Error(format!("unsupported import `{}.{}`", imp.module, imp.name)));
        }
        match imp.name.as_str() {
            "any_i32" | "any_i64" => {
                let (tag, _) = Self::peek(st, 0).int();
                let Bv::C(tag) = tag else {
                    return Err(Stop::Error("symbolic input tag".into()));
                };
                Self::pop(st);
                let w = if imp.name == "any_i32" { 32 } else { 64 };
                let (id, v) = self.pool.var(w);
                st.inputs.push((sext(tag, 32), id, w));
                Self::push(st, if w == 32 { Value::I32(v) } else { Value::I64(v) });
            }
            "assume" => {
                let (c, _) = Self::pop(st).int();
                let nz = self.nonzero(c, 32);
                self.assume(st, nz)?;
            }
            "check" => {
                let (code, _) = Self::peek(st, 0).int();
                let (ok, _) = Self::peek(st, 1).int();
                let code = code.as_const().map(|c| c as u32 as i32).unwrap_or(-1);
                let bad = self.pool.bin(Op::Eq, ok, Bv::C(0), 32);
                self.must_not(st, bad, &format!("check {code} failed"))?;
                Self::pop(st);
                Self::pop(st);
            }
            other => return Err(Stop::Error(format!("unsupported import `vert.{other}`"))),
        }
        Self::next(st);
        Ok(())
    }

    fn nonzero(&mut self, v: Bv, w: u8) -> Bv {
        let z = self.pool.bin(Op::Eq, v, Bv::C(0), w);
        self.pool.not(z, 1)
    }

    fn float_arg(v: Value) -> Result<Value, Stop> {
        match v {
            Value::F32(_) | Value::F64(_) => Ok(v),
            _ => Err(Stop::Error("type confusion in float operation".into())),
        }
    }

    fn concrete_int(v: Value) -> Result<u64, Stop> {
        match v.int().0 {
            Bv::C(x) => Ok(x),
            Bv::S(_) => Err(Stop::Error("symbolic value reached a floating-point operation".into())),
        }
    }

    fn step(&mut self, st: &mut State) -> Flow {
        let m = self.module;
        let n_imports = m.imports.len() as u32;
        let (func, pc) = {
            let f = st.frames.last().expect("active frame");
            (f.func, f.pc)
        };
        let fun = &m.funcs[(func - n_imports) as usize];
        let ins = fun.code[pc as usize];
        match ins {
            Instr::Unreachable => {
                return Err(Stop::Failure(format!("unreachable executed in {}", self.func_name(func))))
            }
            Instr::Nop => Self::next(st),
            Instr::Block { end, params, results } => {
                let f = Self::frame(st);
                let height = (f.stack.len() - params as usize) as u32;
                f.labels.push(Label {
                    cont: end + 1,
                    height,
                    arity: results,
                    is_loop: false,
                    iters: 0,
                    symbolic: false,
                });
                f.pc += 1;
            }
            Instr::Loop { params } => {
                let f = Self::frame(st);
                let height = (f.stack.len() - params as usize) as u32;
                f.labels.push(Label {
                    cont: pc + 1,
                    height,
                    arity: params,
                    is_loop: true,
                    iters: 1,
                    symbolic: false,
                });
                f.pc += 1;
            }
            Instr::If { else_, end, params, results } => {
                let (c, _) = Self::peek(st, 0).int();
                let nz = self.nonzero(c, 32);
                let taken = self.branch_on(st, nz)?;
                Self::pop(st);
                let f = Self::frame(st);
                let height = (f.stack.len() - params as usize) as u32;
                f.labels.push(Label {
                    cont: end + 1,
                    height,
                    arity: results,
                    is_loop: false,
                    iters: 0,
                    symbolic: false,
                });
                f.pc = if taken {
                    pc + 1
                } else if else_ != NO_ELSE {
                    else_ + 1
                } else {
                    end
                };
            }
            Instr::Else { end } => {
                let f = Self::frame(st);
                f.labels.pop();
                f.pc = end + 1;
            }
            Instr::End => {
                let f = Self::frame(st);
                if f.labels.len() == 1 {
                    return self.do_return(st);
                }
                f.labels.pop();
                f.pc += 1;
            }
            Instr::Br(d) => self.branch(st, d)?,
            Instr::BrIf(d) => {
                let (c, _) = Self::peek(st, 0).int();
                let nz = self.nonzero(c, 32);
                let taken = self.branch_on(st, nz)?;
                Self::pop(st);
                if taken {
                    self.branch(st, d)?;
                } else {
                    Self::next(st);
                }
            }
            Instr::BrTable(t) => {
                let targets = &fun.tables[t as usize];
                let n = (targets.len() - 1) as u64;
                let (idx, _) = Self::peek(st, 0).int();
                let case = match idx {
                    Bv::C(x) => x.min(n),
                    Bv::S(_) => {
                        let x = self.pool.eval(idx, &st.model).min(n);
                        let cond = if x < n {
                            self.pool.bin(Op::Eq, idx, Bv::C(x), 32)
                        } else {
                            let lt = self.pool.bin(Op::Ult, idx, Bv::C(n), 32);
                            self.pool.not(lt, 1)
                        };
                        let holds = self.branch_on(st, cond)?;
                        debug_assert!(holds);
                        x
                    }
                };
                Self::pop(st);
                self.branch(st, targets[case as usize])?;
            }
            Instr::Return => self.do_return(st)?,
            Instr::Call(f) => self.call(st, f)?,
            Instr::CallIndirect(ty) => {
                let (idx, _) = Self::peek(st, 0).int();
                let idx = self.concretize(st, idx, 32)?;
                let target = m.table.get(idx as usize).copied().flatten();
                let Some(target) = target else {
                    return Err(Stop::Failure("indirect call through an empty table slot".into()));
                };
                if *m.func_type(target) != m.types[ty as usize] {
                    return Err(Stop::Failure("indirect call signature mismatch".into()));
                }
                Self::pop(st);
                self.call(st, target)?;
            }
            Instr::Drop => {
                Self::pop(st);
                Self::next(st);
            }
            Instr::Select => {
                let (c, _) = Self::peek(st, 0).int();
                let a = Self::peek(st, 2);
                let b = Self::peek(st, 1);
                let nz = self.nonzero(c, 32);
                let v = match (a, b, nz) {
                    (_, _, Bv::C(x)) => {
                        if x == 1 {
                            a
                        } else {
                            b
                        }
                    }
                    (Value::I32(x), Value::I32(y), _) => Value::I32(self.pool.ite(nz, x, y, 32)),
                    (Value::I64(x), Value::I64(y), _) => Value::I64(self.pool.ite(nz, x, y, 64)),
                    _ => {
                        if self.branch_on(st, nz)? {
                            a
                        } else {
                            b
                        }
                    }
                };
                let f = Self::frame(st);
                f.stack.truncate(f.stack.len() - 3);
                f.stack.push(v);
                f.pc += 1;
            }
            Instr::LocalGet(i) => {
                let f = Self::frame(st);
                let v = f.locals[i as usize];
                f.stack.push(v);
                f.pc += 1;
            }
            Instr::LocalSet(i) => {
                let f = Self::frame(st);
                f.locals[i as usize] = f.stack.pop().expect("operand");
                f.pc += 1;
            }
            Instr::LocalTee(i) => {
                let f = Self::frame(st);
                f.locals[i as usize] = *f.stack.last().expect("operand");
                f.pc += 1;
            }
            Instr::GlobalGet(i) => {
                let v = st.globals[i as usize];
                Self::push(st, v);
                Self::next(st);
            }
            Instr::GlobalSet(i) => {
                st.globals[i as usize] = Self::pop(st);
                Self::next(st);
            }
            Instr::Load(acc, off) => self.load(st, acc, off)?,
            Instr::Store(acc, off) => self.store(st, acc, off)?,
            Instr::MemorySize => {
                let p = st.mem.pages();
                Self::push(st, Value::I32(Bv::C(p as u64)));
                Self::next(st);
            }
            Instr::MemoryGrow => {
                let (d, _) = Self::peek(st, 0).int();
                let d = self.concretize(st, d, 32)?;
                Self::pop(st);
                let r = st.mem.grow(d as u32);
                Self::push(st, Value::I32(Bv::C(r as u32 as u64)));
                Self::next(st);
            }
            Instr::MemoryFill => {
                let (d, _) = Self::peek(st, 2).int();
                let (n, _) = Self::peek(st, 0).int();
                let d = self.concretize(st, d, 32)? as u32;
                let n = self.concretize(st, n, 32)? as u32;
                let (v, _) = Self::peek(st, 1).int();
                if st.mem.range(d, 0, n as usize).is_none() {
                    return Err(Stop::Failure("out-of-bounds memory.fill".into()));
                }
                st.mem.fill(&mut self.pool, d, v, n);
                let f = Self::frame(st);
                f.stack.truncate(f.stack.len() - 3);
                f.pc += 1;
            }
            Instr::MemoryCopy => {
                let (d, _) = Self::peek(st, 2).int();
                let (s, _) = Self::peek(st, 1).int();
                let (n, _) = Self::peek(st, 0).int();
                let d = self.concretize(st, d, 32)? as u32;
                let s = self.concretize(st, s, 32)? as u32;
                let n = self.concretize(st, n, 32)? as u32;
                if st.mem.range(d, 0, n as usize).is_none() || st.mem.range(s, 0, n as usize).is_none() {
                    return Err(Stop::Failure("out-of-bounds memory.copy".into()));
                }
                st.mem.copy(d, s, n);
                let f = Self::frame(st);
                f.stack.truncate(f.stack.len() - 3);
                f.pc += 1;
            }
            Instr::I32Const(v) => {
                Self::push(st, Value::I32(Bv::C(v as u32 as u64)));
                Self::next(st);
            }
            Instr::I64Const(v) => {
                Self::push(st, Value::I64(Bv::C(v as u64)));
                Self::next(st);
            }
            Instr::F32Const(v) => {
                Self::push(st, Value::F32(v));
                Self::next(st);
            }
            Instr::F64Const(v) => {
                Self::push(st, Value::F64(v));
                Self::next(st);
            }
            Instr::Int(ty, op) => self.int_op(st, ty, op)?,
            Instr::Float(ty, op) => self.float_op(st, ty, op)?,
            Instr::Conv(c) => self.conv(st, c)?,
        }
        Ok(())
    }

    fn load(&mut self, st: &mut State, acc: MemAccess, off: u32) -> Flow {
        let (addr, _) = Self::peek(st, 0).int();
        let addr = self.concretize(st, addr, 32)? as u32;
        let n = acc.bytes as usize;
        let Some(ea) = st.mem.range(addr, off, n) else {
            return Err(Stop::Failure("out-of-bounds memory access".into()));
        };
        let raw = st.mem.read(&mut self.pool, ea, n);
        let bits = 8 * acc.bytes;
        let v = match acc.ty {
            Ty::I32 | Ty::I64 => {
                let w = if acc.ty == Ty::I32 { 32 } else { 64 };
                let x = if bits == w {
                    raw
                } else if acc.signed {
                    self.pool.sext(raw, bits, w)
                } else {
                    self.pool.zext(raw, bits, w)
                };
                if w == 32 {
                    Value::I32(x)
                } else {
                    Value::I64(x)
                }
            }
            Ty::F32 | Ty::F64 => {
                let Bv::C(x) = raw else {
                    return Err(Stop::Error("symbolic bytes loaded as a float".into()));
                };
                if acc.ty == Ty::F32 {
                    Value::F32(x as u32)
                } else {
                    Value::F64(x)
                }
            }
        };
        let f = Self::frame(st);
        *f.stack.last_mut().expect("operand") = v;
        f.pc += 1;
        Ok(())
    }

    fn store(&mut self, st: &mut State, acc: MemAccess, off: u32) -> Flow {
        let (addr, _) = Self::peek(st, 1).int();
        let addr = self.concretize(st, addr, 32)? as u32;
        let n = acc.bytes as usize;
        let Some(ea) = st.mem.range(addr, off, n) else {
            return Err(Stop::Failure("out-of-bounds memory access".into()));
        };
        let (v, w) = Self::pop(st).int();
        Self::pop(st);
        st.mem.write(&mut self.pool, ea, n, v, w);
        Self::next(st);
        Ok(())
    }

    fn int_op(&mut self, st: &mut State, ty: Ty, op: IntOp) -> Flow {
        let w: u8 = if ty == Ty::I32 { 32 } else { 64 };
        let wrap = |b: Bv| if w == 32 { Value::I32(b) } else { Value::I64(b) };
        let p = &mut self.pool;
        let unary = matches!(
            op,
            IntOp::Eqz | IntOp::Clz | IntOp::Ctz | IntOp::Popcnt | IntOp::Extend8S | IntOp::Extend16S | IntOp::Extend32S
        );
        if unary {
            let (a, _) = Self::pop(st).int();
            let v = match op {
                IntOp::Eqz => {
                    let e = p.bin(Op::Eq, a, Bv::C(0), w);
                    Value::I32(p.zext(e, 1, 32))
                }
                IntOp::Clz => wrap(count_bits(p, a, w, BitCount::LeadingZeros)),
                IntOp::Ctz => wrap(count_bits(p, a, w, BitCount::TrailingZeros)),
                IntOp::Popcnt => wrap(count_bits(p, a, w, BitCount::Ones)),
                IntOp::Extend8S | IntOp::Extend16S | IntOp::Extend32S => {
                    let from = match op {
                        IntOp::Extend8S => 8,
                        IntOp::Extend16S => 16,
                        _ => 32,
                    };
                    let low = p.extract(a, w, from - 1, 0);
                    wrap(p.sext(low, from, w))
                }
                _ => unreachable!(),
            };
            Self::push(st, v);
            Self::next(st);
            return Ok(());
        }

        let (a, _) = Self::peek(st, 1).int();
        let (b, _) = Self::peek(st, 0).int();
        // Trapping arithmetic is checked before the operands are consumed.
        match op {
            IntOp::DivS | IntOp::DivU | IntOp::RemS | IntOp::RemU => {
                let zero = self.pool.bin(Op::Eq, b, Bv::C(0), w);
                self.must_not(st, zero, "integer divide by zero")?;
                if op == IntOp::DivS {
                    let min = 1u64 << (w - 1);
                    let is_min = self.pool.bin(Op::Eq, a, Bv::C(min), w);
                    let is_m1 = self.pool.bin(Op::Eq, b, Bv::C(crate::term::mask(w)), w);
                    let ovf = self.pool.bin(Op::And, is_min, is_m1, 1);
                    self.must_not(st, ovf, "integer overflow")?;
                }
            }
            _ => {}
        }
        Self::pop(st);
        Self::pop(st);
        let p = &mut self.pool;
        let cmp = |p: &mut Pool, op: Op, x: Bv, y: Bv, negate: bool| {
            let c = p.bin(op, x, y, w);
            let c = if negate { p.not(c, 1) } else { c };
            Value::I32(p.zext(c, 1, 32))
        };
        let v = match op {
            IntOp::Eq => cmp(p, Op::Eq, a, b, false),
            IntOp::Ne => cmp(p, Op::Eq, a, b, true),
            IntOp::LtS => cmp(p, Op::Slt, a, b, false),
            IntOp::LtU => cmp(p, Op::Ult, a, b, false),
            IntOp::GtS => cmp(p, Op::Slt, b, a, false),
            IntOp::GtU => cmp(p, Op::Ult, b, a, false),
            IntOp::LeS => cmp(p, Op::Slt, b, a, true),
            IntOp::LeU => cmp(p, Op::Ult, b, a, true),
            IntOp::GeS => cmp(p, Op::Slt, a, b, true),
            IntOp::GeU => cmp(p, Op::Ult, a, b, true),
            IntOp::Add => wrap(p.bin(Op::Add, a, b, w)),
            IntOp::Sub => wrap(p.bin(Op::Sub, a, b, w)),
            IntOp::Mul => wrap(p.bin(Op::Mul, a, b, w)),
            IntOp::DivS => wrap(p.bin(Op::SDiv, a, b, w)),
            IntOp::DivU => wrap(p.bin(Op::UDiv, a, b, w)),
            IntOp::RemS => wrap(p.bin(Op::SRem, a, b, w)),
            IntOp::RemU => wrap(p.bin(Op::URem, a, b, w)),
            IntOp::And => wrap(p.bin(Op::And, a, b, w)),
            IntOp::Or => wrap(p.bin(Op::Or, a, b, w)),
            IntOp::Xor => wrap(p.bin(Op::Xor, a, b, w)),
            IntOp::Shl => wrap(p.bin(Op::Shl, a, b, w)),
            IntOp::ShrS => wrap(p.bin(Op::AShr, a, b, w)),
            IntOp::ShrU => wrap(p.bin(Op::LShr, a, b, w)),
            IntOp::Rotl | IntOp::Rotr => {
                let k = p.bin(Op::And, b, Bv::C(w as u64 - 1), w);
                let back = p.bin(Op::Sub, Bv::C(w as u64), k, w);
                let (first, second) = if op == IntOp::Rotl { (Op::Shl, Op::LShr) } else { (Op::LShr, Op::Shl) };
                let x = p.bin(first, a, k, w);
                let y = p.bin(second, a, back, w);
                wrap(p.bin(Op::Or, x, y, w))
            }
            _ => unreachable!("unary operators handled above"),
        };
        Self::push(st, v);
        Self::next(st);
        Ok(())
    }

    fn float_op(&mut self, st: &mut State, ty: Ty, op: FloatOp) -> Flow {
        let binary = matches!(
            op,
            FloatOp::Eq
                | FloatOp::Ne
                | FloatOp::Lt
                | FloatOp::Gt
                | FloatOp::Le
                | FloatOp::Ge
                | FloatOp::Add
                | FloatOp::Sub
                | FloatOp::Mul
                | FloatOp::Div
                | FloatOp::Min
                | FloatOp::Max
                | FloatOp::Copysign
        );
        let b = Self::float_arg(Self::pop(st))?;
        let a = if binary { Some(Self::float_arg(Self::pop(st))?) } else { None };
        let v = if ty == Ty::F32 {
            let get = |v: Value| if let Value::F32(x) = v { f32::from_bits(x) } else { 0.0 };
            float_eval32(op, a.map(get), get(b))
        } else {
            let get = |v: Value| if let Value::F64(x) = v { f64::from_bits(x) } else { 0.0 };
            float_eval64(op, a.map(get), get(b))
        };
        Self::push(st, v);
        Self::next(st);
        Ok(())
    }

    fn conv(&mut self, st: &mut State, c: Conv) -> Flow {
        let v = Self::pop(st);
        let p = &mut self.pool;
        let out = match c {
            Conv::Wrap => Value::I32(p.extract(v.int().0, 64, 31, 0)),
            Conv::ExtendS => Value::I64(p.sext(v.int().0, 32, 64)),
            Conv::ExtendU => Value::I64(p.zext(v.int().0, 32, 64)),
            Conv::Trunc { from, to, signed, sat } => {
                let x = match (from, v) {
                    (Ty::F32, Value::F32(b)) => f32::from_bits(b) as f64,
                    (Ty::F64, Value::F64(b)) => f64::from_bits(b),
                    _ => return Err(Stop::Error("type confusion in truncation".into())),
                };
                match trunc_value(x, to, signed, sat) {
                    Ok(bits) => {
                        if to == Ty::I32 {
                            Value::I32(Bv::C(bits & 0xffff_ffff))
                        } else {
                            Value::I64(Bv::C(bits))
                        }
                    }
                    Err(reason) => {
                        // Restore the operand so the failing state is intact.
                        Self::push(st, v);
                        return Err(Stop::Failure(reason.into()));
                    }
                }
            }
            Conv::Convert { from, to, signed } => {
                let x = Self::concrete_int(v)?;
                let f = match (from, signed) {
                    (Ty::I32, true) => x as u32 as i32 as f64,
                    (Ty::I32, false) => x as u32 as f64,
                    (_, true) => x as i64 as f64,
                    (_, false) => x as f64,
                };
                // Converting through f64 double-rounds i64 -> f32; do it directly.
                if to == Ty::F32 {
                    let g = match (from, signed) {
                        (Ty::I32, true) => x as u32 as i32 as f32,
                        (Ty::I32, false) => x as u32 as f32,
                        (_, true) => x as i64 as f32,
                        (_, false) => x as f32,
                    };
                    Value::F32(g.to_bits())
                } else {
                    Value::F64(f.to_bits())
                }
            }
            Conv::Demote => match v {
                Value::F64(b) => Value::F32((f64::from_bits(b) as f32).to_bits()),
                _ => return Err(Stop::Error("type confusion in demote".into())),
            },
            Conv::Promote => match v {
                Value::F32(b) => Value::F64((f32::from_bits(b) as f64).to_bits()),
                _ => return Err(Stop::Error("type confusion in promote".into())),
            },
            Conv::Reinterpret { to } => match (to, v) {
                (Ty::I32, Value::F32(b)) => Value::I32(Bv::C(b as u64)),
                (Ty::I64, Value::F64(b)) => Value::I64(Bv::C(b)),
                (Ty::F32, _) => Value::F32(Self::concrete_int(v)? as u32),
                (Ty::F64, _) => Value::F64(Self::concrete_int(v)?),
                _ => return Err(Stop::Error("type confusion in reinterpret".into())),
            },
        };
        Self::push(st, out);
        Self::next(st);
        Ok(())
    }
}

enum BitCount {
    LeadingZeros,
    TrailingZeros,
    Ones,
}

fn count_bits(p: &mut Pool, a: Bv, w: u8, kind: BitCount) -> Bv {
    if let Bv::C(x) = a {
        let x = x & crate::term::mask(w);
        let n = match kind {
            BitCount::LeadingZeros => x.leading_zeros() - (64 - w as u32),
            BitCount::TrailingZeros => {
                if x == 0 {
                    w as u32
                } else {
                    x.trailing_zeros()
                }
            }
            BitCount::Ones => x.count_ones(),
        };
        return Bv::C(n as u64);
    }
    match kind {
        BitCount::Ones => {
            let mut acc = Bv::C(0);
            for i in 0..w {
                let bit = p.extract(a, w, i, i);
                let bit = p.zext(bit, 1, w);
                acc = p.bin(Op::Add, acc, bit, w);
            }
            acc
        }
        BitCount::LeadingZeros => {
            // The highest set bit decides; later (higher) bits override.
            let mut acc = Bv::C(w as u64);
            for i in 0..w {
                let bit = p.extract(a, w, i, i);
                acc = p.ite(bit, Bv::C((w - 1 - i) as u64), acc, w);
            }
            acc
        }
        BitCount::TrailingZeros => {
            let mut acc = Bv::C(w as u64);
            for i in (0..w).rev() {
                let bit = p.extract(a, w, i, i);
                acc = p.ite(bit, Bv::C(i as u64), acc, w);
            }
            acc
        }
    }
}

fn trunc_value(x: f64, to: Ty, signed: bool, sat: bool) -> Result<u64, &'static str> {
    if sat {
        return Ok(match (to, signed) {
            (Ty::I32, true) => x as i32 as u32 as u64,
            (Ty::I32, false) => x as u32 as u64,
            (_, true) => x as i64 as u64,
            (_, false) => x as u64,
        });
    }
    if x.is_nan() {
        return Err("invalid conversion to integer");
    }
    let t = x.trunc();
    let (lo, hi) = match (to, signed) {
        (Ty::I32, true) => (-2147483648.0, 2147483648.0),
        (Ty::I32, false) => (0.0, 4294967296.0),
        (_, true) => (-9223372036854775808.0, 9223372036854775808.0),
        (_, false) => (0.0, 18446744073709551616.0),
    };
    if t < lo || t >= hi {
        return Err("integer overflow in float truncation");
    }
    Ok(if signed { t as i64 as u64 } else { t as u64 })
}

fn float_eval32(op: FloatOp, a: Option<f32>, b: f32) -> Value {
    let x = a.unwrap_or(0.0);
    let bool32 = |c: bool| Value::I32(Bv::C(c as u64));
    let r = match op {
        FloatOp::Eq => return bool32(x == b),
        FloatOp::Ne => return bool32(x != b),
        FloatOp::Lt => return bool32(x < b),
        FloatOp::Gt => return bool32(x > b),
        FloatOp::Le => return bool32(x <= b),
        FloatOp::Ge => return bool32(x >= b),
        FloatOp::Abs => b.abs(),
        FloatOp::Neg => -b,
        FloatOp::Ceil => b.ceil(),
        FloatOp::Floor => b.floor(),
        FloatOp::Trunc => b.trunc(),
        FloatOp::Nearest => nearest32(b),
        FloatOp::Sqrt => b.sqrt(),
        FloatOp::Add => x + b,
        FloatOp::Sub => x - b,
        FloatOp::Mul => x * b,
        FloatOp::Div => x / b,
        FloatOp::Min => fmin(x as f64, b as f64) as f32,
        FloatOp::Max => fmax(x as f64, b as f64) as f32,
        FloatOp::Copysign => x.copysign(b),
    };
    Value::F32(r.to_bits())
}

fn float_eval64(op: FloatOp, a: Option<f64>, b: f64) -> Value {
    let x = a.unwrap_or(0.0);
    let bool32 = |c: bool| Value::I32(Bv::C(c as u64));
    let r = match op {
        FloatOp::Eq => return bool32(x == b),
        FloatOp::Ne => return bool32(x != b),
        FloatOp::Lt => return bool32(x < b),
        FloatOp::Gt => return bool32(x > b),
        FloatOp::Le => return bool32(x <= b),
        FloatOp::Ge => return bool32(x >= b),
        FloatOp::Abs => b.abs(),
        FloatOp::Neg => -b,
        FloatOp::Ceil => b.ceil(),
        FloatOp::Floor => b.floor(),
        FloatOp::Trunc => b.trunc(),
        FloatOp::Nearest => {
            let r = b.round();
            if (b - b.trunc()).abs() == 0.5 && r % 2.0 != 0.0 {
                (r - b.signum()).copysign(b)
            } else {
                r
            }
        }
        FloatOp::Sqrt => b.sqrt(),
        FloatOp::Add => x + b,
        FloatOp::Sub => x - b,
        FloatOp::Mul => x * b,
        FloatOp::Div => x / b,
        FloatOp::Min => fmin(x, b),
        FloatOp::Max => fmax(x, b),
        FloatOp::Copysign => x.copysign(b),
    };
    Value::F64(r.to_bits())
}

fn nearest32(b: f32) -> f32 {
    let r = b.round();
    if (b - b.trunc()).abs() == 0.5 && r % 2.0 != 0.0 {
        (r - b.signum()).copysign(b)
    } else {
        r
    }
}

fn fmin(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else if a == 0.0 && b == 0.0 {
        if a.is_sign_negative() {
            a
        } else {
            b
        }
    } else {
        a.min(b)
    }
}

fn fmax(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else if a == 0.0 && b == 0.0 {
        if a.is_sign_positive() {
            a
        } else {
            b
        }
    } else {
        a.max(b)
    }
}
