//! Per-function code generation.
//!
//! The operand stack is resolved statically: a value at stack height `h`
//! always lives in slot `v{h}`, so block parameters and results need no
//! shuffling at fall-through and only branches copy values into place.

use std::fmt::Write as _;

use wasmparser::{BlockType, MemArg, Operator, ValType};

use crate::module::{ConstVal, FuncType, ModuleInfo};
use crate::{LiftError, RUNTIME_PRELUDE};

const ALLOWS: &str = "#![allow(unused, non_snake_case, non_upper_case_globals, unreachable_code, \
unused_labels, unused_mut, unused_assignments, unused_variables, dead_code, \
clippy::all)]";

pub fn emit_module(m: &ModuleInfo<'_>) -> Result<String, LiftError> {
    let mut out = String::new();
    out.push_str("// Lifted from a WebAssembly module. Do not edit by hand.\n");
    for e in &m.exports {
        if e.kind == crate::ExportKind::Func {
            let _ = writeln!(out, "// export \"{}\" = func_{}", e.name, e.index);
        }
    }
    out.push_str("#![forbid(unsafe_code)]\n");
    out.push_str(ALLOWS);
    out.push_str("\n\n");
    out.push_str(RUNTIME_PRELUDE);
    out.push('\n');
    emit_struct(m, &mut out)?;
    out.push_str("impl WasmModule {\n");
    for (i, body) in m.bodies.iter().enumerate() {
        let f = FnEmitter::new(m, i as u32, body.locals.clone());
        out.push_str(&f.run(body.ops.clone())?);
    }
    out.push_str("}\n");
    Ok(out)
}

fn emit_struct(m: &ModuleInfo<'_>, out: &mut String) -> Result<(), LiftError> {
    let (mem_pages, mem_max) = m.memory.unwrap_or((0, Some(0)));
    let mem_max = mem_max.unwrap_or(65536).min(65536);
    let mem_len = mem_pages as usize * 65536;
    out.push_str("pub const MEMORY_MAX_PAGES: usize = ");
    let _ = writeln!(out, "{mem_max};\n");
    out.push_str(
        "pub struct WasmModule {\n    pub memory: Vec<u8>,\n    pub globals: Vec<TaggedVal>,\n    \
         pub table: Vec<Option<u32>>,\n}\n\n",
    );
    out.push_str("impl WasmModule {\n    pub fn new() -> Self {\n");
    let _ = writeln!(out, "        let mut memory = vec![0u8; {mem_len}];");
    for seg in &m.data {
        let end = seg.offset as usize + seg.bytes.len();
        if end > mem_len {
            return Err(LiftError::Invalid("data segment out of bounds".into()));
        }
        if seg.bytes.is_empty() {
            continue;
        }
        let _ = writeln!(
            out,
            "        memory[{}..{}].copy_from_slice(b\"{}\");",
            seg.offset,
            end,
            escape_bytes(&seg.bytes)
        );
    }
    out.push_str("        let globals = vec![");
    for (i, g) in m.globals.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&const_literal(g.init));
    }
    out.push_str("];\n");
    let table_len = m.table.map(|t| t.0 as usize).unwrap_or(0);
    let _ = writeln!(out, "        let mut table: Vec<Option<u32>> = vec![None; {table_len}];");
    for seg in &m.elems {
        if seg.offset as usize + seg.funcs.len() > table_len {
            return Err(LiftError::Invalid("element segment out of bounds".into()));
        }
        for (i, f) in seg.funcs.iter().enumerate() {
            let _ = writeln!(out, "        table[{}] = Some({f});", seg.offset as usize + i);
        }
    }
    out.push_str("        WasmModule { memory, globals, table }\n    }\n\n");
    out.push_str("    pub fn _start(&mut self) -> Option<()> {\n");
    if let Some(start) = m.start {
        let _ = writeln!(out, "        self.func_{start}()?;");
    }
    out.push_str("        Some(())\n    }\n}\n\n");
    Ok(())
}

fn escape_bytes(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for &b in bytes {
        match b {
            b'a'..=b'z' | b'A'..=b'Z' | b'0'..=b'9' | b' ' | b'_' | b'.' | b',' | b'-' | b':' => {
                s.push(b as char)
            }
            _ => {
                let _ = write!(s, "\\x{b:02x}");
            }
        }
    }
    s
}

fn const_literal(c: ConstVal) -> String {
    match c {
        ConstVal::I32(v) => format!("TaggedVal::from({v}i32)"),
        ConstVal::I64(v) => format!("TaggedVal::from({v}i64)"),
        ConstVal::F32(b) => format!("TaggedVal::from(f32::from_bits({b:#010x}u32))"),
        ConstVal::F64(b) => format!("TaggedVal::from(f64::from_bits({b:#018x}u64))"),
    }
}

fn ty_name(t: ValType) -> Result<&'static str, LiftError> {
    match t {
        ValType::I32 => Ok("i32"),
        ValType::I64 => Ok("i64"),
        ValType::F32 => Ok("f32"),
        ValType::F64 => Ok("f64"),
        other => Err(LiftError::Unsupported(format!("value type {other:?}"))),
    }
}

fn zero_of(t: ValType) -> &'static str {
    match t {
        ValType::I32 => "0i32",
        ValType::I64 => "0i64",
        ValType::F32 => "0.0f32",
        _ => "0.0f64",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FrameKind {
    Function,
    Block,
    Loop,
    If,
}

#[derive(Debug, Clone)]
struct Frame {
    kind: FrameKind,
    label: usize,
    /// Stack height below the frame's parameters.
    base: usize,
    params: Vec<ValType>,
    results: Vec<ValType>,
    unreachable: bool,
}

impl Frame {
    fn branch_types(&self) -> &[ValType] {
        if self.kind == FrameKind::Loop {
            &self.params
        } else {
            &self.results
        }
    }
}

struct FnEmitter<'m, 'a> {
    m: &'m ModuleInfo<'a>,
    index: u32,
    ty: FuncType,
    locals: Vec<ValType>,
    body: String,
    /// Static type of each live stack slot.
    stack: Vec<ValType>,
    max_height: usize,
    ctrl: Vec<Frame>,
    next_label: usize,
    /// Indentation for nested Rust blocks that are not wasm frames.
    extra: usize,
}

impl<'m, 'a> FnEmitter<'m, 'a> {
    fn new(m: &'m ModuleInfo<'a>, index: u32, declared: Vec<ValType>) -> Self {
        let ty = m.func_type(index).clone();
        let mut locals = ty.params.clone();
        locals.extend(declared);
        FnEmitter {
            m,
            index,
            ty,
            locals,
            body: String::new(),
            stack: Vec::new(),
            max_height: 0,
            ctrl: Vec::new(),
            next_label: 0,
            extra: 0,
        }
    }

    fn run(mut self, mut ops: wasmparser::OperatorsReader<'a>) -> Result<String, LiftError> {
        if self.ty.results.len() > 1 {
            return Err(LiftError::Unsupported("multi-value function results".into()));
        }
        for t in &self.locals {
            ty_name(*t)?;
        }
        self.ctrl.push(Frame {
            kind: FrameKind::Function,
            label: 0,
            base: 0,
            params: Vec::new(),
            results: self.ty.results.clone(),
            unreachable: false,
        });
        self.next_label = 1;
        // Nesting depth of blocks opened inside dead code that is being skipped.
        let mut skip_depth: Option<usize> = None;
        while !self.ctrl.is_empty() {
            let op = ops.read()?;
            if let Some(depth) = skip_depth.as_mut() {
                match op {
                    Operator::Block { .. } | Operator::Loop { .. } | Operator::If { .. } => {
                        *depth += 1;
                        continue;
                    }
                    Operator::Else if *depth == 0 => {}
                    Operator::End if *depth == 0 => {}
                    Operator::End => {
                        *depth -= 1;
                        continue;
                    }
                    _ => continue,
                }
                skip_depth = None;
            }
            self.op(op)?;
            if self.ctrl.last().is_some_and(|f| f.unreachable) {
                skip_depth = Some(0);
            }
        }
        self.finish()
    }

    fn finish(self) -> Result<String, LiftError> {
        let mut out = String::new();
        let mut params = Vec::new();
        for (i, t) in self.ty.params.iter().enumerate() {
            params.push(format!("arg_{i}: {}", ty_name(*t)?));
        }
        let ret = match self.ty.results.first() {
            Some(t) => ty_name(*t)?,
            None => "()",
        };
        let _ = writeln!(
            out,
            "    pub fn func_{}(&mut self{}{}) -> Option<{ret}> {{",
            self.index,
            if params.is_empty() { "" } else { ", " },
            params.join(", ")
        );
        for (i, t) in self.locals.iter().enumerate() {
            let init = if i < self.ty.params.len() {
                format!("arg_{i}")
            } else {
                zero_of(*t).to_string()
            };
            let _ = writeln!(out, "        let mut local_{i}: {} = {init};", ty_name(*t)?);
        }
        for i in 0..self.max_height {
            let _ = writeln!(out, "        let mut v{i}: TaggedVal = TaggedVal::Undefined;");
        }
        out.push_str(&self.body);
        out.push_str("    }\n\n");
        Ok(out)
    }

    fn line(&mut self, s: impl AsRef<str>) {
        for _ in 0..self.ctrl.len() + 1 + self.extra {
            self.body.push_str("    ");
        }
        self.body.push_str(s.as_ref());
        self.body.push('\n');
    }

    fn h(&self) -> usize {
        self.stack.len()
    }

    fn get(&self, slot: usize) -> String {
        format!("v{slot}.try_as_{}()?", ty_name(self.stack[slot]).unwrap_or("i32"))
    }

    fn push(&mut self, t: ValType) -> usize {
        self.stack.push(t);
        self.max_height = self.max_height.max(self.stack.len());
        self.stack.len() - 1
    }

    fn pop(&mut self) -> usize {
        self.stack.pop();
        self.stack.len()
    }

    fn set_unreachable(&mut self) {
        let f = self.ctrl.last_mut().expect("control frame");
        f.unreachable = true;
        let base = f.base;
        self.stack.truncate(base);
    }

    fn block_sig(&self, bt: BlockType) -> Result<(Vec<ValType>, Vec<ValType>), LiftError> {
        Ok(match bt {
            BlockType::Empty => (Vec::new(), Vec::new()),
            BlockType::Type(t) => {
                ty_name(t)?;
                (Vec::new(), vec![t])
            }
            BlockType::FuncType(i) => {
                let ft = &self.m.types[i as usize];
                (ft.params.clone(), ft.results.clone())
            }
        })
    }

    fn open(&mut self, kind: FrameKind, bt: BlockType) -> Result<usize, LiftError> {
        let (params, results) = self.block_sig(bt)?;
        let label = self.next_label;
        self.next_label += 1;
        let opener = if kind == FrameKind::Loop { "loop " } else { "" };
        self.line(format!("'label_{label}: {opener}{{"));
        let base = self.h() - params.len();
        self.ctrl.push(Frame {
            kind,
            label,
            base,
            params,
            results,
            unreachable: false,
        });
        Ok(label)
    }

    /// Emit the code for a branch to relative depth `depth`.
    fn branch(&mut self, depth: u32) -> Result<(), LiftError> {
        let target = self
            .ctrl
            .len()
            .checked_sub(1 + depth as usize)
            .map(|i| self.ctrl[i].clone())
            .ok_or_else(|| LiftError::Invalid("branch depth out of range".into()))?;
        if target.kind == FrameKind::Function {
            return self.ret();
        }
        let arity = target.branch_types().len();
        let h = self.h();
        for i in 0..arity {
            let from = h - arity + i;
            let to = target.base + i;
            if from != to {
                self.line(format!("v{to} = v{from};"));
            }
        }
        let kw = if target.kind == FrameKind::Loop { "continue" } else { "break" };
        self.line(format!("{kw} 'label_{};", target.label));
        Ok(())
    }

    fn ret(&mut self) -> Result<(), LiftError> {
        if self.ty.results.is_empty() {
            self.line("return Some(());");
        } else {
            let v = self.get(self.h() - 1);
            self.line(format!("return Some({v});"));
        }
        Ok(())
    }

    fn unop(&mut self, out: ValType, tmpl: &str) {
        let a = self.get(self.h() - 1);
        let slot = self.pop();
        self.push(out);
        self.line(format!("v{slot} = TaggedVal::from({});", tmpl.replace("$a", &a)));
    }

    fn binop(&mut self, out: ValType, tmpl: &str) {
        let h = self.h();
        let a = self.get(h - 2);
        let b = self.get(h - 1);
        self.pop();
        let slot = self.pop();
        self.push(out);
        self.line(format!(
            "v{slot} = TaggedVal::from({});",
            tmpl.replace("$a", &a).replace("$b", &b)
        ));
    }

    fn load(&mut self, memarg: MemArg, out: ValType, width: usize, conv: &str) {
        let addr = self.get(self.h() - 1);
        let slot = self.pop();
        self.push(out);
        let off = memarg.offset as u32;
        self.line(format!(
            "v{slot} = TaggedVal::from({conv}::from_le_bytes(mem_read::<{width}>(&self.memory, {addr}, {off})?){});",
            match (conv, out) {
                ("i8" | "u8" | "i16" | "u16", ValType::I32) => " as i32",
                ("i8" | "u8" | "i16" | "u16" | "i32" | "u32", ValType::I64) => " as i64",
                _ => "",
            }
        ));
    }

    fn store(&mut self, memarg: MemArg, width: usize, conv: &str) {
        let h = self.h();
        let addr = self.get(h - 2);
        let val = self.get(h - 1);
        self.pop();
        self.pop();
        let off = memarg.offset as u32;
        self.line(format!(
            "mem_write::<{width}>(&mut self.memory, {addr}, {off}, ({val}{conv}).to_le_bytes())?;"
        ));
    }

    fn call(&mut self, func: u32) -> Result<(), LiftError> {
        let ft = self.m.func_type(func).clone();
        if ft.results.len() > 1 {
            return Err(LiftError::Unsupported("multi-value call results".into()));
        }
        let base = self.h() - ft.params.len();
        let args: Vec<String> = (base..self.h()).map(|i| self.get(i)).collect();
        self.stack.truncate(base);
        let call = format!("self.func_{func}({})?", args.join(", "));
        match ft.results.first() {
            Some(&t) => {
                let slot = self.push(t);
                self.line(format!("v{slot} = TaggedVal::from({call});"));
            }
            None => self.line(format!("{call};")),
        }
        Ok(())
    }

    fn call_indirect(&mut self, type_index: u32) -> Result<(), LiftError> {
        let ft = self.m.types[type_index as usize].clone();
        if ft.results.len() > 1 {
            return Err(LiftError::Unsupported("multi-value call results".into()));
        }
        let idx = self.get(self.h() - 1);
        self.pop();
        let base = self.h() - ft.params.len();
        let args: Vec<String> = (base..self.h()).map(|i| self.get(i)).collect();
        self.stack.truncate(base);
        let mut targets: Vec<u32> = self
            .m
            .elems
            .iter()
            .flat_map(|e| e.funcs.iter().copied())
            .filter(|&f| *self.m.func_type(f) == ft)
            .collect();
        targets.sort_unstable();
        targets.dedup();
        let head = format!("match self.table.get({idx} as u32 as usize).copied().flatten() {{");
        match ft.results.first() {
            Some(&t) => {
                let slot = self.push(t);
                self.line(format!("v{slot} = {head}"));
                for f in targets {
                    self.line(format!(
                        "    Some({f}) => TaggedVal::from(self.func_{f}({})?),",
                        args.join(", ")
                    ));
                }
            }
            None => {
                self.line(head);
                for f in targets {
                    self.line(format!("    Some({f}) => {{ self.func_{f}({})?; }}", args.join(", ")));
                }
            }
        }
        self.line("    _ => return None,");
        self.line("};");
        Ok(())
    }

    fn op(&mut self, op: Operator<'a>) -> Result<(), LiftError> {
        use ValType::{F32, F64, I32, I64};
        match op {
            Operator::Nop => {}
            Operator::Unreachable => {
                self.line("return None;");
                self.set_unreachable();
            }
            Operator::Block { blockty } => {
                self.open(FrameKind::Block, blockty)?;
            }
            Operator::Loop { blockty } => {
                self.open(FrameKind::Loop, blockty)?;
            }
            Operator::If { blockty } => {
                let cond = self.get(self.h() - 1);
                self.pop();
                self.open(FrameKind::If, blockty)?;
                self.body_open(format!("if {cond} != 0 {{"));
            }
            Operator::Else => {
                let f = self.ctrl.last_mut().expect("if frame");
                f.unreachable = false;
                let base = f.base;
                let params = f.params.clone();
                self.stack.truncate(base);
                self.stack.extend(params);
                self.body_close();
                self.body_open("} else {".into());
            }
            Operator::End => self.end()?,
            Operator::Br { relative_depth } => {
                self.branch(relative_depth)?;
                self.set_unreachable();
            }
            Operator::BrIf { relative_depth } => {
                let cond = self.get(self.h() - 1);
                self.pop();
                self.body_open(format!("if {cond} != 0 {{"));
                self.branch(relative_depth)?;
                self.body_close();
                self.line("}");
            }
            Operator::BrTable { targets } => {
                let idx = self.get(self.h() - 1);
                self.pop();
                self.line(format!("match {idx} as u32 {{"));
                let list: Vec<u32> = targets.targets().collect::<Result<_, _>>()?;
                for (i, depth) in list.into_iter().enumerate() {
                    self.body_open(format!("{i} => {{"));
                    self.branch(depth)?;
                    self.body_close();
                    self.line("}");
                }
                self.body_open("_ => {".into());
                self.branch(targets.default())?;
                self.body_close();
                self.line("}");
                self.line("}");
                self.set_unreachable();
            }
            Operator::Return => {
                self.ret()?;
                self.set_unreachable();
            }
            Operator::Call { function_index } => self.call(function_index)?,
            Operator::CallIndirect {
                type_index,
                table_index,
            } => {
                if table_index != 0 {
                    return Err(LiftError::Unsupported("multiple tables".into()));
                }
                self.call_indirect(type_index)?
            }
            Operator::Drop => {
                self.pop();
            }
            Operator::Select | Operator::TypedSelect { .. } => {
                let h = self.h();
                let c = self.get(h - 1);
                self.line(format!(
                    "v{} = if {c} != 0 {{ v{} }} else {{ v{} }};",
                    h - 3,
                    h - 3,
                    h - 2
                ));
                self.pop();
                self.pop();
            }
            Operator::LocalGet { local_index } => {
                let t = self.locals[local_index as usize];
                let slot = self.push(t);
                self.line(format!("v{slot} = TaggedVal::from(local_{local_index});"));
            }
            Operator::LocalSet { local_index } => {
                let v = self.get(self.h() - 1);
                self.pop();
                self.line(format!("local_{local_index} = {v};"));
            }
            Operator::LocalTee { local_index } => {
                let v = self.get(self.h() - 1);
                self.line(format!("local_{local_index} = {v};"));
            }
            Operator::GlobalGet { global_index } => {
                let t = self.m.globals[global_index as usize].ty;
                ty_name(t)?;
                let slot = self.push(t);
                self.line(format!("v{slot} = self.globals[{global_index}];"));
            }
            Operator::GlobalSet { global_index } => {
                let slot = self.pop();
                self.line(format!("self.globals[{global_index}] = v{slot};"));
            }

            Operator::I32Load { memarg } => self.load(memarg, I32, 4, "i32"),
            Operator::I64Load { memarg } => self.load(memarg, I64, 8, "i64"),
            Operator::F32Load { memarg } => self.load(memarg, F32, 4, "f32"),
            Operator::F64Load { memarg } => self.load(memarg, F64, 8, "f64"),
            Operator::I32Load8S { memarg } => self.load(memarg, I32, 1, "i8"),
            Operator::I32Load8U { memarg } => self.load(memarg, I32, 1, "u8"),
            Operator::I32Load16S { memarg } => self.load(memarg, I32, 2, "i16"),
            Operator::I32Load16U { memarg } => self.load(memarg, I32, 2, "u16"),
            Operator::I64Load8S { memarg } => self.load(memarg, I64, 1, "i8"),
            Operator::I64Load8U { memarg } => self.load(memarg, I64, 1, "u8"),
            Operator::I64Load16S { memarg } => self.load(memarg, I64, 2, "i16"),
            Operator::I64Load16U { memarg } => self.load(memarg, I64, 2, "u16"),
            Operator::I64Load32S { memarg } => self.load(memarg, I64, 4, "i32"),
            Operator::I64Load32U { memarg } => self.load(memarg, I64, 4, "u32"),
            Operator::I32Store { memarg } => self.store(memarg, 4, ""),
            Operator::I64Store { memarg } => self.store(memarg, 8, ""),
            Operator::F32Store { memarg } => self.store(memarg, 4, ""),
            Operator::F64Store { memarg } => self.store(memarg, 8, ""),
            Operator::I32Store8 { memarg } | Operator::I64Store8 { memarg } => {
                self.store(memarg, 1, " as u8")
            }
            Operator::I32Store16 { memarg } | Operator::I64Store16 { memarg } => {
                self.store(memarg, 2, " as u16")
            }
            Operator::I64Store32 { memarg } => self.store(memarg, 4, " as u32"),
            Operator::MemorySize { .. } => {
                let slot = self.push(I32);
                self.line(format!("v{slot} = TaggedVal::from((self.memory.len() / PAGE_SIZE) as i32);"));
            }
            Operator::MemoryGrow { .. } => self.unop(I32, "mem_grow(&mut self.memory, MEMORY_MAX_PAGES, $a)"),
            Operator::MemoryFill { .. } => {
                let h = self.h();
                let (d, v, n) = (self.get(h - 3), self.get(h - 2), self.get(h - 1));
                self.stack.truncate(h - 3);
                self.line(format!("mem_fill(&mut self.memory, {d}, {v}, {n})?;"));
            }
            Operator::MemoryCopy { .. } => {
                let h = self.h();
                let (d, s, n) = (self.get(h - 3), self.get(h - 2), self.get(h - 1));
                self.stack.truncate(h - 3);
                self.line(format!("mem_copy(&mut self.memory, {d}, {s}, {n})?;"));
            }

            Operator::I32Const { value } => {
                let slot = self.push(I32);
                self.line(format!("v{slot} = TaggedVal::from({value}i32);"));
            }
            Operator::I64Const { value } => {
                let slot = self.push(I64);
                self.line(format!("v{slot} = TaggedVal::from({value}i64);"));
            }
            Operator::F32Const { value } => {
                let slot = self.push(F32);
                self.line(format!(
                    "v{slot} = TaggedVal::from(f32::from_bits({:#010x}u32));",
                    value.bits()
                ));
            }
            Operator::F64Const { value } => {
                let slot = self.push(F64);
                self.line(format!(
                    "v{slot} = TaggedVal::from(f64::from_bits({:#018x}u64));",
                    value.bits()
                ));
            }

            other => self.numeric(other)?,
        }
        Ok(())
    }

    fn numeric(&mut self, op: Operator<'a>) -> Result<(), LiftError> {
        use ValType::{F32, F64, I32, I64};
        match op {
            Operator::I32Eqz => self.unop(I32, "($a == 0) as i32"),
            Operator::I64Eqz => self.unop(I32, "($a == 0) as i32"),
            Operator::I32Eq | Operator::I64Eq | Operator::F32Eq | Operator::F64Eq => {
                self.binop(I32, "($a == $b) as i32")
            }
            Operator::I32Ne | Operator::I64Ne | Operator::F32Ne | Operator::F64Ne => {
                self.binop(I32, "($a != $b) as i32")
            }
            Operator::I32LtS | Operator::I64LtS | Operator::F32Lt | Operator::F64Lt => {
                self.binop(I32, "($a < $b) as i32")
            }
            Operator::I32GtS | Operator::I64GtS | Operator::F32Gt | Operator::F64Gt => {
                self.binop(I32, "($a > $b) as i32")
            }
            Operator::I32LeS | Operator::I64LeS | Operator::F32Le | Operator::F64Le => {
                self.binop(I32, "($a <= $b) as i32")
            }
            Operator::I32GeS | Operator::I64GeS | Operator::F32Ge | Operator::F64Ge => {
                self.binop(I32, "($a >= $b) as i32")
            }
            Operator::I32LtU => self.binop(I32, "(($a as u32) < ($b as u32)) as i32"),
            Operator::I32GtU => self.binop(I32, "(($a as u32) > ($b as u32)) as i32"),
            Operator::I32LeU => self.binop(I32, "(($a as u32) <= ($b as u32)) as i32"),
            Operator::I32GeU => self.binop(I32, "(($a as u32) >= ($b as u32)) as i32"),
            Operator::I64LtU => self.binop(I32, "(($a as u64) < ($b as u64)) as i32"),
            Operator::I64GtU => self.binop(I32, "(($a as u64) > ($b as u64)) as i32"),
            Operator::I64LeU => self.binop(I32, "(($a as u64) <= ($b as u64)) as i32"),
            Operator::I64GeU => self.binop(I32, "(($a as u64) >= ($b as u64)) as i32"),

            Operator::I32Clz | Operator::I64Clz => self.int_unop(op, "$a.leading_zeros()"),
            Operator::I32Ctz | Operator::I64Ctz => self.int_unop(op, "$a.trailing_zeros()"),
            Operator::I32Popcnt | Operator::I64Popcnt => self.int_unop(op, "$a.count_ones()"),

            Operator::I32Add => self.binop(I32, "$a.wrapping_add($b)"),
            Operator::I32Sub => self.binop(I32, "$a.wrapping_sub($b)"),
            Operator::I32Mul => self.binop(I32, "$a.wrapping_mul($b)"),
            Operator::I32DivS => self.binop(I32, "i32_div_s($a, $b)?"),
            Operator::I32DivU => self.binop(I32, "i32_div_u($a, $b)?"),
            Operator::I32RemS => self.binop(I32, "i32_rem_s($a, $b)?"),
            Operator::I32RemU => self.binop(I32, "i32_rem_u($a, $b)?"),
            Operator::I32And => self.binop(I32, "$a & $b"),
            Operator::I32Or => self.binop(I32, "$a | $b"),
            Operator::I32Xor => self.binop(I32, "$a ^ $b"),
            Operator::I32Shl => self.binop(I32, "$a.wrapping_shl($b as u32)"),
            Operator::I32ShrS => self.binop(I32, "$a.wrapping_shr($b as u32)"),
            Operator::I32ShrU => self.binop(I32, "($a as u32).wrapping_shr($b as u32) as i32"),
            Operator::I32Rotl => self.binop(I32, "$a.rotate_left(($b as u32) % 32)"),
            Operator::I32Rotr => self.binop(I32, "$a.rotate_right(($b as u32) % 32)"),

            Operator::I64Add => self.binop(I64, "$a.wrapping_add($b)"),
            Operator::I64Sub => self.binop(I64, "$a.wrapping_sub($b)"),
            Operator::I64Mul => self.binop(I64, "$a.wrapping_mul($b)"),
            Operator::I64DivS => self.binop(I64, "i64_div_s($a, $b)?"),
            Operator::I64DivU => self.binop(I64, "i64_div_u($a, $b)?"),
            Operator::I64RemS => self.binop(I64, "i64_rem_s($a, $b)?"),
            Operator::I64RemU => self.binop(I64, "i64_rem_u($a, $b)?"),
            Operator::I64And => self.binop(I64, "$a & $b"),
            Operator::I64Or => self.binop(I64, "$a | $b"),
            Operator::I64Xor => self.binop(I64, "$a ^ $b"),
            Operator::I64Shl => self.binop(I64, "$a.wrapping_shl($b as u32)"),
            Operator::I64ShrS => self.binop(I64, "$a.wrapping_shr($b as u32)"),
            Operator::I64ShrU => self.binop(I64, "($a as u64).wrapping_shr($b as u32) as i64"),
            Operator::I64Rotl => self.binop(I64, "$a.rotate_left(($b as u32) % 64)"),
            Operator::I64Rotr => self.binop(I64, "$a.rotate_right(($b as u32) % 64)"),

            Operator::F32Abs | Operator::F64Abs => self.float_unop(op, "$a.abs()"),
            Operator::F32Neg | Operator::F64Neg => self.float_unop(op, "-$a"),
            Operator::F32Ceil | Operator::F64Ceil => self.float_unop(op, "$a.ceil()"),
            Operator::F32Floor | Operator::F64Floor => self.float_unop(op, "$a.floor()"),
            Operator::F32Trunc | Operator::F64Trunc => self.float_unop(op, "$a.trunc()"),
            Operator::F32Sqrt | Operator::F64Sqrt => self.float_unop(op, "$a.sqrt()"),
            Operator::F32Nearest => self.unop(F32, "f32_nearest($a)"),
            Operator::F64Nearest => self.unop(F64, "f64_nearest($a)"),
            Operator::F32Add => self.binop(F32, "$a + $b"),
            Operator::F32Sub => self.binop(F32, "$a - $b"),
            Operator::F32Mul => self.binop(F32, "$a * $b"),
            Operator::F32Div => self.binop(F32, "$a / $b"),
            Operator::F32Min => self.binop(F32, "f32_min($a, $b)"),
            Operator::F32Max => self.binop(F32, "f32_max($a, $b)"),
            Operator::F32Copysign => self.binop(F32, "$a.copysign($b)"),
            Operator::F64Add => self.binop(F64, "$a + $b"),
            Operator::F64Sub => self.binop(F64, "$a - $b"),
            Operator::F64Mul => self.binop(F64, "$a * $b"),
            Operator::F64Div => self.binop(F64, "$a / $b"),
            Operator::F64Min => self.binop(F64, "f64_min($a, $b)"),
            Operator::F64Max => self.binop(F64, "f64_max($a, $b)"),
            Operator::F64Copysign => self.binop(F64, "$a.copysign($b)"),

            Operator::I32WrapI64 => self.unop(I32, "$a as i32"),
            Operator::I64ExtendI32S => self.unop(I64, "$a as i64"),
            Operator::I64ExtendI32U => self.unop(I64, "$a as u32 as i64"),
            Operator::I32Extend8S => self.unop(I32, "$a as i8 as i32"),
            Operator::I32Extend16S => self.unop(I32, "$a as i16 as i32"),
            Operator::I64Extend8S => self.unop(I64, "$a as i8 as i64"),
            Operator::I64Extend16S => self.unop(I64, "$a as i16 as i64"),
            Operator::I64Extend32S => self.unop(I64, "$a as i32 as i64"),

            Operator::I32TruncF32S => self.unop(I32, "i32_trunc_f32_s($a)?"),
            Operator::I32TruncF32U => self.unop(I32, "i32_trunc_f32_u($a)? as i32"),
            Operator::I32TruncF64S => self.unop(I32, "i32_trunc_f64_s($a)?"),
            Operator::I32TruncF64U => self.unop(I32, "i32_trunc_f64_u($a)? as i32"),
            Operator::I64TruncF32S => self.unop(I64, "i64_trunc_f32_s($a)?"),
            Operator::I64TruncF32U => self.unop(I64, "i64_trunc_f32_u($a)? as i64"),
            Operator::I64TruncF64S => self.unop(I64, "i64_trunc_f64_s($a)?"),
            Operator::I64TruncF64U => self.unop(I64, "i64_trunc_f64_u($a)? as i64"),
            Operator::I32TruncSatF32S | Operator::I32TruncSatF64S => self.unop(I32, "$a as i32"),
            Operator::I32TruncSatF32U | Operator::I32TruncSatF64U => {
                self.unop(I32, "$a as u32 as i32")
            }
            Operator::I64TruncSatF32S | Operator::I64TruncSatF64S => self.unop(I64, "$a as i64"),
            Operator::I64TruncSatF32U | Operator::I64TruncSatF64U => {
                self.unop(I64, "$a as u64 as i64")
            }

            Operator::F32ConvertI32S | Operator::F32ConvertI64S | Operator::F32DemoteF64 => {
                self.unop(F32, "$a as f32")
            }
            Operator::F32ConvertI32U => self.unop(F32, "$a as u32 as f32"),
            Operator::F32ConvertI64U => self.unop(F32, "$a as u64 as f32"),
            Operator::F64ConvertI32S | Operator::F64ConvertI64S | Operator::F64PromoteF32 => {
                self.unop(F64, "$a as f64")
            }
            Operator::F64ConvertI32U => self.unop(F64, "$a as u32 as f64"),
            Operator::F64ConvertI64U => self.unop(F64, "$a as u64 as f64"),
            Operator::I32ReinterpretF32 => self.unop(I32, "$a.to_bits() as i32"),
            Operator::I64ReinterpretF64 => self.unop(I64, "$a.to_bits() as i64"),
            Operator::F32ReinterpretI32 => self.unop(F32, "f32::from_bits($a as u32)"),
            Operator::F64ReinterpretI64 => self.unop(F64, "f64::from_bits($a as u64)"),

            other => {
                return Err(LiftError::Unsupported(format!("operator {other:?}")));
            }
        }
        Ok(())
    }

    fn int_unop(&mut self, op: Operator<'a>, tmpl: &str) {
        let wide = matches!(op, Operator::I64Clz | Operator::I64Ctz | Operator::I64Popcnt);
        if wide {
            self.unop(ValType::I64, &format!("{tmpl} as i64"));
        } else {
            self.unop(ValType::I32, &format!("{tmpl} as i32"));
        }
    }

    fn float_unop(&mut self, op: Operator<'a>, tmpl: &str) {
        let t = match op {
            Operator::F32Abs
            | Operator::F32Neg
            | Operator::F32Ceil
            | Operator::F32Floor
            | Operator::F32Trunc
            | Operator::F32Sqrt => ValType::F32,
            _ => ValType::F64,
        };
        self.unop(t, tmpl);
    }

    fn body_open(&mut self, s: String) {
        self.line(s);
        self.extra += 1;
    }

    fn body_close(&mut self) {
        self.extra -= 1;
    }

    fn end(&mut self) -> Result<(), LiftError> {
        let frame = self.ctrl.last().cloned().expect("control frame");
        match frame.kind {
            FrameKind::Function => {
                if !frame.unreachable {
                    self.ret()?;
                }
                self.ctrl.pop();
            }
            FrameKind::Block => {
                self.ctrl.pop();
                self.line("}");
            }
            FrameKind::Loop => {
                if !frame.unreachable {
                    self.line(format!("break 'label_{};", frame.label));
                }
                self.ctrl.pop();
                self.line("}");
            }
            FrameKind::If => {
                self.body_close();
                self.line("}");
                self.ctrl.pop();
                self.line("}");
            }
        }
        if frame.kind != FrameKind::Function {
            self.stack.truncate(frame.base);
            for t in frame.results {
                self.push(t);
            }
        }
        Ok(())
    }
}
