//! Decoding of a WebAssembly module into a form the interpreter can execute
//! directly: structured control flow has its targets resolved up front.

use std::collections::HashMap;

use wasmparser::{
    BlockType, ConstExpr, DataKind, ElementItems, ElementKind, ExternalKind, KnownCustom, Name,
    Operator, Parser, Payload, TypeRef, ValType,
};

use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ty {
    I32,
    I64,
    F32,
    F64,
}

impl Ty {
    fn from_val(t: ValType) -> Result<Ty, Error> {
        Ok(match t {
            ValType::I32 => Ty::I32,
            ValType::I64 => Ty::I64,
            ValType::F32 => Ty::F32,
            ValType::F64 => Ty::F64,
            other => return Err(Error::Unsupported(format!("value type {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuncType {
    pub params: Vec<Ty>,
    pub results: Vec<Ty>,
}

/// Width and extension of a memory access.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemAccess {
    pub ty: Ty,
    pub bytes: u8,
    pub signed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntOp {
    Eqz,
    Eq,
    Ne,
    LtS,
    LtU,
    GtS,
    GtU,
    LeS,
    LeU,
    GeS,
    GeU,
    Clz,
    Ctz,
    Popcnt,
    Add,
    Sub,
    Mul,
    DivS,
    DivU,
    RemS,
    RemU,
    And,
    Or,
    Xor,
    Shl,
    ShrS,
    ShrU,
    Rotl,
    Rotr,
    Extend8S,
    Extend16S,
    Extend32S,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FloatOp {
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
    Abs,
    Neg,
    Ceil,
    Floor,
    Trunc,
    Nearest,
    Sqrt,
    Add,
    Sub,
    Mul,
    Div,
    Min,
    Max,
    Copysign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conv {
    Wrap,
    ExtendS,
    ExtendU,
    /// Float to integer; `sat` selects saturating rather than trapping.
    Trunc { from: Ty, to: Ty, signed: bool, sat: bool },
    Convert { from: Ty, to: Ty, signed: bool },
    Demote,
    Promote,
    Reinterpret { to: Ty },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Instr {
    Unreachable,
    Nop,
    Block { end: u32, params: u16, results: u16 },
    Loop { params: u16 },
    If { else_: u32, end: u32, params: u16, results: u16 },
    Else { end: u32 },
    End,
    Br(u32),
    BrIf(u32),
    BrTable(u32),
    Return,
    Call(u32),
    CallIndirect(u32),
    Drop,
    Select,
    LocalGet(u32),
    LocalSet(u32),
    LocalTee(u32),
    GlobalGet(u32),
    GlobalSet(u32),
    Load(MemAccess, u32),
    Store(MemAccess, u32),
    MemorySize,
    MemoryGrow,
    MemoryFill,
    MemoryCopy,
    I32Const(i32),
    I64Const(i64),
    F32Const(u32),
    F64Const(u64),
    Int(Ty, IntOp),
    Float(Ty, FloatOp),
    Conv(Conv),
}

pub const NO_ELSE: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct Function {
    pub ty: u32,
    pub locals: Vec<Ty>,
    pub code: Vec<Instr>,
    /// Branch tables referenced by `BrTable`: targets followed by the default.
    pub tables: Vec<Vec<u32>>,
}

#[derive(Debug, Clone)]
pub struct Import {
    pub module: String,
    pub name: String,
    pub ty: u32,
}

#[derive(Debug, Clone, Copy)]
pub enum ConstVal {
    I32(i32),
    I64(i64),
    F32(u32),
    F64(u64),
}

#[derive(Debug, Clone)]
pub struct Module {
    pub types: Vec<FuncType>,
    pub imports: Vec<Import>,
    pub funcs: Vec<Function>,
    pub memory: Option<(u64, Option<u64>)>,
    pub globals: Vec<(Ty, ConstVal)>,
    pub table: Vec<Option<u32>>,
    pub data: Vec<(u32, Vec<u8>)>,
    pub exports: HashMap<String, u32>,
    pub start: Option<u32>,
    pub names: HashMap<u32, String>,
}

impl Module {
    pub fn func_type(&self, idx: u32) -> &FuncType {
        let n = self.imports.len() as u32;
        let ty = if idx < n {
            self.imports[idx as usize].ty
        } else {
            self.funcs[(idx - n) as usize].ty
        };
        &self.types[ty as usize]
    }

    pub fn name(&self, idx: u32) -> Option<&str> {
        self.names.get(&idx).map(String::as_str)
    }

    pub fn parse(wasm: &[u8]) -> Result<Module, Error> {
        wasmparser::Validator::new().validate_all(wasm)?;
        let mut m = Module {
            types: Vec::new(),
            imports: Vec::new(),
            funcs: Vec::new(),
            memory: None,
            globals: Vec::new(),
            table: Vec::new(),
            data: Vec::new(),
            exports: HashMap::new(),
            start: None,
            names: HashMap::new(),
        };
        let mut func_types = Vec::new();
        let mut body_index = 0usize;
        for payload in Parser::new(0).parse_all(wasm) {
            match payload? {
                Payload::TypeSection(r) => {
                    for ty in r.into_iter_err_on_gc_types() {
                        let ty = ty?;
                        m.types.push(FuncType {
                            params: ty.params().iter().map(|t| Ty::from_val(*t)).collect::<Result<_, _>>()?,
                            results: ty.results().iter().map(|t| Ty::from_val(*t)).collect::<Result<_, _>>()?,
                        });
                    }
                }
                Payload::ImportSection(r) => {
                    for imp in r.into_imports() {
                        let imp = imp?;
                        match imp.ty {
                            TypeRef::Func(ty) | TypeRef::FuncExact(ty) => m.imports.push(Import {
                                module: imp.module.to_string(),
                                name: imp.name.to_string(),
                                ty,
                            }),
                            _ => {
                                return Err(Error::Unsupported(format!(
                                    "non-function import `{}.{}`",
                                    imp.module, imp.name
                                )))
                            }
                        }
                    }
                }
                Payload::FunctionSection(r) => {
                    for f in r {
                        func_types.push(f?);
                    }
                }
                Payload::TableSection(r) => {
                    for t in r {
                        let t = t?;
                        if !m.table.is_empty() {
                            return Err(Error::Unsupported("multiple tables".into()));
                        }
                        m.table = vec![None; t.ty.initial as usize];
                    }
                }
                Payload::MemorySection(r) => {
                    for mem in r {
                        let mem = mem?;
                        if mem.memory64 || mem.shared || m.memory.is_some() {
                            return Err(Error::Unsupported("memory configuration".into()));
                        }
                        m.memory = Some((mem.initial, mem.maximum));
                    }
                }
                Payload::GlobalSection(r) => {
                    for g in r {
                        let g = g?;
                        let v = const_val(&g.init_expr, &m.globals)?;
                        m.globals.push((Ty::from_val(g.ty.content_type)?, v));
                    }
                }
                Payload::ExportSection(r) => {
                    for e in r {
                        let e = e?;
                        if matches!(e.kind, ExternalKind::Func | ExternalKind::FuncExact) {
                            m.exports.insert(e.name.to_string(), e.index);
                        }
                    }
                }
                Payload::StartSection { func, .. } => m.start = Some(func),
                Payload::ElementSection(r) => {
                    for el in r {
                        let el = el?;
                        let ElementKind::Active { offset_expr, .. } = el.kind else {
                            continue;
                        };
                        let ConstVal::I32(off) = const_val(&offset_expr, &m.globals)? else {
                            return Err(Error::Unsupported("element offset".into()));
                        };
                        let mut funcs = Vec::new();
                        match el.items {
                            ElementItems::Functions(fs) => {
                                for f in fs {
                                    funcs.push(f?);
                                }
                            }
                            ElementItems::Expressions(_, es) => {
                                for e in es {
                                    match e?.get_operators_reader().read()? {
                                        Operator::RefFunc { function_index } => funcs.push(function_index),
                                        _ => return Err(Error::Unsupported("element expression".into())),
                                    }
                                }
                            }
                        }
                        for (i, f) in funcs.into_iter().enumerate() {
                            let slot = off as u32 as usize + i;
                            if slot >= m.table.len() {
                                return Err(Error::Invalid("element segment out of bounds".into()));
                            }
                            m.table[slot] = Some(f);
                        }
                    }
                }
                Payload::DataSection(r) => {
                    for d in r {
                        let d = d?;
                        let DataKind::Active { offset_expr, .. } = d.kind else {
                            return Err(Error::Unsupported("passive data segment".into()));
                        };
                        let ConstVal::I32(off) = const_val(&offset_expr, &m.globals)? else {
                            return Err(Error::Unsupported("data offset".into()));
                        };
                        m.data.push((off as u32, d.data.to_vec()));
                    }
                }
                Payload::CodeSectionEntry(body) => {
                    let ty = *func_types
                        .get(body_index)
                        .ok_or_else(|| Error::Invalid("function body without declaration".into()))?;
                    body_index += 1;
                    let mut locals = m.types[ty as usize].params.clone();
                    for l in body.get_locals_reader()? {
                        let (n, t) = l?;
                        let t = Ty::from_val(t)?;
                        locals.extend(std::iter::repeat(t).take(n as usize));
                    }
                    let (code, tables) = decode_body(&m.types, body.get_operators_reader()?)?;
                    m.funcs.push(Function { ty, locals, code, tables });
                }
                Payload::CustomSection(c) => {
                    if let KnownCustom::Name(names) = c.as_known() {
                        for n in names {
                            // A malformed name section only loses diagnostics.
                            let Ok(Name::Function(map)) = n else { continue };
                            for naming in map.into_iter().flatten() {
                                m.names.insert(naming.index, naming.name.to_string());
                            }
                        }
                    }
                }
                _ => {}
            }
        }
        Ok(m)
    }
}

fn const_val(expr: &ConstExpr<'_>, globals: &[(Ty, ConstVal)]) -> Result<ConstVal, Error> {
    let mut r = expr.get_operators_reader();
    let v = match r.read()? {
        Operator::I32Const { value } => ConstVal::I32(value),
        Operator::I64Const { value } => ConstVal::I64(value),
        Operator::F32Const { value } => ConstVal::F32(value.bits()),
        Operator::F64Const { value } => ConstVal::F64(value.bits()),
        Operator::GlobalGet { global_index } => globals
            .get(global_index as usize)
            .map(|g| g.1)
            .ok_or_else(|| Error::Invalid("global index".into()))?,
        other => return Err(Error::Unsupported(format!("constant expression {other:?}"))),
    };
    Ok(v)
}

fn block_sig(types: &[FuncType], bt: BlockType) -> (u16, u16) {
    match bt {
        BlockType::Empty => (0, 0),
        BlockType::Type(_) => (0, 1),
        BlockType::FuncType(i) => {
            let t = &types[i as usize];
            (t.params.len() as u16, t.results.len() as u16)
        }
    }
}

fn decode_body(
    types: &[FuncType],
    mut r: wasmparser::OperatorsReader<'_>,
) -> Result<(Vec<Instr>, Vec<Vec<u32>>), Error> {
    let mut code = Vec::new();
    let mut tables = Vec::new();
    let mut open: Vec<usize> = Vec::new();
    loop {
        let op = r.read()?;
        let at = code.len();
        let ins = match op {
            Operator::Unreachable => Instr::Unreachable,
            Operator::Nop => Instr::Nop,
            Operator::Block { blockty } => {
                open.push(at);
                let (params, results) = block_sig(types, blockty);
                Instr::Block { end: 0, params, results }
            }
            Operator::Loop { blockty } => {
                open.push(at);
                Instr::Loop { params: block_sig(types, blockty).0 }
            }
            Operator::If { blockty } => {
                open.push(at);
                let (params, results) = block_sig(types, blockty);
                Instr::If { else_: NO_ELSE, end: 0, params, results }
            }
            Operator::Else => {
                let &start = open.last().ok_or_else(|| Error::Invalid("else without if".into()))?;
                if let Instr::If { else_, .. } = &mut code[start] {
                    *else_ = at as u32;
                }
                Instr::Else { end: 0 }
            }
            Operator::End => match open.pop() {
                Some(start) => {
                    match &mut code[start] {
                        Instr::Block { end, .. } => *end = at as u32,
                        Instr::If { else_, end, .. } => {
                            *end = at as u32;
                            if *else_ != NO_ELSE {
                                let e = *else_ as usize;
                                code[e] = Instr::Else { end: at as u32 };
                            }
                        }
                        _ => {}
                    }
                    Instr::End
                }
                None => {
                    code.push(Instr::End);
                    break;
                }
            },
            Operator::Br { relative_depth } => Instr::Br(relative_depth),
            Operator::BrIf { relative_depth } => Instr::BrIf(relative_depth),
            Operator::BrTable { targets } => {
                let mut t: Vec<u32> = targets.targets().collect::<Result<_, _>>()?;
                t.push(targets.default());
                tables.push(t);
                Instr::BrTable(tables.len() as u32 - 1)
            }
            Operator::Return => Instr::Return,
            Operator::Call { function_index } => Instr::Call(function_index),
            Operator::CallIndirect { type_index, .. } => Instr::CallIndirect(type_index),
            Operator::Drop => Instr::Drop,
            Operator::Select | Operator::TypedSelect { .. } => Instr::Select,
            Operator::LocalGet { local_index } => Instr::LocalGet(local_index),
            Operator::LocalSet { local_index } => Instr::LocalSet(local_index),
            Operator::LocalTee { local_index } => Instr::LocalTee(local_index),
            Operator::GlobalGet { global_index } => Instr::GlobalGet(global_index),
            Operator::GlobalSet { global_index } => Instr::GlobalSet(global_index),
            Operator::MemorySize { .. } => Instr::MemorySize,
            Operator::MemoryGrow { .. } => Instr::MemoryGrow,
            Operator::MemoryFill { .. } => Instr::MemoryFill,
            Operator::MemoryCopy { .. } => Instr::MemoryCopy,
            Operator::I32Const { value } => Instr::I32Const(value),
            Operator::I64Const { value } => Instr::I64Const(value),
            Operator::F32Const { value } => Instr::F32Const(value.bits()),
            Operator::F64Const { value } => Instr::F64Const(value.bits()),
            other => decode_simple(other)?,
        };
        code.push(ins);
    }
    Ok((code, tables))
}

fn mem(ty: Ty, bytes: u8, signed: bool) -> MemAccess {
    MemAccess { ty, bytes, signed }
}

fn decode_simple(op: Operator<'_>) -> Result<Instr, Error> {
    use Ty::{F32, F64, I32, I64};
    Ok(match op {
        Operator::I32Load { memarg } => Instr::Load(mem(I32, 4, false), memarg.offset as u32),
        Operator::I64Load { memarg } => Instr::Load(mem(I64, 8, false), memarg.offset as u32),
        Operator::F32Load { memarg } => Instr::Load(mem(F32, 4, false), memarg.offset as u32),
        Operator::F64Load { memarg } => Instr::Load(mem(F64, 8, false), memarg.offset as u32),
        Operator::I32Load8S { memarg } => Instr::Load(mem(I32, 1, true), memarg.offset as u32),
        Operator::I32Load8U { memarg } => Instr::Load(mem(I32, 1, false), memarg.offset as u32),
        Operator::I32Load16S { memarg } => Instr::Load(mem(I32, 2, true), memarg.offset as u32),
        Operator::I32Load16U { memarg } => Instr::Load(mem(I32, 2, false), memarg.offset as u32),
        Operator::I64Load8S { memarg } => Instr::Load(mem(I64, 1, true), memarg.offset as u32),
        Operator::I64Load8U { memarg } => Instr::Load(mem(I64, 1, false), memarg.offset as u32),
        Operator::I64Load16S { memarg } => Instr::Load(mem(I64, 2, true), memarg.offset as u32),
        Operator::I64Load16U { memarg } => Instr::Load(mem(I64, 2, false), memarg.offset as u32),
        Operator::I64Load32S { memarg } => Instr::Load(mem(I64, 4, true), memarg.offset as u32),
        Operator::I64Load32U { memarg } => Instr::Load(mem(I64, 4, false), memarg.offset as u32),
        Operator::I32Store { memarg } => Instr::Store(mem(I32, 4, false), memarg.offset as u32),
        Operator::I64Store { memarg } => Instr::Store(mem(I64, 8, false), memarg.offset as u32),
        Operator::F32Store { memarg } => Instr::Store(mem(F32, 4, false), memarg.offset as u32),
        Operator::F64Store { memarg } => Instr::Store(mem(F64, 8, false), memarg.offset as u32),
        Operator::I32Store8 { memarg } => Instr::Store(mem(I32, 1, false), memarg.offset as u32),
        Operator::I32Store16 { memarg } => Instr::Store(mem(I32, 2, false), memarg.offset as u32),
        Operator::I64Store8 { memarg } => Instr::Store(mem(I64, 1, false), memarg.offset as u32),
        Operator::I64Store16 { memarg } => Instr::Store(mem(I64, 2, false), memarg.offset as u32),
        Operator::I64Store32 { memarg } => Instr::Store(mem(I64, 4, false), memarg.offset as u32),

        Operator::I32Eqz => Instr::Int(I32, IntOp::Eqz),
        Operator::I32Eq => Instr::Int(I32, IntOp::Eq),
        Operator::I32Ne => Instr::Int(I32, IntOp::Ne),
        Operator::I32LtS => Instr::Int(I32, IntOp::LtS),
        Operator::I32LtU => Instr::Int(I32, IntOp::LtU),
        Operator::I32GtS => Instr::Int(I32, IntOp::GtS),
        Operator::I32GtU => Instr::Int(I32, IntOp::GtU),
        Operator::I32LeS => Instr::Int(I32, IntOp::LeS),
        Operator::I32LeU => Instr::Int(I32, IntOp::LeU),
        Operator::I32GeS => Instr::Int(I32, IntOp::GeS),
        Operator::I32GeU => Instr::Int(I32, IntOp::GeU),
        Operator::I64Eqz => Instr::Int(I64, IntOp::Eqz),
        Operator::I64Eq => Instr::Int(I64, IntOp::Eq),
        Operator::I64Ne => Instr::Int(I64, IntOp::Ne),
        Operator::I64LtS => Instr::Int(I64, IntOp::LtS),
        Operator::I64LtU => Instr::Int(I64, IntOp::LtU),
        Operator::I64GtS => Instr::Int(I64, IntOp::GtS),
        Operator::I64GtU => Instr::Int(I64, IntOp::GtU),
        Operator::I64LeS => Instr::Int(I64, IntOp::LeS),
        Operator::I64LeU => Instr::Int(I64, IntOp::LeU),
        Operator::I64GeS => Instr::Int(I64, IntOp::GeS),
        Operator::I64GeU => Instr::Int(I64, IntOp::GeU),
        Operator::I32Clz => Instr::Int(I32, IntOp::Clz),
        Operator::I32Ctz => Instr::Int(I32, IntOp::Ctz),
        Operator::I32Popcnt => Instr::Int(I32, IntOp::Popcnt),
        Operator::I32Add => Instr::Int(I32, IntOp::Add),
        Operator::I32Sub => Instr::Int(I32, IntOp::Sub),
        Operator::I32Mul => Instr::Int(I32, IntOp::Mul),
        Operator::I32DivS => Instr::Int(I32, IntOp::DivS),
        Operator::I32DivU => Instr::Int(I32, IntOp::DivU),
        Operator::I32RemS => Instr::Int(I32, IntOp::RemS),
        Operator::I32RemU => Instr::Int(I32, IntOp::RemU),
        Operator::I32And => Instr::Int(I32, IntOp::And),
        Operator::I32Or => Instr::Int(I32, IntOp::Or),
        Operator::I32Xor => Instr::Int(I32, IntOp::Xor),
        Operator::I32Shl => Instr::Int(I32, IntOp::Shl),
        Operator::I32ShrS => Instr::Int(I32, IntOp::ShrS),
        Operator::I32ShrU => Instr::Int(I32, IntOp::ShrU),
        Operator::I32Rotl => Instr::Int(I32, IntOp::Rotl),
        Operator::I32Rotr => Instr::Int(I32, IntOp::Rotr),
        Operator::I32Extend8S => Instr::Int(I32, IntOp::Extend8S),
        Operator::I32Extend16S => Instr::Int(I32, IntOp::Extend16S),
        Operator::I64Clz => Instr::Int(I64, IntOp::Clz),
        Operator::I64Ctz => Instr::Int(I64, IntOp::Ctz),
        Operator::I64Popcnt => Instr::Int(I64, IntOp::Popcnt),
        Operator::I64Add => Instr::Int(I64, IntOp::Add),
        Operator::I64Sub => Instr::Int(I64, IntOp::Sub),
        Operator::I64Mul => Instr::Int(I64, IntOp::Mul),
        Operator::I64DivS => Instr::Int(I64, IntOp::DivS),
        Operator::I64DivU => Instr::Int(I64, IntOp::DivU),
        Operator::I64RemS => Instr::Int(I64, IntOp::RemS),
        Operator::I64RemU => Instr::Int(I64, IntOp::RemU),
        Operator::I64And => Instr::Int(I64, IntOp::And),
        Operator::I64Or => Instr::Int(I64, IntOp::Or),
        Operator::I64Xor => Instr::Int(I64, IntOp::Xor),
        Operator::I64Shl => Instr::Int(I64, IntOp::Shl),
        Operator::I64ShrS => Instr::Int(I64, IntOp::ShrS),
        Operator::I64ShrU => Instr::Int(I64, IntOp::ShrU),
        Operator::I64Rotl => Instr::Int(I64, IntOp::Rotl),
        Operator::I64Rotr => Instr::Int(I64, IntOp::Rotr),
        Operator::I64Extend8S => Instr::Int(I64, IntOp::Extend8S),
        Operator::I64Extend16S => Instr::Int(I64, IntOp::Extend16S),
        Operator::I64Extend32S => Instr::Int(I64, IntOp::Extend32S),

        Operator::F32Eq => Instr::Float(F32, FloatOp::Eq),
        Operator::F32Ne => Instr::Float(F32, FloatOp::Ne),
        Operator::F32Lt => Instr::Float(F32, FloatOp::Lt),
        Operator::F32Gt => Instr::Float(F32, FloatOp::Gt),
        Operator::F32Le => Instr::Float(F32, FloatOp::Le),
        Operator::F32Ge => Instr::Float(F32, FloatOp::Ge),
        Operator::F64Eq => Instr::Float(F64, FloatOp::Eq),
        Operator::F64Ne => Instr::Float(F64, FloatOp::Ne),
        Operator::F64Lt => Instr::Float(F64, FloatOp::Lt),
        Operator::F64Gt => Instr::Float(F64, FloatOp::Gt),
        Operator::F64Le => Instr::Float(F64, FloatOp::Le),
        Operator::F64Ge => Instr::Float(F64, FloatOp::Ge),
        Operator::F32Abs => Instr::Float(F32, FloatOp::Abs),
        Operator::F32Neg => Instr::Float(F32, FloatOp::Neg),
        Operator::F32Ceil => Instr::Float(F32, FloatOp::Ceil),
        Operator::F32Floor => Instr::Float(F32, FloatOp::Floor),
        Operator::F32Trunc => Instr::Float(F32, FloatOp::Trunc),
        Operator::F32Nearest => Instr::Float(F32, FloatOp::Nearest),
        Operator::F32Sqrt => Instr::Float(F32, FloatOp::Sqrt),
        Operator::F32Add => Instr::Float(F32, FloatOp::Add),
        Operator::F32Sub => Instr::Float(F32, FloatOp::Sub),
        Operator::F32Mul => Instr::Float(F32, FloatOp::Mul),
        Operator::F32Div => Instr::Float(F32, FloatOp::Div),
        Operator::F32Min => Instr::Float(F32, FloatOp::Min),
        Operator::F32Max => Instr::Float(F32, FloatOp::Max),
        Operator::F32Copysign => Instr::Float(F32, FloatOp::Copysign),
        Operator::F64Abs => Instr::Float(F64, FloatOp::Abs),
        Operator::F64Neg => Instr::Float(F64, FloatOp::Neg),
        Operator::F64Ceil => Instr::Float(F64, FloatOp::Ceil),
        Operator::F64Floor => Instr::Float(F64, FloatOp::Floor),
        Operator::F64Trunc => Instr::Float(F64, FloatOp::Trunc),
        Operator::F64Nearest => Instr::Float(F64, FloatOp::Nearest),
        Operator::F64Sqrt => Instr::Float(F64, FloatOp::Sqrt),
        Operator::F64Add => Instr::Float(F64, FloatOp::Add),
        Operator::F64Sub => Instr::Float(F64, FloatOp::Sub),
        Operator::F64Mul => Instr::Float(F64, FloatOp::Mul),
        Operator::F64Div => Instr::Float(F64, FloatOp::Div),
        Operator::F64Min => Instr::Float(F64, FloatOp::Min),
        Operator::F64Max => Instr::Float(F64, FloatOp::Max),
        Operator::F64Copysign => Instr::Float(F64, FloatOp::Copysign),

        Operator::I32WrapI64 => Instr::Conv(Conv::Wrap),
        Operator::I64ExtendI32S => Instr::Conv(Conv::ExtendS),
        Operator::I64ExtendI32U => Instr::Conv(Conv::ExtendU),
        Operator::I32TruncF32S => trunc(F32, I32, true, false),
        Operator::I32TruncF32U => trunc(F32, I32, false, false),
        Operator::I32TruncF64S => trunc(F64, I32, true, false),
        Operator::I32TruncF64U => trunc(F64, I32, false, false),
        Operator::I64TruncF32S => trunc(F32, I64, true, false),
        Operator::I64TruncF32U => trunc(F32, I64, false, false),
        Operator::I64TruncF64S => trunc(F64, I64, true, false),
        Operator::I64TruncF64U => trunc(F64, I64, false, false),
        Operator::I32TruncSatF32S => trunc(F32, I32, true, true),
        Operator::I32TruncSatF32U => trunc(F32, I32, false, true),
        Operator::I32TruncSatF64S => trunc(F64, I32, true, true),
        Operator::I32TruncSatF64U => trunc(F64, I32, false, true),
        Operator::I64TruncSatF32S => trunc(F32, I64, true, true),
        Operator::I64TruncSatF32U => trunc(F32, I64, false, true),
        Operator::I64TruncSatF64S => trunc(F64, I64, true, true),
        Operator::I64TruncSatF64U => trunc(F64, I64, false, true),
        Operator::F32ConvertI32S => convert(I32, F32, true),
        Operator::F32ConvertI32U => convert(I32, F32, false),
        Operator::F32ConvertI64S => convert(I64, F32, true),
        Operator::F32ConvertI64U => convert(I64, F32, false),
        Operator::F64ConvertI32S => convert(I32, F64, true),
        Operator::F64ConvertI32U => convert(I32, F64, false),
        Operator::F64ConvertI64S => convert(I64, F64, true),
        Operator::F64ConvertI64U => convert(I64, F64, false),
        Operator::F32DemoteF64 => Instr::Conv(Conv::Demote),
        Operator::F64PromoteF32 => Instr::Conv(Conv::Promote),
        Operator::I32ReinterpretF32 => Instr::Conv(Conv::Reinterpret { to: I32 }),
        Operator::I64ReinterpretF64 => Instr::Conv(Conv::Reinterpret { to: I64 }),
        Operator::F32ReinterpretI32 => Instr::Conv(Conv::Reinterpret { to: F32 }),
        Operator::F64ReinterpretI64 => Instr::Conv(Conv::Reinterpret { to: F64 }),
        other => return Err(Error::Unsupported(format!("operator {other:?}"))),
    })
}

fn trunc(from: Ty, to: Ty, signed: bool, sat: bool) -> Instr {
    Instr::Conv(Conv::Trunc { from, to, signed, sat })
}

fn convert(from: Ty, to: Ty, signed: bool) -> Instr {
    Instr::Conv(Conv::Convert { from, to, signed })
}
