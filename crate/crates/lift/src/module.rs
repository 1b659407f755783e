use wasmparser::{
    ConstExpr, DataKind, ElementItems, ElementKind, ExternalKind, FunctionBody,
    Operator, OperatorsReader, Parser, Payload, TypeRef, ValType,
};

use crate::LiftError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuncType {
    pub params: Vec<ValType>,
    pub results: Vec<ValType>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportKind {
    Func,
    Memory,
    Global,
    Table,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Export {
    pub name: String,
    pub kind: ExportKind,
    pub index: u32,
}

#[derive(Debug, Clone)]
pub struct Global {
    pub ty: ValType,
    pub init: ConstVal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstVal {
    I32(i32),
    I64(i64),
    F32(u32),
    F64(u64),
}

#[derive(Debug, Clone)]
pub struct Segment {
    pub offset: u32,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct ElemSegment {
    pub offset: u32,
    pub funcs: Vec<u32>,
}

pub struct Body<'a> {
    pub locals: Vec<ValType>,
    pub ops: OperatorsReader<'a>,
}

pub struct ModuleInfo<'a> {
    pub types: Vec<FuncType>,
    pub func_types: Vec<u32>,
    pub bodies: Vec<Body<'a>>,
    pub memory: Option<(u64, Option<u64>)>,
    pub table: Option<(u64, Option<u64>)>,
    pub globals: Vec<Global>,
    pub exports: Vec<Export>,
    pub start: Option<u32>,
    pub data: Vec<Segment>,
    pub elems: Vec<ElemSegment>,
}

impl<'a> ModuleInfo<'a> {
    pub fn parse(wasm: &'a [u8]) -> Result<Self, LiftError> {
        let mut m = ModuleInfo {
            types: Vec::new(),
            func_types: Vec::new(),
            bodies: Vec::new(),
            memory: None,
            table: None,
            globals: Vec::new(),
            exports: Vec::new(),
            start: None,
            data: Vec::new(),
            elems: Vec::new(),
        };
        for payload in Parser::new(0).parse_all(wasm) {
            match payload? {
                Payload::TypeSection(r) => {
                    for ty in r.into_iter_err_on_gc_types() {
                        let ty = ty?;
                        m.types.push(FuncType {
                            params: ty.params().to_vec(),
                            results: ty.results().to_vec(),
                        });
                    }
                }
                Payload::ImportSection(r) => {
                    // Lifted modules are closed; any import is refused.
                    if let Some(imp) = r.into_imports().next() {
                        let imp = imp?;
                        let what = match imp.ty {
                            TypeRef::Func(_) | TypeRef::FuncExact(_) => "function",
                            TypeRef::Memory(_) => "memory",
                            TypeRef::Table(_) => "table",
                            TypeRef::Global(_) => "global",
                            _ => "entity",
                        };
                        return Err(LiftError::Unsupported(format!(
                            "imported {what} `{}.{}`",
                            imp.module, imp.name
                        )));
                    }
                }
                Payload::FunctionSection(r) => {
                    for f in r {
                        m.func_types.push(f?);
                    }
                }
                Payload::TableSection(r) => {
                    for t in r {
                        let t = t?;
                        if m.table.is_some() {
                            return Err(LiftError::Unsupported("multiple tables".into()));
                        }
                        if !t.ty.element_type.is_func_ref() {
                            return Err(LiftError::Unsupported("non-funcref table".into()));
                        }
                        m.table = Some((t.ty.initial, t.ty.maximum));
                    }
                }
                Payload::MemorySection(r) => {
                    for mem in r {
                        let mem = mem?;
                        if m.memory.is_some() {
                            return Err(LiftError::Unsupported("multiple memories".into()));
                        }
                        if mem.memory64 || mem.shared {
                            return Err(LiftError::Unsupported("64-bit or shared memory".into()));
                        }
                        m.memory = Some((mem.initial, mem.maximum));
                    }
                }
                Payload::GlobalSection(r) => {
                    for g in r {
                        let g = g?;
                        let init = const_val(&g.init_expr, &m.globals)?;
                        m.globals.push(Global {
                            ty: g.ty.content_type,
                            init,
                        });
                    }
                }
                Payload::ExportSection(r) => {
                    for e in r {
                        let e = e?;
                        let kind = match e.kind {
                            ExternalKind::Func | ExternalKind::FuncExact => ExportKind::Func,
                            ExternalKind::Memory => ExportKind::Memory,
                            ExternalKind::Global => ExportKind::Global,
                            ExternalKind::Table => ExportKind::Table,
                            _ => continue,
                        };
                        m.exports.push(Export {
                            name: e.name.to_string(),
                            kind,
                            index: e.index,
                        });
                    }
                }
                Payload::StartSection { func, .. } => m.start = Some(func),
                Payload::ElementSection(r) => {
                    for el in r {
                        let el = el?;
                        let ElementKind::Active {
                            table_index,
                            offset_expr,
                        } = el.kind
                        else {
                            continue;
                        };
                        if table_index.unwrap_or(0) != 0 {
                            return Err(LiftError::Unsupported("multiple tables".into()));
                        }
                        let offset = const_offset(&offset_expr, &m.globals)?;
                        let mut funcs = Vec::new();
                        match el.items {
                            ElementItems::Functions(fs) => {
                                for f in fs {
                                    funcs.push(f?);
                                }
                            }
                            ElementItems::Expressions(_, es) => {
                                for e in es {
                                    let e = e?;
                                    let mut ops = e.get_operators_reader();
                                    match ops.read()? {
                                        Operator::RefFunc { function_index } => {
                                            funcs.push(function_index)
                                        }
                                        _ => {
                                            return Err(LiftError::Unsupported(
                                                "non-function element expression".into(),
                                            ))
                                        }
                                    }
                                }
                            }
                        }
                        m.elems.push(ElemSegment { offset, funcs });
                    }
                }
                Payload::DataSection(r) => {
                    for d in r {
                        let d = d?;
                        let DataKind::Active {
                            memory_index,
                            offset_expr,
                        } = d.kind
                        else {
                            return Err(LiftError::Unsupported("passive data segment".into()));
                        };
                        if memory_index != 0 {
                            return Err(LiftError::Unsupported("multiple memories".into()));
                        }
                        let offset = const_offset(&offset_expr, &m.globals)?;
                        m.data.push(Segment {
                            offset,
                            bytes: d.data.to_vec(),
                        });
                    }
                }
                Payload::CodeSectionEntry(body) => m.bodies.push(read_body(body)?),
                _ => {}
            }
        }
        Ok(m)
    }

    pub fn func_type(&self, func: u32) -> &FuncType {
        &self.types[self.func_types[func as usize] as usize]
    }
}

fn read_body(body: FunctionBody<'_>) -> Result<Body<'_>, LiftError> {
    let mut locals = Vec::new();
    for l in body.get_locals_reader()? {
        let (n, ty) = l?;
        for _ in 0..n {
            locals.push(ty);
        }
    }
    let ops = body.get_operators_reader()?;
    Ok(Body { locals, ops })
}

fn const_val(expr: &ConstExpr<'_>, globals: &[Global]) -> Result<ConstVal, LiftError> {
    let mut ops = expr.get_operators_reader();
    let v = match ops.read()? {
        Operator::I32Const { value } => ConstVal::I32(value),
        Operator::I64Const { value } => ConstVal::I64(value),
        Operator::F32Const { value } => ConstVal::F32(value.bits()),
        Operator::F64Const { value } => ConstVal::F64(value.bits()),
        Operator::GlobalGet { global_index } => globals
            .get(global_index as usize)
            .map(|g| g.init)
            .ok_or_else(|| LiftError::Invalid("global index out of range".into()))?,
        other => {
            return Err(LiftError::Unsupported(format!(
                "constant expression {other:?}"
            )))
        }
    };
    match ops.read()? {
        Operator::End => Ok(v),
        _ => Err(LiftError::Unsupported("extended constant expression".into())),
    }
}

fn const_offset(expr: &ConstExpr<'_>, globals: &[Global]) -> Result<u32, LiftError> {
    match const_val(expr, globals)? {
        ConstVal::I32(v) => Ok(v as u32),
        _ => Err(LiftError::Invalid("segment offset is not i32".into())),
    }
}
