//! Function signatures of candidate code, as far as harnesses need them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scalar {
    I8,
    I16,
    I32,
    I64,
    Isize,
    U8,
    U16,
    U32,
    U64,
    Usize,
    Bool,
    Char,
}

impl Scalar {
    pub fn parse(name: &str) -> Option<Scalar> {
        Some(match name {
            "i8" => Scalar::I8,
            "i16" => Scalar::I16,
            "i32" => Scalar::I32,
            "i64" => Scalar::I64,
            "isize" => Scalar::Isize,
            "u8" => Scalar::U8,
            "u16" => Scalar::U16,
            "u32" => Scalar::U32,
            "u64" => Scalar::U64,
            "usize" => Scalar::Usize,
            "bool" => Scalar::Bool,
            "char" => Scalar::Char,
            _ => return None,
        })
    }

    pub fn rust(self) -> &'static str {
        match self {
            Scalar::I8 => "i8",
            Scalar::I16 => "i16",
            Scalar::I32 => "i32",
            Scalar::I64 => "i64",
            Scalar::Isize => "isize",
            Scalar::U8 => "u8",
            Scalar::U16 => "u16",
            Scalar::U32 => "u32",
            Scalar::U64 => "u64",
            Scalar::Usize => "usize",
            Scalar::Bool => "bool",
            Scalar::Char => "char",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fields {
    Unit,
    Tuple(Vec<TypeDesc>),
    Named(Vec<(String, TypeDesc)>),
}

impl Fields {
    pub fn types(&self) -> Vec<&TypeDesc> {
        match self {
            Fields::Unit => Vec::new(),
            Fields::Tuple(t) => t.iter().collect(),
            Fields::Named(n) => n.iter().map(|(_, t)| t).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TypeDesc {
    Unit,
    Scalar(Scalar),
    Str,
    Vec(Box<TypeDesc>),
    Struct { name: String, fields: Fields },
    Enum { name: String, variants: Vec<(String, Fields)> },
}

impl TypeDesc {
    /// Rust spelling, with user types qualified by `prefix`.
    pub fn rust(&self, prefix: &str) -> String {
        match self {
            TypeDesc::Unit => "()".into(),
            TypeDesc::Scalar(s) => s.rust().into(),
            TypeDesc::Str => "String".into(),
            TypeDesc::Vec(e) => format!("Vec<{}>", e.rust(prefix)),
            TypeDesc::Struct { name, .. } | TypeDesc::Enum { name, .. } => format!("{prefix}{name}"),
        }
    }

    pub fn is_user_type(&self) -> bool {
        match self {
            TypeDesc::Struct { .. } | TypeDesc::Enum { .. } => true,
            TypeDesc::Vec(e) => e.is_user_type(),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Passing {
    Value,
    Ref,
    RefMut,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub ty: TypeDesc,
    pub passing: Passing,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FnSignature {
    pub name: String,
    pub params: Vec<Param>,
    pub ret: TypeDesc,
}

/// Signature of the free function `name` in `source`.
pub fn parse_signature(source: &str, name: &str) -> Result<FnSignature> {
    let file = syn::parse_file(source).map_err(|e| Error::UnsupportedType(format!("candidate does not parse: {e}")))?;
    let items = &file.items;
    let f = items
        .iter()
        .find_map(|i| match i {
            syn::Item::Fn(f) if f.sig.ident == name => Some(f),
            _ => None,
        })
        .ok_or_else(|| Error::UnsupportedType(format!("no function named `{name}`")))?;
    if !f.sig.generics.params.is_empty() && f.sig.generics.type_params().next().is_some() {
        return Err(Error::UnsupportedType("generic functions".into()));
    }
    let mut params = Vec::new();
    for (i, input) in f.sig.inputs.iter().enumerate() {
        let syn::FnArg::Typed(pt) = input else {
            return Err(Error::UnsupportedType("methods".into()));
        };
        let pname = match &*pt.pat {
            syn::Pat::Ident(id) => id.ident.to_string(),
            _ => format!("arg{i}"),
        };
        let (ty, passing) = match &*pt.ty {
            syn::Type::Reference(r) => {
                let passing = if r.mutability.is_some() {
                    Passing::RefMut
                } else {
                    Passing::Ref
                };
                (describe(&r.elem, items, 0)?, passing)
            }
            other => (describe(other, items, 0)?, Passing::Value),
        };
        params.push(Param {
            name: pname,
            ty,
            passing,
        });
    }
    let ret = match &f.sig.output {
        syn::ReturnType::Default => TypeDesc::Unit,
        syn::ReturnType::Type(_, t) => describe(t, items, 0)?,
    };
    Ok(FnSignature {
        name: name.to_string(),
        params,
        ret,
    })
}

fn unsupported(t: &syn::Type) -> Error {
    Error::UnsupportedType(type_name(t))
}

/// Short type name for error messages.
fn type_name(t: &syn::Type) -> String {
    match t {
        syn::Type::Path(p) => p
            .path
            .segments
            .iter()
            .map(|s| s.ident.to_string())
            .collect::<Vec<_>>()
            .join("::"),
        syn::Type::Reference(r) => format!("&{}", type_name(&r.elem)),
        syn::Type::Slice(s) => format!("[{}]", type_name(&s.elem)),
        syn::Type::Array(a) => format!("[{}; _]", type_name(&a.elem)),
        syn::Type::Tuple(t) => format!("tuple of {}", t.elems.len()),
        syn::Type::Ptr(_) => "raw pointer".into(),
        _ => "type".into(),
    }
}

fn describe(t: &syn::Type, items: &[syn::Item], depth: usize) -> Result<TypeDesc> {
    if depth > 8 {
        return Err(Error::UnsupportedType("recursive type".into()));
    }
    match t {
        syn::Type::Tuple(tt) if tt.elems.is_empty() => Ok(TypeDesc::Unit),
        syn::Type::Paren(p) => describe(&p.elem, items, depth),
        syn::Type::Slice(s) => Ok(TypeDesc::Vec(Box::new(describe(&s.elem, items, depth + 1)?))),
        syn::Type::Path(p) if p.qself.is_none() => {
            let last = p.path.segments.last().ok_or_else(|| unsupported(t))?;
            let ident = last.ident.to_string();
            if let Some(s) = Scalar::parse(&ident) {
                return Ok(TypeDesc::Scalar(s));
            }
            match ident.as_str() {
                "String" | "str" => return Ok(TypeDesc::Str),
                "Vec" => {
                    if let syn::PathArguments::AngleBracketed(a) = &last.arguments {
                        if let Some(syn::GenericArgument::Type(inner)) = a.args.first() {
                            return Ok(TypeDesc::Vec(Box::new(describe(inner, items, depth + 1)?)));
                        }
                    }
                    return Err(unsupported(t));
                }
                _ => {}
            }
            user_type(&ident, items, depth).ok_or_else(|| unsupported(t))?
        }
        _ => Err(unsupported(t)),
    }
}

fn user_type(name: &str, items: &[syn::Item], depth: usize) -> Option<Result<TypeDesc>> {
    for item in items {
        match item {
            syn::Item::Struct(s) if s.ident == name && s.generics.params.is_empty() => {
                return Some(fields(&s.fields, items, depth).map(|fields| TypeDesc::Struct {
                    name: name.to_string(),
                    fields,
                }));
            }
            syn::Item::Enum(e) if e.ident == name && e.generics.params.is_empty() => {
                let variants = e
                    .variants
                    .iter()
                    .map(|v| fields(&v.fields, items, depth).map(|f| (v.ident.to_string(), f)))
                    .collect::<Result<Vec<_>>>();
                return Some(variants.and_then(|variants| {
                    if variants.is_empty() {
                        Err(Error::UnsupportedType(format!("empty enum {name}")))
                    } else {
                        Ok(TypeDesc::Enum {
                            name: name.to_string(),
                            variants,
                        })
                    }
                }));
            }
            _ => {}
        }
    }
    None
}

fn fields(f: &syn::Fields, items: &[syn::Item], depth: usize) -> Result<Fields> {
    Ok(match f {
        syn::Fields::Unit => Fields::Unit,
        syn::Fields::Unnamed(u) => Fields::Tuple(
            u.unnamed
                .iter()
                .map(|f| describe(&f.ty, items, depth + 1))
                .collect::<Result<_>>()?,
        ),
        syn::Fields::Named(n) => Fields::Named(
            n.named
                .iter()
                .map(|f| {
                    let name = f.ident.as_ref().map(|i| i.to_string()).unwrap_or_default();
                    describe(&f.ty, items, depth + 1).map(|t| (name, t))
                })
                .collect::<Result<_>>()?,
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_and_reference_parameters() {
        let s = parse_signature("fn f(a: u32, s: &str, v: &[i64], m: &mut Vec<bool>) -> i32 { 0 }", "f").unwrap();
        assert_eq!(s.params[0].ty, TypeDesc::Scalar(Scalar::U32));
        assert_eq!(s.params[1].ty, TypeDesc::Str);
        assert_eq!(s.params[1].passing, Passing::Ref);
        assert_eq!(s.params[2].ty, TypeDesc::Vec(Box::new(TypeDesc::Scalar(Scalar::I64))));
        assert_eq!(s.params[3].passing, Passing::RefMut);
        assert_eq!(s.ret, TypeDesc::Scalar(Scalar::I32));
    }

    #[test]
    fn user_types_are_expanded() {
        let src = "struct P { x: i32, y: i32 }\nenum Op { Add(P), Neg }\nfn eval(o: Op) -> i32 { 0 }";
        let s = parse_signature(src, "eval").unwrap();
        let TypeDesc::Enum { variants, .. } = &s.params[0].ty else { panic!() };
        assert_eq!(variants.len(), 2);
        assert!(matches!(&variants[0].1, Fields::Tuple(t) if matches!(t[0], TypeDesc::Struct { .. })));
    }

    #[test]
    fn unsupported_types_are_named() {
        let err = parse_signature("fn f(x: f64) -> f64 { x }", "f").unwrap_err();
        assert!(matches!(err, Error::UnsupportedType(ref m) if m == "f64"));
        assert!(parse_signature("fn g() {}", "f").is_err());
    }
}
