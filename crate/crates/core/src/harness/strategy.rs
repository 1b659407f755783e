//! Input strategies: how each harness argument is drawn from integer
//! carriers, and which range assumptions constrain it.
//!
//! Every draw carries a tag `slot * 65536 + offset`. Offsets are assigned
//! statically in traversal order, so composite values always consume the
//! same tags regardless of the lengths or variants drawn.

use serde::{Deserialize, Serialize};

use super::signature::{Fields, FnSignature, Scalar, TypeDesc};
use crate::error::{Error, Result};

pub const TAG_STRIDE: i64 = 65536;
/// Capacity of strings and vectors whose entry call gave no sample.
pub const DEFAULT_CAPACITY: usize = 4;
/// Characters are drawn from this range.
pub const ASCII_MAX: i128 = 127;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    /// One draw in `[min, max]`, converted to `scalar`.
    Int { scalar: Scalar, min: i128, max: i128 },
    /// Length in `[0, capacity]`, then `capacity` ASCII characters.
    Str { capacity: usize },
    /// Length in `[0, capacity]`, then `capacity` elements.
    Vec { elem: Box<Strategy>, capacity: usize },
    Struct { name: String, fields: FieldStrategies },
    /// Variant index, then the fields of every variant.
    Enum { name: String, variants: Vec<(String, FieldStrategies)> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldStrategies {
    Unit,
    Tuple(Vec<Strategy>),
    Named(Vec<(String, Strategy)>),
}

impl FieldStrategies {
    pub fn all(&self) -> Vec<&Strategy> {
        match self {
            FieldStrategies::Unit => Vec::new(),
            FieldStrategies::Tuple(t) => t.iter().collect(),
            FieldStrategies::Named(n) => n.iter().map(|(_, s)| s).collect(),
        }
    }

    fn size(&self) -> usize {
        self.all().iter().map(|s| s.size()).sum()
    }
}

impl Strategy {
    /// Number of tags consumed.
    pub fn size(&self) -> usize {
        match self {
            Strategy::Int { .. } => 1,
            Strategy::Str { capacity } => 1 + capacity,
            Strategy::Vec { elem, capacity } => 1 + capacity * elem.size(),
            Strategy::Struct { fields, .. } => fields.size(),
            Strategy::Enum { variants, .. } => 1 + variants.iter().map(|(_, f)| f.size()).sum::<usize>(),
        }
    }

    /// Carrier range for a scalar type.
    pub fn scalar(scalar: Scalar) -> Strategy {
        let (min, max): (i128, i128) = match scalar {
            Scalar::I8 => (i8::MIN.into(), i8::MAX.into()),
            Scalar::I16 => (i16::MIN.into(), i16::MAX.into()),
            Scalar::I32 | Scalar::Isize => (i32::MIN.into(), i32::MAX.into()),
            Scalar::I64 => (i64::MIN.into(), i64::MAX.into()),
            Scalar::U8 => (0, u8::MAX.into()),
            Scalar::U16 => (0, u16::MAX.into()),
            Scalar::U32 | Scalar::Usize => (0, u32::MAX.into()),
            Scalar::U64 => (0, u64::MAX.into()),
            Scalar::Bool => (0, 1),
            Scalar::Char => (0, ASCII_MAX),
        };
        Strategy::Int { scalar, min, max }
    }
}

/// Width of the integer a range is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Carrier {
    I32,
    I64,
    /// Unsigned 64-bit values reinterpreted from a 64-bit draw.
    U64,
}

pub fn carrier(min: i128, max: i128) -> Carrier {
    if min >= i32::MIN as i128 && max <= i32::MAX as i128 {
        Carrier::I32
    } else if min >= i64::MIN as i128 && max <= i64::MAX as i128 {
        Carrier::I64
    } else {
        Carrier::U64
    }
}

/// Whether a range needs an assumption on top of its carrier.
pub fn needs_assumption(min: i128, max: i128) -> bool {
    match carrier(min, max) {
        Carrier::I32 => (min, max) != (i32::MIN as i128, i32::MAX as i128),
        Carrier::I64 => (min, max) != (i64::MIN as i128, i64::MAX as i128),
        Carrier::U64 => false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotStrategy {
    pub ty: TypeDesc,
    pub strategy: Strategy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputStrategy {
    pub slots: Vec<SlotStrategy>,
    /// Human-readable constraints placed on the draws.
    pub assumptions: Vec<String>,
}

impl InputStrategy {
    pub fn tag_base(slot: usize) -> i64 {
        slot as i64 * TAG_STRIDE
    }
}

/// Derive draw strategies for every parameter of `sig`. `sample_lengths`
/// sizes strings and vectors per parameter.
pub fn derive_input_strategy(sig: &FnSignature, sample_lengths: &[Option<usize>]) -> Result<InputStrategy> {
    let mut slots = Vec::new();
    let mut assumptions = Vec::new();
    for (i, p) in sig.params.iter().enumerate() {
        let cap = sample_lengths.get(i).copied().flatten().unwrap_or(DEFAULT_CAPACITY);
        let strategy = strategy_for(&p.ty, cap)?;
        if strategy.size() as i64 >= TAG_STRIDE {
            return Err(Error::UnsupportedType(format!("parameter `{}` needs too many draws", p.name)));
        }
        describe_assumptions(&p.name, &strategy, &mut assumptions);
        slots.push(SlotStrategy {
            ty: p.ty.clone(),
            strategy,
        });
    }
    Ok(InputStrategy { slots, assumptions })
}

fn strategy_for(ty: &TypeDesc, cap: usize) -> Result<Strategy> {
    Ok(match ty {
        TypeDesc::Unit => return Err(Error::UnsupportedType("unit parameter".into())),
        TypeDesc::Scalar(s) => Strategy::scalar(*s),
        TypeDesc::Str => Strategy::Str { capacity: cap },
        TypeDesc::Vec(e) => Strategy::Vec {
            elem: Box::new(strategy_for(e, DEFAULT_CAPACITY)?),
            capacity: cap,
        },
        TypeDesc::Struct { name, fields } => Strategy::Struct {
            name: name.clone(),
            fields: field_strategies(fields)?,
        },
        TypeDesc::Enum { name, variants } => Strategy::Enum {
            name: name.clone(),
            variants: variants
                .iter()
                .map(|(v, f)| field_strategies(f).map(|f| (v.clone(), f)))
                .collect::<Result<_>>()?,
        },
    })
}

fn field_strategies(f: &Fields) -> Result<FieldStrategies> {
    Ok(match f {
        Fields::Unit => FieldStrategies::Unit,
        Fields::Tuple(t) => FieldStrategies::Tuple(
            t.iter()
                .map(|t| strategy_for(t, DEFAULT_CAPACITY))
                .collect::<Result<_>>()?,
        ),
        Fields::Named(n) => FieldStrategies::Named(
            n.iter()
                .map(|(k, t)| strategy_for(t, DEFAULT_CAPACITY).map(|s| (k.clone(), s)))
                .collect::<Result<_>>()?,
        ),
    })
}

fn describe_assumptions(path: &str, s: &Strategy, out: &mut Vec<String>) {
    match s {
        Strategy::Int { min, max, .. } => {
            if needs_assumption(*min, *max) {
                out.push(format!("{path} in [{min}, {max}]"));
            }
        }
        Strategy::Str { capacity } => {
            out.push(format!("{path}.len() <= {capacity}"));
            out.push(format!("{path} is ASCII"));
        }
        Strategy::Vec { elem, capacity } => {
            out.push(format!("{path}.len() <= {capacity}"));
            describe_assumptions(&format!("{path}[_]"), elem, out);
        }
        Strategy::Struct { fields, .. } => {
            for (k, f) in field_paths(path, fields) {
                describe_assumptions(&k, f, out);
            }
        }
        Strategy::Enum { variants, .. } => {
            for (v, fields) in variants {
                for (k, f) in field_paths(&format!("{path}::{v}"), fields) {
                    describe_assumptions(&k, f, out);
                }
            }
        }
    }
}

fn field_paths<'a>(path: &str, f: &'a FieldStrategies) -> Vec<(String, &'a Strategy)> {
    match f {
        FieldStrategies::Unit => Vec::new(),
        FieldStrategies::Tuple(t) => t.iter().enumerate().map(|(i, s)| (format!("{path}.{i}"), s)).collect(),
        FieldStrategies::Named(n) => n.iter().map(|(k, s)| (format!("{path}.{k}"), s)).collect(),
    }
}
