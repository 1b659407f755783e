// Runtime support embedded verbatim at the top of every lifted module.
//
// Everything here must stay safe and free of external dependencies: the
// lifted text is compiled stand-alone, both natively and for wasm32.

/// A WebAssembly value tagged with its type.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum TaggedVal {
    Undefined,
    I32(i32),
    I64(i64),
    F32(f32),
    F64(f64),
}

impl TaggedVal {
    #[inline(always)]
    pub fn try_as_i32(self) -> Option<i32> {
        match self {
            TaggedVal::I32(v) => Some(v),
            _ => None,
        }
    }

    #[inline(always)]
    pub fn try_as_i64(self) -> Option<i64> {
        match self {
            TaggedVal::I64(v) => Some(v),
            _ => None,
        }
    }

    #[inline(always)]
    pub fn try_as_f32(self) -> Option<f32> {
        match self {
            TaggedVal::F32(v) => Some(v),
            _ => None,
        }
    }

    #[inline(always)]
    pub fn try_as_f64(self) -> Option<f64> {
        match self {
            TaggedVal::F64(v) => Some(v),
            _ => None,
        }
    }
}

impl From<i32> for TaggedVal {
    #[inline(always)]
    fn from(v: i32) -> Self {
        TaggedVal::I32(v)
    }
}

impl From<i64> for TaggedVal {
    #[inline(always)]
    fn from(v: i64) -> Self {
        TaggedVal::I64(v)
    }
}

impl From<f32> for TaggedVal {
    #[inline(always)]
    fn from(v: f32) -> Self {
        TaggedVal::F32(v)
    }
}

impl From<f64> for TaggedVal {
    #[inline(always)]
    fn from(v: f64) -> Self {
        TaggedVal::F64(v)
    }
}

pub const PAGE_SIZE: usize = 65536;

#[inline(always)]
fn effective_range(len: usize, addr: i32, offset: u32, width: usize) -> Option<core::ops::Range<usize>> {
    let start = (addr as u32 as u64).checked_add(offset as u64)?;
    let start = usize::try_from(start).ok()?;
    let end = start.checked_add(width)?;
    if end > len {
        return None;
    }
    Some(start..end)
}

#[inline(always)]
pub fn mem_read<const N: usize>(mem: &[u8], addr: i32, offset: u32) -> Option<[u8; N]> {
    let range = effective_range(mem.len(), addr, offset, N)?;
    let mut out = [0u8; N];
    out.copy_from_slice(&mem[range]);
    Some(out)
}

#[inline(always)]
pub fn mem_write<const N: usize>(mem: &mut [u8], addr: i32, offset: u32, bytes: [u8; N]) -> Option<()> {
    let range = effective_range(mem.len(), addr, offset, N)?;
    mem[range].copy_from_slice(&bytes);
    Some(())
}

pub fn mem_grow(mem: &mut Vec<u8>, max_pages: usize, delta: i32) -> i32 {
    let old = mem.len() / PAGE_SIZE;
    let delta = delta as u32 as usize;
    match old.checked_add(delta) {
        Some(new) if new <= max_pages => {
            mem.resize(new * PAGE_SIZE, 0);
            old as i32
        }
        _ => -1,
    }
}

pub fn mem_fill(mem: &mut [u8], dst: i32, val: i32, len: i32) -> Option<()> {
    let range = effective_range(mem.len(), dst, 0, len as u32 as usize)?;
    mem[range].fill(val as u8);
    Some(())
}

pub fn mem_copy(mem: &mut [u8], dst: i32, src: i32, len: i32) -> Option<()> {
    let n = len as u32 as usize;
    let to = effective_range(mem.len(), dst, 0, n)?;
    let from = effective_range(mem.len(), src, 0, n)?;
    mem.copy_within(from, to.start);
    Some(())
}

#[inline(always)]
pub fn i32_div_s(a: i32, b: i32) -> Option<i32> {
    a.checked_div(b)
}

#[inline(always)]
pub fn i32_div_u(a: i32, b: i32) -> Option<i32> {
    (a as u32).checked_div(b as u32).map(|v| v as i32)
}

#[inline(always)]
pub fn i32_rem_s(a: i32, b: i32) -> Option<i32> {
    if b == 0 {
        None
    } else {
        Some(a.wrapping_rem(b))
    }
}

#[inline(always)]
pub fn i32_rem_u(a: i32, b: i32) -> Option<i32> {
    (a as u32).checked_rem(b as u32).map(|v| v as i32)
}

#[inline(always)]
pub fn i64_div_s(a: i64, b: i64) -> Option<i64> {
    a.checked_div(b)
}

#[inline(always)]
pub fn i64_div_u(a: i64, b: i64) -> Option<i64> {
    (a as u64).checked_div(b as u64).map(|v| v as i64)
}

#[inline(always)]
pub fn i64_rem_s(a: i64, b: i64) -> Option<i64> {
    if b == 0 {
        None
    } else {
        Some(a.wrapping_rem(b))
    }
}

#[inline(always)]
pub fn i64_rem_u(a: i64, b: i64) -> Option<i64> {
    (a as u64).checked_rem(b as u64).map(|v| v as i64)
}

pub fn f32_min(a: f32, b: f32) -> f32 {
    if a.is_nan() || b.is_nan() {
        f32::NAN
    } else if a == 0.0 && b == 0.0 {
        if a.is_sign_negative() { a } else { b }
    } else {
        a.min(b)
    }
}

pub fn f32_max(a: f32, b: f32) -> f32 {
    if a.is_nan() || b.is_nan() {
        f32::NAN
    } else if a == 0.0 && b == 0.0 {
        if a.is_sign_positive() { a } else { b }
    } else {
        a.max(b)
    }
}

pub fn f64_min(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else if a == 0.0 && b == 0.0 {
        if a.is_sign_negative() { a } else { b }
    } else {
        a.min(b)
    }
}

pub fn f64_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else if a == 0.0 && b == 0.0 {
        if a.is_sign_positive() { a } else { b }
    } else {
        a.max(b)
    }
}

pub fn f32_nearest(a: f32) -> f32 {
    let r = a.round();
    if (a - a.trunc()).abs() == 0.5 && r % 2.0 != 0.0 {
        (r - a.signum()).copysign(a)
    } else {
        r
    }
}

pub fn f64_nearest(a: f64) -> f64 {
    let r = a.round();
    if (a - a.trunc()).abs() == 0.5 && r % 2.0 != 0.0 {
        (r - a.signum()).copysign(a)
    } else {
        r
    }
}

// Trapping float-to-int truncations: the truncated value must be
// representable in the target type, otherwise the module traps.
macro_rules! trunc_checked {
    ($name:ident, $from:ty, $to:ty, $lo:expr, $hi:expr) => {
        pub fn $name(a: $from) -> Option<$to> {
            if a.is_nan() {
                return None;
            }
            let t = a.trunc();
            if !($lo..$hi).contains(&t) {
                return None;
            }
            Some(t as $to)
        }
    };
}

trunc_checked!(i32_trunc_f32_s, f32, i32, -2147483648.0f32, 2147483648.0f32);
trunc_checked!(i32_trunc_f32_u, f32, u32, 0.0f32, 4294967296.0f32);
trunc_checked!(i32_trunc_f64_s, f64, i32, -2147483648.0f64, 2147483648.0f64);
trunc_checked!(i32_trunc_f64_u, f64, u32, 0.0f64, 4294967296.0f64);
trunc_checked!(i64_trunc_f32_s, f32, i64, -9223372036854775808.0f32, 9223372036854775808.0f32);
trunc_checked!(i64_trunc_f32_u, f32, u64, 0.0f32, 18446744073709551616.0f32);
trunc_checked!(i64_trunc_f64_s, f64, i64, -9223372036854775808.0f64, 9223372036854775808.0f64);
trunc_checked!(i64_trunc_f64_u, f64, u64, 0.0f64, 18446744073709551616.0f64);
