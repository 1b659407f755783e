//! Hash-consed bitvector terms.
//!
//! Every term has a width between 1 and 64 bits. Shift amounts are taken
//! modulo the width (WebAssembly semantics), and division by zero follows the
//! restoring-division circuit: `udiv(a, 0) = !0`, `urem(a, 0) = a`, with the
//! signed variants derived from the unsigned ones through absolute values.

use std::collections::HashMap;

pub type TermId = u32;

const NONE: TermId = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Const(u64),
    Var(u32),
    Not,
    Extract { hi: u8, lo: u8 },
    ZExt,
    SExt,
    Add,
    Sub,
    Mul,
    UDiv,
    URem,
    SDiv,
    SRem,
    And,
    Or,
    Xor,
    Shl,
    LShr,
    AShr,
    Eq,
    Ult,
    Slt,
    Concat,
    Ite,
}

impl Op {
    pub fn arity(self) -> usize {
        match self {
            Op::Const(_) | Op::Var(_) => 0,
            Op::Not | Op::Extract { .. } | Op::ZExt | Op::SExt => 1,
            Op::Ite => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Node {
    pub op: Op,
    pub width: u8,
    pub args: [TermId; 3],
}

/// A value that is either concrete or a term reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bv {
    C(u64),
    S(TermId),
}

impl Bv {
    pub fn as_const(self) -> Option<u64> {
        match self {
            Bv::C(v) => Some(v),
            Bv::S(_) => None,
        }
    }
}

#[inline]
pub fn mask(w: u8) -> u64 {
    if w >= 64 {
        u64::MAX
    } else {
        (1u64 << w) - 1
    }
}

#[inline]
pub fn sext(v: u64, w: u8) -> i64 {
    if w >= 64 {
        v as i64
    } else {
        let s = 64 - w as u32;
        ((v << s) as i64) >> s
    }
}

#[inline]
fn sign(v: u64, w: u8) -> bool {
    (v >> (w - 1)) & 1 == 1
}

/// Constant semantics of every operator; shared by folding, evaluation and
/// the concrete fast path of the interpreter.
pub fn fold(op: Op, w: u8, arg_w: u8, a: u64, b: u64, c: u64) -> u64 {
    let m = mask(w);
    let r = match op {
        Op::Const(v) => v,
        Op::Var(_) => unreachable!("variables have no constant value"),
        Op::Not => !a,
        Op::Extract { lo, .. } => a >> lo,
        Op::ZExt => a,
        Op::SExt => sext(a, arg_w) as u64,
        Op::Add => a.wrapping_add(b),
        Op::Sub => a.wrapping_sub(b),
        Op::Mul => a.wrapping_mul(b),
        Op::UDiv => a.checked_div(b).unwrap_or(m),
        Op::URem => {
            if b == 0 {
                a
            } else {
                a % b
            }
        }
        Op::SDiv => {
            let (sa, sb) = (sign(a, w), sign(b, w));
            let ua = if sa { a.wrapping_neg() & m } else { a };
            let ub = if sb { b.wrapping_neg() & m } else { b };
            let q = fold(Op::UDiv, w, w, ua, ub, 0);
            if sa != sb {
                q.wrapping_neg()
            } else {
                q
            }
        }
        Op::SRem => {
            let (sa, sb) = (sign(a, w), sign(b, w));
            let ua = if sa { a.wrapping_neg() & m } else { a };
            let ub = if sb { b.wrapping_neg() & m } else { b };
            let r = fold(Op::URem, w, w, ua, ub, 0);
            if sa {
                r.wrapping_neg()
            } else {
                r
            }
        }
        Op::And => a & b,
        Op::Or => a | b,
        Op::Xor => a ^ b,
        Op::Shl => a << (b % w as u64),
        Op::LShr => a >> (b % w as u64),
        Op::AShr => (sext(a, w) >> (b % w as u64)) as u64,
        Op::Eq => (a == b) as u64,
        Op::Ult => (a < b) as u64,
        Op::Slt => (sext(a, arg_w) < sext(b, arg_w)) as u64,
        Op::Concat => (a << arg_w) | b,
        Op::Ite => {
            if a & 1 == 1 {
                b
            } else {
                c
            }
        }
    };
    r & m
}

#[derive(Default)]
pub struct Pool {
    nodes: Vec<Node>,
    index: HashMap<Node, TermId>,
    next_var: u32,
}

impl Pool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, t: TermId) -> Node {
        self.nodes[t as usize]
    }

    pub fn width(&self, b: Bv, default: u8) -> u8 {
        match b {
            Bv::C(_) => default,
            Bv::S(t) => self.nodes[t as usize].width,
        }
    }

    /// S-expression rendering of a term, for diagnostics.
    pub fn render(&self, t: TermId) -> String {
        let n = self.nodes[t as usize];
        let args: Vec<String> = n.args[..n.op.arity()].iter().map(|&a| self.render(a)).collect();
        match n.op {
            Op::Const(v) => format!("{v:#x}"),
            Op::Var(v) => format!("v{v}"),
            Op::Extract { hi, lo } => format!("(extract[{hi}:{lo}] {})", args[0]),
            op => format!("({op:?}/{} {})", n.width, args.join(" ")),
        }
    }

    fn intern(&mut self, node: Node) -> TermId {
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let id = self.nodes.len() as TermId;
        self.nodes.push(node);
        self.index.insert(node, id);
        id
    }

    fn term(&mut self, b: Bv, w: u8) -> TermId {
        match b {
            Bv::S(t) => t,
            Bv::C(v) => self.intern(Node {
                op: Op::Const(v & mask(w)),
                width: w,
                args: [NONE; 3],
            }),
        }
    }

    fn as_const(&self, b: Bv) -> Option<u64> {
        match b {
            Bv::C(v) => Some(v),
            Bv::S(t) => match self.nodes[t as usize].op {
                Op::Const(v) => Some(v),
                _ => None,
            },
        }
    }

    fn mk(&mut self, op: Op, w: u8, args: [TermId; 3]) -> Bv {
        Bv::S(self.intern(Node { op, width: w, args }))
    }

    pub fn var(&mut self, w: u8) -> (u32, Bv) {
        let id = self.next_var;
        self.next_var += 1;
        let t = self.intern(Node {
            op: Op::Var(id),
            width: w,
            args: [NONE; 3],
        });
        (id, Bv::S(t))
    }

    pub fn not(&mut self, a: Bv, w: u8) -> Bv {
        if let Some(x) = self.as_const(a) {
            return Bv::C(!x & mask(w));
        }
        let t = self.term(a, w);
        let n = self.nodes[t as usize];
        if n.op == Op::Not {
            return Bv::S(n.args[0]);
        }
        self.mk(Op::Not, w, [t, NONE, NONE])
    }

    pub fn extract(&mut self, a: Bv, aw: u8, hi: u8, lo: u8) -> Bv {
        let w = hi - lo + 1;
        if let Some(x) = self.as_const(a) {
            return Bv::C((x >> lo) & mask(w));
        }
        if lo == 0 && hi + 1 == aw {
            return a;
        }
        let t = self.term(a, aw);
        let n = self.nodes[t as usize];
        match n.op {
            Op::Extract { lo: l2, .. } => {
                return self.extract(Bv::S(n.args[0]), self.nodes[n.args[0] as usize].width, hi + l2, lo + l2);
            }
            Op::ZExt | Op::SExt => {
                let inner = n.args[0];
                let iw = self.nodes[inner as usize].width;
                if hi < iw {
                    return self.extract(Bv::S(inner), iw, hi, lo);
                }
                if n.op == Op::ZExt && lo >= iw {
                    return Bv::C(0);
                }
            }
            Op::Concat => {
                let (h, l) = (n.args[0], n.args[1]);
                let lw = self.nodes[l as usize].width;
                if hi < lw {
                    return self.extract(Bv::S(l), lw, hi, lo);
                }
                if lo >= lw {
                    let hw = self.nodes[h as usize].width;
                    return self.extract(Bv::S(h), hw, hi - lw, lo - lw);
                }
            }
            _ => {}
        }
        self.mk(Op::Extract { hi, lo }, w, [t, NONE, NONE])
    }

    pub fn zext(&mut self, a: Bv, aw: u8, w: u8) -> Bv {
        if let Some(x) = self.as_const(a) {
            return Bv::C(x);
        }
        if aw == w {
            return a;
        }
        let t = self.term(a, aw);
        self.mk(Op::ZExt, w, [t, NONE, NONE])
    }

    pub fn sext(&mut self, a: Bv, aw: u8, w: u8) -> Bv {
        if let Some(x) = self.as_const(a) {
            return Bv::C(sext(x, aw) as u64 & mask(w));
        }
        if aw == w {
            return a;
        }
        let t = self.term(a, aw);
        self.mk(Op::SExt, w, [t, NONE, NONE])
    }

    /// `hi ++ lo`, with `hi` occupying the most significant bits.
    pub fn concat(&mut self, hi: Bv, hw: u8, lo: Bv, lw: u8) -> Bv {
        let w = hw + lw;
        if let (Some(a), Some(b)) = (self.as_const(hi), self.as_const(lo)) {
            return Bv::C(((a << lw) | b) & mask(w));
        }
        let th = self.term(hi, hw);
        let tl = self.term(lo, lw);
        let nh = self.nodes[th as usize];
        let nl = self.nodes[tl as usize];
        // Adjacent slices of the same term merge back into one slice.
        if let (Op::Extract { hi: h1, lo: l1 }, Op::Extract { hi: h2, lo: l2 }) = (nh.op, nl.op) {
            if nh.args[0] == nl.args[0] && l1 == h2 + 1 {
                let src = nh.args[0];
                let sw = self.nodes[src as usize].width;
                return self.extract(Bv::S(src), sw, h1, l2);
            }
        }
        if let (Op::Extract { hi: h1, lo: l1 }, Op::Concat) = (nh.op, nl.op) {
            let mid = nl.args[0];
            let nm = self.nodes[mid as usize];
            if let Op::Extract { hi: h2, lo: l2 } = nm.op {
                if nm.args[0] == nh.args[0] && l1 == h2 + 1 {
                    let src = nh.args[0];
                    let sw = self.nodes[src as usize].width;
                    let merged = self.extract(Bv::S(src), sw, h1, l2);
                    let rest = nl.args[1];
                    let rw = self.nodes[rest as usize].width;
                    return self.concat(merged, h1 - l2 + 1, Bv::S(rest), rw);
                }
            }
        }
        self.mk(Op::Concat, w, [th, tl, NONE])
    }

    pub fn ite(&mut self, c: Bv, a: Bv, b: Bv, w: u8) -> Bv {
        if let Some(x) = self.as_const(c) {
            return if x & 1 == 1 { a } else { b };
        }
        if a == b {
            return a;
        }
        let (ta, tb) = (self.term(a, w), self.term(b, w));
        if ta == tb {
            return Bv::S(ta);
        }
        if w == 1 {
            match (self.as_const(a), self.as_const(b)) {
                (Some(1), Some(0)) => return c,
                (Some(0), Some(1)) => return self.not(c, 1),
                _ => {}
            }
        }
        let tc = self.term(c, 1);
        self.mk(Op::Ite, w, [tc, ta, tb])
    }

    /// Binary operator on two `w`-bit operands. Comparisons yield 1 bit.
    pub fn bin(&mut self, op: Op, a: Bv, b: Bv, w: u8) -> Bv {
        let out_w = match op {
            Op::Eq | Op::Ult | Op::Slt => 1,
            _ => w,
        };
        let ca = self.as_const(a);
        let cb = self.as_const(b);
        if let (Some(x), Some(y)) = (ca, cb) {
            return Bv::C(fold(op, out_w, w, x, y, 0));
        }
        let m = mask(w);
        match op {
            Op::Add => {
                if ca == Some(0) {
                    return b;
                }
                if cb == Some(0) {
                    return a;
                }
                if let Some(r) = self.remainder_idiom(a, b, w).or_else(|| self.remainder_idiom(b, a, w)) {
                    return r;
                }
            }
            Op::Sub => {
                if cb == Some(0) {
                    return a;
                }
                if a == b {
                    return Bv::C(0);
                }
                // a - k  =>  a + (-k);  a - x*k  =>  a + x*(-k)
                if let Some(k) = cb {
                    return self.bin(Op::Add, a, Bv::C(k.wrapping_neg() & m), w);
                }
                if let Some((x, k)) = self.scaled(b) {
                    let neg = self.bin(Op::Mul, x, Bv::C(k.wrapping_neg() & m), w);
                    return self.bin(Op::Add, a, neg, w);
                }
            }
            Op::Mul => {
                if ca == Some(0) || cb == Some(0) {
                    return Bv::C(0);
                }
                if ca == Some(1) {
                    return b;
                }
                if cb == Some(1) {
                    return a;
                }
            }
            Op::And => {
                if ca == Some(0) || cb == Some(0) {
                    return Bv::C(0);
                }
                if ca == Some(m) {
                    return b;
                }
                if cb == Some(m) || a == b {
                    return a;
                }
            }
            Op::Or => {
                if ca == Some(m) || cb == Some(m) {
                    return Bv::C(m);
                }
                if ca == Some(0) {
                    return b;
                }
                if cb == Some(0) || a == b {
                    return a;
                }
            }
            Op::Xor => {
                if ca == Some(0) {
                    return b;
                }
                if cb == Some(0) {
                    return a;
                }
                if a == b {
                    return Bv::C(0);
                }
                if w == 1 && ca == Some(1) {
                    return self.not(b, 1);
                }
                if w == 1 && cb == Some(1) {
                    return self.not(a, 1);
                }
            }
            Op::Shl | Op::LShr | Op::AShr => {
                if let Some(s) = cb {
                    if s % w as u64 == 0 {
                        return a;
                    }
                }
                if ca == Some(0) {
                    return Bv::C(0);
                }
            }
            Op::UDiv | Op::SDiv => {
                if cb == Some(1) {
                    return a;
                }
            }
            Op::URem | Op::SRem => {
                if cb == Some(1) {
                    return Bv::C(0);
                }
            }
            Op::Eq => {
                if a == b {
                    return Bv::C(1);
                }
                return self.eq_simplify(a, b, w);
            }
            Op::Ult => {
                if a == b || cb == Some(0) {
                    return Bv::C(0);
                }
            }
            Op::Slt if a == b => return Bv::C(0),
            _ => {}
        }
        let (ta, tb) = (self.term(a, w), self.term(b, w));
        if ta == tb {
            match op {
                Op::Eq => return Bv::C(1),
                Op::Ult | Op::Slt => return Bv::C(0),
                _ => {}
            }
        }
        let (ta, tb) = match op {
            Op::Add | Op::Mul | Op::And | Op::Or | Op::Xor | Op::Eq if ta > tb => (tb, ta),
            _ => (ta, tb),
        };
        self.mk(op, out_w, [ta, tb, NONE])
    }

    /// `x * k` with constant `k`, as `(x, k)`.
    fn scaled(&self, b: Bv) -> Option<(Bv, u64)> {
        let Bv::S(t) = b else { return None };
        let n = self.nodes[t as usize];
        if n.op != Op::Mul {
            return None;
        }
        let (x, y) = (Bv::S(n.args[0]), Bv::S(n.args[1]));
        match (self.as_const(x), self.as_const(y)) {
            (None, Some(k)) => Some((x, k)),
            (Some(k), None) => Some((y, k)),
            _ => None,
        }
    }

    /// `a + (a / k) * -k` is the remainder of `a` by `k`; compilers emit it
    /// in place of a separate remainder instruction.
    fn remainder_idiom(&mut self, a: Bv, b: Bv, w: u8) -> Option<Bv> {
        let (q, negk) = self.scaled(b)?;
        let Bv::S(qt) = q else { return None };
        let n = self.nodes[qt as usize];
        let rem = match n.op {
            Op::SDiv => Op::SRem,
            Op::UDiv => Op::URem,
            _ => return None,
        };
        let k = self.as_const(Bv::S(n.args[1]))?;
        if Bv::S(n.args[0]) != a || k.wrapping_neg() & mask(w) != negk {
            return None;
        }
        Some(self.bin(rem, a, Bv::C(k), w))
    }

    fn eq_simplify(&mut self, a: Bv, b: Bv, w: u8) -> Bv {
        // Put the constant, if any, on the right.
        let (a, b) = if self.as_const(a).is_some() { (b, a) } else { (a, b) };
        if let (Bv::S(t), Some(k)) = (a, self.as_const(b)) {
            let n = self.nodes[t as usize];
            match n.op {
                Op::ZExt => {
                    let inner = n.args[0];
                    let iw = self.nodes[inner as usize].width;
                    if k > mask(iw) {
                        return Bv::C(0);
                    }
                    if iw == 1 {
                        return if k == 1 { Bv::S(inner) } else { self.not(Bv::S(inner), 1) };
                    }
                    return self.bin(Op::Eq, Bv::S(inner), Bv::C(k), iw);
                }
                Op::Ite => {
                    let (c, x, y) = (n.args[0], n.args[1], n.args[2]);
                    if let (Some(cx), Some(cy)) = (self.as_const(Bv::S(x)), self.as_const(Bv::S(y))) {
                        return match (cx == k, cy == k) {
                            (true, true) => Bv::C(1),
                            (false, false) => Bv::C(0),
                            (true, false) => Bv::S(c),
                            (false, true) => self.not(Bv::S(c), 1),
                        };
                    }
                }
                _ => {}
            }
            if w == 1 {
                return if k == 1 { a } else { self.not(a, 1) };
            }
        }
        let (ta, tb) = (self.term(a, w), self.term(b, w));
        let (ta, tb) = if ta > tb { (tb, ta) } else { (ta, tb) };
        self.mk(Op::Eq, 1, [ta, tb, NONE])
    }

    /// Evaluate `t` under an assignment of variables (absent ones are zero).
    pub fn eval(&self, t: Bv, model: &HashMap<u32, u64>) -> u64 {
        match t {
            Bv::C(v) => v,
            Bv::S(t) => {
                let mut memo = HashMap::new();
                self.eval_term(t, model, &mut memo)
            }
        }
    }

    fn eval_term(&self, root: TermId, model: &HashMap<u32, u64>, memo: &mut HashMap<TermId, u64>) -> u64 {
        // Iterative post-order walk; term DAGs can be deep.
        let mut stack = vec![(root, false)];
        while let Some((t, ready)) = stack.pop() {
            if memo.contains_key(&t) {
                continue;
            }
            let n = self.nodes[t as usize];
            let arity = n.op.arity();
            if !ready && arity > 0 {
                stack.push((t, true));
                for &a in &n.args[..arity] {
                    if !memo.contains_key(&a) {
                        stack.push((a, false));
                    }
                }
                continue;
            }
            let v = match n.op {
                Op::Const(v) => v,
                Op::Var(id) => model.get(&id).copied().unwrap_or(0) & mask(n.width),
                op => {
                    let get = |i: usize| memo[&n.args[i]];
                    let arg_w = self.nodes[n.args[if op == Op::Concat { 1 } else { 0 }] as usize].width;
                    let a = get(0);
                    let b = if arity > 1 { get(1) } else { 0 };
                    let c = if arity > 2 { get(2) } else { 0 };
                    fold(op, n.width, arg_w, a, b, c)
                }
            };
            memo.insert(t, v);
        }
        memo[&root]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn byte_slices_reassemble() {
        let mut p = Pool::new();
        let (_, x) = p.var(32);
        let bytes: Vec<Bv> = (0..4).map(|i| p.extract(x, 32, 8 * i + 7, 8 * i)).collect();
        let mut acc = bytes[0];
        for (i, b) in bytes.iter().enumerate().skip(1) {
            acc = p.concat(*b, 8, acc, 8 * i as u8);
        }
        assert_eq!(acc, x);
    }

    #[test]
    fn wrap_of_extend_is_identity() {
        let mut p = Pool::new();
        let (_, x) = p.var(32);
        let wide = p.sext(x, 32, 64);
        assert_eq!(p.extract(wide, 64, 31, 0), x);
    }

    #[test]
    fn comparison_through_zext() {
        let mut p = Pool::new();
        let (_, x) = p.var(32);
        let (_, y) = p.var(32);
        let lt = p.bin(Op::Slt, x, y, 32);
        let as_i32 = p.zext(lt, 1, 32);
        let ne0 = {
            let e = p.bin(Op::Eq, as_i32, Bv::C(0), 32);
            p.not(e, 1)
        };
        assert_eq!(ne0, lt);
    }

    #[test]
    fn signed_division_matches_wasm() {
        for &(a, b) in &[(7i32, 2i32), (-7, 2), (7, -2), (-7, -2), (i32::MIN, -1), (i32::MIN, 3)] {
            let q = fold(Op::SDiv, 32, 32, a as u32 as u64, b as u32 as u64, 0);
            let r = fold(Op::SRem, 32, 32, a as u32 as u64, b as u32 as u64, 0);
            assert_eq!(q as u32 as i32, a.wrapping_div(b));
            assert_eq!(r as u32 as i32, a.wrapping_rem(b));
        }
    }
}
