//! Bit-blasting of terms to CNF, solved incrementally with varisat.
//!
//! Terms are blasted on demand and cached, so clauses for shared subterms are
//! emitted once per run. Path conditions are passed as assumptions, which
//! lets a single solver instance serve every path of the exploration.

use std::collections::HashMap;

use varisat::{ExtendFormula, Lit, Solver};

use crate::term::{Op, Pool, TermId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bit {
    F,
    T,
    L(Lit),
}

impl Bit {
    fn not(self) -> Bit {
        match self {
            Bit::F => Bit::T,
            Bit::T => Bit::F,
            Bit::L(l) => Bit::L(!l),
        }
    }

    fn from_bool(b: bool) -> Bit {
        if b {
            Bit::T
        } else {
            Bit::F
        }
    }
}

/// Quotient and remainder bits.
type QuotRem = (Vec<Bit>, Vec<Bit>);

pub struct BitSolver {
    sat: Solver<'static>,
    bits: HashMap<TermId, Vec<Bit>>,
    vars: HashMap<u32, Vec<Bit>>,
    /// Quotient and remainder circuits keyed by (dividend, divisor, signed).
    divisions: HashMap<(TermId, TermId, bool), QuotRem>,
    pub calls: u64,
}

impl Default for BitSolver {
    fn default() -> Self {
        Self::new()
    }
}

/// Outcome of a satisfiability query.
pub enum Sat {
    Sat(HashMap<u32, u64>),
    Unsat,
}

impl BitSolver {
    pub fn new() -> Self {
        BitSolver {
            sat: Solver::new(),
            bits: HashMap::new(),
            vars: HashMap::new(),
            divisions: HashMap::new(),
            calls: 0,
        }
    }

    /// Check the conjunction of 1-bit terms; on success return values for
    /// every variable blasted so far.
    pub fn check(&mut self, pool: &Pool, conds: &[TermId]) -> Result<Sat, String> {
        let mut assumptions = Vec::with_capacity(conds.len());
        for &c in conds {
            match self.blast(pool, c)[0] {
                Bit::T => {}
                Bit::F => return Ok(Sat::Unsat),
                Bit::L(l) => assumptions.push(l),
            }
        }
        self.calls += 1;
        self.sat.assume(&assumptions);
        let sat = self.sat.solve().map_err(|e| e.to_string())?;
        if !sat {
            return Ok(Sat::Unsat);
        }
        let lits = self.sat.model().unwrap_or_default();
        let mut values = vec![false; lits.iter().map(|l| l.var().index() + 1).max().unwrap_or(0)];
        for l in lits {
            values[l.var().index()] = l.is_positive();
        }
        let read = |b: &Bit| match b {
            Bit::T => true,
            Bit::F => false,
            Bit::L(l) => values.get(l.var().index()).copied().unwrap_or(false) == l.is_positive(),
        };
        let model = self
            .vars
            .iter()
            .map(|(&id, bits)| {
                let v = bits
                    .iter()
                    .enumerate()
                    .fold(0u64, |acc, (i, b)| acc | ((read(b) as u64) << i));
                (id, v)
            })
            .collect();
        Ok(Sat::Sat(model))
    }

    fn fresh(&mut self) -> Bit {
        Bit::L(self.sat.new_lit())
    }

    fn and(&mut self, a: Bit, b: Bit) -> Bit {
        match (a, b) {
            (Bit::F, _) | (_, Bit::F) => Bit::F,
            (Bit::T, x) | (x, Bit::T) => x,
            (Bit::L(x), Bit::L(y)) => {
                if x == y {
                    return a;
                }
                if x == !y {
                    return Bit::F;
                }
                let g = self.sat.new_lit();
                self.sat.add_clause(&[!g, x]);
                self.sat.add_clause(&[!g, y]);
                self.sat.add_clause(&[g, !x, !y]);
                Bit::L(g)
            }
        }
    }

    fn or(&mut self, a: Bit, b: Bit) -> Bit {
        self.and(a.not(), b.not()).not()
    }

    fn xor(&mut self, a: Bit, b: Bit) -> Bit {
        match (a, b) {
            (Bit::F, x) | (x, Bit::F) => x,
            (Bit::T, x) | (x, Bit::T) => x.not(),
            (Bit::L(x), Bit::L(y)) => {
                if x == y {
                    return Bit::F;
                }
                if x == !y {
                    return Bit::T;
                }
                let g = self.sat.new_lit();
                self.sat.add_clause(&[!g, x, y]);
                self.sat.add_clause(&[!g, !x, !y]);
                self.sat.add_clause(&[g, !x, y]);
                self.sat.add_clause(&[g, x, !y]);
                Bit::L(g)
            }
        }
    }

    fn mux(&mut self, c: Bit, t: Bit, e: Bit) -> Bit {
        match c {
            Bit::T => return t,
            Bit::F => return e,
            _ => {}
        }
        if t == e {
            return t;
        }
        match (t, e) {
            (Bit::T, Bit::F) => return c,
            (Bit::F, Bit::T) => return c.not(),
            (Bit::T, _) => return self.or(c, e),
            (Bit::F, _) => return self.and(c.not(), e),
            (_, Bit::T) => return self.or(c.not(), t),
            (_, Bit::F) => return self.and(c, t),
            _ => {}
        }
        let (Bit::L(c), Bit::L(t), Bit::L(e)) = (c, t, e) else {
            unreachable!()
        };
        let g = self.sat.new_lit();
        self.sat.add_clause(&[!c, !t, g]);
        self.sat.add_clause(&[!c, t, !g]);
        self.sat.add_clause(&[c, !e, g]);
        self.sat.add_clause(&[c, e, !g]);
        Bit::L(g)
    }

    fn full_add(&mut self, a: Bit, b: Bit, cin: Bit) -> (Bit, Bit) {
        let ab = self.xor(a, b);
        let sum = self.xor(ab, cin);
        let c1 = self.and(a, b);
        let c2 = self.and(ab, cin);
        (sum, self.or(c1, c2))
    }

    fn add(&mut self, a: &[Bit], b: &[Bit], mut carry: Bit) -> Vec<Bit> {
        let mut out = Vec::with_capacity(a.len());
        for i in 0..a.len() {
            let (s, c) = self.full_add(a[i], b[i], carry);
            out.push(s);
            carry = c;
        }
        out
    }

    fn sub(&mut self, a: &[Bit], b: &[Bit]) -> Vec<Bit> {
        let nb: Vec<Bit> = b.iter().map(|x| x.not()).collect();
        self.add(a, &nb, Bit::T)
    }

    fn neg(&mut self, a: &[Bit]) -> Vec<Bit> {
        let zero = vec![Bit::F; a.len()];
        self.sub(&zero, a)
    }

    /// Unsigned `a < b`.
    fn ult(&mut self, a: &[Bit], b: &[Bit]) -> Bit {
        // Borrow out of a - b, computed from the least significant bit up.
        let mut lt = Bit::F;
        for i in 0..a.len() {
            let eq = self.xor(a[i], b[i]).not();
            let bi_gt = self.and(a[i].not(), b[i]);
            let keep = self.and(eq, lt);
            lt = self.or(bi_gt, keep);
        }
        lt
    }

    fn eq(&mut self, a: &[Bit], b: &[Bit]) -> Bit {
        let mut acc = Bit::T;
        for i in 0..a.len() {
            let e = self.xor(a[i], b[i]).not();
            acc = self.and(acc, e);
        }
        acc
    }

    fn mul(&mut self, a: &[Bit], b: &[Bit]) -> Vec<Bit> {
        let w = a.len();
        // Shift-and-add; put the operand with fewer unknown bits in the
        // multiplier position so constant factors only add where bits are set.
        let unknown = |v: &[Bit]| v.iter().filter(|b| matches!(b, Bit::L(_))).count();
        let (a, b) = if unknown(a) < unknown(b) { (b, a) } else { (a, b) };
        let mut acc = vec![Bit::F; w];
        for i in 0..w {
            if b[i] == Bit::F {
                continue;
            }
            let mut partial = vec![Bit::F; w];
            for j in 0..w - i {
                partial[i + j] = self.and(a[j], b[i]);
            }
            acc = self.add(&acc, &partial, Bit::F);
        }
        acc
    }

    fn assert_bit(&mut self, b: Bit) {
        match b {
            Bit::T => {}
            Bit::F => self.sat.add_clause(&[]),
            Bit::L(l) => self.sat.add_clause(&[l]),
        }
    }

    /// Unsigned division; returns (quotient, remainder).
    ///
    /// Rather than a division circuit, fresh quotient and remainder bits are
    /// tied to the operands by `q * b + r == a, r < b` computed at double
    /// width. Propagation through a multiplier by a constant is cheap, which
    /// keeps the common division by a literal tractable. Division by zero
    /// yields all-ones and `a`, matching the constant semantics.
    fn udivrem(&mut self, a: &[Bit], b: &[Bit]) -> (Vec<Bit>, Vec<Bit>) {
        let w = a.len();
        if b.iter().all(|x| *x == Bit::F) {
            return (vec![Bit::T; w], a.to_vec());
        }
        let q: Vec<Bit> = (0..w).map(|_| self.fresh()).collect();
        let r: Vec<Bit> = (0..w).map(|_| self.fresh()).collect();
        let wide = |v: &[Bit]| {
            let mut x = v.to_vec();
            x.resize(2 * w, Bit::F);
            x
        };
        let prod = self.mul(&wide(&q), &wide(b));
        let sum = self.add(&prod, &wide(&r), Bit::F);
        let exact = self.eq(&sum, &wide(a));
        let bounded = self.ult(&r, b);
        let nonzero = self.or_all(b);
        let ok = self.and(exact, bounded);
        let ok = self.or(nonzero.not(), ok);
        self.assert_bit(ok);
        if nonzero != Bit::T {
            for i in 0..w {
                let qi = self.or(nonzero, q[i]);
                self.assert_bit(qi);
                let same = self.xor(r[i], a[i]).not();
                let ri = self.or(nonzero, same);
                self.assert_bit(ri);
            }
        }
        (q, r)
    }

    fn or_all(&mut self, v: &[Bit]) -> Bit {
        let mut acc = Bit::F;
        for &x in v {
            acc = self.or(acc, x);
        }
        acc
    }

    /// Truncating signed division through absolute values.
    fn sdivrem(&mut self, a: &[Bit], b: &[Bit]) -> (Vec<Bit>, Vec<Bit>) {
        let w = a.len();
        let (sa, sb) = (a[w - 1], b[w - 1]);
        let (ua, ub) = (self.abs(a), self.abs(b));
        let (q, r) = self.udivrem(&ua, &ub);
        let qflip = self.xor(sa, sb);
        let nq = self.neg(&q);
        let nr = self.neg(&r);
        let q = q.iter().zip(nq).map(|(&x, y)| self.mux(qflip, y, x)).collect();
        let r = r.iter().zip(nr).map(|(&x, y)| self.mux(sa, y, x)).collect();
        (q, r)
    }

    fn abs(&mut self, a: &[Bit]) -> Vec<Bit> {
        let s = a[a.len() - 1];
        let n = self.neg(a);
        a.iter().zip(n).map(|(&x, y)| self.mux(s, y, x)).collect()
    }

    fn shift(&mut self, a: &[Bit], amount: &[Bit], op: Op) -> Vec<Bit> {
        let w = a.len();
        let log = w.trailing_zeros() as usize;
        let fill = if op == Op::AShr { a[w - 1] } else { Bit::F };
        let mut cur = a.to_vec();
        for (k, &sel) in amount.iter().enumerate().take(log) {
            let d = 1usize << k;
            let mut next = Vec::with_capacity(w);
            for i in 0..w {
                let moved = match op {
                    Op::Shl => {
                        if i >= d {
                            cur[i - d]
                        } else {
                            Bit::F
                        }
                    }
                    _ => {
                        if i + d < w {
                            cur[i + d]
                        } else {
                            fill
                        }
                    }
                };
                next.push(self.mux(sel, moved, cur[i]));
            }
            cur = next;
        }
        cur
    }

    fn blast(&mut self, pool: &Pool, root: TermId) -> Vec<Bit> {
        if let Some(b) = self.bits.get(&root) {
            return b.clone();
        }
        let mut stack = vec![(root, false)];
        while let Some((t, ready)) = stack.pop() {
            if self.bits.contains_key(&t) {
                continue;
            }
            let n = pool.node(t);
            let arity = n.op.arity();
            if !ready && arity > 0 {
                stack.push((t, true));
                for &a in &n.args[..arity] {
                    if !self.bits.contains_key(&a) {
                        stack.push((a, false));
                    }
                }
                continue;
            }
            let bits = self.blast_node(n.op, n.width as usize, &n.args[..arity]);
            self.bits.insert(t, bits);
        }
        self.bits[&root].clone()
    }

    fn blast_node(&mut self, op: Op, w: usize, args: &[TermId]) -> Vec<Bit> {
        let ins: Vec<Vec<Bit>> = args.iter().map(|x| self.bits[x].clone()).collect();
        let arg = |i: usize| ins[i].clone();
        match op {
            Op::Const(v) => (0..w).map(|i| Bit::from_bool((v >> i) & 1 == 1)).collect(),
            Op::Var(id) => {
                let bits: Vec<Bit> = (0..w).map(|_| self.fresh()).collect();
                self.vars.insert(id, bits.clone());
                bits
            }
            Op::Not => arg(0).iter().map(|b| b.not()).collect(),
            Op::Extract { hi, lo } => arg(0)[lo as usize..=hi as usize].to_vec(),
            Op::ZExt => {
                let mut a = arg(0);
                a.resize(w, Bit::F);
                a
            }
            Op::SExt => {
                let mut a = arg(0);
                let s = *a.last().expect("non-empty");
                a.resize(w, s);
                a
            }
            Op::Concat => {
                let mut lo = arg(1);
                lo.extend(arg(0));
                lo
            }
            Op::Add => {
                let (a, b) = (arg(0), arg(1));
                self.add(&a, &b, Bit::F)
            }
            Op::Sub => {
                let (a, b) = (arg(0), arg(1));
                self.sub(&a, &b)
            }
            Op::Mul => {
                let (a, b) = (arg(0), arg(1));
                self.mul(&a, &b)
            }
            Op::UDiv | Op::URem | Op::SDiv | Op::SRem => {
                let signed = matches!(op, Op::SDiv | Op::SRem);
                let key = (args[0], args[1], signed);
                let (q, r) = match self.divisions.get(&key) {
                    Some(qr) => qr.clone(),
                    None => {
                        let qr = if signed {
                            self.sdivrem(&arg(0), &arg(1))
                        } else {
                            self.udivrem(&arg(0), &arg(1))
                        };
                        self.divisions.insert(key, qr.clone());
                        qr
                    }
                };
                if matches!(op, Op::UDiv | Op::SDiv) {
                    q
                } else {
                    r
                }
            }
            Op::And | Op::Or | Op::Xor => {
                let (a, b) = (arg(0), arg(1));
                a.iter()
                    .zip(b)
                    .map(|(&x, y)| match op {
                        Op::And => self.and(x, y),
                        Op::Or => self.or(x, y),
                        _ => self.xor(x, y),
                    })
                    .collect()
            }
            Op::Shl | Op::LShr | Op::AShr => {
                let (a, b) = (arg(0), arg(1));
                self.shift(&a, &b, op)
            }
            Op::Eq => {
                let (a, b) = (arg(0), arg(1));
                vec![self.eq(&a, &b)]
            }
            Op::Ult => {
                let (a, b) = (arg(0), arg(1));
                vec![self.ult(&a, &b)]
            }
            Op::Slt => {
                let (mut a, mut b) = (arg(0), arg(1));
                let top = a.len() - 1;
                a[top] = a[top].not();
                b[top] = b[top].not();
                vec![self.ult(&a, &b)]
            }
            Op::Ite => {
                let c = arg(0)[0];
                let (a, b) = (arg(1), arg(2));
                a.iter().zip(b).map(|(&x, y)| self.mux(c, x, y)).collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Bv;

    fn solve_for(pool: &Pool, s: &mut BitSolver, c: Bv) -> Option<HashMap<u32, u64>> {
        let Bv::S(t) = c else {
            return if c == Bv::C(1) { Some(HashMap::new()) } else { None };
        };
        match s.check(pool, &[t]).unwrap() {
            Sat::Sat(m) => Some(m),
            Sat::Unsat => None,
        }
    }

    #[test]
    fn finds_division_witness() {
        let mut p = Pool::new();
        let mut s = BitSolver::new();
        let (id, x) = p.var(32);
        let q = p.bin(Op::SDiv, x, Bv::C(10), 32);
        let c = p.bin(Op::Eq, q, Bv::C((-12i32) as u32 as u64), 32);
        let gt = p.bin(Op::Slt, Bv::C((-125i32) as u32 as u64), x, 32);
        let both = p.bin(Op::And, c, gt, 1);
        let m = solve_for(&p, &mut s, both).expect("sat");
        let v = m[&id] as u32 as i32;
        assert_eq!(v / 10, -12);
        assert!(v > -125);
        assert_eq!(p.eval(both, &m), 1);
    }

    #[test]
    fn proves_simple_identity() {
        let mut p = Pool::new();
        let mut s = BitSolver::new();
        let (_, x) = p.var(16);
        let (_, y) = p.var(16);
        // (x + y) - y != x is unsatisfiable.
        let sum = p.bin(Op::Add, x, y, 16);
        let back = p.bin(Op::Sub, sum, y, 16);
        let eq = p.bin(Op::Eq, back, x, 16);
        let ne = p.not(eq, 1);
        assert!(solve_for(&p, &mut s, ne).is_none());
    }
}
