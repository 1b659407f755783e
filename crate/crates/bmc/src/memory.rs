//! Linear memory shared between forked paths.
//!
//! Concrete bytes live in reference-counted chunks that are copied on the
//! first write after a fork. Bytes holding symbolic values are tracked in a
//! separate overlay keyed by address; the overlay takes precedence.

use std::collections::HashMap;
use std::rc::Rc;

use crate::term::{Bv, Pool, TermId};

const CHUNK: usize = 4096;
pub const PAGE: usize = 65536;

#[derive(Clone)]
pub struct Memory {
    chunks: Vec<Rc<[u8; CHUNK]>>,
    sym: Rc<HashMap<u32, TermId>>,
    max_pages: u32,
}

impl Memory {
    pub fn new(pages: u32, max_pages: u32) -> Self {
        let zero: Rc<[u8; CHUNK]> = Rc::new([0; CHUNK]);
        Memory {
            chunks: vec![zero; pages as usize * (PAGE / CHUNK)],
            sym: Rc::new(HashMap::new()),
            max_pages,
        }
    }

    pub fn len(&self) -> usize {
        self.chunks.len() * CHUNK
    }

    pub fn pages(&self) -> u32 {
        (self.len() / PAGE) as u32
    }

    pub fn grow(&mut self, delta: u32) -> i32 {
        let old = self.pages();
        match old.checked_add(delta) {
            Some(new) if new <= self.max_pages => {
                let zero: Rc<[u8; CHUNK]> = Rc::new([0; CHUNK]);
                self.chunks.resize(new as usize * (PAGE / CHUNK), zero);
                old as i32
            }
            _ => -1,
        }
    }

    /// Effective address of an access, or `None` when out of bounds.
    pub fn range(&self, addr: u32, offset: u32, len: usize) -> Option<u32> {
        let start = addr as u64 + offset as u64;
        if start + len as u64 > self.len() as u64 {
            None
        } else {
            Some(start as u32)
        }
    }

    fn byte(&self, a: u32) -> u8 {
        self.chunks[a as usize / CHUNK][a as usize % CHUNK]
    }

    fn set_byte(&mut self, a: u32, v: u8) {
        let c = Rc::make_mut(&mut self.chunks[a as usize / CHUNK]);
        c[a as usize % CHUNK] = v;
    }

    /// Read `n` bytes little-endian as an `8n`-bit value. Bounds are checked
    /// by the caller.
    pub fn read(&self, pool: &mut Pool, a: u32, n: usize) -> Bv {
        let symbolic = !self.sym.is_empty() && (0..n as u32).any(|i| self.sym.contains_key(&(a + i)));
        if !symbolic {
            let mut v = 0u64;
            for i in (0..n).rev() {
                v = (v << 8) | self.byte(a + i as u32) as u64;
            }
            return Bv::C(v);
        }
        let mut acc = self.read_byte(a);
        for i in 1..n {
            let b = self.read_byte(a + i as u32);
            acc = pool.concat(b, 8, acc, 8 * i as u8);
        }
        acc
    }

    fn read_byte(&self, a: u32) -> Bv {
        match self.sym.get(&a) {
            Some(&t) => Bv::S(t),
            None => Bv::C(self.byte(a) as u64),
        }
    }

    pub fn write(&mut self, pool: &mut Pool, a: u32, n: usize, v: Bv, w: u8) {
        match v {
            Bv::C(x) => {
                for i in 0..n {
                    self.set_byte(a + i as u32, (x >> (8 * i)) as u8);
                }
                if !self.sym.is_empty() {
                    let sym = Rc::make_mut(&mut self.sym);
                    for i in 0..n as u32 {
                        sym.remove(&(a + i));
                    }
                }
            }
            Bv::S(_) => {
                for i in 0..n {
                    let lo = 8 * i as u8;
                    match pool.extract(v, w, lo + 7, lo) {
                        Bv::C(b) => {
                            self.set_byte(a + i as u32, b as u8);
                            Rc::make_mut(&mut self.sym).remove(&(a + i as u32));
                        }
                        Bv::S(t) => {
                            Rc::make_mut(&mut self.sym).insert(a + i as u32, t);
                        }
                    }
                }
            }
        }
    }

    pub fn fill(&mut self, pool: &mut Pool, a: u32, v: Bv, n: u32) {
        if let Bv::C(x) = v {
            for i in 0..n {
                self.set_byte(a + i, x as u8);
            }
            if !self.sym.is_empty() {
                let sym = Rc::make_mut(&mut self.sym);
                sym.retain(|k, _| *k < a || *k >= a + n);
            }
        } else {
            for i in 0..n {
                self.write(pool, a + i, 1, v, 32);
            }
        }
    }

    pub fn copy(&mut self, dst: u32, src: u32, n: u32) {
        if n == 0 {
            return;
        }
        let bytes: Vec<u8> = (0..n).map(|i| self.byte(src + i)).collect();
        for (i, b) in bytes.into_iter().enumerate() {
            self.set_byte(dst + i as u32, b);
        }
        if !self.sym.is_empty() {
            let moved: Vec<(u32, Option<TermId>)> =
                (0..n).map(|i| (dst + i, self.sym.get(&(src + i)).copied())).collect();
            let sym = Rc::make_mut(&mut self.sym);
            for (d, t) in moved {
                match t {
                    Some(t) => sym.insert(d, t),
                    None => sym.remove(&d),
                };
            }
        }
    }

    pub fn init(&mut self, offset: u32, bytes: &[u8]) -> bool {
        if offset as usize + bytes.len() > self.len() {
            return false;
        }
        for (i, &b) in bytes.iter().enumerate() {
            self.set_byte(offset + i as u32, b);
        }
        true
    }
}
