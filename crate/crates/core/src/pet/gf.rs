//! Arithmetic in GF(2^m), 1 <= m <= 16, through log/antilog tables.

use std::sync::OnceLock;

/// Primitive polynomials, including the `x^m` term, indexed by `m`.
const PRIMITIVE: [u32; 17] = [
    0, 0b11, 0b111, 0b1011, 0x13, 0x25, 0x43, 0x83, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B,
    0x4443, 0x8003, 0x1100B,
];

#[derive(Debug)]
pub struct Field {
    bits: u32,
    order: usize,
    exp: Vec<u16>,
    log: Vec<u16>,
}

impl Field {
    fn build(bits: u32) -> Self {
        let order = 1usize << bits;
        let period = order - 1;
        let mut exp = vec![0u16; 2 * period.max(1)];
        let mut log = vec![0u16; order];
        let mut x: u32 = 1;
        for i in 0..period {
            exp[i] = x as u16;
            log[x as usize] = i as u16;
            x <<= 1;
            if x & (1 << bits) != 0 {
                x ^= PRIMITIVE[bits as usize];
            }
        }
        for i in period..exp.len() {
            exp[i] = exp[i - period];
        }
        Self {
            bits,
            order,
            exp,
            log,
        }
    }

    /// The field with `2^bits` elements. Panics outside `1..=16`.
    pub fn get(bits: u32) -> &'static Field {
        static FIELDS: [OnceLock<Field>; 17] = [const { OnceLock::new() }; 17];
        assert!((1..=16).contains(&bits), "field size 2^{bits} unsupported");
        FIELDS[bits as usize].get_or_init(|| Field::build(bits))
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Number of elements.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mul(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
    }

    pub fn inv(&self, a: u16) -> u16 {
        assert!(a != 0, "zero has no inverse");
        let period = self.order - 1;
        self.exp[(period - self.log[a as usize] as usize) % period]
    }

    pub fn div(&self, a: u16, b: u16) -> u16 {
        self.mul(a, self.inv(b))
    }
}
