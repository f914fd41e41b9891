//! Narrow-sense binary BCH codes of length `2^m - 1`.
//!
//! Words are stored as integers where bit `p` is the coefficient of `x^p`.
//! The leftmost bit of a [`BitString`](crate::bits::BitString) is the highest
//! power, so systematic codewords read as `message || parity`.

/// GF(2^m) arithmetic by log/antilog tables.
#[derive(Debug, Clone)]
pub(crate) struct GaloisField {
    m: u32,
    order: usize,
    exp: Vec<u16>,
    log: Vec<u16>,
}

impl GaloisField {
    pub(crate) fn new(m: u32, primitive_poly: u32) -> Self {
        let order = (1usize << m) - 1;
        let mut exp = vec![0u16; 2 * order];
        let mut log = vec![0u16; order + 1];
        let mut x: u32 = 1;
        for (i, slot) in exp.iter_mut().take(order).enumerate() {
            *slot = x as u16;
            log[x as usize] = i as u16;
            x <<= 1;
            if x & (1 << m) != 0 {
                x ^= primitive_poly;
            }
        }
        assert_eq!(x, 1, "polynomial {primitive_poly:#x} is not primitive");
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        Self { m, order, exp, log }
    }

    fn mul(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
    }

    fn div(&self, a: u16, b: u16) -> u16 {
        assert_ne!(b, 0, "division by zero in GF(2^{})", self.m);
        if a == 0 {
            return 0;
        }
        let e = self.log[a as usize] as usize + self.order - self.log[b as usize] as usize;
        self.exp[e % self.order]
    }

    /// `alpha^e` for any integer exponent.
    fn alpha_pow(&self, e: i64) -> u16 {
        self.exp[e.rem_euclid(self.order as i64) as usize]
    }

    /// Minimal polynomial of `alpha^i` over GF(2), bit `p` = coefficient of `x^p`.
    fn minimal_polynomial(&self, i: usize) -> u64 {
        let mut coset = vec![i % self.order];
        let mut c = (i * 2) % self.order;
        while c != coset[0] {
            coset.push(c);
            c = (c * 2) % self.order;
        }
        // Product of (x - alpha^c) with coefficients in GF(2^m).
        let mut poly: Vec<u16> = vec![1];
        for &c in &coset {
            let root = self.exp[c];
            let mut next = vec![0u16; poly.len() + 1];
            for (p, &coef) in poly.iter().enumerate() {
                next[p + 1] ^= coef;
                next[p] ^= self.mul(coef, root);
            }
            poly = next;
        }
        poly.iter().enumerate().fold(0u64, |acc, (p, &coef)| {
            debug_assert!(coef <= 1, "minimal polynomial coefficient outside GF(2)");
            acc | ((coef as u64) << p)
        })
    }
}

fn gf2_poly_mul(a: u64, b: u64) -> u64 {
    let mut out = 0u64;
    for p in 0..64 {
        if b >> p & 1 == 1 {
            out ^= a << p;
        }
    }
    out
}

fn gf2_poly_mod(mut a: u64, g: u64) -> u64 {
    let deg_g = 63 - g.leading_zeros();
    while a != 0 && 63 - a.leading_zeros() >= deg_g {
        let shift = (63 - a.leading_zeros()) - deg_g;
        a ^= g << shift;
    }
    a
}

/// Binary BCH code with designed correction radius `t`.
#[derive(Debug, Clone)]
pub(crate) struct Bch {
    field: GaloisField,
    n: usize,
    k: usize,
    t: usize,
    generator: u64,
}

impl Bch {
    pub(crate) fn new(m: u32, primitive_poly: u32, t: usize) -> Self {
        let field = GaloisField::new(m, primitive_poly);
        let n = field.order;
        let mut generator = 1u64;
        let mut used: Vec<u64> = Vec::new();
        for i in (1..2 * t).step_by(2) {
            let mp = field.minimal_polynomial(i);
            if !used.contains(&mp) {
                generator = gf2_poly_mul(generator, mp);
                used.push(mp);
            }
        }
        let degree = 63 - generator.leading_zeros() as usize;
        Self {
            field,
            n,
            k: n - degree,
            t,
            generator,
        }
    }

    /// BCH(31,16,7): GF(32) from `x^5 + x^2 + 1`, roots `alpha, alpha^3, alpha^5`.
    pub(crate) fn bch_31_16() -> Self {
        Self::new(5, 0b10_0101, 3)
    }

    pub(crate) fn n(&self) -> usize {
        self.n
    }

    pub(crate) fn k(&self) -> usize {
        self.k
    }

    #[cfg(test)]
    pub(crate) fn generator(&self) -> u64 {
        self.generator
    }

    /// Systematic encoding: `message * x^(n-k) + remainder`.
    pub(crate) fn encode(&self, message: u64) -> u64 {
        let shifted = message << (self.n - self.k);
        shifted | gf2_poly_mod(shifted, self.generator)
    }

    fn syndromes(&self, word: u64) -> Vec<u16> {
        (1..=2 * self.t)
            .map(|j| {
                (0..self.n)
                    .filter(|&p| word >> p & 1 == 1)
                    .fold(0u16, |acc, p| acc ^ self.field.alpha_pow((j * p) as i64))
            })
            .collect()
    }

    /// Berlekamp-Massey: shortest LFSR generating the syndrome sequence.
    fn error_locator(&self, s: &[u16]) -> Vec<u16> {
        let f = &self.field;
        let mut c = vec![1u16];
        let mut b = vec![1u16];
        let mut len = 0usize;
        let mut gap = 1usize;
        let mut last = 1u16;
        for step in 0..s.len() {
            let mut delta = s[step];
            for i in 1..=len.min(c.len() - 1) {
                delta ^= f.mul(c[i], s[step - i]);
            }
            if delta == 0 {
                gap += 1;
                continue;
            }
            let coef = f.div(delta, last);
            let mut next = c.clone();
            if next.len() < b.len() + gap {
                next.resize(b.len() + gap, 0);
            }
            for (i, &bi) in b.iter().enumerate() {
                next[i + gap] ^= f.mul(coef, bi);
            }
            if 2 * len <= step {
                b = c;
                len = step + 1 - len;
                last = delta;
                gap = 1;
            } else {
                gap += 1;
            }
            c = next;
        }
        c.truncate(len + 1);
        c.resize(len + 1, 0);
        c
    }

    /// Bounded-distance decoding. Returns the corrected codeword and the
    /// number of flipped bits, or `None` beyond radius `t`.
    pub(crate) fn correct(&self, word: u64) -> Option<(u64, usize)> {
        let s = self.syndromes(word);
        if s.iter().all(|&x| x == 0) {
            return Some((word, 0));
        }
        let locator = self.error_locator(&s);
        let degree = locator.len() - 1;
        if degree == 0 || degree > self.t || *locator.last().unwrap() == 0 {
            return None;
        }
        // Chien search: position p is in error iff locator(alpha^-p) = 0.
        let mut fixed = word;
        let mut found = 0;
        for p in 0..self.n {
            let x = self.field.alpha_pow(-(p as i64));
            let mut acc = 0u16;
            let mut xp = 1u16;
            for &coef in &locator {
                acc ^= self.field.mul(coef, xp);
                xp = self.field.mul(xp, x);
            }
            if acc == 0 {
                fixed ^= 1 << p;
                found += 1;
            }
        }
        if found != degree || self.syndromes(fixed).iter().any(|&x| x != 0) {
            return None;
        }
        Some((fixed, found))
    }
}
