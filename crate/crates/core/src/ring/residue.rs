//! The residue field `F_q = F_p[y]/(g(y))`, `q = p^f'`.

use std::fmt;

/// An element of `F_q`, stored as its coefficient vector in the basis `1, y, ..., y^{f'-1}`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Fq(pub Vec<u64>);

impl Fq {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

impl fmt::Display for Fq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            return write!(f, "{}", self.0[0]);
        }
        let mut first = true;
        for (j, &c) in self.0.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            match j {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}y")?,
                _ => write!(f, "{c}y^{j}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Arithmetic context for `F_q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueField {
    p: u64,
    /// Low coefficients `g_0..g_{f'-1}` of the monic defining polynomial, reduced mod p.
    poly: Vec<u64>,
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

impl ResidueField {
    pub(crate) fn new(p: u64, monic_low: &[u64]) -> Self {
        ResidueField {
            p,
            poly: monic_low.iter().map(|c| c % p).collect(),
        }
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.poly.len()
    }

    /// Field size `q`.
    pub fn order(&self) -> u128 {
        (self.p as u128).pow(self.degree() as u32)
    }

    pub fn zero(&self) -> Fq {
        Fq(vec![0; self.degree()])
    }

    pub fn one(&self) -> Fq {
        self.from_int(1)
    }

    pub fn from_int(&self, c: i64) -> Fq {
        let mut v = vec![0; self.degree()];
        v[0] = c.rem_euclid(self.p as i64) as u64;
        Fq(v)
    }

    pub fn add(&self, a: &Fq, b: &Fq) -> Fq {
        Fq(a.0.iter().zip(&b.0).map(|(x, y)| (x + y) % self.p).collect())
    }

    pub fn sub(&self, a: &Fq, b: &Fq) -> Fq {
        Fq(a.0
            .iter()
            .zip(&b.0)
            .map(|(x, y)| (x + self.p - y) % self.p)
            .collect())
    }

    pub fn neg(&self, a: &Fq) -> Fq {
        Fq(a.0.iter().map(|x| (self.p - x) % self.p).collect())
    }

    pub fn mul(&self, a: &Fq, b: &Fq) -> Fq {
        let f = self.degree();
        let p = self.p;
        let mut r = vec![0u64; 2 * f - 1];
        for (i, &x) in a.0.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.0.iter().enumerate() {
                r[i + j] = (r[i + j] + mulmod(x, y, p)) % p;
            }
        }
        for k in (f..2 * f - 1).rev() {
            let c = r[k];
            if c == 0 {
                continue;
            }
            r[k] = 0;
            for (j, &g) in self.poly.iter().enumerate() {
                let t = mulmod(c, g, p);
                r[k - f + j] = (r[k - f + j] + p - t) % p;
            }
        }
        r.truncate(f);
        Fq(r)
    }

    pub fn pow(&self, a: &Fq, mut e: u128) -> Fq {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: &Fq) -> Option<Fq> {
        if a.is_zero() {
            None
        } else {
            Some(self.pow(a, self.order() - 2))
        }
    }
}

/// Polynomials over `F_p` (low to high), used only to test irreducibility of
/// the defining polynomial.
pub(crate) mod fp_poly {
    fn trim(mut a: Vec<u64>) -> Vec<u64> {
        while a.len() > 1 && *a.last().unwrap() == 0 {
            a.pop();
        }
        a
    }

    fn inv(a: u64, p: u64) -> u64 {
        let mut r = 1u64;
        let mut b = a % p;
        let mut e = p - 2;
        while e > 0 {
            if e & 1 == 1 {
                r = (r as u128 * b as u128 % p as u128) as u64;
            }
            b = (b as u128 * b as u128 % p as u128) as u64;
            e >>= 1;
        }
        r
    }

    fn rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        let mut r = trim(a.to_vec());
        let m = trim(m.to_vec());
        let dm = m.len() - 1;
        let lead_inv = inv(*m.last().unwrap(), p);
        while !(r.len() == 1 && r[0] == 0) && r.len() > dm {
            let dr = r.len() - 1;
            let c = (*r.last().unwrap() as u128 * lead_inv as u128 % p as u128) as u64;
            for (j, &mj) in m.iter().enumerate() {
                let t = (c as u128 * mj as u128 % p as u128) as u64;
                let idx = dr - dm + j;
                r[idx] = (r[idx] + p - t) % p;
            }
            r = trim(r);
        }
        r
    }

    fn mulmod_poly(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        let mut r = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                r[i + j] = ((r[i + j] as u128 + x as u128 * y as u128) % p as u128) as u64;
            }
        }
        rem(&r, m, p)
    }

    fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut a = trim(a.to_vec());
        let mut b = trim(b.to_vec());
        while !(b.len() == 1 && b[0] == 0) {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        a
    }

    /// Rabin-style test: `g` (monic, degree f) is irreducible iff
    /// `gcd(x^{p^i} - x, g) = 1` for all `1 <= i <= f/2`.
    pub fn is_irreducible(g: &[u64], p: u64) -> bool {
        let f = g.len() - 1;
        if f == 0 {
            return false;
        }
        if f == 1 {
            return true;
        }
        let mut xp = vec![0, 1];
        for _ in 1..=f / 2 {
            // xp <- xp^p mod g
            let mut acc = vec![1u64];
            let mut base = xp.clone();
            let mut e = p;
            while e > 0 {
                if e & 1 == 1 {
                    acc = mulmod_poly(&acc, &base, g, p);
                }
                base = mulmod_poly(&base, &base, g, p);
                e >>= 1;
            }
            xp = acc;
            let mut diff = xp.clone();
            if diff.len() < 2 {
                diff.resize(2, 0);
            }
            diff[1] = (diff[1] + p - 1) % p;
            let h = gcd(g, &diff, p);
            if h.len() > 1 {
                return false;
            }
        }
        true
    }
}
