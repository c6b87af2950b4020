use std::fmt;
use std::sync::Arc;

use super::residue::{fp_poly, ResidueField};
use crate::error::{Error, Result};

/// Default coefficient precision `M` (coefficients known mod `p^M`).
pub const DEFAULT_PRECISION: u32 = 24;

/// Parameters of the truncated model `(W(F_q)/p^M)[u]/(u^N - p)` of `O_K`.
///
/// Valuations are normalised by `v(p) = 1`, so `v(u) = 1/N`.
pub struct ModelRingParams {
    p: u64,
    residue_degree: usize,
    ram_index: u32,
    precision: u32,
    residue_poly: Vec<i64>,
    /// `p^0 ..= p^M`.
    pub(crate) pow: Vec<u128>,
    /// Low coefficients of the defining polynomial, reduced mod `p^M`.
    poly_low: Vec<u128>,
    /// `sigma(y^j)` for `j < f'`, each a coefficient vector mod `p^M`.
    frob_basis: Vec<Vec<u128>>,
    field: ResidueField,
}

impl fmt::Debug for ModelRingParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelRingParams")
            .field("p", &self.p)
            .field("residue_degree", &self.residue_degree)
            .field("ram_index", &self.ram_index)
            .field("precision", &self.precision)
            .field("residue_poly", &self.residue_poly)
            .finish()
    }
}

impl PartialEq for ModelRingParams {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p
            && self.residue_degree == other.residue_degree
            && self.ram_index == other.ram_index
            && self.precision == other.precision
            && self.residue_poly == other.residue_poly
    }
}

impl Eq for ModelRingParams {}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Smallest monic irreducible polynomial of degree `f` over `F_p`, in
/// lexicographic order of its low coefficients `(g_0, ..., g_{f-1})`.
pub fn default_residue_poly(p: u64, f: usize) -> Vec<i64> {
    if f == 1 {
        return vec![0, 1];
    }
    let total = (p as u128).pow(f as u32);
    for idx in 0..total {
        let mut g = Vec::with_capacity(f + 1);
        let mut t = idx;
        for _ in 0..f {
            g.push((t % p as u128) as u64);
            t /= p as u128;
        }
        g.push(1);
        if g[0] != 0 && fp_poly::is_irreducible(&g, p) {
            return g.into_iter().map(|c| c as i64).collect();
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl ModelRingParams {
    /// Builds and validates the parameters. `residue_poly` lists coefficients
    /// low to high including the leading 1; `None` picks [`default_residue_poly`].
    pub fn new(
        p: u64,
        residue_degree: usize,
        ram_index: u32,
        precision: u32,
        residue_poly: Option<Vec<i64>>,
    ) -> Result<Arc<Self>> {
        if !is_prime(p) {
            return Err(Error::InvalidParams(format!("p = {p} is not prime")));
        }
        if residue_degree == 0 || ram_index == 0 || precision == 0 {
            return Err(Error::InvalidParams(
                "residue degree, ramification index and precision must be >= 1".into(),
            ));
        }
        let mut pow = vec![1u128];
        for _ in 0..precision {
            let next = pow
                .last()
                .unwrap()
                .checked_mul(p as u128)
                .filter(|v| *v < (1u128 << 126));
            match next {
                Some(v) => pow.push(v),
                None => {
                    return Err(Error::InvalidParams(format!(
                        "p^M = {p}^{precision} exceeds the 2^126 coefficient limit"
                    )))
                }
            }
        }
        let residue_poly =
            residue_poly.unwrap_or_else(|| default_residue_poly(p, residue_degree));
        if residue_poly.len() != residue_degree + 1 || residue_poly[residue_degree] != 1 {
            return Err(Error::InvalidParams(format!(
                "residue polynomial must be monic of degree {residue_degree}"
            )));
        }
        let reduced: Vec<u64> = residue_poly
            .iter()
            .map(|c| c.rem_euclid(p as i64) as u64)
            .collect();
        if !fp_poly::is_irreducible(&reduced, p) {
            return Err(Error::InvalidParams(format!(
                "residue polynomial {residue_poly:?} is reducible mod {p}"
            )));
        }
        let modulus = pow[precision as usize];
        let poly_low: Vec<u128> = residue_poly[..residue_degree]
            .iter()
            .map(|&c| signed_mod(c as i128, modulus))
            .collect();
        let field = ResidueField::new(p, &reduced[..residue_degree]);
        let mut params = ModelRingParams {
            p,
            residue_degree,
            ram_index,
            precision,
            residue_poly,
            pow,
            poly_low,
            frob_basis: Vec::new(),
            field,
        };
        params.frob_basis = params.compute_frobenius_basis();
        Ok(Arc::new(params))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// `f'`, the degree of the residue field over `F_p`.
    pub fn residue_degree(&self) -> usize {
        self.residue_degree
    }

    /// `N`, with `u^N = p`.
    pub fn ram_index(&self) -> u32 {
        self.ram_index
    }

    /// `M`, coefficients are known mod `p^M`.
    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Absolute u-adic precision cap `N * M`.
    pub fn max_prec(&self) -> u32 {
        self.ram_index * self.precision
    }

    pub fn residue_poly(&self) -> &[i64] {
        &self.residue_poly
    }

    pub fn residue_field(&self) -> &ResidueField {
        &self.field
    }

    pub(crate) fn modulus(&self) -> u128 {
        self.pow[self.precision as usize]
    }

    /// Same `p`, `f'`, residue polynomial and `M` but another ramification index.
    pub fn with_ram_index(&self, ram_index: u32) -> Result<Arc<Self>> {
        Self::new(
            self.p,
            self.residue_degree,
            ram_index,
            self.precision,
            Some(self.residue_poly.clone()),
        )
    }

    /// Same ring with a different coefficient precision `M`.
    pub fn with_precision(&self, precision: u32) -> Result<Arc<Self>> {
        Self::new(
            self.p,
            self.residue_degree,
            self.ram_index,
            precision,
            Some(self.residue_poly.clone()),
        )
    }

    // ---- arithmetic in Z/p^M -------------------------------------------------

    #[inline]
    pub(crate) fn add_mod(&self, a: u128, b: u128) -> u128 {
        let m = self.modulus();
        let s = a + b;
        if s >= m {
            s - m
        } else {
            s
        }
    }

    #[inline]
    pub(crate) fn sub_mod(&self, a: u128, b: u128) -> u128 {
        if a >= b {
            a - b
        } else {
            a + self.modulus() - b
        }
    }

    #[inline]
    pub(crate) fn mul_mod(&self, a: u128, b: u128) -> u128 {
        let m = self.modulus();
        if m <= 1u128 << 64 {
            (a * b) % m
        } else {
            let (mut a, mut b) = (a % m, b % m);
            let mut acc = 0u128;
            while b > 0 {
                if b & 1 == 1 {
                    acc = self.add_mod(acc, a);
                }
                a = self.add_mod(a, a);
                b >>= 1;
            }
            acc
        }
    }

    /// p-adic valuation of a coefficient, `None` for zero.
    pub(crate) fn vp(&self, mut c: u128) -> Option<u32> {
        if c == 0 {
            return None;
        }
        let p = self.p as u128;
        let mut k = 0;
        while c.is_multiple_of(p) {
            c /= p;
            k += 1;
        }
        Some(k)
    }

    // ---- arithmetic in W(F_q)/p^M = (Z/p^M)[y]/(g) ---------------------------

    pub(crate) fn w_add(&self, a: &[u128], b: &[u128]) -> Vec<u128> {
        a.iter().zip(b).map(|(&x, &y)| self.add_mod(x, y)).collect()
    }

    pub(crate) fn w_mul(&self, a: &[u128], b: &[u128]) -> Vec<u128> {
        let f = self.residue_degree;
        if f == 1 {
            return vec![self.mul_mod(a[0], b[0])];
        }
        let mut r = vec![0u128; 2 * f - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                if y != 0 {
                    r[i + j] = self.add_mod(r[i + j], self.mul_mod(x, y));
                }
            }
        }
        for k in (f..2 * f - 1).rev() {
            let c = r[k];
            if c == 0 {
                continue;
            }
            r[k] = 0;
            for (j, &g) in self.poly_low.iter().enumerate() {
                r[k - f + j] = self.sub_mod(r[k - f + j], self.mul_mod(c, g));
            }
        }
        r.truncate(f);
        r
    }

    fn w_one(&self) -> Vec<u128> {
        let mut v = vec![0u128; self.residue_degree];
        v[0] = 1;
        v
    }

    fn w_sub(&self, a: &[u128], b: &[u128]) -> Vec<u128> {
        a.iter().zip(b).map(|(&x, &y)| self.sub_mod(x, y)).collect()
    }

    /// Inverse of a unit of `W/p^M` by Newton iteration from the residue inverse.
    pub(crate) fn w_inv(&self, a: &[u128]) -> Option<Vec<u128>> {
        let p = self.p as u128;
        let bar = super::residue::Fq(a.iter().map(|&c| (c % p) as u64).collect());
        let inv0 = self.field.inv(&bar)?;
        let mut x: Vec<u128> = inv0.0.iter().map(|&c| c as u128).collect();
        let two = {
            let mut v = vec![0u128; self.residue_degree];
            v[0] = 2 % self.modulus();
            v
        };
        let mut known = 1u32;
        while known < self.precision {
            let ax = self.w_mul(a, &x);
            x = self.w_mul(&x, &self.w_sub(&two, &ax));
            known *= 2;
        }
        Some(x)
    }

    fn compute_frobenius_basis(&self) -> Vec<Vec<u128>> {
        let f = self.residue_degree;
        if f == 1 {
            return vec![self.w_one()];
        }
        // Root of g congruent to y^p mod p, lifted by Newton's method.
        let mut y = vec![0u128; f];
        y[1] = 1;
        let mut z = self.w_one();
        let mut base = y.clone();
        let mut e = self.p;
        while e > 0 {
            if e & 1 == 1 {
                z = self.w_mul(&z, &base);
            }
            base = self.w_mul(&base, &base);
            e >>= 1;
        }
        let mut known = 1u32;
        while known < self.precision {
            let (gz, dgz) = self.eval_poly_and_derivative(&z);
            let inv = self
                .w_inv(&dgz)
                .expect("derivative of a separable polynomial at a simple root is a unit");
            z = self.w_sub(&z, &self.w_mul(&gz, &inv));
            known *= 2;
        }
        let mut out = Vec::with_capacity(f);
        let mut acc = self.w_one();
        for _ in 0..f {
            out.push(acc.clone());
            acc = self.w_mul(&acc, &z);
        }
        out
    }

    fn eval_poly_and_derivative(&self, z: &[u128]) -> (Vec<u128>, Vec<u128>) {
        let f = self.residue_degree;
        let m = self.modulus();
        // Horner on g(Y) = Y^f + sum g_j Y^j, with coefficients lifted to W.
        let coeff = |j: usize| -> Vec<u128> {
            let mut v = vec![0u128; f];
            v[0] = if j == f { 1 } else { self.poly_low[j] };
            v
        };
        let mut val = coeff(f);
        let mut der = vec![0u128; f];
        for j in (0..f).rev() {
            der = self.w_add(&self.w_mul(&der, z), &val);
            val = self.w_add(&self.w_mul(&val, z), &coeff(j));
        }
        let _ = m;
        (val, der)
    }

    /// `sigma` on a coefficient vector of `W/p^M`.
    pub(crate) fn w_frobenius(&self, a: &[u128]) -> Vec<u128> {
        if self.residue_degree == 1 {
            return a.to_vec();
        }
        let mut out = vec![0u128; self.residue_degree];
        for (j, &c) in a.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (k, &b) in self.frob_basis[j].iter().enumerate() {
                out[k] = self.add_mod(out[k], self.mul_mod(c, b));
            }
        }
        out
    }
}

/// Representative of `c mod m` in `[0, m)`.
pub(crate) fn signed_mod(c: i128, m: u128) -> u128 {
    if c >= 0 {
        (c as u128) % m
    } else {
        let r = ((-c) as u128) % m;
        if r == 0 {
            0
        } else {
            m - r
        }
    }
}
