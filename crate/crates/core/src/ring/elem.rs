use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use super::params::{signed_mod, ModelRingParams};
use super::residue::Fq;
use crate::error::{Error, Result};

/// An element `sum_{i<N} c_i u^i` of the model ring, known modulo `u^prec`.
///
/// Slot `i` holds a coefficient of `W(F_q)/p^M` in the basis `1, y, ..., y^{f'-1}`;
/// it is kept reduced mod `p^{ceil((prec - i)/N)}`, and is zero for `i >= prec`.
#[derive(Clone)]
pub struct RingElem {
    params: Arc<ModelRingParams>,
    coeffs: Vec<u128>,
    prec: u32,
}

impl PartialEq for RingElem {
    fn eq(&self, other: &Self) -> bool {
        self.prec == other.prec && self.coeffs == other.coeffs && self.params == other.params
    }
}

impl Eq for RingElem {}

impl RingElem {
    fn raw(params: &Arc<ModelRingParams>, coeffs: Vec<u128>, prec: u32) -> Self {
        let mut x = RingElem {
            params: Arc::clone(params),
            coeffs,
            prec: prec.min(params.max_prec()),
        };
        x.canonicalize();
        x
    }

    fn canonicalize(&mut self) {
        let n = self.params.ram_index();
        let f = self.params.residue_degree();
        for i in 0..n {
            let slot = &mut self.coeffs[i as usize * f..(i as usize + 1) * f];
            if i >= self.prec {
                slot.iter_mut().for_each(|c| *c = 0);
            } else {
                let m = (self.prec - i).div_ceil(n);
                let md = self.params.pow[m as usize];
                slot.iter_mut().for_each(|c| *c %= md);
            }
        }
    }

    fn width(params: &ModelRingParams) -> usize {
        params.ram_index() as usize * params.residue_degree()
    }

    /// Exact zero (known to full precision).
    pub fn zero(params: &Arc<ModelRingParams>) -> Self {
        Self::raw(params, vec![0; Self::width(params)], params.max_prec())
    }

    pub fn one(params: &Arc<ModelRingParams>) -> Self {
        Self::from_int(params, 1)
    }

    /// Image of an integer.
    pub fn from_int(params: &Arc<ModelRingParams>, c: i64) -> Self {
        Self::from_w(params, &[c as i128])
    }

    /// Element of the unramified part given by its coefficients in `1, y, ...`.
    pub fn from_w(params: &Arc<ModelRingParams>, w: &[i128]) -> Self {
        let mut coeffs = vec![0; Self::width(params)];
        let m = params.modulus();
        for (j, &c) in w.iter().enumerate().take(params.residue_degree()) {
            coeffs[j] = signed_mod(c, m);
        }
        Self::raw(params, coeffs, params.max_prec())
    }

    /// `u^k`, i.e. `p^{k div N} u^{k mod N}`.
    pub fn u_pow(params: &Arc<ModelRingParams>, k: u32) -> Self {
        let n = params.ram_index();
        let f = params.residue_degree();
        let mut coeffs = vec![0; Self::width(params)];
        let (q, r) = (k / n, k % n);
        if q < params.precision() {
            coeffs[r as usize * f] = params.pow[q as usize];
        }
        Self::raw(params, coeffs, params.max_prec())
    }

    /// The generator `y` of the unramified part (for `f' = 1`, the root of the
    /// linear residue polynomial).
    pub fn y(params: &Arc<ModelRingParams>) -> Self {
        if params.residue_degree() == 1 {
            Self::from_int(params, -params.residue_poly()[0])
        } else {
            Self::from_w(params, &[0, 1])
        }
    }

    /// Builds an element from per-slot coefficient vectors, `slots[i][j]` being
    /// the coefficient of `y^j u^i`. At most `N` slots.
    pub fn from_slots(params: &Arc<ModelRingParams>, slots: &[Vec<i128>]) -> Result<Self> {
        let n = params.ram_index() as usize;
        let f = params.residue_degree();
        if slots.len() > n {
            return Err(Error::Dimension(format!(
                "{} coefficient slots given, ring has N = {n}",
                slots.len()
            )));
        }
        let m = params.modulus();
        let mut coeffs = vec![0; Self::width(params)];
        for (i, s) in slots.iter().enumerate() {
            if s.len() > f {
                return Err(Error::Dimension(format!(
                    "slot {i} has {} entries, residue degree is {f}",
                    s.len()
                )));
            }
            for (j, &c) in s.iter().enumerate() {
                coeffs[i * f + j] = signed_mod(c, m);
            }
        }
        Ok(Self::raw(params, coeffs, params.max_prec()))
    }

    /// A random element of u-adic valuation at least `min_val_u`, full precision.
    pub fn random<R: Rng + ?Sized>(params: &Arc<ModelRingParams>, rng: &mut R, min_val_u: u32) -> Self {
        let m = params.modulus();
        let coeffs = (0..Self::width(params)).map(|_| rng.gen_range(0..m)).collect();
        let x = Self::raw(params, coeffs, params.max_prec());
        &x * &Self::u_pow(params, min_val_u)
    }

    /// A random element of `Z/p^M` (fixed by Frobenius) with valuation at least `min_val_u`.
    pub fn random_fixed<R: Rng + ?Sized>(
        params: &Arc<ModelRingParams>,
        rng: &mut R,
        min_val_u: u32,
    ) -> Self {
        let m = params.modulus();
        let f = params.residue_degree();
        let mut coeffs = vec![0; Self::width(params)];
        for i in 0..params.ram_index() as usize {
            coeffs[i * f] = rng.gen_range(0..m);
        }
        let x = Self::raw(params, coeffs, params.max_prec());
        &x * &Self::u_pow(params, min_val_u)
    }

    pub fn params(&self) -> &Arc<ModelRingParams> {
        &self.params
    }

    /// Absolute u-adic precision: the element is known mod `u^prec`.
    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// Coefficient vector of slot `i`.
    pub fn slot(&self, i: usize) -> &[u128] {
        let f = self.params.residue_degree();
        &self.coeffs[i * f..(i + 1) * f]
    }

    /// Same element with precision lowered to `prec` (never raised).
    pub fn with_prec(&self, prec: u32) -> Self {
        Self::raw(&self.params, self.coeffs.clone(), self.prec.min(prec))
    }

    /// Valuation in units of `1/N`; `None` when indistinguishable from zero.
    pub fn val_u(&self) -> Option<u32> {
        let n = self.params.ram_index();
        (0..n)
            .filter_map(|i| {
                self.slot(i as usize)
                    .iter()
                    .filter_map(|&c| self.params.vp(c))
                    .min()
                    .map(|k| k * n + i)
            })
            .min()
    }

    /// Valuation normalised by `v(p) = 1`; `None` stands for "below precision".
    pub fn valuation(&self) -> Option<BigRational> {
        self.val_u().map(|k| {
            BigRational::new(BigInt::from(k), BigInt::from(self.params.ram_index()))
        })
    }

    /// Valuation with `⊥` read as the precision bound, as used by precision propagation.
    fn val_or_prec(&self) -> u32 {
        self.val_u().unwrap_or(self.prec)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn is_unit(&self) -> bool {
        self.val_u() == Some(0)
    }

    /// Reduction to the residue field.
    pub fn residue(&self) -> Fq {
        let p = self.params.p() as u128;
        Fq(self.slot(0).iter().map(|&c| (c % p) as u64).collect())
    }

    /// `self^k` by repeated squaring.
    pub fn pow(&self, mut k: u128) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(&self.params);
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        acc
    }

    /// Teichmüller lift of a residue class: the limit of `x^(q^k)`.
    pub fn teichmuller(params: &Arc<ModelRingParams>, a: &Fq) -> Self {
        let w: Vec<i128> = a.0.iter().map(|&c| c as i128).collect();
        let q = params.residue_field().order();
        (0..params.precision()).fold(Self::from_w(params, &w), |x, _| x.pow(q))
    }

    /// A primitive `e`-th root of unity in the unramified part, if `e` divides
    /// `q - 1`.
    pub fn root_of_unity(params: &Arc<ModelRingParams>, e: u64) -> Option<Self> {
        let k = params.residue_field();
        let q = k.order();
        if e == 0 || !(q - 1).is_multiple_of(e as u128) {
            return None;
        }
        let f = params.residue_degree();
        let p = params.p();
        for idx in 1..q {
            let mut digits = Vec::with_capacity(f);
            let mut r = idx;
            for _ in 0..f {
                digits.push((r % p as u128) as u64);
                r /= p as u128;
            }
            let a = Fq(digits);
            let has_order_e = k.pow(&a, e as u128) == k.one()
                && (1..e).all(|j| !e.is_multiple_of(j) || k.pow(&a, j as u128) != k.one());
            if has_order_e {
                return Some(Self::teichmuller(params, &a));
            }
        }
        None
    }

    /// Frobenius lift, acting on every slot's unramified coefficient (`u -> u`).
    pub fn frobenius(&self) -> Self {
        let f = self.params.residue_degree();
        if f == 1 {
            return self.clone();
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for chunk in self.coeffs.chunks(f) {
            coeffs.extend(self.params.w_frobenius(chunk));
        }
        Self::raw(&self.params, coeffs, self.prec)
    }

    /// Frobenius applied `k` times.
    pub fn frobenius_pow(&self, k: usize) -> Self {
        let k = k % self.params.residue_degree();
        (0..k).fold(self.clone(), |x, _| x.frobenius())
    }

    pub fn is_frobenius_fixed(&self) -> bool {
        self.coeffs
            .chunks(self.params.residue_degree())
            .all(|w| w[1..].iter().all(|&c| c == 0))
    }

    fn check(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.params, &other.params) || self.params == other.params {
            Ok(())
        } else {
            Err(Error::ParamsMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| self.params.add_mod(a, b))
            .collect();
        Ok(Self::raw(&self.params, coeffs, self.prec.min(other.prec)))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| self.params.sub_mod(a, b))
            .collect();
        Ok(Self::raw(&self.params, coeffs, self.prec.min(other.prec)))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let prm = &self.params;
        let n = prm.ram_index() as usize;
        let f = prm.residue_degree();
        let p = prm.pow[1];
        let mut acc = vec![0u128; n * f];
        for i in 0..n {
            let a = self.slot(i);
            if a.iter().all(|&c| c == 0) {
                continue;
            }
            for j in 0..n {
                let b = other.slot(j);
                if b.iter().all(|&c| c == 0) {
                    continue;
                }
                let mut prod = prm.w_mul(a, b);
                let mut k = i + j;
                if k >= n {
                    // u^N = p
                    k -= n;
                    prod.iter_mut().for_each(|c| *c = prm.mul_mod(*c, p));
                }
                for (t, c) in prod.into_iter().enumerate() {
                    acc[k * f + t] = prm.add_mod(acc[k * f + t], c);
                }
            }
        }
        let prec = (self.prec + other.val_or_prec())
            .min(other.prec + self.val_or_prec())
            .min(prm.max_prec());
        Ok(Self::raw(prm, acc, prec))
    }

    /// Exact division by `u^k` of an element of valuation at least `k`;
    /// precision drops by `k`.
    pub fn shift_down(&self, k: u32) -> Result<Self> {
        if let Some(v) = self.val_u() {
            if v < k {
                return Err(Error::NotDivisible { dividend: v, divisor: k });
            }
        }
        if k > self.prec {
            return Err(Error::precision(format!(
                "cannot divide by u^{k} an element known only mod u^{}",
                self.prec
            )));
        }
        let prm = &self.params;
        let n = prm.ram_index() as i64;
        let f = prm.residue_degree();
        let mut out = vec![0u128; self.coeffs.len()];
        for i in 0..n {
            let c = self.slot(i as usize);
            if c.iter().all(|&x| x == 0) {
                continue;
            }
            let t = i - k as i64;
            let (q, r) = (t.div_euclid(n), t.rem_euclid(n) as usize);
            for (j, &x) in c.iter().enumerate() {
                let y = if q >= 0 {
                    if q as u32 >= prm.precision() {
                        0
                    } else {
                        prm.mul_mod(x, prm.pow[q as usize])
                    }
                } else {
                    x / prm.pow[(-q) as usize]
                };
                out[r * f + j] = prm.add_mod(out[r * f + j], y);
            }
        }
        Ok(Self::raw(prm, out, self.prec - k))
    }

    /// Inverse of a unit by Newton iteration from the residue inverse.
    pub fn unit_inverse(&self) -> Result<Self> {
        if !self.is_unit() {
            return Err(match self.val_u() {
                None => Error::DivideByIndistinguishableZero,
                Some(v) => Error::NotDivisible { dividend: 0, divisor: v },
            });
        }
        let prm = &self.params;
        let w0 = prm
            .w_inv(self.slot(0))
            .expect("unit has invertible constant term");
        let mut x = Self::from_w(prm, &w0.iter().map(|&c| c as i128).collect::<Vec<_>>());
        let two = Self::from_int(prm, 2);
        let mut known = 1u32;
        while known < self.prec {
            x = &x * &(&two - &(self * &x));
            known *= 2;
        }
        Ok(x.with_prec(self.prec))
    }

    /// `self / other`, requiring `v(other) <= v(self)`.
    pub fn try_div(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let k = other.val_u().ok_or(Error::DivideByIndistinguishableZero)?;
        let num = self.shift_down(k)?;
        let den = other.shift_down(k)?;
        let q = &num * &den.unit_inverse()?;
        if q.prec < 1 {
            return Err(Error::precision("quotient has no significant digits"));
        }
        Ok(q)
    }

    /// Coefficient of a slot as a signed integer in `(-p^M/2, p^M/2]`, for display.
    fn signed(&self, c: u128) -> i128 {
        let m = self.params.modulus();
        if c > m / 2 {
            -((m - c) as i128)
        } else {
            c as i128
        }
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $call:ident) => {
        impl $tr<&RingElem> for &RingElem {
            type Output = RingElem;
            fn $method(self, rhs: &RingElem) -> RingElem {
                self.$call(rhs).expect("operands from different model rings")
            }
        }
        impl $tr<RingElem> for RingElem {
            type Output = RingElem;
            fn $method(self, rhs: RingElem) -> RingElem {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, try_add);
forward_binop!(Sub, sub, try_sub);
forward_binop!(Mul, mul, try_mul);

impl Neg for &RingElem {
    type Output = RingElem;
    fn neg(self) -> RingElem {
        &RingElem::zero(&self.params).with_prec(self.prec) - self
    }
}

impl Neg for RingElem {
    type Output = RingElem;
    fn neg(self) -> RingElem {
        -&self
    }
}

impl fmt::Display for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let deg = self.params.residue_degree();
        let mut terms = Vec::new();
        for i in 0..self.params.ram_index() as usize {
            let w = self.slot(i);
            let parts: Vec<String> = w
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(j, &c)| {
                    let c = self.signed(c);
                    match j {
                        0 => format!("{c}"),
                        1 => format!("{c}*y"),
                        _ => format!("{c}*y^{j}"),
                    }
                })
                .collect();
            if parts.is_empty() {
                continue;
            }
            let coeff = if parts.len() == 1 || deg == 1 {
                parts.join("+")
            } else {
                format!("({})", parts.join("+"))
            };
            terms.push(match i {
                0 => coeff,
                1 => format!("{coeff}*u"),
                _ => format!("{coeff}*u^{i}"),
            });
        }
        if terms.is_empty() {
            write!(f, "0")?;
        } else {
            write!(f, "{}", terms.join(" + "))?;
        }
        write!(f, " + O(u^{})", self.prec)
    }
}

impl fmt::Debug for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::ModelRingParams;

    fn ring(p: u64, f: usize, n: u32, m: u32) -> Arc<ModelRingParams> {
        ModelRingParams::new(p, f, n, m, None).unwrap()
    }

    #[test]
    fn u_to_the_n_is_p() {
        let r = ring(5, 1, 6, 4);
        let h = RingElem::u_pow(&r, 3);
        assert_eq!(&h * &h, RingElem::from_int(&r, 5));
        let r2 = ring(2, 1, 2, 8);
        let u = RingElem::u_pow(&r2, 1);
        assert!((&(&u * &u) - &RingElem::from_int(&r2, 2)).is_zero());
    }

    #[test]
    fn truncation_drops_high_terms() {
        let r = ring(3, 1, 2, 4);
        let big = RingElem::from_int(&r, 81);
        assert_eq!(&RingElem::one(&r) + &big, RingElem::one(&r));
    }

    #[test]
    fn valuations() {
        let r = ring(5, 1, 6, 4);
        assert_eq!(RingElem::from_int(&r, 5).val_u(), Some(6));
        assert_eq!(RingElem::zero(&r).valuation(), None);
        assert_eq!(
            RingElem::u_pow(&r, 5).valuation(),
            Some(BigRational::new(5.into(), 6.into()))
        );
    }

    #[test]
    fn division() {
        let r = ring(5, 1, 6, 4);
        let h = RingElem::u_pow(&r, 3);
        let q = RingElem::from_int(&r, 5).try_div(&h).unwrap();
        assert!((&q - &h).with_prec(q.prec()).is_zero());
        let u = RingElem::u_pow(&r, 1);
        let one = u.try_div(&u).unwrap();
        assert!((&one - &RingElem::one(&r)).is_zero());

        let r = ring(3, 1, 2, 4);
        let u = RingElem::u_pow(&r, 1);
        let a = &RingElem::from_int(&r, 3) + &u;
        let q = a.try_div(&u).unwrap();
        let back = &q * &u;
        assert!(back.prec() >= 7);
        assert!((&back - &a).is_zero());
        assert!(matches!(
            RingElem::one(&r).try_div(&RingElem::zero(&r)),
            Err(Error::DivideByIndistinguishableZero)
        ));
        assert!(matches!(
            RingElem::one(&r).try_div(&u),
            Err(Error::NotDivisible { .. })
        ));
    }

    #[test]
    fn residues() {
        let r = ring(2, 1, 2, 6);
        let u = RingElem::u_pow(&r, 1);
        assert_eq!((&RingElem::one(&r) + &u).residue(), Fq(vec![1]));
        assert!(RingElem::from_int(&r, 2).residue().is_zero());
        assert!((-&u).residue().is_zero());
    }

    #[test]
    fn frobenius_has_order_f() {
        let r = ring(3, 2, 1, 2);
        let y = RingElem::y(&r);
        let sy = y.frobenius();
        assert_ne!(sy, y);
        assert_eq!(sy.frobenius(), y);
        // reduces to y^3
        let k = r.residue_field();
        assert_eq!(sy.residue(), k.pow(&y.residue(), 3));
        let c = RingElem::from_int(&r, 7);
        assert_eq!(c.frobenius(), c);
        let r1 = ring(5, 1, 3, 4);
        let x = &RingElem::from_int(&r1, 7) + &RingElem::u_pow(&r1, 2);
        assert_eq!(x.frobenius(), x);
    }

    #[test]
    fn mismatched_params() {
        let a = RingElem::one(&ring(3, 1, 2, 4));
        let b = RingElem::one(&ring(3, 1, 3, 4));
        assert!(matches!(a.try_add(&b), Err(Error::ParamsMismatch)));
    }

    #[test]
    fn unit_inverse_roundtrip() {
        let r = ring(7, 2, 3, 6);
        let x = &RingElem::from_w(&r, &[3, 5]) + &RingElem::u_pow(&r, 4);
        let inv = x.unit_inverse().unwrap();
        assert_eq!(&x * &inv, RingElem::one(&r));
    }

    #[test]
    fn roots_of_unity() {
        let r = ring(7, 1, 1, 8);
        let z = RingElem::root_of_unity(&r, 3).unwrap();
        assert_ne!(z, RingElem::one(&r));
        assert_eq!(z.pow(3), RingElem::one(&r));
        let r4 = ring(2, 2, 1, 10);
        let w = RingElem::root_of_unity(&r4, 3).unwrap();
        assert_eq!(w.pow(3), RingElem::one(&r4));
        assert!(!(&w - &RingElem::one(&r4)).is_zero());
        assert!(RingElem::root_of_unity(&ring(5, 1, 1, 4), 3).is_none());
    }
}
