//! Arithmetic in GF(p) for small primes, polynomials, and Reed–Solomon decoding.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Largest modulus whose elements still fit the u16 wire encoding.
pub const MAX_MODULUS: u32 = 65521;

/// Field context. Elements are `u32` values in `0..p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Field {
    p: u32,
}

pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl Field {
    pub fn new(p: u32) -> Result<Self> {
        if !is_prime(p) {
            return param(format!("modulus {p} is not prime"));
        }
        if p > MAX_MODULUS {
            return param(format!("modulus {p} exceeds {MAX_MODULUS}"));
        }
        Ok(Field { p })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    pub fn pow(&self, mut base: u32, mut exp: u64) -> u32 {
        let mut acc = 1 % self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(&self, a: u32) -> u32 {
        assert!(!a.is_multiple_of(self.p), "inverse of zero");
        self.pow(a, self.p as u64 - 2)
    }

    pub fn reduce(&self, v: u64) -> u32 {
        (v % self.p as u64) as u32
    }

    /// Horner evaluation of a low-degree-first coefficient vector.
    pub fn eval(&self, poly: &[u32], x: u32) -> u32 {
        poly.iter().rev().fold(0, |acc, &c| self.add(self.mul(acc, x), c))
    }

    /// Coefficients of the unique polynomial of degree < len through the points.
    pub fn interpolate(&self, points: &[(u32, u32)]) -> Vec<u32> {
        let n = points.len();
        let mut out = vec![0u32; n];
        for (i, &(xi, yi)) in points.iter().enumerate() {
            // basis numerator prod_{j != i} (x - xj), built incrementally
            let mut basis = vec![1u32];
            let mut denom = 1u32;
            for (j, &(xj, _)) in points.iter().enumerate() {
                if i == j {
                    continue;
                }
                let mut next = vec![0u32; basis.len() + 1];
                for (k, &c) in basis.iter().enumerate() {
                    next[k + 1] = self.add(next[k + 1], c);
                    next[k] = self.sub(next[k], self.mul(c, xj));
                }
                basis = next;
                denom = self.mul(denom, self.sub(xi, xj));
            }
            let scale = self.mul(yi, self.inv(denom));
            for (k, &c) in basis.iter().enumerate() {
                out[k] = self.add(out[k], self.mul(c, scale));
            }
        }
        out
    }

    /// Lagrange weights w_i with f(0) = sum w_i f(x_i) for deg f < |xs|.
    pub fn lagrange_at_zero(&self, xs: &[u32]) -> Vec<u32> {
        xs.iter()
            .enumerate()
            .map(|(i, &xi)| {
                let mut num = 1u32;
                let mut den = 1u32;
                for (j, &xj) in xs.iter().enumerate() {
                    if i != j {
                        num = self.mul(num, self.neg(xj));
                        den = self.mul(den, self.sub(xi, xj));
                    }
                }
                self.mul(num, self.inv(den))
            })
            .collect()
    }

    /// Decodes a degree-`degree` Reed–Solomon codeword from (x, y) symbols with
    /// distinct x. Missing symbols are erasures and are simply left out. Up to
    /// floor((N - degree - 1) / 2) wrong symbols are corrected.
    pub fn rs_decode(&self, points: &[(u32, u32)], degree: usize) -> Option<Vec<u32>> {
        let n = points.len();
        if n < degree + 1 {
            return None;
        }
        let max_err = (n - degree - 1) / 2;
        let agree = |f: &[u32]| points.iter().filter(|&&(x, y)| self.eval(f, x) == y).count();

        let mut guess = self.interpolate(&points[..degree + 1]);
        guess.resize(degree + 1, 0);
        if agree(&guess) >= n - max_err {
            return Some(guess);
        }
        if max_err == 0 {
            return None;
        }
        let f = self.berlekamp_welch(points, degree, max_err)?;
        (agree(&f) >= n - max_err).then_some(f)
    }

    fn berlekamp_welch(&self, points: &[(u32, u32)], degree: usize, e: usize) -> Option<Vec<u32>> {
        // Unknowns: E_0..E_{e-1} (E monic of degree e), then Q_0..Q_{e+degree}.
        // Row per point: sum_j Q_j x^j - y sum_l E_l x^l = y x^e.
        let q_len = e + degree + 1;
        let cols = e + q_len;
        let mut rows: Vec<Vec<u32>> = Vec::with_capacity(points.len());
        for &(x, y) in points {
            let mut row = vec![0u32; cols + 1];
            let mut xp = 1u32;
            for l in 0..q_len.max(e + 1) {
                if l < e {
                    row[l] = self.neg(self.mul(y, xp));
                }
                if l < q_len {
                    row[e + l] = xp;
                }
                if l == e {
                    row[cols] = self.mul(y, xp);
                }
                xp = self.mul(xp, x);
            }
            rows.push(row);
        }
        let sol = self.solve(rows, cols)?;
        let mut err_poly = sol[..e].to_vec();
        err_poly.push(1);
        let q = &sol[e..];
        let (quot, rem) = self.poly_divmod(q, &err_poly);
        if rem.iter().any(|&c| c != 0) {
            return None;
        }
        let mut f = quot;
        f.resize(degree + 1, 0);
        Some(f)
    }

    /// Gaussian elimination on an augmented matrix; free variables set to zero.
    fn solve(&self, mut m: Vec<Vec<u32>>, cols: usize) -> Option<Vec<u32>> {
        let rows = m.len();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            let Some(pr) = (r..rows).find(|&i| m[i][c] != 0) else { continue };
            m.swap(r, pr);
            let inv = self.inv(m[r][c]);
            for v in m[r].iter_mut() {
                *v = self.mul(*v, inv);
            }
            for i in 0..rows {
                if i != r && m[i][c] != 0 {
                    let factor = m[i][c];
                    for k in c..=cols {
                        let t = self.mul(factor, m[r][k]);
                        m[i][k] = self.sub(m[i][k], t);
                    }
                }
            }
            pivots.push(c);
            r += 1;
            if r == rows {
                break;
            }
        }
        if m[r..].iter().any(|row| row[cols] != 0) {
            return None;
        }
        let mut sol = vec![0u32; cols];
        for (i, &c) in pivots.iter().enumerate() {
            sol[c] = m[i][cols];
        }
        Some(sol)
    }

    /// Polynomial long division; `den` must have a nonzero leading coefficient.
    pub fn poly_divmod(&self, num: &[u32], den: &[u32]) -> (Vec<u32>, Vec<u32>) {
        let mut rem = num.to_vec();
        let dd = den.len() - 1;
        let lead_inv = self.inv(den[dd]);
        if num.len() <= dd {
            return (vec![0], rem);
        }
        let mut quot = vec![0u32; num.len() - dd];
        for i in (0..quot.len()).rev() {
            let coef = self.mul(rem[i + dd], lead_inv);
            quot[i] = coef;
            if coef != 0 {
                for (j, &d) in den.iter().enumerate() {
                    rem[i + j] = self.sub(rem[i + j], self.mul(coef, d));
                }
            }
        }
        rem.truncate(dd);
        (quot, rem)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn rejects_composite_and_oversize_moduli() {
        assert!(Field::new(256).is_err());
        assert!(Field::new(65537).is_err());
        assert!(Field::new(257).is_ok());
    }

    #[test]
    fn fermat_inverse() {
        let f = Field::new(257).unwrap();
        for a in 1..257 {
            assert_eq!(f.mul(a, f.inv(a)), 1);
        }
    }

    #[test]
    fn interpolation_recovers_coefficients() {
        let f = Field::new(7).unwrap();
        let poly = [3, 2, 5];
        let pts: Vec<_> = (1..=3).map(|x| (x, f.eval(&poly, x))).collect();
        assert_eq!(f.interpolate(&pts), poly.to_vec());
    }

    #[test]
    fn lagrange_weights_reconstruct_constant() {
        let f = Field::new(257).unwrap();
        let poly = [99, 4, 200, 17];
        let xs = [1, 2, 3, 4, 5];
        let w = f.lagrange_at_zero(&xs);
        let s = xs.iter().zip(&w).fold(0, |acc, (&x, &wi)| f.add(acc, f.mul(wi, f.eval(&poly, x))));
        assert_eq!(s, 99);
    }

    fn brute_force_decode(f: &Field, pts: &[(u32, u32)], degree: usize) -> Option<Vec<u32>> {
        // Unique polynomial within the decoding radius, found by exhaustive search.
        let p = f.p();
        let max_err = (pts.len() - degree - 1) / 2;
        let mut found = None;
        let total = (p as u64).pow(degree as u32 + 1);
        for code in 0..total {
            let mut c = code;
            let poly: Vec<u32> = (0..=degree)
                .map(|_| {
                    let v = (c % p as u64) as u32;
                    c /= p as u64;
                    v
                })
                .collect();
            let bad = pts.iter().filter(|&&(x, y)| f.eval(&poly, x) != y).count();
            if bad <= max_err {
                assert!(found.is_none(), "two codewords within radius");
                found = Some(poly);
            }
        }
        found
    }

    #[test]
    fn berlekamp_welch_matches_brute_force() {
        let f = Field::new(7).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        for _ in 0..300 {
            let n = rng.gen_range(2..=6usize);
            let degree = rng.gen_range(0..n);
            let poly: Vec<u32> = (0..=degree).map(|_| rng.gen_range(0..7)).collect();
            let mut pts: Vec<(u32, u32)> = (1..=n as u32).map(|x| (x, f.eval(&poly, x))).collect();
            let errs = rng.gen_range(0..=n);
            for _ in 0..errs {
                let i = rng.gen_range(0..n);
                pts[i].1 = rng.gen_range(0..7);
            }
            assert_eq!(f.rs_decode(&pts, degree), brute_force_decode(&f, &pts, degree), "{pts:?} deg {degree}");
        }
    }

    proptest! {
        #[test]
        fn corrects_up_to_radius(seed in any::<u64>(), errs in 0usize..=3) {
            let f = Field::new(257).unwrap();
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let (n, degree) = (10usize, 2usize);
            let poly: Vec<u32> = (0..=degree).map(|_| rng.gen_range(0..257)).collect();
            let mut pts: Vec<(u32, u32)> = (1..=n as u32).map(|x| (x, f.eval(&poly, x))).collect();
            for i in 0..errs {
                pts[i * 3].1 = f.add(pts[i * 3].1, rng.gen_range(1..257));
            }
            prop_assert_eq!(f.rs_decode(&pts, degree), Some(poly));
        }
    }
}
