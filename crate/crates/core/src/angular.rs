//! Angular-momentum algebra: Wigner 3j and 6j symbols, Clebsch-Gordan
//! coefficients and reduced rotation matrices d^L_{M lambda}(theta).
//!
//! All angular momenta are passed as doubled integers (`tj = 2j`) so that
//! half-integer values stay exact. Symbols are evaluated with exact
//! big-rational arithmetic (converted to f64 only at the end) and memoized
//! behind a thread-safe cache; the evaluation loops of the correlation
//! function reuse identical couplings thousands of times.

use std::collections::HashMap;
use std::sync::Mutex;

use num::bigint::BigInt;
use num::{One, Signed, Zero};
use once_cell::sync::Lazy;

/// Exact half-integer angular momentum, stored as 2j (and 2m where a
/// projection is carried).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AngMom {
    pub twice_j: i32,
    pub twice_m: i32,
}

impl AngMom {
    /// A (j, m) pair; panics if 2j < 0, |2m| > 2j or the parities differ.
    pub fn new(twice_j: i32, twice_m: i32) -> Self {
        assert!(twice_j >= 0, "twice_j must be non-negative");
        assert!(twice_m.abs() <= twice_j, "|m| must not exceed j");
        assert!(
            (twice_j - twice_m) % 2 == 0,
            "2j and 2m must have equal parity"
        );
        Self { twice_j, twice_m }
    }

    pub fn j(&self) -> f64 {
        self.twice_j as f64 / 2.0
    }

    pub fn m(&self) -> f64 {
        self.twice_m as f64 / 2.0
    }
}

fn valid_jm(tj: i32, tm: i32) -> bool {
    tj >= 0 && tm.abs() <= tj && (tj - tm) % 2 == 0
}

fn triangle_ok(tj1: i32, tj2: i32, tj3: i32) -> bool {
    tj3 >= (tj1 - tj2).abs() && tj3 <= tj1 + tj2 && (tj1 + tj2 + tj3) % 2 == 0
}

fn factorial_big(n: i32) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= i;
    }
    acc
}

/// f64 of a big-integer ratio, safe against intermediate overflow.
fn big_ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let sign = if (num.is_negative()) ^ (den.is_negative()) {
        -1.0
    } else {
        1.0
    };
    let (n, d) = (num.abs(), den.abs());
    let shift = n.bits() as i64 - d.bits() as i64;
    // bring the ratio near 1 before converting
    let (n, d) = if shift > 0 {
        (n, d << shift as u64)
    } else {
        (n << (-shift) as u64, d)
    };
    let scale = 52u64;
    let q = (n << scale) / d;
    let mantissa = q.to_string().parse::<f64>().unwrap_or(f64::MAX);
    sign * mantissa * 2f64.powi(shift as i32 - scale as i32)
}

/// Exact triangle coefficient Delta(j1 j2 j3) as a (num, den) pair of
/// big integers: (j1+j2-j3)!(j1-j2+j3)!(-j1+j2+j3)!/(j1+j2+j3+1)!.
fn triangle_coeff(tj1: i32, tj2: i32, tj3: i32) -> (BigInt, BigInt) {
    let num = factorial_big((tj1 + tj2 - tj3) / 2)
        * factorial_big((tj1 - tj2 + tj3) / 2)
        * factorial_big((-tj1 + tj2 + tj3) / 2);
    let den = factorial_big((tj1 + tj2 + tj3) / 2 + 1);
    (num, den)
}

fn wigner3j_exact(tj1: i32, tj2: i32, tj3: i32, tm1: i32, tm2: i32, tm3: i32) -> f64 {
    // Racah sum with exact rational terms. The sum S and the radical R are
    // kept exact; the result is sign(S) * sqrt(R * S^2) with a single
    // conversion to f64 at the end, so cancellation inside the sum cannot
    // limit the accuracy.
    let mut sum_num = BigInt::zero();
    let mut sum_den = BigInt::one();

    let k_min = 0.max((tj2 - tj3 - tm1) / 2).max((tj1 - tj3 + tm2) / 2);
    let k_max = ((tj1 + tj2 - tj3) / 2)
        .min((tj1 - tm1) / 2)
        .min((tj2 + tm2) / 2);
    if k_max < k_min {
        return 0.0;
    }
    for k in k_min..=k_max {
        let d = factorial_big(k)
            * factorial_big((tj1 + tj2 - tj3) / 2 - k)
            * factorial_big((tj1 - tm1) / 2 - k)
            * factorial_big((tj2 + tm2) / 2 - k)
            * factorial_big((tj3 - tj2 + tm1) / 2 + k)
            * factorial_big((tj3 - tj1 - tm2) / 2 + k);
        let term_num = if k % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        // sum += term_num / d
        sum_num = sum_num * &d + term_num * &sum_den;
        sum_den *= d;
    }
    if sum_num.is_zero() {
        return 0.0;
    }

    let (tri_n, tri_d) = triangle_coeff(tj1, tj2, tj3);
    let rad_num = tri_n
        * factorial_big((tj1 + tm1) / 2)
        * factorial_big((tj1 - tm1) / 2)
        * factorial_big((tj2 + tm2) / 2)
        * factorial_big((tj2 - tm2) / 2)
        * factorial_big((tj3 + tm3) / 2)
        * factorial_big((tj3 - tm3) / 2);

    // R * S^2 exactly, then sqrt in f64
    let total_num = rad_num * &sum_num * &sum_num;
    let total_den = tri_d * &sum_den * &sum_den;
    let mag = big_ratio_to_f64(&total_num, &total_den).sqrt();

    let mut sign = if sum_num.is_negative() { -1.0 } else { 1.0 };
    if ((tj1 - tj2 - tm3) / 2) % 2 != 0 {
        sign = -sign;
    }
    sign * mag
}

static CACHE_3J: Lazy<Mutex<HashMap<[i32; 6], f64>>> = Lazy::new(|| Mutex::new(HashMap::new()));
static CACHE_6J: Lazy<Mutex<HashMap<[i32; 6], f64>>> = Lazy::new(|| Mutex::new(HashMap::new()));

/// Wigner 3j symbol with all arguments doubled. Invalid couplings return 0.
pub fn wigner3j(tj1: i32, tj2: i32, tj3: i32, tm1: i32, tm2: i32, tm3: i32) -> f64 {
    if !valid_jm(tj1, tm1) || !valid_jm(tj2, tm2) || !valid_jm(tj3, tm3) {
        return 0.0;
    }
    if tm1 + tm2 + tm3 != 0 || !triangle_ok(tj1, tj2, tj3) {
        return 0.0;
    }
    let key = [tj1, tj2, tj3, tm1, tm2, tm3];
    if let Some(&v) = CACHE_3J.lock().unwrap().get(&key) {
        return v;
    }
    let v = wigner3j_exact(tj1, tj2, tj3, tm1, tm2, tm3);
    CACHE_3J.lock().unwrap().insert(key, v);
    v
}

/// Clebsch-Gordan coefficient <j1 m1 j2 m2 | J M>, doubled arguments.
pub fn clebsch_gordan(tj1: i32, tm1: i32, tj2: i32, tm2: i32, tbig_j: i32, tbig_m: i32) -> f64 {
    if tm1 + tm2 != tbig_m {
        return 0.0;
    }
    let phase = if ((tj1 - tj2 + tbig_m) / 2) % 2 != 0 {
        -1.0
    } else {
        1.0
    };
    phase * ((tbig_j + 1) as f64).sqrt() * wigner3j(tj1, tj2, tbig_j, tm1, tm2, -tbig_m)
}

fn wigner6j_exact(tj1: i32, tj2: i32, tj3: i32, tj4: i32, tj5: i32, tj6: i32) -> f64 {
    let a1 = (tj1 + tj2 + tj3) / 2;
    let a2 = (tj1 + tj5 + tj6) / 2;
    let a3 = (tj4 + tj2 + tj6) / 2;
    let a4 = (tj4 + tj5 + tj3) / 2;
    let b1 = (tj1 + tj2 + tj4 + tj5) / 2;
    let b2 = (tj2 + tj3 + tj5 + tj6) / 2;
    let b3 = (tj3 + tj1 + tj6 + tj4) / 2;

    let k_min = a1.max(a2).max(a3).max(a4);
    let k_max = b1.min(b2).min(b3);
    if k_max < k_min {
        return 0.0;
    }

    let mut sum_num = BigInt::zero();
    let mut sum_den = BigInt::one();
    for k in k_min..=k_max {
        let d = factorial_big(k - a1)
            * factorial_big(k - a2)
            * factorial_big(k - a3)
            * factorial_big(k - a4)
            * factorial_big(b1 - k)
            * factorial_big(b2 - k)
            * factorial_big(b3 - k);
        let n = if k % 2 == 0 {
            factorial_big(k + 1)
        } else {
            -factorial_big(k + 1)
        };
        sum_num = sum_num * &d + n * &sum_den;
        sum_den *= d;
    }
    if sum_num.is_zero() {
        return 0.0;
    }

    let mut rad_num = BigInt::one();
    let mut rad_den = BigInt::one();
    for (a, b, c) in [
        (tj1, tj2, tj3),
        (tj1, tj5, tj6),
        (tj4, tj2, tj6),
        (tj4, tj5, tj3),
    ] {
        let (n, d) = triangle_coeff(a, b, c);
        rad_num *= n;
        rad_den *= d;
    }

    let total_num = rad_num * &sum_num * &sum_num;
    let total_den = rad_den * &sum_den * &sum_den;
    let mag = big_ratio_to_f64(&total_num, &total_den).sqrt();
    if sum_num.is_negative() {
        -mag
    } else {
        mag
    }
}

/// Wigner 6j symbol {j1 j2 j3; j4 j5 j6}, doubled arguments.
/// Returns 0 when any of the four triads violates the triangle rule.
pub fn wigner6j(tj1: i32, tj2: i32, tj3: i32, tj4: i32, tj5: i32, tj6: i32) -> f64 {
    for tj in [tj1, tj2, tj3, tj4, tj5, tj6] {
        if tj < 0 {
            return 0.0;
        }
    }
    if !triangle_ok(tj1, tj2, tj3)
        || !triangle_ok(tj1, tj5, tj6)
        || !triangle_ok(tj4, tj2, tj6)
        || !triangle_ok(tj4, tj5, tj3)
    {
        return 0.0;
    }
    let key = [tj1, tj2, tj3, tj4, tj5, tj6];
    if let Some(&v) = CACHE_6J.lock().unwrap().get(&key) {
        return v;
    }
    let v = wigner6j_exact(tj1, tj2, tj3, tj4, tj5, tj6);
    CACHE_6J.lock().unwrap().insert(key, v);
    v
}

fn factorial_f64(n: i32) -> f64 {
    let mut acc = 1.0;
    for i in 2..=n {
        acc *= i as f64;
    }
    acc
}

/// Reduced Wigner rotation matrix d^L_{M lambda}(theta), doubled (tL, tM,
/// tlambda). Convention: D^L_{M lambda}(0, theta, 0) = d^L_{M lambda}(theta)
/// with d^L_{M lambda}(0) = delta_{M lambda} (Condon-Shortley phases).
pub fn wigner_small_d(tl: i32, tm: i32, tlam: i32, theta: f64) -> f64 {
    if !valid_jm(tl, tm) || !valid_jm(tl, tlam) {
        return 0.0;
    }
    // d^j_{M,lam} = sqrt((j+M)!(j-M)!(j+lam)!(j-lam)!)
    //   * sum_s (-1)^(M-lam+s) cos(t/2)^(2j+lam-M-2s) sin(t/2)^(M-lam+2s)
    //     / [(j+lam-s)! s! (M-lam+s)! (j-M-s)!]
    let jpm = (tl + tm) / 2;
    let jmm = (tl - tm) / 2;
    let jpl = (tl + tlam) / 2;
    let jml = (tl - tlam) / 2;
    let dml = (tm - tlam) / 2; // M - lambda
    let pref =
        (factorial_f64(jpm) * factorial_f64(jmm) * factorial_f64(jpl) * factorial_f64(jml)).sqrt();
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let s_min = 0.max(-dml);
    let s_max = jpl.min(jmm);
    let mut sum = 0.0;
    for sv in s_min..=s_max {
        let d = factorial_f64(jpl - sv)
            * factorial_f64(sv)
            * factorial_f64(dml + sv)
            * factorial_f64(jmm - sv);
        let sign = if (dml + sv).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let exp_cos = tl - dml - 2 * sv; // 2j + lam - M - 2s
        let exp_sin = dml + 2 * sv; // M - lam + 2s
        sum += sign / d * c.powi(exp_cos) * s.powi(exp_sin);
    }
    pref * sum
}
