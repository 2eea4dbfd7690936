//! Rigorous enclosures of the base constants `e`, `gamma`, `zeta(s)` and `pi`.
//!
//! Results are memoized per `(constant, bits)`; the memo table is shared by
//! all threads.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rug::{Float, Integer, Rational};

use crate::error::{invalid, Result};
use crate::exact::{bernoulli_any, factorial};
use crate::interval::Interval;
use crate::precision::PrecisionConfig;

#[derive(Clone, Copy, Debug, Hash, PartialEq, Eq)]
enum Key {
    E(u32),
    Gamma(u32),
    Zeta(u32, u32),
}

fn cache() -> &'static Mutex<HashMap<Key, Interval>> {
    static CACHE: OnceLock<Mutex<HashMap<Key, Interval>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn memo(key: Key, compute: impl FnOnce() -> Result<Interval>) -> Result<Interval> {
    if let Some(v) = cache().lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
        return Ok(v.clone());
    }
    let v = compute()?;
    cache().lock().unwrap_or_else(|e| e.into_inner()).insert(key, v.clone());
    Ok(v)
}

fn pow2(exp: i64) -> Rational {
    if exp >= 0 {
        Rational::from(Integer::from(1) << exp as u32)
    } else {
        Rational::from((Integer::from(1), Integer::from(1) << (-exp) as u32))
    }
}

/// `e` from `sum 1/k!` with the Lagrange remainder `0 < R_K < 3/(K+1)!`.
pub fn enclose_e(cfg: &PrecisionConfig) -> Result<Interval> {
    cfg.validate()?;
    let bits = cfg.bits;
    memo(Key::E(bits), || {
        let target = pow2(-(bits as i64) - 8);
        let mut sum = Rational::new();
        let mut k = 0u32;
        let mut fact = Integer::from(1);
        loop {
            sum += Rational::from((Integer::from(1), fact.clone()));
            k += 1;
            fact *= k;
            // fact = k! = (K+1)! for K = k-1
            let tail = Rational::from((Integer::from(3), fact.clone()));
            if tail < target {
                let hi = Rational::from(&sum + &tail);
                return Interval::from_rationals(&sum, &hi, bits);
            }
        }
    })
}

pub fn enclose_pi(cfg: &PrecisionConfig) -> Interval {
    Interval::pi(cfg.bits)
}

/// Euler's constant by the Brent-McMillan scheme.
///
/// With `U = sum (N^k/k!)^2 (H_k - ln N)` and `V = sum (N^k/k!)^2`,
/// `gamma = U/V - K_0(2N)/I_0(2N)` and `0 < K_0(2N)/I_0(2N) < pi e^{-4N}`.
/// The sums are truncated at `K >= 3N`, past which consecutive terms of `V`
/// shrink by at least 1/9 and those of `sum t_k (k + N)` by at least 2/9, so
/// the tails are at most `9/8 t_{K+1}` and `9/7 t_{K+1} (K+1+N)`.
pub fn enclose_gamma(cfg: &PrecisionConfig) -> Result<Interval> {
    cfg.validate()?;
    let bits = cfg.bits;
    memo(Key::Gamma(bits), || {
        let wp = bits + 64;
        let n = ((bits as f64 + 12.0) * std::f64::consts::LN_2 / 4.0).ceil() as u32 + 1;
        let n_iv = Interval::point_int(n as i64, wp);
        let ln_n = n_iv.ln()?;
        let n_sq = Interval::point_int((n as i64) * (n as i64), wp);
        let eps = Interval::from_rational(&pow2(-(wp as i64)), wp);

        let mut t = Interval::point_int(1, wp);
        let mut h = Interval::point_int(0, wp);
        let mut u = t.mul(&h.sub(&ln_n));
        let mut v = t.clone();
        let mut k = 0u32;
        loop {
            // advance to term k+1
            let k1 = Interval::point_int((k as i64 + 1) * (k as i64 + 1), wp);
            t = t.mul(&n_sq).div(&k1)?;
            h = h.add(&Interval::point_int(1, wp).div(&Interval::point_int(k as i64 + 1, wp))?);
            let weight = Interval::point_int(k as i64 + 1 + n as i64, wp);
            let s = t.mul(&weight);
            if k >= 3 * n && s.hi() < &Float::with_val(wp, eps.lo() * v.lo()) {
                // term k+1 is the first omitted one
                let zero = Float::with_val(wp, 0);
                let v_tail = t.mul_rational(&Rational::from((9, 8)));
                let v_tail = Interval::new(&zero, v_tail.hi(), wp)?;
                let u_rad = s.mul_rational(&Rational::from((9, 7)));
                let neg = Float::with_val(wp, -u_rad.hi());
                let u_tail = Interval::new(&neg, u_rad.hi(), wp)?;
                let ratio = u.add(&u_tail).div(&v.add(&v_tail))?;
                let bessel = Interval::pi(wp).mul(&Interval::point_int(-4 * n as i64, wp).exp());
                let corr = Interval::new(&zero, bessel.hi(), wp)?;
                return Ok(ratio.sub(&corr).with_prec(bits));
            }
            u = u.add(&t.mul(&h.sub(&ln_n)));
            v = v.add(&t);
            k += 1;
        }
    })
}

/// `zeta(s)` for integer `s >= 2` by Euler-Maclaurin summation.
///
/// `zeta(s) = sum_{k<N} k^-s + N^{1-s}/(s-1) + N^-s/2 + sum_{j<p} T_j + R`
/// with `T_j = B_2j/(2j)! s(s+1)...(s+2j-2) N^{-s-2j+1}` and `|R| <= |T_p|`.
/// Every retained term is rational, so the sum is formed exactly.
pub fn enclose_zeta(s: u32, cfg: &PrecisionConfig) -> Result<Interval> {
    if s < 2 {
        return Err(invalid(format!("zeta: s must be >= 2, got {s}")));
    }
    cfg.validate()?;
    let bits = cfg.bits;
    memo(Key::Zeta(s, bits), || {
        let target = pow2(-(bits as i64) - 16);
        let mut n = (bits / 4 + 10).max(s);
        loop {
            if let Some((sum, rad)) = euler_maclaurin(s, n, &target) {
                return Interval::from_mid_rad(&sum, &rad, bits);
            }
            n *= 2;
        }
    })
}

/// Returns `(partial sum, remainder bound)` or `None` if the correction terms
/// stop shrinking before reaching `target`.
fn euler_maclaurin(s: u32, n: u32, target: &Rational) -> Option<(Rational, Rational)> {
    let n_int = Integer::from(n);
    let mut sum = Rational::new();
    for k in 1..n {
        let ks = Integer::from(Integer::u_pow_u(k, s));
        sum += Rational::from((Integer::from(1), ks));
    }
    let n_pow_s = Integer::from(Integer::u_pow_u(n, s));
    // N^{1-s}/(s-1) + N^{-s}/2
    sum += Rational::from((n_int.clone(), Integer::from(&n_pow_s * (s - 1))));
    sum += Rational::from((Integer::from(1), Integer::from(&n_pow_s * 2u32)));

    let mut rising = Integer::from(s); // s (s+1) ... (s+2j-2)
    let mut n_pow = Integer::from(&n_pow_s * &n_int); // N^{s+2j-1}
    let mut prev: Option<Rational> = None;
    for j in 1u32.. {
        let b = bernoulli_any(2 * j);
        let term = b * Rational::from((rising.clone(), factorial(2 * j) * &n_pow));
        let mag = Rational::from(term.abs_ref());
        if mag < *target {
            return Some((sum, mag));
        }
        if let Some(p) = &prev {
            if mag >= *p {
                return None;
            }
        }
        prev = Some(mag);
        sum += term;
        rising *= s + 2 * j - 1;
        rising *= s + 2 * j;
        n_pow *= &n_int;
        n_pow *= &n_int;
    }
    unreachable!()
}
