//! Moment/cumulant conversion and the polynomial relations `P_n`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rug::{Integer, Rational};

use crate::consts::enclose_zeta;
use crate::error::{invalid, Error, Result};
use crate::exact::{binomial, even_zeta_coeff, factorial};
use crate::interval::Interval;
use crate::poly::{Monomial, Poly, VarId};
use crate::precision::PrecisionConfig;
use crate::sequences::gamma_all;

#[derive(Clone, Copy, Debug, Hash, PartialEq, Eq)]
enum Key {
    Moment(u32),
    Cumulant(u32),
    P(u32),
}

fn memo(key: Key, compute: impl FnOnce() -> Poly) -> Poly {
    static CACHE: OnceLock<Mutex<HashMap<Key, Poly>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
        return p.clone();
    }
    let p = compute();
    cache.lock().unwrap_or_else(|e| e.into_inner()).insert(key, p.clone());
    p
}

/// Complete Bell polynomial `B_n(kappa_1..kappa_n)` via
/// `B_n = sum_{j<n} C(n-1, j) kappa_{n-j} B_j`, `B_0 = 1`.
pub fn moment_from_cumulants(n: u32) -> Poly {
    if n == 0 {
        return Poly::constant(1);
    }
    memo(Key::Moment(n), || {
        let mut acc = Poly::zero();
        for j in 0..n {
            let c = Rational::from(binomial(n - 1, j));
            let t = moment_from_cumulants(j).mul(&Poly::var(VarId::kappa(n - j))).scale(&c);
            acc = acc.add(&t);
        }
        acc
    })
}

/// `gamma^(0) = 1`, `gamma^(k)` otherwise.
fn moment_var(j: u32) -> Poly {
    if j == 0 {
        Poly::constant(1)
    } else {
        Poly::var(VarId::gamma(j))
    }
}

/// `kappa_l` as a polynomial in the moments `gamma^(1..l)`:
/// `kappa_l = mu_l - sum_{i<=l-2} C(l-1, i) kappa_{i+1} mu_{l-i-1}`.
pub fn cumulant_from_moments(l: u32) -> Result<Poly> {
    if l == 0 {
        return Err(invalid("cumulant index must be >= 1"));
    }
    Ok(memo(Key::Cumulant(l), || {
        let mut acc = moment_var(l);
        for i in 0..l.saturating_sub(1) {
            let c = Rational::from(binomial(l - 1, i));
            let k = cumulant_from_moments(i + 1).expect("index >= 1");
            acc = acc.sub(&k.mul(&moment_var(l - i - 1)).scale(&c));
        }
        acc
    }))
}

/// `gamma^(n)` as a polynomial in `gamma` (variable `g1`) and symbolic
/// `zeta(2..n)` (variables `z2..zn`).
pub fn gamma_poly(n: u32) -> Result<Poly> {
    if n == 0 {
        return Err(invalid("gamma_poly: n must be >= 1"));
    }
    let mut map = HashMap::new();
    map.insert(VarId::kappa(1), Poly::var(VarId::gamma(1)));
    for l in 2..=n {
        map.insert(VarId::kappa(l), Poly::var(VarId::zeta(l)).scale(&Rational::from(factorial(l - 1))));
    }
    Ok(moment_from_cumulants(n).substitute_all(&map))
}

/// `zeta(l)` as a polynomial in `gamma, gamma^(2), ..., gamma^(l)`.
pub fn zeta_poly(l: u32) -> Result<Poly> {
    if l < 2 {
        return Err(invalid(format!("zeta_poly: index must be >= 2, got {l}")));
    }
    let k = cumulant_from_moments(l)?;
    Ok(k.scale(&Rational::from((1, factorial(l - 1)))))
}

pub const NORMALIZATION_ID: &str = "primitive-integer-positive-top";

/// The integer relation `P_n` among `gamma, ..., gamma^(2n)`: the two
/// expressions for `zeta(2n)` equated, made primitive, and signed so the
/// `gamma^(2n)` coefficient is positive.
pub fn build_p(n: u32) -> Result<Poly> {
    if n < 2 {
        return Err(invalid(format!("build_P: n must be >= 2, got {n}")));
    }
    let b = even_zeta_coeff(n)?;
    Ok(memo(Key::P(n), || {
        let lhs = zeta_poly(2 * n).expect("2n >= 2");
        let rhs = zeta_poly(2).expect("2 >= 2").pow(n).scale(&b);
        let p = lhs.sub(&rhs).primitive_part();
        let top = p.coeff(&Monomial::var(VarId::gamma(2 * n), 1));
        if top < 0 {
            p.neg()
        } else {
            p
        }
    }))
}

/// `Q` with `gamma^(2m) = Q(gamma, ..., gamma^(2m-1))` on `P_m = 0`.
pub fn solve_even(m: u32) -> Result<Poly> {
    let p = build_p(m)?;
    let top = VarId::gamma(2 * m);
    let alpha = p.coeff(&Monomial::var(top, 1));
    let rest = p.sub(&Poly::term(alpha.clone(), Monomial::var(top, 1)));
    Ok(rest.scale(&(-1 / alpha)))
}

/// Interval values of `gamma^(1..=n)` keyed by variable.
pub fn gamma_assignment(values: &[Interval]) -> HashMap<VarId, Interval> {
    values.iter().enumerate().skip(1).map(|(k, v)| (VarId::gamma(k as u32), v.clone())).collect()
}

/// `zeta_poly(l)` evaluated on enclosures of `gamma^(k)` minus an
/// independent enclosure of `zeta(l)`; errors if the result excludes zero.
pub fn zeta_consistency(l: u32, cfg: &PrecisionConfig) -> Result<Interval> {
    let p = zeta_poly(l)?;
    let g = gamma_all(l, cfg)?;
    let v = p.eval_interval(&gamma_assignment(&g), cfg.bits)?;
    let r = v.sub(&enclose_zeta(l, cfg)?);
    if !r.contains_zero() {
        return Err(Error::Consistency(format!("zeta({l}) residual excludes zero: {r}")));
    }
    Ok(r)
}

/// Integer coefficient of a monomial in `P_n`, for structural checks.
pub fn p_coeff(p: &Poly, pairs: &[(u32, u32)]) -> Integer {
    let m = Monomial::from_pairs(pairs.iter().map(|&(k, e)| (VarId::gamma(k), e)));
    p.coeff(&m).numer().clone()
}
