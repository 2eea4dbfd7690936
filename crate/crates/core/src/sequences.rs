//! The five constant sequences and their auxiliary series.
//!
//! `eta`, `eta_tilde` and the multisection values are exact rational partial
//! sums of `F_n(z) = -n! sum z^k/(k^n k!)` plus a tail bound; `gamma^(n)`
//! comes from the cumulant recurrence; `delta` and `delta_tilde` follow from
//! the linking identities.

use std::fmt;

use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::consts::{enclose_e, enclose_gamma, enclose_zeta};
use crate::error::{invalid, Error, Result};
use crate::exact::{factorial, reflection_coeff};
use crate::interval::Interval;
use crate::precision::PrecisionConfig;
use crate::quadrature::{log_power_exp_integral, QuadratureOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Sequence {
    GammaN,
    EtaN,
    DeltaN,
    EtaTildeN,
    DeltaTildeN,
    GAt1,
    HAt1,
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Sequence::GammaN => "gamma_n",
            Sequence::EtaN => "eta_n",
            Sequence::DeltaN => "delta_n",
            Sequence::EtaTildeN => "eta_tilde_n",
            Sequence::DeltaTildeN => "delta_tilde_n",
            Sequence::GAt1 => "g_at_1",
            Sequence::HAt1 => "h_at_1",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    Series,
    Recurrence,
    Identity,
    Quadrature,
}

#[derive(Clone, Debug)]
pub struct ConstantRecord {
    pub sequence: Sequence,
    pub n: u32,
    pub value: Interval,
    pub bits: u32,
    pub method: Method,
}

impl ConstantRecord {
    /// Computes one value with the default method for its sequence.
    pub fn compute(sequence: Sequence, n: u32, cfg: &PrecisionConfig) -> Result<Self> {
        let (value, method) = match sequence {
            Sequence::GammaN => (gamma_n(n, cfg)?, Method::Recurrence),
            Sequence::EtaN => (eta_n(n, cfg)?, Method::Series),
            Sequence::EtaTildeN => (eta_tilde_n(n, cfg)?, Method::Series),
            Sequence::DeltaN => (delta_n(n, cfg)?, Method::Identity),
            Sequence::DeltaTildeN => (delta_tilde_n(n, cfg)?, Method::Identity),
            Sequence::GAt1 => (multisection(n, cfg)?.0, Method::Series),
            Sequence::HAt1 => (multisection(n, cfg)?.1, Method::Series),
        };
        Ok(ConstantRecord { sequence, n, value, bits: cfg.bits, method })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Parity {
    All,
    Odd,
    Even,
}

impl Parity {
    fn keeps(self, k: u32) -> bool {
        match self {
            Parity::All => true,
            Parity::Odd => k % 2 == 1,
            Parity::Even => k % 2 == 0,
        }
    }
}

/// Exact rational bounds `(lo, hi)` on `-n! sum_{k in parity} z^k/(k^n k!)`.
///
/// Summation stops after term `K` once `K + 2 >= 2|z|` (every later term
/// ratio is then at most 1/2, so the tail is at most twice the first omitted
/// term) and that bound is below `2^-(bits+16)` relative to the partial sum.
fn series_bracket(n: u32, z: &Rational, parity: Parity, bits: u32) -> (Rational, Rational) {
    if *z == 0 {
        return (Rational::new(), Rational::new());
    }
    let nf = Rational::from(factorial(n));
    let abs_z = Rational::from(z.abs_ref());
    let scale = Integer::from(1) << (bits + 16);
    let mut sum = Rational::new();
    let mut z_pow = Rational::from(1);
    let mut k_fact = Integer::from(1);
    let mut k = 0u32;
    loop {
        k += 1;
        z_pow *= z;
        k_fact *= k;
        if parity.keeps(k) {
            let den = Integer::from(Integer::u_pow_u(k, n)) * &k_fact;
            sum += Rational::from(&z_pow / den);
        }
        if Rational::from(k + 2) < Rational::from(&abs_z * 2u32) {
            continue;
        }
        let k1 = k + 1;
        let next_den = Integer::from(Integer::u_pow_u(k1, n)) * Integer::from(&k_fact * k1);
        let next = Rational::from(&abs_z * &z_pow.clone().abs()) / next_den;
        let tail = Rational::from(&next * 2u32) * &nf;
        let value = Rational::from(&sum * &nf);
        let floor = Rational::from(value.abs_ref()).max(Rational::from(1));
        if Rational::from(&tail * &scale) <= floor {
            let mid = -value;
            let lo = Rational::from(&mid - &tail);
            let hi = mid + tail;
            return (lo, hi);
        }
    }
}

fn bracket_interval(b: (Rational, Rational), bits: u32) -> Result<Interval> {
    Interval::from_rationals(&b.0, &b.1, bits)
}

/// Exact rational bracket on `eta^(n)` (`tilde = false`) or `eta_tilde^(n)`.
pub fn eta_rational_bracket(n: u32, tilde: bool, bits: u32) -> (Rational, Rational) {
    let z = if tilde { Rational::from(1) } else { Rational::from(-1) };
    series_bracket(n, &z, Parity::All, bits)
}

/// `F_n(z) = -n! sum_{k>=1} z^k / (k^n k!)`.
pub fn eval_f(n: u32, z: &Rational, cfg: &PrecisionConfig) -> Result<Interval> {
    cfg.validate()?;
    bracket_interval(series_bracket(n, z, Parity::All, cfg.bits), cfg.bits)
}

pub fn eta_n(n: u32, cfg: &PrecisionConfig) -> Result<Interval> {
    eval_f(n, &Rational::from(-1), cfg)
}

pub fn eta_tilde_n(n: u32, cfg: &PrecisionConfig) -> Result<Interval> {
    eval_f(n, &Rational::from(1), cfg)
}

/// `gamma^(0..=n_max)` by the cumulant recurrence
/// `gamma^(n) = gamma gamma^(n-1) + sum_{j<=n-2} (n-1)!/j! zeta(n-j) gamma^(j)`.
pub fn gamma_all(n_max: u32, cfg: &PrecisionConfig) -> Result<Vec<Interval>> {
    cfg.validate()?;
    let wp = cfg.bits + 32 + 2 * n_max;
    let wcfg = cfg.with_bits(wp);
    let g = enclose_gamma(&wcfg)?;
    let zetas = (2..=n_max.max(2)).map(|s| enclose_zeta(s, &wcfg)).collect::<Result<Vec<_>>>()?;
    let mut out = vec![Interval::point_int(1, wp)];
    for n in 1..=n_max {
        let mut acc = g.mul(&out[n as usize - 1]);
        let nf = factorial(n - 1);
        for j in 0..n.saturating_sub(1) {
            let coef = Rational::from((nf.clone(), factorial(j)));
            let term = zetas[(n - j - 2) as usize].mul(&out[j as usize]).mul_rational(&coef);
            acc = acc.add(&term);
        }
        out.push(acc);
    }
    Ok(out.into_iter().map(|v| v.with_prec(cfg.bits)).collect())
}

pub fn gamma_n(n: u32, cfg: &PrecisionConfig) -> Result<Interval> {
    Ok(gamma_all(n, cfg)?.pop().expect("non-empty"))
}

/// `delta^(n) = e (eta^(n) - gamma^(n))`; `delta^(0) = -1` exactly.
pub fn delta_n(n: u32, cfg: &PrecisionConfig) -> Result<Interval> {
    cfg.validate()?;
    if n == 0 {
        return Ok(Interval::point_int(-1, cfg.bits));
    }
    let wcfg = cfg.with_bits(cfg.bits + 32);
    let e = enclose_e(&wcfg)?;
    let v = e.mul(&eta_n(n, &wcfg)?.sub(&gamma_n(n, &wcfg)?));
    Ok(v.with_prec(cfg.bits))
}

/// `delta_tilde^(n) = e (eta_tilde^(n) - gamma^(n))`.
pub fn delta_tilde_n(n: u32, cfg: &PrecisionConfig) -> Result<Interval> {
    cfg.validate()?;
    let wcfg = cfg.with_bits(cfg.bits + 32);
    let e = enclose_e(&wcfg)?;
    let v = e.mul(&eta_tilde_n(n, &wcfg)?.sub(&gamma_n(n, &wcfg)?));
    Ok(v.with_prec(cfg.bits))
}

/// Independent enclosure of `delta^(n) = (-1)^(n+1) e int_1^inf ln(u)^n e^-u du`.
pub fn delta_n_quadrature(n: u32, cfg: &PrecisionConfig) -> Result<Interval> {
    if n == 0 {
        return Err(invalid("delta_n_quadrature: n must be >= 1"));
    }
    cfg.validate()?;
    let opts = QuadratureOptions::for_bits(cfg.bits, n);
    let q = log_power_exp_integral(n, cfg.bits, &opts)?;
    let v = enclose_e(cfg)?.mul(&q.value);
    Ok(if n % 2 == 0 { -v } else { v })
}

/// `(G_n(1), H_n(1))`, the odd- and even-index parts of `F_n(1)`.
///
/// Both are computed from their own series and from
/// `G = (eta_tilde - eta)/2`, `H = (eta_tilde + eta)/2`; the two enclosures
/// must overlap and their intersection is returned.
pub fn multisection(n: u32, cfg: &PrecisionConfig) -> Result<(Interval, Interval)> {
    cfg.validate()?;
    let bits = cfg.bits;
    let one = Rational::from(1);
    let g_series = bracket_interval(series_bracket(n, &one, Parity::Odd, bits), bits)?;
    let h_series = bracket_interval(series_bracket(n, &one, Parity::Even, bits), bits)?;
    let eta = eta_n(n, cfg)?;
    let eta_t = eta_tilde_n(n, cfg)?;
    let half = Rational::from((1, 2));
    let g_id = eta_t.sub(&eta).mul_rational(&half);
    let h_id = eta_t.add(&eta).mul_rational(&half);
    let g = g_series
        .intersect(&g_id)
        .ok_or_else(|| Error::Consistency(format!("multisection G_{n}(1): series and identity disagree")))?;
    let h = h_series
        .intersect(&h_id)
        .ok_or_else(|| Error::Consistency(format!("multisection H_{n}(1): series and identity disagree")))?;
    Ok((g, h))
}

/// `sum_{j=0}^{2k} (-1)^j gamma^(j) gamma^(2k-j) / (j! (2k-j)!) - c_k pi^(2k)`.
pub fn reflection_residual(k: u32, cfg: &PrecisionConfig) -> Result<Interval> {
    if k == 0 {
        return Err(invalid("reflection_residual: k must be >= 1"));
    }
    let g = gamma_all(2 * k, cfg)?;
    let bits = cfg.bits;
    let mut acc = Interval::point_int(0, bits);
    for j in 0..=2 * k {
        let w = Rational::from((Integer::from(1), factorial(j) * factorial(2 * k - j)));
        let mut t = g[j as usize].mul(&g[(2 * k - j) as usize]).mul_rational(&w);
        if j % 2 == 1 {
            t = -t;
        }
        acc = acc.add(&t);
    }
    let rhs = Interval::pi(bits + 16).pow(2 * k).mul_rational(&reflection_coeff(k));
    let r = acc.sub(&rhs);
    if !r.contains_zero() {
        return Err(Error::Consistency(format!("reflection residual for k={k} excludes zero: {r}")));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::Pow;

    fn cfg(bits: u32) -> PrecisionConfig {
        PrecisionConfig::new(bits).unwrap()
    }

    fn dec(s: &str) -> Rational {
        let (neg, s) = s.strip_prefix('-').map(|r| (true, r)).unwrap_or((false, s));
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        let num: Integer = format!("{int}{frac}").parse().unwrap();
        let r = Rational::from((num, Integer::from(10).pow(frac.len() as u32)));
        if neg {
            -r
        } else {
            r
        }
    }

    // truncated decimal digits: the value lies in [d, d + 10^-digits) in absolute value
    fn within_truncated(iv: &Interval, printed: &str) -> bool {
        let d = dec(printed);
        let digits = printed.split_once('.').map(|(_, f)| f.len()).unwrap_or(0) as u32;
        let ulp = Rational::from((1, Integer::from(10).pow(digits)));
        let lo = iv.lo_rational().unwrap();
        let hi = iv.hi_rational().unwrap();
        if d >= 0 {
            lo >= d && hi < Rational::from(&d + &ulp)
        } else {
            hi <= d && lo > Rational::from(&d - &ulp)
        }
    }

    #[test]
    fn eta_examples() {
        let c = cfg(128);
        assert!(within_truncated(&eta_n(0, &c).unwrap(), "0.6321205588"));
        assert!(within_truncated(&eta_n(1, &c).unwrap(), "0.7965995992"));
        assert!(within_truncated(&eta_n(15, &c).unwrap(), "1307654429611.2775941595"));
    }

    // rounded decimal digits: the value lies within half a unit of the last place
    fn within_rounded(iv: &Interval, printed: &str) -> bool {
        let d = dec(printed);
        let digits = printed.split_once('.').map(|(_, f)| f.len()).unwrap_or(0) as u32;
        let half = Rational::from((1, Integer::from(10).pow(digits) * 2u32));
        iv.lo_rational().unwrap() >= Rational::from(&d - &half) && iv.hi_rational().unwrap() <= d + half
    }

    #[test]
    fn eta_tilde_examples() {
        let c = cfg(128);
        let e = enclose_e(&c).unwrap();
        let one_minus_e = Interval::point_int(1, 128).sub(&e);
        assert!(eta_tilde_n(0, &c).unwrap().overlaps(&one_minus_e));
        assert!(within_rounded(&eta_tilde_n(1, &c).unwrap(), "-1.3179021515"));
        assert!(within_rounded(&eta_tilde_n(15, &c).unwrap(), "-1307694336767.4617097988"));
    }

    #[test]
    fn f_at_zero_is_exactly_zero() {
        for n in 0..5 {
            let v = eval_f(n, &Rational::new(), &cfg(64)).unwrap();
            assert_eq!(*v.lo(), 0);
            assert_eq!(*v.hi(), 0);
        }
    }

    #[test]
    fn f_large_argument_matches_exponential() {
        // F_0(z) = 1 - e^z
        let c = cfg(128);
        let v = eval_f(0, &Rational::from(20), &c).unwrap();
        let oracle = Interval::point_int(1, 192).sub(&Interval::point_int(20, 192).exp());
        assert!(v.overlaps(&oracle));
        let v = eval_f(0, &Rational::from((-7, 3)), &c).unwrap();
        let oracle = Interval::point_int(1, 192).sub(&Interval::from_rational(&Rational::from((-7, 3)), 192).exp());
        assert!(v.overlaps(&oracle));
    }

    #[test]
    fn gamma_examples() {
        let c = cfg(128);
        let g = gamma_all(9, &c).unwrap();
        assert_eq!(*g[0].lo(), 1);
        assert_eq!(*g[0].hi(), 1);
        assert!(within_truncated(&g[1], "0.5772156649"));
        assert!(within_truncated(&g[2], "1.9781119906"));
        assert!(within_truncated(&g[9], "362526.2891146549"));
        // gamma^(2) = gamma^2 + zeta(2)
        let direct = enclose_gamma(&c).unwrap().sqr().add(&enclose_zeta(2, &c).unwrap());
        assert!(g[2].overlaps(&direct));
    }

    #[test]
    fn delta_examples() {
        let c = cfg(128);
        let d0 = delta_n(0, &c).unwrap();
        assert_eq!(*d0.lo(), -1);
        assert!(within_truncated(&delta_n(1, &c).unwrap(), "0.5963473623"));
        assert!(within_truncated(&delta_n(10, &c).unwrap(), "-11.3803468877"));
        let dt0 = delta_tilde_n(0, &c).unwrap();
        let e2 = enclose_e(&c).unwrap().sqr();
        assert!(dt0.overlaps(&-e2));
    }

    #[test]
    fn sign_pattern() {
        let c = cfg(128);
        for n in 1..=20u32 {
            let d = delta_n(n, &c).unwrap();
            if n % 2 == 1 {
                assert!(d.is_positive(), "n={n}");
            } else {
                assert!(d.is_negative(), "n={n}");
            }
            assert!(delta_tilde_n(n, &c).unwrap().is_negative());
            assert!(eta_tilde_n(n, &c).unwrap().is_negative());
        }
    }

    #[test]
    fn linking_identity_holds() {
        let c = cfg(128);
        let e = enclose_e(&c).unwrap();
        for n in 0..=20u32 {
            let lhs = gamma_n(n, &c).unwrap().add(&delta_n(n, &c).unwrap().div(&e).unwrap());
            assert!(lhs.overlaps(&eta_n(n, &c).unwrap()), "n={n}");
        }
    }

    #[test]
    fn quadrature_examples() {
        let c = cfg(128);
        assert!(within_truncated(&delta_n_quadrature(1, &c).unwrap(), "0.5963473623"));
        assert!(within_truncated(&delta_n_quadrature(4, &c).unwrap().abs(), "0.7222515339"));
        assert!(within_truncated(&delta_n_quadrature(8, &c).unwrap().abs(), "3.7298791058"));
        assert!(delta_n_quadrature(0, &c).is_err());
    }

    #[test]
    fn multisection_examples() {
        let c = cfg(128);
        let (g0, _) = multisection(0, &c).unwrap();
        // G_0(1) = -sinh(1), from the odd exponential series
        let mut sinh = Rational::new();
        for k in (1..60u32).step_by(2) {
            sinh += Rational::from((1, factorial(k)));
        }
        assert!(g0.inflate(&Rational::from((1, Integer::from(10).pow(40)))).contains_rational(&-sinh));
        assert!(within_truncated(&g0, "-1.1752011936"));
        for n in 0..=10 {
            let (g, h) = multisection(n, &c).unwrap();
            assert!(g.add(&h).overlaps(&eta_tilde_n(n, &c).unwrap()));
            assert!(h.sub(&g).overlaps(&eta_n(n, &c).unwrap()));
        }
    }

    #[test]
    fn reflection_residuals_contain_zero() {
        let c = cfg(128);
        for k in 1..=8 {
            let r = reflection_residual(k, &c).unwrap();
            assert!(r.contains_zero());
            assert!(r.width() < 1e-20, "k={k} width={}", r.width());
        }
        assert!(reflection_residual(0, &c).is_err());
    }

    #[test]
    fn records_carry_method() {
        let c = cfg(64);
        let r = ConstantRecord::compute(Sequence::GammaN, 3, &c).unwrap();
        assert_eq!(r.method, Method::Recurrence);
        assert!(r.value.lo() <= r.value.hi());
        let r = ConstantRecord::compute(Sequence::HAt1, 2, &c).unwrap();
        assert_eq!(r.method, Method::Series);
    }
}
