//! Validated integration of `ln(u)^n e^{-u}` over `[1, inf)`.
//!
//! The finite part `[1, T]` is covered by subintervals on which the integrand
//! is expanded in a Taylor polynomial of fixed order around the midpoint; the
//! Lagrange remainder is bounded by evaluating the next Taylor coefficient
//! over the whole subinterval. Subintervals whose remainder exceeds their
//! share of the tolerance are bisected. The tail past `T` uses
//! `int_T^inf e^{phi} <= e^{phi(T)} (1 + n/(T ln T - n))`, valid once
//! `T ln T > n` because `phi'(u) = n/(u ln u) - 1` is then bounded away
//! from zero.

use rug::{Float, Rational};

use crate::error::{invalid, Error, Result};
use crate::interval::Interval;

#[derive(Clone, Debug)]
pub struct QuadratureOptions {
    /// Taylor order per subinterval.
    pub order: usize,
    /// Target absolute error of the whole integral.
    pub tolerance: Rational,
    /// Bisection depth limit per initial panel.
    pub max_depth: u32,
}

impl QuadratureOptions {
    pub fn for_bits(bits: u32, n: u32) -> Self {
        let exp = (bits / 2).saturating_sub(n).max(24);
        QuadratureOptions { order: 20, tolerance: Rational::from((1, rug::Integer::from(1) << exp)), max_depth: 24 }
    }
}

#[derive(Clone, Debug)]
pub struct QuadratureResult {
    pub value: Interval,
    /// Upper end of the truncation point.
    pub cutoff: u32,
    pub panels: usize,
}

type Series = Vec<Interval>;

fn series_mul(a: &Series, b: &Series, order: usize) -> Series {
    let p = a[0].prec();
    let mut out = vec![Interval::point_int(0, p); order + 1];
    for (i, x) in a.iter().enumerate().take(order + 1) {
        for (j, y) in b.iter().enumerate().take(order + 1 - i) {
            out[i + j] = out[i + j].add(&x.mul(y));
        }
    }
    out
}

fn series_pow(base: &Series, mut e: u32, order: usize) -> Series {
    let p = base[0].prec();
    let mut result: Series = vec![Interval::point_int(0, p); order + 1];
    result[0] = Interval::point_int(1, p);
    let mut b = base.clone();
    while e > 0 {
        if e & 1 == 1 {
            result = series_mul(&result, &b, order);
        }
        e >>= 1;
        if e > 0 {
            b = series_mul(&b, &b, order);
        }
    }
    result
}

/// Taylor coefficients of `ln(c+s)^n e^{-(c+s)}` in `s`, up to `order`, with
/// `c` an interval (a point or a whole subinterval).
fn integrand_series(c: &Interval, n: u32, order: usize) -> Result<Series> {
    let p = c.prec();
    let mut ln_s = Vec::with_capacity(order + 1);
    ln_s.push(c.ln()?);
    let inv_c = c.recip()?;
    let mut inv_pow = inv_c.clone();
    for k in 1..=order {
        let mut coef = inv_pow.div(&Interval::point_int(k as i64, p))?;
        if k % 2 == 0 {
            coef = -coef;
        }
        ln_s.push(coef);
        inv_pow = inv_pow.mul(&inv_c);
    }
    let ln_pow = series_pow(&ln_s, n, order);
    let e0 = (-c).exp();
    let mut exp_s = Vec::with_capacity(order + 1);
    let mut cur = e0;
    exp_s.push(cur.clone());
    for k in 1..=order {
        cur = cur.div(&Interval::point_int(-(k as i64), p))?;
        exp_s.push(cur.clone());
    }
    Ok(series_mul(&ln_pow, &exp_s, order))
}

fn panel(a: &Rational, b: &Rational, n: u32, order: usize, prec: u32) -> Result<(Interval, Float)> {
    let mid = Rational::from(a + b) / 2u32;
    let r = Rational::from(b - a) / 2u32;
    let c = Interval::from_rational(&mid, prec);
    let coefs = integrand_series(&c, n, order)?;
    let mut acc = Interval::point_int(0, prec);
    let mut r_pow = r.clone(); // r^{k+1}
    for (k, coef) in coefs.iter().enumerate() {
        if k % 2 == 0 {
            let w = Rational::from(&r_pow * 2u32) / Rational::from(k as u32 + 1);
            acc = acc.add(&coef.mul_rational(&w));
        }
        r_pow *= &r;
    }
    let whole = Interval::from_rationals(a, b, prec)?;
    let big = integrand_series(&whole, n, order + 1)?;
    let bound = big[order + 1].mag();
    // int_{-r}^{r} |s|^{order+1} ds = 2 r^{order+2} / (order+2)
    let w = Rational::from(&r_pow * 2u32) / Rational::from(order as u32 + 2);
    let rad = Interval::from_rational(&w, prec).mul(&Interval::new(&bound, &bound, prec)?);
    let rad_hi = rad.hi().clone();
    let neg = Float::with_val(prec, -&rad_hi);
    Ok((acc.add(&Interval::new(&neg, &rad_hi, prec)?), rad_hi))
}

fn integrate_adaptive(
    a: Rational,
    b: Rational,
    n: u32,
    opts: &QuadratureOptions,
    budget: &Rational,
    depth: u32,
    prec: u32,
    panels: &mut usize,
) -> Result<Interval> {
    let (value, rad) = panel(&a, &b, n, opts.order, prec)?;
    if rad <= *budget || depth >= opts.max_depth {
        *panels += 1;
        return Ok(value);
    }
    let mid = Rational::from(&a + &b) / 2u32;
    let half = Rational::from(budget / 2u32);
    let left = integrate_adaptive(a, mid.clone(), n, opts, &half, depth + 1, prec, panels)?;
    let right = integrate_adaptive(mid, b, n, opts, &half, depth + 1, prec, panels)?;
    Ok(left.add(&right))
}

/// Rigorous bound on `int_T^inf ln(u)^n e^{-u} du`, or `None` if `T ln T <= n`.
fn tail_bound(t: u32, n: u32, prec: u32) -> Result<Option<Interval>> {
    let t_iv = Interval::point_int(t as i64, prec);
    let ln_t = t_iv.ln()?;
    let tlt = t_iv.mul(&ln_t);
    let n_iv = Interval::point_int(n as i64, prec);
    let gap = tlt.sub(&n_iv);
    if !gap.is_positive() {
        return Ok(None);
    }
    let factor = Interval::point_int(1, prec).add(&n_iv.div(&gap)?);
    let head = ln_t.pow(n).mul(&(-&t_iv).exp());
    let b = head.mul(&factor);
    let zero = Float::with_val(prec, 0);
    Ok(Some(Interval::new(&zero, b.hi(), prec)?))
}

/// Enclosure of `int_1^inf ln(u)^n e^{-u} du`.
pub fn log_power_exp_integral(n: u32, prec: u32, opts: &QuadratureOptions) -> Result<QuadratureResult> {
    if opts.order < 2 {
        return Err(invalid("quadrature order must be >= 2"));
    }
    // cutoff: past the saddle point, with the tail below a quarter of the tolerance
    let quarter = Rational::from(&opts.tolerance / 4u32);
    let mut t = 4u32;
    let tail = loop {
        if let Some(b) = tail_bound(t, n, prec)? {
            if *b.hi() <= quarter {
                break b;
            }
        }
        t += 2;
        if t > 1_000_000 {
            return Err(Error::Consistency("quadrature cutoff search did not terminate".into()));
        }
    };
    let mut panels = 0usize;
    let mut total = Interval::point_int(0, prec);
    let pieces = (t - 1) as usize * 2;
    let share = Rational::from(&opts.tolerance / 2u32) / Rational::from(pieces as u32);
    for i in 0..pieces {
        let a = Rational::from((2 + i as u32, 2));
        let b = Rational::from((3 + i as u32, 2));
        total = total.add(&integrate_adaptive(a, b, n, opts, &share, 0, prec, &mut panels)?);
    }
    Ok(QuadratureResult { value: total.add(&tail), cutoff: t, panels })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeroth_power_is_exp_minus_one() {
        let opts = QuadratureOptions::for_bits(128, 0);
        let r = log_power_exp_integral(0, 128, &opts).unwrap();
        let exact = Interval::point_int(-1, 192).exp();
        assert!(r.value.overlaps(&exact));
        assert!(r.value.width() < 1e-15);
    }

    #[test]
    fn tail_bound_needs_positive_gap() {
        assert!(tail_bound(2, 10, 64).unwrap().is_none());
        let b = tail_bound(40, 3, 64).unwrap().unwrap();
        assert!(*b.lo() >= 0 && *b.hi() < 1e-10);
    }

    #[test]
    fn series_pow_matches_repeated_product() {
        let c = Interval::point_int(2, 128);
        let base = integrand_series(&c, 1, 6).unwrap();
        let cubed = series_pow(&base, 3, 6);
        let manual = series_mul(&series_mul(&base, &base, 6), &base, 6);
        for (x, y) in cubed.iter().zip(&manual) {
            assert!(x.overlaps(y));
        }
    }
}
