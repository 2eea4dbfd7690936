//! Lambert W, the closed-form asymptotic laws and their comparison with
//! computed values.

use rug::float::Round;
use rug::{Float, Integer, Rational};
use serde::Serialize;

use crate::consts::enclose_e;
use crate::error::{invalid, Error, Result};
use crate::exact::factorial;
use crate::interval::Interval;
use crate::precision::PrecisionConfig;
use crate::sequences::{delta_n, delta_tilde_n, eta_n, eta_rational_bracket, eta_tilde_n, gamma_n, Sequence};

fn pow2(k: u32) -> Integer {
    Integer::from(1) << k
}

fn w_times_exp(w: &Float, prec: u32) -> Interval {
    let iv = Interval::new(w, w, prec).expect("point");
    iv.mul(&iv.exp())
}

/// Principal branch `W(x)` for `x > 0`: safeguarded Newton from
/// `ln(1 + x)` (which bounds `W` from above, so the iteration decreases
/// monotonically), then a rigorous bracket `w_lo e^w_lo <= x <= w_hi e^w_hi`.
pub fn lambert_w(x: &Interval, cfg: &PrecisionConfig) -> Result<Interval> {
    cfg.validate()?;
    if !x.is_positive() {
        return Err(invalid("lambert_w: argument must be > 0"));
    }
    let bits = cfg.bits;
    let wp = bits + 32;
    let target = Float::with_val(wp, x.mid());
    let mut w = Float::with_val(wp, &target + 1u32).ln();
    for _ in 0..200 {
        let ew = Float::with_val(wp, w.exp_ref());
        let f = Float::with_val(wp, &w * &ew) - &target;
        let fp = Float::with_val(wp, &w + 1u32) * &ew;
        let step = f / fp;
        w -= &step;
        let scale = Float::with_val(wp, w.abs_ref()).max(&Float::with_val(wp, 1));
        if step.is_zero() || Float::with_val(wp, step.abs_ref()) <= (scale >> (wp - 8)) {
            break;
        }
    }
    let zero = Float::with_val(wp, 0);
    let mut eps = Float::with_val(wp, w.clone().abs().max(&Float::with_val(wp, 1))) >> (bits - 4);
    for _ in 0..64 {
        let mut lo = Float::with_val(wp, &w - &eps);
        if lo < 0 {
            lo = zero.clone();
        }
        let hi = Float::with_val(wp, &w + &eps);
        let below = w_times_exp(&lo, wp);
        let above = w_times_exp(&hi, wp);
        if below.hi() <= x.lo() && above.lo() >= x.hi() {
            let lo_b = Float::with_val_round(bits, &lo, Round::Down).0;
            let hi_b = Float::with_val_round(bits, &hi, Round::Up).0;
            return Interval::new(&lo_b, &hi_b, bits);
        }
        eps <<= 4;
    }
    Err(Error::Consistency("lambert_w: bracket check failed".into()))
}

fn e_radius(n: u32, e: &Interval) -> Interval {
    // n! (e - 5/2) / 3^n
    let c = e.add_rational(&Rational::from((-5, 2)));
    c.mul_rational(&Rational::from((factorial(n), Integer::from(Integer::u_pow_u(3, n)))))
}

fn check_n(n: u32, min: u32) -> Result<()> {
    if n < min {
        return Err(invalid(format!("n must be >= {min}, got {n}")));
    }
    Ok(())
}

/// `n! (1 - 2^-(n+1)) +- n! (e - 5/2)/3^n`.
pub fn eta_asym(n: u32, cfg: &PrecisionConfig) -> Result<Interval> {
    check_n(n, 2)?;
    let e = enclose_e(cfg)?;
    let center = Rational::from(factorial(n)) * (Rational::from(1) - Rational::from((1, pow2(n + 1))));
    let r = e_radius(n, &e);
    let c = Interval::from_rational(&center, cfg.bits);
    Ok(c.sub(&r).hull(&c.add(&r)))
}

/// The leading law shared with `eta`; the `delta/e` correction is not
/// included here (see [`gamma_bracket`]).
pub fn gamma_asym(n: u32, cfg: &PrecisionConfig) -> Result<Interval> {
    eta_asym(n, cfg)
}

/// `gamma_asym` widened by the computed `|delta^(n)|/e`.
pub fn gamma_bracket(n: u32, cfg: &PrecisionConfig) -> Result<Interval> {
    let base = eta_asym(n, cfg)?;
    let d = delta_n(n, cfg)?.abs().div(&enclose_e(cfg)?)?;
    let extra = d.hi().clone();
    let lo = Float::with_val_round(cfg.bits, base.lo() - &extra, Round::Down).0;
    let hi = Float::with_val_round(cfg.bits, base.hi() + &extra, Round::Up).0;
    Interval::new(&lo, &hi, cfg.bits)
}

/// `[-n!(1 + 2^-(n+1) + (e - 5/2)/3^n), -n!(1 + 2^-(n+1) + 3^-n/6)]`.
pub fn eta_tilde_asym(n: u32, cfg: &PrecisionConfig) -> Result<Interval> {
    check_n(n, 2)?;
    let e = enclose_e(cfg)?;
    let nf = Rational::from(factorial(n));
    let base = &nf * (Rational::from(1) + Rational::from((1, pow2(n + 1))));
    let inner = &nf / Rational::from(Integer::from(Integer::u_pow_u(3, n)) * 6u32);
    let hi = -(Rational::from(&base + &inner));
    let lo = Interval::from_rational(&-base, cfg.bits).sub(&e_radius(n, &e));
    let hi = Interval::from_rational(&hi, cfg.bits);
    Ok(lo.hull(&hi))
}

/// `e W^n exp(-n/W) sqrt(2 pi n / (W + 1))` with `W = W(n)`: the saddle-point
/// law for `|delta^(n)|` without its `(1 + o(1))` factor.
pub fn delta_asym(n: u32, cfg: &PrecisionConfig) -> Result<Interval> {
    check_n(n, 1)?;
    let bits = cfg.bits;
    let x = Interval::point_int(n as i64, bits);
    let w = lambert_w(&x, cfg)?;
    let e = enclose_e(cfg)?;
    let core = w.pow(n).mul(&(-x.div(&w)?).exp());
    let two_pi_n = Interval::pi(bits).mul_integer(&Integer::from(2 * n));
    let root = two_pi_n.div(&w.add_rational(&Rational::from(1)))?.sqrt()?;
    Ok(e.mul(&core).mul(&root))
}

/// `-n! (2e + e/3^(n+1))`.
pub fn delta_tilde_asym(n: u32, cfg: &PrecisionConfig) -> Result<Interval> {
    check_n(n, 1)?;
    let e = enclose_e(cfg)?;
    let k = Rational::from(2) + Rational::from((1, Integer::from(Integer::u_pow_u(3, n + 1))));
    Ok(-e.mul_rational(&(k * Rational::from(factorial(n)))))
}

#[derive(Clone, Debug, Serialize)]
pub struct SaddleReport {
    pub n: String,
    pub w: String,
    pub u_star: String,
    pub u_ln_u_contains_n: bool,
    pub phi1_contains_zero: bool,
    pub phi2_negative: bool,
    pub phi2_matches_closed_form: bool,
}

impl SaddleReport {
    pub fn passed(&self) -> bool {
        self.u_ln_u_contains_n && self.phi1_contains_zero && self.phi2_negative && self.phi2_matches_closed_form
    }
}

/// Checks the saddle point `u* = x/W(x)` of `phi(u) = x ln ln u - u`:
/// `u* ln u* = x`, `phi'(u*) = 0`, `phi''(u*) = -(W + 1)/x < 0`.
pub fn saddle_point_diagnostics(x: &Interval, cfg: &PrecisionConfig) -> Result<SaddleReport> {
    let w = lambert_w(x, cfg)?;
    let u = x.div(&w)?;
    let ln_u = u.ln()?;
    let u_ln_u = u.mul(&ln_u);
    let phi1 = x.div(&u_ln_u)?.add_rational(&Rational::from(-1));
    let phi2 = -x.mul(&ln_u.add_rational(&Rational::from(1))).div(&u_ln_u.sqr())?;
    let closed = -w.add_rational(&Rational::from(1)).div(x)?;
    let report = SaddleReport {
        n: x.mid().to_string_radix(10, Some(12)),
        w: w.mid().to_string_radix(10, Some(20)),
        u_star: u.mid().to_string_radix(10, Some(20)),
        u_ln_u_contains_n: u_ln_u.contains_interval(x),
        phi1_contains_zero: phi1.contains_zero(),
        phi2_negative: phi2.is_negative(),
        phi2_matches_closed_form: phi2.overlaps(&closed),
    };
    if !report.passed() {
        return Err(Error::Consistency(format!("saddle-point diagnostics failed: {report:?}")));
    }
    Ok(report)
}

#[derive(Clone, Debug)]
pub struct AsymptoticReport {
    pub sequence: Sequence,
    pub n: u32,
    pub exact: Interval,
    pub approx: Interval,
    pub rel_error: Interval,
    /// For laws with an explicit bracket: the value lies strictly inside it.
    /// For the pure `(1 + o(1))` laws: the relative error is below 1.
    pub bound_satisfied: bool,
}

#[derive(Serialize)]
struct ReportRow {
    sequence: String,
    n: u32,
    exact_lo: String,
    exact_hi: String,
    approx_lo: String,
    approx_hi: String,
    rel_error_lo: String,
    rel_error_hi: String,
    bound_satisfied: bool,
}

impl AsymptoticReport {
    pub fn to_json(&self) -> Result<String> {
        let row = ReportRow {
            sequence: self.sequence.to_string(),
            n: self.n,
            exact_lo: self.exact.lo_decimal(20),
            exact_hi: self.exact.hi_decimal(20),
            approx_lo: self.approx.lo_decimal(20),
            approx_hi: self.approx.hi_decimal(20),
            rel_error_lo: self.rel_error.lo_decimal(12),
            rel_error_hi: self.rel_error.hi_decimal(12),
            bound_satisfied: self.bound_satisfied,
        };
        Ok(serde_json::to_string(&row)?)
    }
}

fn strictly_inside(inner: &Interval, outer: &Interval) -> bool {
    outer.lo() < inner.lo() && inner.hi() < outer.hi()
}

/// Compares a computed value with its asymptotic law.
pub fn asymptotic_report(sequence: Sequence, n: u32, cfg: &PrecisionConfig) -> Result<AsymptoticReport> {
    let (exact, approx, bracket) = match sequence {
        Sequence::EtaN => (eta_n(n, cfg)?, eta_asym(n, cfg)?, true),
        Sequence::EtaTildeN => (eta_tilde_n(n, cfg)?, eta_tilde_asym(n, cfg)?, true),
        Sequence::GammaN => (gamma_n(n, cfg)?, gamma_bracket(n, cfg)?, true),
        Sequence::DeltaN => (delta_n(n, cfg)?.abs(), delta_asym(n, cfg)?, false),
        Sequence::DeltaTildeN => (delta_tilde_n(n, cfg)?, delta_tilde_asym(n, cfg)?, false),
        other => return Err(invalid(format!("no asymptotic law for {other}"))),
    };
    let rel_error = exact.sub(&approx).abs().div(&exact.abs())?;
    let bound_satisfied = if bracket { strictly_inside(&exact, &approx) } else { *rel_error.hi() < 1 };
    Ok(AsymptoticReport { sequence, n, exact, approx, rel_error, bound_satisfied })
}

#[derive(Clone, Debug, Serialize)]
pub struct BracketCheck {
    pub n: u32,
    pub tilde: bool,
    pub holds: bool,
}

/// The strict two-sided bounds on `eta^(n)` (or `eta_tilde^(n)`), checked
/// against exact rational partial-sum brackets and an interval `e`.
pub fn eta_bracket_check(n: u32, tilde: bool, cfg: &PrecisionConfig) -> Result<BracketCheck> {
    check_n(n, 2)?;
    // the margin is ~3^-n relative, so resolve it whatever the caller's precision
    let wcfg = cfg.with_bits(cfg.bits + 2 * n + 16);
    let (lo, hi) = eta_rational_bracket(n, tilde, wcfg.bits);
    let bounds = if tilde { eta_tilde_asym(n, &wcfg)? } else { eta_asym(n, &wcfg)? };
    let holds = bounds.hi_rational().is_some_and(|b| hi < b) && bounds.lo_rational().is_some_and(|b| b < lo);
    Ok(BracketCheck { n, tilde, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg() -> PrecisionConfig {
        PrecisionConfig::new(128).unwrap()
    }

    // plain f64 Newton on w e^w = x, used only as an oracle
    fn newton_oracle(x: f64) -> f64 {
        let mut w = (1.0 + x).ln();
        for _ in 0..100 {
            let ew = w.exp();
            w -= (w * ew - x) / (ew * (w + 1.0));
        }
        w
    }

    #[test]
    fn lambert_examples() {
        let c = cfg();
        let e = enclose_e(&c).unwrap();
        assert!(lambert_w(&e, &c).unwrap().contains_rational(&Rational::from(1)));
        let w1 = lambert_w(&Interval::point_int(1, 128), &c).unwrap();
        assert!(
            w1.contains_rational(&Rational::from((5671432904u64, 10_000_000_000u64)))
                || (w1.to_f64() - 0.5671432904).abs() < 1e-10
        );
        assert!((w1.to_f64() - newton_oracle(1.0)).abs() < 1e-14);
        let back = w1.mul(&w1.exp());
        assert!(back.contains_rational(&Rational::from(1)));
        assert!(lambert_w(&Interval::point_int(0, 128), &c).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn lambert_bracket_valid(num in 1u64..=1_000_000_000u64) {
            let x = Interval::from_rational(&Rational::from((num, 1000u64)), 96);
            let w = lambert_w(&x, &PrecisionConfig::new(96).unwrap()).unwrap();
            prop_assert!(w.mul(&w.exp()).contains_interval(&x));
            prop_assert!((w.to_f64() - newton_oracle(num as f64 / 1000.0)).abs() <= 1e-9 * w.to_f64().max(1.0));
        }
    }

    #[test]
    fn eta_law_contains_table_values() {
        let c = cfg();
        let v = Rational::from((13076544296112775941595u128, 10_000_000_000u64));
        assert!(eta_asym(15, &c).unwrap().contains_rational(&v));
        let t = Rational::from((-13076943367674617097988i128, 10_000_000_000i64));
        assert!(eta_tilde_asym(15, &c).unwrap().contains_rational(&t));
        for tilde in [false, true] {
            assert!(eta_bracket_check(2, tilde, &c).unwrap().holds);
        }
    }

    #[test]
    fn delta_laws() {
        let c = cfg();
        let d = delta_asym(15, &c).unwrap();
        assert!(*d.lo() > 100 && *d.hi() < 1000);
        let dt = delta_tilde_asym(15, &c).unwrap();
        let r = dt.div(&Interval::point_int(-7109255026416, 128)).unwrap();
        assert!(*r.lo() > 0.99 && *r.hi() < 1.01);
        assert!(delta_tilde_asym(0, &c).is_err());
    }

    #[test]
    fn saddle_examples() {
        let c = cfg();
        let e = enclose_e(&c).unwrap();
        let r = saddle_point_diagnostics(&e, &c).unwrap();
        assert!(r.w.starts_with("1.0000") || r.w.starts_with("9.9999"));
        for n in 1..=50 {
            assert!(saddle_point_diagnostics(&Interval::point_int(n, 128), &c).unwrap().passed());
        }
    }

    #[test]
    fn ratio_gamma_over_eta_at_thirty() {
        let c = cfg();
        let r = gamma_n(30, &c).unwrap().div(&eta_n(30, &c).unwrap()).unwrap();
        let tol = Rational::from((1, 1_000_000));
        assert!(r.lo_rational().unwrap() > Rational::from(1) - &tol);
        assert!(r.hi_rational().unwrap() < Rational::from(1) + tol);
    }

    #[test]
    fn reports_serialize() {
        let r = asymptotic_report(Sequence::EtaN, 10, &cfg()).unwrap();
        assert!(r.bound_satisfied);
        let j = r.to_json().unwrap();
        assert!(j.contains("\"sequence\":\"eta_n\""));
        assert!(asymptotic_report(Sequence::GAt1, 3, &cfg()).is_err());
    }
}
