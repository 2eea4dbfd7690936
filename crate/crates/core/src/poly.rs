//! Sparse multivariate polynomials over the rationals.
//!
//! Monomials are sorted lists of `(variable, power)` pairs. Terms are ordered
//! by weighted degree (a variable of index `k` has weight `k`), ties broken
//! lexicographically with higher-index variables compared first; larger
//! monomials come first when iterating.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::interval::Interval;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VarKind {
    Kappa,
    Zeta,
    Gamma,
}

/// `Gamma` index `k` is `gamma^(k)` (so `k = 1` is Euler's constant), `Kappa`
/// index `l` is the cumulant `kappa_l`, `Zeta` index `s` is `zeta(s)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarId {
    pub kind: VarKind,
    pub index: u32,
}

impl VarId {
    pub fn gamma(index: u32) -> Self {
        assert!(index >= 1, "variable index must be >= 1");
        VarId { kind: VarKind::Gamma, index }
    }

    pub fn kappa(index: u32) -> Self {
        assert!(index >= 1, "variable index must be >= 1");
        VarId { kind: VarKind::Kappa, index }
    }

    pub fn zeta(index: u32) -> Self {
        assert!(index >= 1, "variable index must be >= 1");
        VarId { kind: VarKind::Zeta, index }
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self.kind {
            VarKind::Gamma => 'g',
            VarKind::Kappa => 'k',
            VarKind::Zeta => 'z',
        };
        write!(f, "{c}{}", self.index)
    }
}

impl FromStr for VarId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.chars();
        let kind = match chars.next() {
            Some('g') => VarKind::Gamma,
            Some('k') => VarKind::Kappa,
            Some('z') => VarKind::Zeta,
            _ => return Err(Error::Parse(format!("bad variable name {s:?}"))),
        };
        let index: u32 = chars.as_str().parse().map_err(|_| Error::Parse(format!("bad variable name {s:?}")))?;
        if index == 0 {
            return Err(Error::Parse(format!("variable index must be >= 1 in {s:?}")));
        }
        Ok(VarId { kind, index })
    }
}

/// Variables are kept in descending `VarId` order, powers are nonzero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(VarId, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: VarId, power: u32) -> Self {
        if power == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(v, power)])
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (VarId, u32)>) -> Self {
        let mut m = Monomial::one();
        for (v, e) in pairs {
            m = m.mul(&Monomial::var(v, e));
        }
        m
    }

    pub fn pairs(&self) -> &[(VarId, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn weight(&self) -> u64 {
        self.0.iter().map(|(v, e)| v.index as u64 * *e as u64).sum()
    }

    pub fn power_of(&self, v: VarId) -> u32 {
        self.0.iter().find(|(w, _)| *w == v).map(|(_, e)| *e).unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Greater => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Less => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// `self / other` if `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for &(v, e) in &self.0 {
            if j < other.0.len() && other.0[j].0 == v {
                let f = other.0[j].1;
                if f > e {
                    return None;
                }
                if e > f {
                    out.push((v, e - f));
                }
                j += 1;
            } else if j < other.0.len() && other.0[j].0 > v {
                return None;
            } else {
                out.push((v, e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    /// Removes `v` and returns its former power.
    fn split_off(&self, v: VarId) -> (u32, Monomial) {
        let mut e = 0;
        let rest = self
            .0
            .iter()
            .filter(|(w, p)| {
                if *w == v {
                    e = *p;
                    false
                } else {
                    true
                }
            })
            .copied()
            .collect();
        (e, Monomial(rest))
    }
}

impl Ord for Monomial {
    /// Larger monomials sort first.
    fn cmp(&self, other: &Self) -> Ordering {
        other.weight().cmp(&self.weight()).then_with(|| {
            let (a, b) = (&self.0, &other.0);
            for k in 0..a.len().max(b.len()) {
                match (a.get(k), b.get(k)) {
                    (Some(x), Some(y)) => {
                        if x.0 != y.0 {
                            return y.0.cmp(&x.0);
                        }
                        if x.1 != y.1 {
                            return y.1.cmp(&x.1);
                        }
                    }
                    (Some(_), None) => return Ordering::Less,
                    (None, Some(_)) => return Ordering::Greater,
                    (None, None) => break,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(v, e)| format!("{v}:{e}")).collect();
        f.write_str(&parts.join(" "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyOp {
    Add,
    Sub,
    Mul,
}

pub fn poly_arith(a: &Poly, b: &Poly, op: PolyOp) -> Poly {
    match op {
        PolyOp::Add => a.add(b),
        PolyOp::Sub => a.sub(b),
        PolyOp::Mul => a.mul(b),
    }
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: impl Into<Rational>) -> Self {
        Poly::term(c, Monomial::one())
    }

    pub fn var(v: VarId) -> Self {
        Poly::term(1, Monomial::var(v, 1))
    }

    pub fn term(c: impl Into<Rational>, m: Monomial) -> Self {
        let c = c.into();
        let mut terms = BTreeMap::new();
        if c != 0 {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms, largest monomial first.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::new()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next()
    }

    pub fn vars(&self) -> Vec<VarId> {
        let mut vs: Vec<VarId> = self.terms.keys().flat_map(|m| m.0.iter().map(|(v, _)| *v)).collect();
        vs.sort_by(|a, b| b.cmp(a));
        vs.dedup();
        vs
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, v: VarId) -> u32 {
        self.terms.keys().map(|m| m.power_of(v)).max().unwrap_or(0)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c == 0 {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if *e.get() == 0 {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), Rational::from(-c));
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), Rational::from(-c))).collect() }
    }

    pub fn scale(&self, k: &Rational) -> Poly {
        if *k == 0 {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), Rational::from(c * k))).collect() }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut acc: HashMap<Monomial, Rational> = HashMap::with_capacity(self.len() * other.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let c = Rational::from(ca * cb);
                *acc.entry(ma.mul(mb)).or_default() += c;
            }
        }
        Poly { terms: acc.into_iter().filter(|(_, c)| *c != 0).collect() }
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut result = Poly::constant(1);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn partial_derivative(&self, v: VarId) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(v);
            if e == 0 {
                continue;
            }
            let m2 = rest.mul(&Monomial::var(v, e - 1));
            out.add_term(m2, Rational::from(c * e));
        }
        out
    }

    /// Replaces every occurrence of `v` by `q`.
    pub fn substitute(&self, v: VarId, q: &Poly) -> Poly {
        let mut powers: Vec<Poly> = vec![Poly::constant(1)];
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(v);
            while powers.len() <= e as usize {
                let next = powers.last().unwrap().mul(q);
                powers.push(next);
            }
            let t = powers[e as usize].mul(&Poly::term(c.clone(), rest));
            out = out.add(&t);
        }
        out
    }

    /// Simultaneous substitution of several variables.
    pub fn substitute_all(&self, map: &HashMap<VarId, Poly>) -> Poly {
        let mut out = Poly::zero();
        let mut cache: HashMap<(VarId, u32), Poly> = HashMap::new();
        for (m, c) in &self.terms {
            let mut t = Poly::constant(c.clone());
            for &(v, e) in &m.0 {
                match map.get(&v) {
                    Some(q) => {
                        let p = cache.entry((v, e)).or_insert_with(|| q.pow(e));
                        t = t.mul(p);
                    }
                    None => t = t.mul(&Poly::term(1, Monomial::var(v, e))),
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// Exact quotient `self / d`; errors if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Result<Poly> {
        let (lm, lc) = d.leading().ok_or(Error::DivisionByZero)?;
        let (lm, lc) = (lm.clone(), lc.clone());
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        while let Some((m, c)) = rem.terms.pop_first() {
            let qm = m.div(&lm).ok_or_else(|| Error::Consistency("polynomial division is not exact".into()))?;
            let qc = Rational::from(&c / &lc);
            // the leading product cancels exactly; subtract the rest in place
            for (dm, dc) in d.terms.iter().skip(1) {
                rem.add_term(dm.mul(&qm), -Rational::from(dc * &qc));
            }
            quot.terms.insert(qm, qc);
        }
        Ok(quot)
    }

    /// `self += k * other`, in place.
    pub fn add_scaled(&mut self, other: &Poly, k: &Rational) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), Rational::from(c * k));
        }
    }

    pub fn eval_rational(&self, assign: &HashMap<VarId, Rational>) -> Result<Rational> {
        let mut acc = Rational::new();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, e) in &m.0 {
                let x = assign.get(v).ok_or_else(|| invalid(format!("no value for variable {v}")))?;
                for _ in 0..*e {
                    t *= x;
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Least common multiple of the coefficient denominators.
    pub fn denominator_lcm(&self) -> Integer {
        self.terms.values().fold(Integer::from(1), |acc, c| acc.lcm(c.denom()))
    }

    /// Scales to a primitive integer polynomial (content 1), keeping the sign.
    pub fn primitive_part(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let l = Rational::from(self.denominator_lcm());
        let ints = self.scale(&l);
        let g = ints.terms.values().fold(Integer::new(), |acc, c| acc.gcd(c.numer()));
        ints.scale(&Rational::from((1, g)))
    }

    pub fn has_integer_coeffs(&self) -> bool {
        self.terms.values().all(|c| *c.denom() == 1)
    }

    /// Evaluates over intervals, nesting Horner schemes variable by variable.
    pub fn eval_interval(&self, assign: &HashMap<VarId, Interval>, prec: u32) -> Result<Interval> {
        let vars = self.vars();
        for v in &vars {
            if !assign.contains_key(v) {
                return Err(invalid(format!("no value for variable {v}")));
            }
        }
        let terms: Vec<(&Monomial, &Rational)> = self.terms.iter().collect();
        Ok(horner(&terms, &vars, assign, prec))
    }

    pub fn to_canonical(&self) -> String {
        let mut out = String::new();
        for (m, c) in &self.terms {
            if m.is_one() {
                out.push_str(&format!("{c} ;\n"));
            } else {
                out.push_str(&format!("{c} ; {m}\n"));
            }
        }
        out
    }

    pub fn parse_canonical(text: &str) -> Result<Poly> {
        let mut p = Poly::zero();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (coef, mono) =
                line.split_once(';').ok_or_else(|| Error::Parse(format!("line {}: missing ';'", lineno + 1)))?;
            let c = Rational::from_str(coef.trim())
                .map_err(|_| Error::Parse(format!("line {}: bad coefficient {:?}", lineno + 1, coef.trim())))?;
            let mut m = Monomial::one();
            for tok in mono.split_whitespace() {
                let (v, e) = tok
                    .split_once(':')
                    .ok_or_else(|| Error::Parse(format!("line {}: bad factor {tok:?}", lineno + 1)))?;
                let e: u32 =
                    e.parse().map_err(|_| Error::Parse(format!("line {}: bad power in {tok:?}", lineno + 1)))?;
                if e == 0 {
                    return Err(Error::Parse(format!("line {}: zero power in {tok:?}", lineno + 1)));
                }
                m = m.mul(&Monomial::var(v.parse()?, e));
            }
            p.add_term(m, c);
        }
        Ok(p)
    }
}

fn horner(terms: &[(&Monomial, &Rational)], vars: &[VarId], assign: &HashMap<VarId, Interval>, prec: u32) -> Interval {
    let Some((&v, rest_vars)) = vars.split_first() else {
        let mut acc = Rational::new();
        for (_, c) in terms {
            acc += *c;
        }
        return Interval::from_rational(&acc, prec);
    };
    let mut groups: BTreeMap<u32, Vec<(Monomial, &Rational)>> = BTreeMap::new();
    for (m, c) in terms {
        let (e, rest) = m.split_off(v);
        groups.entry(e).or_default().push((rest, c));
    }
    let x = &assign[&v];
    let mut acc: Option<Interval> = None;
    let mut last_e = 0u32;
    for (e, group) in groups.iter().rev() {
        let refs: Vec<(&Monomial, &Rational)> = group.iter().map(|(m, c)| (m, *c)).collect();
        let inner = horner(&refs, rest_vars, assign, prec);
        acc = Some(match acc {
            None => inner,
            Some(a) => a.mul(&x.pow(last_e - e)).add(&inner),
        });
        last_e = *e;
    }
    let acc = acc.unwrap_or_else(|| Interval::point_int(0, prec));
    if last_e > 0 {
        acc.mul(&x.pow(last_e))
    } else {
        acc
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let neg = *c < 0;
            let abs = Rational::from(c.abs_ref());
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            let body: Vec<String> =
                m.0.iter().map(|(v, e)| if *e == 1 { v.to_string() } else { format!("{v}^{e}") }).collect();
            if m.is_one() {
                write!(f, "{abs}")?;
            } else if abs == 1 {
                write!(f, "{}", body.join("*"))?;
            } else {
                write!(f, "{abs}*{}", body.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Header of an on-disk polynomial file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyHeader {
    pub format_version: u32,
    pub name: String,
    pub vars: String,
    pub normalization: String,
}

pub const FORMAT_VERSION: u32 = 1;

pub fn write_poly_file(header: &PolyHeader, p: &Poly) -> String {
    format!(
        "# gumbel-poly v{}\n# name: {}\n# vars: {}\n# normalization: {}\n# terms: {}\n{}",
        header.format_version,
        header.name,
        header.vars,
        header.normalization,
        p.len(),
        p.to_canonical()
    )
}

pub fn read_poly_file(text: &str) -> Result<(PolyHeader, Poly)> {
    let mut version = None;
    let mut fields: HashMap<&str, &str> = HashMap::new();
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        let body = line.trim_start_matches('#').trim();
        if let Some(v) = body.strip_prefix("gumbel-poly v") {
            version = Some(v.parse::<u32>().map_err(|_| Error::Parse(format!("bad version line {line:?}")))?);
        } else if let Some((k, v)) = body.split_once(':') {
            fields.insert(k.trim(), v.trim());
        }
    }
    let format_version = version.ok_or_else(|| Error::Parse("missing format header".into()))?;
    let get =
        |k: &str| fields.get(k).map(|s| s.to_string()).ok_or_else(|| Error::Parse(format!("missing header field {k}")));
    let header =
        PolyHeader { format_version, name: get("name")?, vars: get("vars")?, normalization: get("normalization")? };
    let p = Poly::parse_canonical(text)?;
    if let Some(t) = fields.get("terms") {
        if t.parse::<usize>().ok() != Some(p.len()) {
            return Err(Error::Parse(format!("term count mismatch: header says {t}, found {}", p.len())));
        }
    }
    Ok((header, p))
}
