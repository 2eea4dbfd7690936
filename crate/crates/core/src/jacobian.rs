//! Jacobian matrices of the relations `P_2..P_m`, their certification at the
//! true constants, and the exact Pascal-submatrix checks in cumulant
//! coordinates.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Instant;

use rayon::prelude::*;
use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::bell::{build_p, gamma_assignment, moment_from_cumulants};
use crate::det::{interval_det, rational_det, symbolic_det_budget, DetStrategy};
use crate::error::{invalid, Error, Result};
use crate::exact::{binomial, even_zeta_coeff, factorial};
use crate::interval::Interval;
use crate::ledger::Ledger;
use crate::poly::{Poly, VarId};
use crate::precision::{escalate, PrecisionConfig};
use crate::sequences::gamma_all;

/// `theta` is either Euler's constant itself or `gamma^(k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ThetaChoice {
    Gamma,
    Index(u32),
}

impl ThetaChoice {
    /// Checks `theta` against context `m`: `k` must lie in `m..=2m`.
    pub fn validate(self, m: u32) -> Result<()> {
        if m < 2 {
            return Err(invalid(format!("context must be >= 2, got {m}")));
        }
        match self {
            ThetaChoice::Gamma => Ok(()),
            ThetaChoice::Index(k) if (m..=2 * m).contains(&k) => Ok(()),
            ThetaChoice::Index(k) => Err(invalid(format!("theta index {k} outside {m}..={}", 2 * m))),
        }
    }

    /// All admissible choices for context `m`: `gamma`, then `gamma^(m..=2m)`.
    pub fn all(m: u32) -> Vec<ThetaChoice> {
        std::iter::once(ThetaChoice::Gamma).chain((m..=2 * m).map(ThetaChoice::Index)).collect()
    }
}

impl fmt::Display for ThetaChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThetaChoice::Gamma => f.write_str("gamma"),
            ThetaChoice::Index(k) => write!(f, "g{k}"),
        }
    }
}

impl FromStr for ThetaChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "gamma" {
            return Ok(ThetaChoice::Gamma);
        }
        s.strip_prefix('g')
            .and_then(|k| k.parse().ok())
            .map(ThetaChoice::Index)
            .ok_or_else(|| Error::Parse(format!("bad theta {s:?}")))
    }
}

impl Serialize for ThetaChoice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ThetaChoice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Column set used for `theta = gamma`. `Literal` reads `gamma` as
/// `gamma^(1)`, giving columns `1..m-1`; `Shifted` uses `2..m`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnConvention {
    #[default]
    Literal,
    Shifted,
}

/// Column indices `j` of `J_{m,theta}`, ascending.
pub fn jacobian_columns(m: u32, theta: ThetaChoice, convention: ColumnConvention) -> Result<Vec<u32>> {
    theta.validate(m)?;
    Ok(match theta {
        ThetaChoice::Index(k) => (2..m).chain(std::iter::once(k)).collect(),
        ThetaChoice::Gamma => match convention {
            ColumnConvention::Literal => (1..m).collect(),
            ColumnConvention::Shifted => (2..=m).collect(),
        },
    })
}

fn derivative(i: u32, j: u32) -> Result<Poly> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, u32), Poly>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&(i, j)) {
        return Ok(p.clone());
    }
    let d = build_p(i)?.partial_derivative(VarId::gamma(j));
    cache.lock().unwrap_or_else(|e| e.into_inner()).insert((i, j), d.clone());
    Ok(d)
}

/// `[dP_i / d gamma^(j)]` with rows `i = 2..m` and the given column set.
pub fn jacobian_matrix(m: u32, theta: ThetaChoice, convention: ColumnConvention) -> Result<Vec<Vec<Poly>>> {
    let cols = jacobian_columns(m, theta, convention)?;
    (2..=m).map(|i| cols.iter().map(|&j| derivative(i, j)).collect()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CertStatus {
    CertifiedNonzero,
    Indeterminate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertPath {
    Symbolic,
    IntervalLu,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertRecord {
    pub n: u32,
    pub m: u32,
    pub theta: ThetaChoice,
    pub convention: ColumnConvention,
    pub columns: Vec<u32>,
    pub det_lo: String,
    pub det_hi: String,
    pub status: CertStatus,
    pub bits_used: u32,
    pub path: CertPath,
    pub det_terms: Option<usize>,
    pub elapsed_s: f64,
}

impl CertRecord {
    pub fn key(&self) -> (u32, u32, ThetaChoice, ColumnConvention) {
        (self.n, self.m, self.theta, self.convention)
    }

    /// Parses the stored endpoints back into an interval.
    pub fn det_enclosure(&self, prec: u32) -> Result<Interval> {
        let parse = |s: &str| {
            rug::Float::parse(s)
                .map(|p| rug::Float::with_val(prec, p))
                .map_err(|_| Error::Parse(format!("bad decimal {s:?}")))
        };
        Interval::new(&parse(&self.det_lo)?, &parse(&self.det_hi)?, prec)
    }
}

#[derive(Clone, Debug)]
pub struct CertifyOptions {
    pub precision: PrecisionConfig,
    pub convention: ColumnConvention,
    /// Largest symbolic determinant (in terms) before falling back to
    /// interval elimination on the evaluated matrix.
    pub term_budget: usize,
    pub strategy: DetStrategy,
    pub jobs: usize,
    pub ledger: Option<PathBuf>,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            precision: PrecisionConfig::default(),
            convention: ColumnConvention::Literal,
            term_budget: 2_000,
            strategy: DetStrategy::Auto,
            jobs: 1,
            ledger: None,
        }
    }
}

/// Interval values of `gamma^(1..=2n)` per precision, shared by workers.
struct GammaBoxes {
    n: u32,
    cfg: PrecisionConfig,
    by_bits: Mutex<HashMap<u32, Arc<HashMap<VarId, Interval>>>>,
}

impl GammaBoxes {
    fn get(&self, bits: u32) -> Result<Arc<HashMap<VarId, Interval>>> {
        if let Some(v) = self.by_bits.lock().unwrap_or_else(|e| e.into_inner()).get(&bits) {
            return Ok(v.clone());
        }
        let vals = gamma_all(2 * self.n, &self.cfg.with_bits(bits))?;
        let a = Arc::new(gamma_assignment(&vals));
        self.by_bits.lock().unwrap_or_else(|e| e.into_inner()).insert(bits, a.clone());
        Ok(a)
    }
}

fn certify_pair(n: u32, m: u32, theta: ThetaChoice, opts: &CertifyOptions, boxes: &GammaBoxes) -> Result<CertRecord> {
    let start = Instant::now();
    let columns = jacobian_columns(m, theta, opts.convention)?;
    let matrix = jacobian_matrix(m, theta, opts.convention)?;
    let det = symbolic_det_budget(&matrix, opts.strategy, opts.term_budget);
    let path = if det.is_some() { CertPath::Symbolic } else { CertPath::IntervalLu };
    let mut last: Option<Interval> = None;
    let outcome = escalate(&opts.precision, |bits| {
        let at = boxes.get(bits)?;
        let enclosure = match &det {
            Some(d) => Some(d.eval_interval(&at, bits)?),
            None => {
                let evaluated = matrix
                    .iter()
                    .map(|row| row.iter().map(|p| p.eval_interval(&at, bits)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                interval_det(&evaluated)
            }
        };
        match enclosure {
            Some(e) if e.excludes_zero() => Ok(Some(e)),
            Some(e) => {
                last = Some(e);
                Ok(None)
            }
            None => Ok(None),
        }
    });
    let (enclosure, bits, status) = match outcome {
        Ok((e, bits)) => (e, bits, CertStatus::CertifiedNonzero),
        Err(Error::Indeterminate { bits, .. }) => {
            let e = last.unwrap_or_else(|| {
                let inf = rug::Float::with_val(bits, rug::float::Special::Infinity);
                Interval::new(&-inf.clone(), &inf, bits).expect("ordered")
            });
            (e, bits, CertStatus::Indeterminate)
        }
        Err(e) => return Err(e),
    };
    Ok(CertRecord {
        n,
        m,
        theta,
        convention: opts.convention,
        columns,
        det_lo: enclosure.lo_decimal(24),
        det_hi: enclosure.hi_decimal(24),
        status,
        bits_used: bits,
        path,
        det_terms: det.as_ref().map(Poly::len),
        elapsed_s: start.elapsed().as_secs_f64(),
    })
}

/// Every `(m, theta)` pair for context `n`, in a fixed order.
pub fn certification_pairs(n: u32) -> Vec<(u32, ThetaChoice)> {
    (2..=n).flat_map(|m| ThetaChoice::all(m).into_iter().map(move |t| (m, t))).collect()
}

#[derive(Clone, Debug)]
pub struct CertReport {
    pub n: u32,
    /// Records in pair order, including those replayed from the ledger.
    pub records: Vec<CertRecord>,
    pub resumed: usize,
    pub elapsed_s: f64,
}

impl CertReport {
    pub fn all_certified(&self) -> bool {
        self.records.iter().all(|r| r.status == CertStatus::CertifiedNonzero)
    }

    pub fn indeterminate(&self) -> Vec<&CertRecord> {
        self.records.iter().filter(|r| r.status == CertStatus::Indeterminate).collect()
    }
}

/// Certifies `det J_{m,theta} != 0` at the true constants for every pair.
/// With a ledger, certified pairs already on file are replayed instead of
/// recomputed and new records are appended as they complete.
pub fn certify_with(n: u32, opts: &CertifyOptions) -> Result<CertReport> {
    if n < 2 {
        return Err(invalid(format!("certify: n must be >= 2, got {n}")));
    }
    opts.precision.validate()?;
    let start = Instant::now();
    let ledger = opts.ledger.as_ref().map(|p| Ledger::open(p)).transpose()?;
    let mut done: HashMap<(u32, u32, ThetaChoice, ColumnConvention), CertRecord> = HashMap::new();
    if let Some(l) = &ledger {
        for r in l.replay()? {
            if r.n == n && r.convention == opts.convention && r.status == CertStatus::CertifiedNonzero {
                done.insert(r.key(), r);
            }
        }
    }
    let pairs = certification_pairs(n);
    let todo: Vec<(u32, ThetaChoice)> =
        pairs.iter().copied().filter(|&(m, t)| !done.contains_key(&(n, m, t, opts.convention))).collect();
    let resumed = pairs.len() - todo.len();
    // build P_2..P_n up front so workers only read the caches
    for i in 2..=n {
        build_p(i)?;
    }
    let boxes = GammaBoxes { n, cfg: opts.precision, by_bits: Mutex::new(HashMap::new()) };
    let ledger = ledger.map(Mutex::new);
    let run = |pair: &(u32, ThetaChoice)| -> Result<CertRecord> {
        let rec = certify_pair(n, pair.0, pair.1, opts, &boxes)?;
        if let Some(l) = &ledger {
            l.lock().unwrap_or_else(|e| e.into_inner()).append(&rec)?;
        }
        Ok(rec)
    };
    let fresh: Vec<CertRecord> = if opts.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| Error::Consistency(format!("thread pool: {e}")))?;
        pool.install(|| todo.par_iter().map(run).collect::<Result<Vec<_>>>())?
    } else {
        todo.iter().map(run).collect::<Result<Vec<_>>>()?
    };
    for r in fresh {
        done.insert(r.key(), r);
    }
    let records =
        pairs.iter().map(|&(m, t)| done.remove(&(n, m, t, opts.convention)).expect("every pair computed")).collect();
    Ok(CertReport { n, records, resumed, elapsed_s: start.elapsed().as_secs_f64() })
}

pub fn certify(n: u32, cfg: &PrecisionConfig) -> Result<Vec<CertRecord>> {
    let opts = CertifyOptions { precision: *cfg, ..Default::default() };
    Ok(certify_with(n, &opts)?.records)
}

/// Row indices `{1, n, ..., 2n}` minus `k` (or minus `1` for `theta = gamma`)
/// and column indices `{1, 2, 3, 5, ..., 2n-1}` of the Pascal submatrix.
pub fn pascal_indices(n: u32, theta: ThetaChoice) -> Result<(Vec<u32>, Vec<u32>)> {
    theta.validate(n)?;
    let drop = match theta {
        ThetaChoice::Gamma => 1,
        ThetaChoice::Index(k) => k,
    };
    let rows: Vec<u32> = std::iter::once(1).chain(n..=2 * n).filter(|&j| j != drop).collect();
    let cols: Vec<u32> = [1, 2].into_iter().chain((3..2 * n).step_by(2)).collect();
    Ok((rows, cols))
}

pub fn pascal_submatrix(n: u32, theta: ThetaChoice) -> Result<Vec<Vec<Integer>>> {
    let (rows, cols) = pascal_indices(n, theta)?;
    Ok(rows.iter().map(|&j| cols.iter().map(|&l| binomial(j, l)).collect()).collect())
}

pub fn pascal_submatrix_det(n: u32, theta: ThetaChoice) -> Result<Rational> {
    let m = pascal_submatrix(n, theta)?;
    let q: Vec<Vec<Rational>> = m.into_iter().map(|r| r.into_iter().map(Rational::from).collect()).collect();
    Ok(rational_det(&q))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndexWitness {
    pub holds: bool,
    pub rows: Vec<u32>,
    pub cols: Vec<u32>,
}

/// `j_i >= l_i` for every position of the sorted row and column lists.
pub fn lstp_index_check(n: u32, theta: ThetaChoice) -> Result<IndexWitness> {
    let (rows, cols) = pascal_indices(n, theta)?;
    let holds = rows.len() == cols.len() && rows.iter().zip(&cols).all(|(j, l)| j >= l);
    Ok(IndexWitness { holds, rows, cols })
}

/// `kappa_2m = (2m-1)! b_m kappa_2^m`, the even-zeta identity in cumulants.
fn even_cumulant_constant(m: u32) -> Result<Rational> {
    Ok(even_zeta_coeff(m)? * Rational::from(factorial(2 * m - 1)))
}

/// `d gamma^(j) / d kappa_l` in the free cumulant coordinates
/// `kappa_1, kappa_2, kappa_3, kappa_5, ...`, with every even cumulant
/// above `kappa_2` eliminated through the even-zeta identity, evaluated at
/// `kappa_1 = 1` and all other free coordinates `0`. Errors unless the
/// result is the binomial matrix `[C(j, l)]`.
pub fn bell_jacobian_at_kstar(n: u32, theta: ThetaChoice) -> Result<Vec<Vec<Rational>>> {
    let (rows, cols) = pascal_indices(n, theta)?;
    let top = *rows.iter().max().expect("non-empty");
    let mut elim = HashMap::new();
    for m in 2..=top / 2 {
        let c = even_cumulant_constant(m)?;
        elim.insert(VarId::kappa(2 * m), Poly::var(VarId::kappa(2)).pow(m).scale(&c));
    }
    let mut point = HashMap::new();
    for l in 1..=top {
        point.insert(VarId::kappa(l), Rational::from(if l == 1 { 1 } else { 0 }));
    }
    let mut out = Vec::with_capacity(rows.len());
    for &j in &rows {
        let reduced = moment_from_cumulants(j).substitute_all(&elim);
        let mut row = Vec::with_capacity(cols.len());
        for &l in &cols {
            let v = reduced.partial_derivative(VarId::kappa(l)).eval_rational(&point)?;
            if v != binomial(j, l) {
                return Err(Error::Consistency(format!(
                    "cumulant Jacobian entry (j={j}, l={l}) is {v}, expected C({j},{l})"
                )));
            }
            row.push(v);
        }
        out.push(row);
    }
    Ok(out)
}

/// The chain-rule contribution through the eliminated even cumulants,
/// `sum_m dB_j/dkappa_2m * m c_m kappa_2^(m-1)`, evaluated at the base point.
pub fn chain_rule_extra_at_kstar(j: u32) -> Result<Rational> {
    let mut point = HashMap::new();
    for l in 1..=j.max(2) {
        point.insert(VarId::kappa(l), Rational::from(if l == 1 { 1 } else { 0 }));
    }
    let b = moment_from_cumulants(j);
    let mut acc = Rational::new();
    for m in 2..=j / 2 {
        let d = b.partial_derivative(VarId::kappa(2 * m)).eval_rational(&point)?;
        let mut k2_pow = Rational::from(1);
        for _ in 1..m {
            k2_pow *= &point[&VarId::kappa(2)];
        }
        let factor = even_cumulant_constant(m)? * Rational::from(m) * k2_pow;
        acc += d * factor;
    }
    Ok(acc)
}

/// Distinct `(m, theta)` keys present in a set of records.
pub fn record_keys(records: &[CertRecord]) -> HashSet<(u32, ThetaChoice)> {
    records.iter().map(|r| (r.m, r.theta)).collect()
}
