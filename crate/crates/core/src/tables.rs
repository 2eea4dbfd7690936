//! Certified decimal tables of the five sequences.

use rayon::prelude::*;
use rug::{Integer, Rational};
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::interval::Interval;
use crate::precision::PrecisionConfig;
use crate::sequences::{delta_n, delta_tilde_n, eta_n, eta_tilde_n, gamma_all, Sequence};

/// How a value is cut to `digits` decimal places.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DigitMode {
    Truncate,
    Nearest,
    /// Truncate `gamma`, `delta`, `eta`; round `delta_tilde`, `eta_tilde`.
    Auto,
}

impl DigitMode {
    fn resolve(self, seq: Sequence) -> DigitMode {
        match self {
            DigitMode::Auto => match seq {
                Sequence::DeltaTildeN | Sequence::EtaTildeN => DigitMode::Nearest,
                _ => DigitMode::Truncate,
            },
            m => m,
        }
    }
}

impl std::str::FromStr for DigitMode {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "truncate" => Ok(DigitMode::Truncate),
            "nearest" => Ok(DigitMode::Nearest),
            "auto" => Ok(DigitMode::Auto),
            _ => Err(invalid(format!("unknown digit mode {s:?}"))),
        }
    }
}

/// Table column order.
pub const COLUMNS: [Sequence; 5] =
    [Sequence::GammaN, Sequence::DeltaN, Sequence::EtaN, Sequence::DeltaTildeN, Sequence::EtaTildeN];

/// `x` with exactly `digits` places, truncated toward zero or rounded half
/// away from zero.
pub fn format_fixed(x: &Rational, digits: u32, mode: DigitMode) -> String {
    let scale = Integer::from(Integer::u_pow_u(10, digits));
    let mag = Rational::from(x.abs_ref()) * scale;
    let q = match mode {
        DigitMode::Nearest => (mag + Rational::from((1, 2))).floor().numer().clone(),
        _ => mag.floor().numer().clone(),
    };
    let s = q.to_string();
    let d = digits as usize;
    let s = if s.len() <= d { format!("{}{}", "0".repeat(d + 1 - s.len()), s) } else { s };
    let (int, frac) = s.split_at(s.len() - d);
    let sign = if *x < 0 { "-" } else { "" };
    if d == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

/// The digit string of an enclosure, if both endpoints give the same one.
pub fn certify_digits(iv: &Interval, digits: u32, mode: DigitMode) -> Option<String> {
    let lo = format_fixed(&iv.lo_rational()?, digits, mode);
    let hi = format_fixed(&iv.hi_rational()?, digits, mode);
    (lo == hi).then_some(lo)
}

#[derive(Clone, Debug, Serialize)]
pub struct TableCell {
    /// `None` when the digits could not be certified.
    pub value: Option<String>,
    pub lo: String,
    pub hi: String,
}

impl TableCell {
    pub fn display(&self) -> &str {
        self.value.as_deref().unwrap_or("INDETERMINATE")
    }
}

#[derive(Clone, Debug)]
pub struct TableRow {
    pub n: u32,
    /// In [`COLUMNS`] order.
    pub cells: Vec<TableCell>,
    pub enclosures: Vec<Interval>,
    pub bits_used: u32,
}

impl TableRow {
    pub fn certified(&self) -> bool {
        self.cells.iter().all(|c| c.value.is_some())
    }

    pub fn cell(&self, seq: Sequence) -> Option<&TableCell> {
        COLUMNS.iter().position(|&s| s == seq).map(|i| &self.cells[i])
    }
}

#[derive(Clone, Debug)]
pub struct Table {
    pub digits: u32,
    pub mode: DigitMode,
    pub rows: Vec<TableRow>,
}

impl Table {
    pub fn all_certified(&self) -> bool {
        self.rows.iter().all(TableRow::certified)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n");
        for s in COLUMNS {
            out.push(',');
            out.push_str(&s.to_string());
        }
        out.push_str(",bits_used\n");
        for r in &self.rows {
            out.push_str(&r.n.to_string());
            for c in &r.cells {
                out.push(',');
                out.push_str(c.display());
            }
            out.push_str(&format!(",{}\n", r.bits_used));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut obj = serde_json::Map::new();
                obj.insert("n".into(), r.n.into());
                for (s, c) in COLUMNS.iter().zip(&r.cells) {
                    obj.insert(s.to_string(), c.display().into());
                    obj.insert(format!("{s}_lo"), c.lo.clone().into());
                    obj.insert(format!("{s}_hi"), c.hi.clone().into());
                }
                obj.insert("bits_used".into(), r.bits_used.into());
                serde_json::Value::Object(obj)
            })
            .collect();
        let doc = serde_json::json!({ "digits": self.digits, "mode": self.mode, "rows": rows });
        Ok(serde_json::to_string_pretty(&doc)?)
    }
}

fn start_bits(n: u32, digits: u32, cfg: &PrecisionConfig) -> u32 {
    // value magnitude ~ n!, plus 10^-digits resolution, plus slack
    let mag: u32 = (2..=n.max(1)).map(|k| 32 - k.leading_zeros()).sum();
    cfg.bits.max(mag + digits * 10 / 3 + 48)
}

fn row_values(n: u32, cfg: &PrecisionConfig) -> Result<Vec<Interval>> {
    let g = gamma_all(n, cfg)?.pop().expect("non-empty");
    Ok(vec![g, delta_n(n, cfg)?, eta_n(n, cfg)?, delta_tilde_n(n, cfg)?, eta_tilde_n(n, cfg)?])
}

fn row(n: u32, digits: u32, cfg: &PrecisionConfig, mode: DigitMode) -> Result<TableRow> {
    let base = cfg.with_bits(start_bits(n, digits, cfg));
    let mut last = None;
    for bits in base.schedule() {
        let values = row_values(n, &cfg.with_bits(bits))?;
        let cells: Vec<TableCell> = COLUMNS
            .iter()
            .zip(&values)
            .map(|(&s, v)| TableCell {
                value: certify_digits(v, digits, mode.resolve(s)),
                lo: v.lo_decimal(digits as usize + 24),
                hi: v.hi_decimal(digits as usize + 24),
            })
            .collect();
        let r = TableRow { n, cells, enclosures: values, bits_used: bits };
        if r.certified() {
            return Ok(r);
        }
        last = Some(r);
    }
    Ok(last.expect("schedule is non-empty"))
}

/// Rows `0..=n_max`, each printed to `digits` places and certified by its
/// enclosure; rows that stay uncertified after every escalation carry
/// `INDETERMINATE` cells.
pub fn emit_tables(n_max: u32, digits: u32, cfg: &PrecisionConfig, mode: DigitMode) -> Result<Table> {
    cfg.validate()?;
    if digits == 0 {
        return Err(invalid("digits must be >= 1"));
    }
    let rows = (0..=n_max).into_par_iter().map(|n| row(n, digits, cfg, mode)).collect::<Result<Vec<_>>>()?;
    Ok(Table { digits, mode, rows })
}
