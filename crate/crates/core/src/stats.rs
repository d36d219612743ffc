//! Wilson score intervals in exact arithmetic.
//!
//! Each bound has the form `p + q·√r` with rational `p`, `q` and integer `r`,
//! so rounding decisions are made on exact values. Floors are found by
//! enclosing every square root between integer square roots at growing
//! binary precision until the enclosure pins the answer down.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("empty sample")]
    EmptySample,
    #[error("counts do not add up: {0}")]
    Inconsistent(String),
}

/// The two-sided 95% normal quantile, `1.959963985`.
pub fn z95() -> BigRational {
    BigRational::new(
        BigInt::from(1_959_963_985u64),
        BigInt::from(1_000_000_000u64),
    )
}

/// `constant + Σ coefficient·√radicand`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Surd {
    constant: BigRational,
    terms: Vec<(BigRational, BigInt)>,
}

fn rat(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

impl Surd {
    pub fn rational(v: BigRational) -> Surd {
        Surd {
            constant: v,
            terms: vec![],
        }
    }

    /// `constant + coefficient·√radicand`, folding perfect squares.
    pub fn new(constant: BigRational, coefficient: BigRational, radicand: BigInt) -> Surd {
        assert!(!radicand.is_negative());
        let mut s = Surd {
            constant,
            terms: vec![(coefficient, radicand)],
        };
        s.normalise();
        s
    }

    fn normalise(&mut self) {
        let mut merged: Vec<(BigRational, BigInt)> = Vec::new();
        for (b, r) in self.terms.drain(..) {
            let root = r.sqrt();
            if &root * &root == r {
                self.constant += b * rat(root);
            } else if let Some(slot) = merged.iter_mut().find(|(_, r2)| *r2 == r) {
                slot.0 += b;
            } else {
                merged.push((b, r));
            }
        }
        merged.retain(|(b, _)| !b.is_zero());
        self.terms = merged;
    }

    pub fn is_rational(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn exact(&self) -> Option<&BigRational> {
        self.is_rational().then_some(&self.constant)
    }

    fn add(&self, other: &Surd) -> Surd {
        let mut s = Surd {
            constant: &self.constant + &other.constant,
            terms: self.terms.iter().chain(&other.terms).cloned().collect(),
        };
        s.normalise();
        s
    }

    fn scale(&self, k: &BigRational) -> Surd {
        let mut s = Surd {
            constant: &self.constant * k,
            terms: self.terms.iter().map(|(b, r)| (b * k, r.clone())).collect(),
        };
        s.normalise();
        s
    }

    /// Rational bounds on the value, each square root known to `bits`
    /// binary places.
    fn enclose(&self, bits: u32) -> (BigRational, BigRational) {
        let mut lo = self.constant.clone();
        let mut hi = self.constant.clone();
        let unit = BigInt::one() << bits;
        for (b, r) in &self.terms {
            let s = (r << (2 * bits)).sqrt();
            let down = BigRational::new(s.clone(), unit.clone());
            let up = BigRational::new(s + 1, unit.clone());
            if b.is_negative() {
                lo += b * &up;
                hi += b * &down;
            } else {
                lo += b * &down;
                hi += b * &up;
            }
        }
        (lo, hi)
    }

    pub fn floor(&self) -> BigInt {
        if self.terms.is_empty() {
            return self.constant.floor().to_integer();
        }
        let mut bits = 64;
        loop {
            let (lo, hi) = self.enclose(bits);
            let (a, b) = (lo.floor().to_integer(), hi.floor().to_integer());
            // The value is irrational, so it never equals `hi` exactly.
            if a == b || (a.clone() + 1 == b && hi == rat(b.clone()) && bits >= 4096) {
                return a;
            }
            bits *= 2;
        }
    }

    pub fn ceil(&self) -> BigInt {
        -self.scale(&rat(-1)).floor()
    }

    pub fn cmp_rational(&self, v: &BigRational) -> std::cmp::Ordering {
        let diff = self.add(&Surd::rational(-v.clone()));
        if diff.terms.is_empty() {
            return diff.constant.cmp(&BigRational::zero());
        }
        let mut bits = 64;
        loop {
            let (lo, hi) = diff.enclose(bits);
            if lo.is_positive() {
                return std::cmp::Ordering::Greater;
            }
            if hi.is_negative() {
                return std::cmp::Ordering::Less;
            }
            bits *= 2;
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.constant.to_f64().unwrap_or(f64::NAN)
            + self
                .terms
                .iter()
                .map(|(b, r)| {
                    b.to_f64().unwrap_or(f64::NAN) * r.to_f64().unwrap_or(f64::NAN).sqrt()
                })
                .sum::<f64>()
    }
}

/// A confidence interval for a proportion, `0 ≤ lo ≤ hi ≤ 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Surd,
    pub hi: Surd,
}

impl Interval {
    pub fn lo_f64(&self) -> f64 {
        self.lo.to_f64()
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi.to_f64()
    }
}

/// Wilson's score interval for `wins` successes out of `n`.
pub fn wilson(wins: u64, n: u64, z: &BigRational) -> Result<Interval, StatsError> {
    if n == 0 {
        return Err(StatsError::EmptySample);
    }
    if wins > n {
        return Err(StatsError::Inconsistent(format!("{wins} wins out of {n}")));
    }
    let (p, d) = (z.numer().abs(), z.denom().clone());
    let (w, n) = (BigInt::from(wins), BigInt::from(n));
    let (p2, d2) = (&p * &p, &d * &d);
    // With z = p/d:
    //   centre = (2w d² + p²) / (2 (n d² + p²))
    //   half   = p √(n (4 d² w (n − w) + n p²)) / (2 n (n d² + p²))
    let e = &n * &d2 + &p2;
    let centre = BigRational::new(
        &n * (BigInt::from(2) * &w * &d2 + &p2),
        BigInt::from(2) * &n * &e,
    );
    let radicand = &n * (BigInt::from(4) * &d2 * &w * (&n - &w) + &n * &p2);
    let coefficient = BigRational::new(p, BigInt::from(2) * &n * &e);

    let zero = BigRational::zero();
    let one = BigRational::one();
    let mut lo = Surd::new(centre.clone(), -coefficient.clone(), radicand.clone());
    let mut hi = Surd::new(centre, coefficient, radicand);
    if lo.cmp_rational(&zero).is_lt() {
        lo = Surd::rational(zero);
    }
    if hi.cmp_rational(&one).is_gt() {
        hi = Surd::rational(one);
    }
    Ok(Interval { lo, hi })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SampleSummary {
    pub n: u64,
    pub wins: u64,
    pub losses: u64,
    pub unknowns: u64,
}

impl SampleSummary {
    pub fn check(&self) -> Result<(), StatsError> {
        if self.n == 0 {
            return Err(StatsError::EmptySample);
        }
        if self.wins + self.losses + self.unknowns != self.n {
            return Err(StatsError::Inconsistent(format!(
                "{} + {} + {} != {}",
                self.wins, self.losses, self.unknowns, self.n
            )));
        }
        Ok(())
    }
}

/// Lower bound with every unknown lost, upper bound with every unknown won.
pub fn conservative_interval(s: &SampleSummary, z: &BigRational) -> Result<Interval, StatsError> {
    s.check()?;
    let lo = wilson(s.wins, s.n, z)?.lo;
    let hi = wilson(s.wins + s.unknowns, s.n, z)?.hi;
    Ok(Interval { lo, hi })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Form {
    /// `81.956% ± 0.096%`
    #[default]
    PlusMinus,
    /// `15.97-16.02%`
    Range,
}

/// Percentages in units of `10^-digits`, bounds rounded outward.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rounded {
    pub digits: u32,
    pub lo: BigInt,
    pub hi: BigInt,
    pub centre: BigInt,
    pub half_width: BigInt,
    lo_zero: bool,
    hi_one: bool,
}

pub fn round_interval(iv: &Interval, digits: u32) -> Rounded {
    let scale = rat(BigInt::from(100) * BigInt::from(10u32).pow(digits));
    let lo = iv.lo.scale(&scale).floor();
    let hi = iv.hi.scale(&scale).ceil();
    let half = BigRational::new(1.into(), 2.into());
    let centre = iv
        .lo
        .add(&iv.hi)
        .scale(&(&scale * &half))
        .add(&Surd::rational(half))
        .floor();
    let half_width = (&centre - &lo).max(&hi - &centre);
    Rounded {
        digits,
        lo,
        hi,
        centre,
        half_width,
        lo_zero: iv.lo.exact().is_some_and(Zero::is_zero),
        hi_one: iv.hi.exact().is_some_and(One::is_one),
    }
}

fn fixed(units: &BigInt, digits: u32) -> String {
    let (int, frac) = units.div_mod_floor(&BigInt::from(10u32).pow(digits));
    if digits == 0 {
        int.to_string()
    } else {
        format!(
            "{int}.{:0>width$}",
            frac.to_string(),
            width = digits as usize
        )
    }
}

impl Rounded {
    pub fn render(&self, form: Form) -> String {
        match form {
            Form::PlusMinus => format!(
                "{}% ± {}%",
                fixed(&self.centre, self.digits),
                fixed(&self.half_width, self.digits)
            ),
            Form::Range => {
                let lo = if self.lo_zero {
                    "0".into()
                } else {
                    fixed(&self.lo, self.digits)
                };
                let hi = if self.hi_one {
                    "100".into()
                } else {
                    fixed(&self.hi, self.digits)
                };
                format!("{lo}-{hi}%")
            }
        }
    }
}

impl fmt::Display for Rounded {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(Form::PlusMinus))
    }
}

pub fn display(iv: &Interval, digits: u32, form: Form) -> String {
    round_interval(iv, digits).render(form)
}

/// One aligned text row per game: name, n, wins, losses, unknowns, interval.
pub fn text_table(rows: &[(String, SampleSummary, String)]) -> String {
    let head = (
        "game".to_string(),
        "n".to_string(),
        "✓".to_string(),
        "×".to_string(),
        "?".to_string(),
        "95% interval".to_string(),
    );
    let mut lines = vec![head];
    for (name, s, iv) in rows {
        lines.push((
            name.clone(),
            s.n.to_string(),
            s.wins.to_string(),
            s.losses.to_string(),
            s.unknowns.to_string(),
            iv.clone(),
        ));
    }
    let w = |f: fn(&(String, String, String, String, String, String)) -> &String| {
        lines
            .iter()
            .map(|l| f(l).chars().count())
            .max()
            .unwrap_or(0)
    };
    let widths = [
        w(|l| &l.0),
        w(|l| &l.1),
        w(|l| &l.2),
        w(|l| &l.3),
        w(|l| &l.4),
    ];
    let mut out = String::new();
    for l in &lines {
        let pad = |s: &str, n: usize| " ".repeat(n - s.chars().count());
        out.push_str(&format!(
            "{}{}  {}{}  {}{}  {}{}  {}{}  {}\n",
            l.0,
            pad(&l.0, widths[0]),
            pad(&l.1, widths[1]),
            l.1,
            pad(&l.2, widths[2]),
            l.2,
            pad(&l.3, widths[3]),
            l.3,
            pad(&l.4, widths[4]),
            l.4,
            l.5
        ));
    }
    out
}
