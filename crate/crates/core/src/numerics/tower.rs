//! Positive reals whose magnitude may be an iterated exponential.
//!
//! A [`TowerReal`] is either a plain `f64` in the moderate band
//! `[1e-300, 1e300]`, or a value `v` described by `|ln v| = g_k(y)`, where
//! `g_0(y) = y`, `g_k(y) = exp(g_{k-1}(y))` and the seed `y` is normalized to
//! `[1, e)`. With that band each value has exactly one representation, and
//! taking a logarithm lowers the height by one.

use std::cmp::Ordering;
use std::f64::consts::{E, LN_10};
use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

pub const MODERATE_MIN: f64 = 1e-300;
pub const MODERATE_MAX: f64 = 1e300;
/// `ln(1e300)`: values whose log exceeds this in magnitude are stored as towers.
pub const LN_MODERATE_MAX: f64 = 690.775_527_898_213_7;

/// Which side of one a tower value lies on, i.e. the sign of its logarithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    AboveOne,
    BelowOne,
}

impl Side {
    fn flip(self) -> Side {
        match self {
            Side::AboveOne => Side::BelowOne,
            Side::BelowOne => Side::AboveOne,
        }
    }

    fn signum(self) -> f64 {
        match self {
            Side::AboveOne => 1.0,
            Side::BelowOne => -1.0,
        }
    }

    fn tag(self) -> &'static str {
        match self {
            Side::AboveOne => "pos",
            Side::BelowOne => "neg",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TowerReal {
    Moderate(f64),
    ExpTower { side: Side, height: u32, seed: f64 },
}

impl Eq for TowerReal {}

fn clamp_moderate(v: f64) -> f64 {
    v.clamp(MODERATE_MIN, MODERATE_MAX)
}

/// Writes `l = g_k(y)` with `y` in `[1, e)`. Requires `l >= e`.
fn reduce(l: f64) -> (u32, f64) {
    let mut y = l;
    let mut k = 0;
    while y >= E {
        y = y.ln();
        k += 1;
    }
    (k, y)
}

/// `g_k(y)` evaluated in floating point; infinite on overflow.
fn iterate_exp(k: u32, y: f64) -> f64 {
    let mut v = y;
    for _ in 0..k {
        v = v.exp();
        if v.is_infinite() {
            break;
        }
    }
    v
}

impl TowerReal {
    /// # Panics
    ///
    /// Panics unless `v` is finite and strictly positive.
    pub fn from_f64(v: f64) -> TowerReal {
        assert!(v.is_finite() && v > 0.0, "TowerReal::from_f64 needs a positive finite value, got {v}");
        if (MODERATE_MIN..=MODERATE_MAX).contains(&v) {
            TowerReal::Moderate(v)
        } else {
            TowerReal::from_ln(v.ln())
        }
    }

    /// The value `e^l`.
    ///
    /// # Panics
    ///
    /// Panics if `l` is NaN or infinite.
    pub fn from_ln(l: f64) -> TowerReal {
        assert!(l.is_finite(), "TowerReal::from_ln needs a finite logarithm, got {l}");
        if l.abs() <= LN_MODERATE_MAX {
            return TowerReal::Moderate(clamp_moderate(l.exp()));
        }
        let side = if l > 0.0 { Side::AboveOne } else { Side::BelowOne };
        let (height, seed) = reduce(l.abs());
        TowerReal::ExpTower { side, height, seed }
    }

    pub fn one() -> TowerReal {
        TowerReal::Moderate(1.0)
    }

    /// Which side of one the value lies on; `None` for exactly one.
    pub fn side(&self) -> Option<Side> {
        match *self {
            TowerReal::Moderate(v) if v > 1.0 => Some(Side::AboveOne),
            TowerReal::Moderate(v) if v < 1.0 => Some(Side::BelowOne),
            TowerReal::Moderate(_) => None,
            TowerReal::ExpTower { side, .. } => Some(side),
        }
    }

    pub fn height(&self) -> u32 {
        match *self {
            TowerReal::Moderate(_) => 0,
            TowerReal::ExpTower { height, .. } => height,
        }
    }

    /// Nearest `f64`; towers saturate to `0` or `+inf`.
    pub fn to_f64(&self) -> f64 {
        match *self {
            TowerReal::Moderate(v) => v,
            TowerReal::ExpTower { side: Side::AboveOne, .. } => f64::INFINITY,
            TowerReal::ExpTower { side: Side::BelowOne, .. } => 0.0,
        }
    }

    /// Natural logarithm when it fits in an `f64`.
    pub fn ln(&self) -> Option<f64> {
        match *self {
            TowerReal::Moderate(v) => Some(v.ln()),
            TowerReal::ExpTower { side, height, seed } => {
                let l = iterate_exp(height, seed);
                l.is_finite().then(|| side.signum() * l)
            }
        }
    }

    /// `|ln v|` as a tower value; `None` when `v == 1`.
    pub fn log_magnitude(&self) -> Option<TowerReal> {
        match *self {
            TowerReal::Moderate(v) => {
                let l = v.ln().abs();
                (l > 0.0).then(|| TowerReal::from_f64(l))
            }
            TowerReal::ExpTower { height, seed, .. } => {
                // g_h(seed) is either moderate or has |ln| = g_{h-1}(seed).
                let mut v = seed;
                for _ in 0..height {
                    if v > LN_MODERATE_MAX {
                        return Some(TowerReal::ExpTower {
                            side: Side::AboveOne,
                            height: height - 1,
                            seed,
                        });
                    }
                    v = v.exp();
                }
                Some(TowerReal::from_f64(v))
            }
        }
    }

    /// `e^v`.
    pub fn exp(&self) -> TowerReal {
        match *self {
            TowerReal::Moderate(v) => TowerReal::from_ln(v),
            TowerReal::ExpTower { side: Side::AboveOne, height, seed } => TowerReal::ExpTower {
                side: Side::AboveOne,
                height: height + 1,
                seed,
            },
            // e^v with v < 1e-300 is 1 to double precision.
            TowerReal::ExpTower { side: Side::BelowOne, .. } => TowerReal::one(),
        }
    }

    /// `e^{-v}`.
    pub fn exp_neg(&self) -> TowerReal {
        self.exp().recip()
    }

    pub fn recip(&self) -> TowerReal {
        match *self {
            TowerReal::Moderate(v) => TowerReal::Moderate(clamp_moderate(1.0 / v)),
            TowerReal::ExpTower { side, height, seed } => TowerReal::ExpTower {
                side: side.flip(),
                height,
                seed,
            },
        }
    }

    /// `c * v` for a moderate factor `c`.
    ///
    /// The factor is folded into the natural logarithm, which is exact up to
    /// rounding whenever that logarithm fits in an `f64`. Beyond that
    /// (`|ln v| > 1.8e308`) `ln c` is below the resolution of the logarithm and
    /// the value is returned unchanged.
    pub fn scale(&self, c: f64) -> Result<TowerReal> {
        if !(MODERATE_MIN..=MODERATE_MAX).contains(&c) {
            return Err(Error::domain(format!("scale factor {c} outside [1e-300, 1e300]")));
        }
        Ok(match self.ln() {
            Some(l) => TowerReal::from_ln(l + c.ln()),
            None => *self,
        })
    }

    /// Canonical text form: a shortest round-trip float for moderate values,
    /// `exp-tower(pos|neg,k,seed)` otherwise. Parsed back by [`FromStr`].
    pub fn render(&self) -> String {
        match *self {
            TowerReal::Moderate(v) => format!("{v:e}"),
            TowerReal::ExpTower { side, height, seed } => {
                format!("exp-tower({},{height},{seed})", side.tag())
            }
        }
    }

    /// Readable form such as `e^-1618.18` or `e^-e^e^2.5`; five or more
    /// nested exponentials are written `e^-(e^)^k(x)`.
    pub fn human(&self) -> String {
        match *self {
            TowerReal::Moderate(v) => format!("{v:.6e}"),
            TowerReal::ExpTower { side, height, seed } => {
                let sign = if side == Side::BelowOne { "-" } else { "" };
                // Peel exponentials until the remaining exponent is finite.
                let mut levels = 0;
                let mut inner = iterate_exp(height, seed);
                while inner.is_infinite() {
                    levels += 1;
                    inner = iterate_exp(height - levels, seed);
                }
                let inner = if inner < 1e6 { format!("{inner:.2}") } else { format!("{inner:.6e}") };
                if levels > 4 {
                    format!("e^{sign}(e^)^{levels}({inner})")
                } else {
                    format!("e^{sign}{}{inner}", "e^".repeat(levels as usize))
                }
            }
        }
    }

    /// Iterated base-10 logarithms for plotting: entry `(j, c_j)` with
    /// `c_1 = log10 v` and `c_{j+1} = log10 |c_j|`, starting at the first level
    /// that fits in an `f64` and stopping once `|c_j| <= 10`.
    pub fn log10_chain(&self) -> Vec<(u32, f64)> {
        let mut out = Vec::new();
        let mut cur = *self;
        for depth in 1..=self.height().saturating_add(64) {
            let (Some(side), Some(mag)) = (cur.side(), cur.log_magnitude()) else {
                break;
            };
            let next = mag.scale(1.0 / LN_10).expect("1/ln10 is moderate");
            if let TowerReal::Moderate(v) = next {
                let c = side.signum() * v;
                out.push((depth, c));
                if v <= 10.0 {
                    break;
                }
            }
            cur = next;
        }
        out
    }

    /// [`log10_chain`](Self::log10_chain) as `j:value` pairs joined by `;`.
    pub fn log10_chain_string(&self) -> String {
        self.log10_chain()
            .iter()
            .map(|(j, c)| format!("{j}:{c:.6e}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

impl Ord for TowerReal {
    fn cmp(&self, other: &Self) -> Ordering {
        use TowerReal::*;
        match (*self, *other) {
            (Moderate(a), Moderate(b)) => a.total_cmp(&b),
            (Moderate(_), ExpTower { side, .. }) => match side {
                Side::AboveOne => Ordering::Less,
                Side::BelowOne => Ordering::Greater,
            },
            (ExpTower { side, .. }, Moderate(_)) => match side {
                Side::AboveOne => Ordering::Greater,
                Side::BelowOne => Ordering::Less,
            },
            (
                ExpTower { side: sa, height: ha, seed: ya },
                ExpTower { side: sb, height: hb, seed: yb },
            ) => match (sa, sb) {
                (Side::AboveOne, Side::BelowOne) => Ordering::Greater,
                (Side::BelowOne, Side::AboveOne) => Ordering::Less,
                (Side::AboveOne, Side::AboveOne) => ha.cmp(&hb).then(ya.total_cmp(&yb)),
                (Side::BelowOne, Side::BelowOne) => hb.cmp(&ha).then(yb.total_cmp(&ya)),
            },
        }
    }
}

impl PartialOrd for TowerReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for TowerReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl FromStr for TowerReal {
    type Err = Error;

    fn from_str(s: &str) -> Result<TowerReal> {
        let bad = || Error::domain(format!("cannot parse tower value `{s}`"));
        let s = s.trim();
        if let Some(body) = s.strip_prefix("exp-tower(").and_then(|r| r.strip_suffix(')')) {
            let mut parts = body.split(',').map(str::trim);
            let side = match parts.next() {
                Some("pos") => Side::AboveOne,
                Some("neg") => Side::BelowOne,
                _ => return Err(bad()),
            };
            let height: u32 = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
            let seed: f64 = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
            if parts.next().is_some() || !(1.0..E).contains(&seed) {
                return Err(bad());
            }
            Ok(TowerReal::ExpTower { side, height, seed })
        } else {
            let v: f64 = s.parse().map_err(|_| bad())?;
            if !(MODERATE_MIN..=MODERATE_MAX).contains(&v) {
                return Err(bad());
            }
            Ok(TowerReal::Moderate(v))
        }
    }
}

/// `g_k(x)`: `k` nested exponentials of `x`.
///
/// Evaluated in floating point while the value stays in the moderate band,
/// then by height bookkeeping, so it never overflows.
///
/// # Panics
///
/// Panics if `x` is not finite, or if `k == 0` and `x <= 0` (tower reals are
/// positive).
pub fn tower_g(k: u32, x: f64) -> TowerReal {
    assert!(x.is_finite(), "tower_g needs a finite argument");
    if k == 0 {
        return TowerReal::from_f64(x);
    }
    let mut t = TowerReal::from_ln(x);
    for _ in 1..k {
        t = t.exp();
    }
    t
}

pub fn tower_compare(a: &TowerReal, b: &TowerReal) -> Ordering {
    a.cmp(b)
}

pub fn tower_scale(a: &TowerReal, c: f64) -> Result<TowerReal> {
    a.scale(c)
}
