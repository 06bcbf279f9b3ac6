use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::net::{HyperParams, Topology};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleMode {
    Theorem,
    Desk,
}

/// A positive real of arbitrary size, kept as its natural logarithm.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Magnitude {
    ln: f64,
}

impl Magnitude {
    pub fn from_ln(ln: f64) -> Self {
        Self { ln }
    }

    pub fn ln(&self) -> f64 {
        self.ln
    }

    pub fn log10(&self) -> f64 {
        self.ln / std::f64::consts::LN_10
    }

    /// Value as `f64`; infinite when out of range.
    pub fn to_f64(&self) -> f64 {
        self.ln.exp()
    }
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l10 = self.log10();
        if l10.abs() < 15.0 {
            return write!(f, "{}", self.to_f64());
        }
        let mut exp = l10.floor();
        let mut mantissa = 10f64.powf(l10 - exp);
        if mantissa >= 9.99995 {
            mantissa /= 10.0;
            exp += 1.0;
        }
        write!(f, "{:.4}e{}", mantissa, exp as i64)
    }
}

impl Serialize for Magnitude {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Schedule values given by the theorems.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NominalSchedule {
    /// `K_n = n^{6d + r + 2}`, exact.
    #[serde(serialize_with = "ser_big")]
    pub k: BigUint,
    /// Smallest admissible `L_n = (ln n)^{10 L + 10} K_n^{3/2}`.
    pub l_n: Magnitude,
    /// `t_n = ceil(c6 L_n ln n)`.
    pub t_n: Magnitude,
    /// `lambda_n = 1 / L_n`.
    pub step_size: Magnitude,
}

fn ser_big<S: serde::Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Values a run actually uses.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResolvedSchedule {
    pub k: usize,
    pub l_n: f64,
    pub t_n: u64,
    pub step_size: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Schedule {
    pub mode: ScheduleMode,
    pub nominal: NominalSchedule,
    /// `None` in theorem mode when the theorem values do not fit machine types.
    pub resolved: Option<ResolvedSchedule>,
}

impl Schedule {
    /// Theorem and run values side by side.
    pub fn table(&self) -> String {
        let (k, l, t, s) = match &self.resolved {
            Some(r) => (r.k.to_string(), r.l_n.to_string(), r.t_n.to_string(), r.step_size.to_string()),
            None => ("-".into(), "-".into(), "-".into(), "-".into()),
        };
        let nominal_k = if self.nominal.k.bits() <= 50 {
            self.nominal.k.to_string()
        } else {
            Magnitude::from_ln(big_ln(&self.nominal.k)).to_string()
        };
        let mut out = format!("{:<10} {:>24} {:>24}\n", "quantity", "theorem", "run");
        for (name, p, r) in [
            ("K_n", nominal_k, k),
            ("L_n", self.nominal.l_n.to_string(), l),
            ("t_n", self.nominal.t_n.to_string(), t),
            ("lambda_n", self.nominal.step_size.to_string(), s),
        ] {
            out.push_str(&format!("{name:<10} {p:>24} {r:>24}\n"));
        }
        out
    }
}

fn big_ln(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits <= 1000 {
        let f: f64 = v.to_string().parse().unwrap_or(f64::INFINITY);
        return f.ln();
    }
    let shift = bits - 64;
    let top: u64 = (v >> shift).try_into().unwrap_or(u64::MAX);
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

/// `ceil(c6 * l_n * ln n)`, saturating.
pub fn step_count(c6: f64, l_n: f64, ln_n: f64) -> u64 {
    let v = (c6 * l_n * ln_n).ceil();
    if v >= u64::MAX as f64 {
        u64::MAX
    } else if v <= 0.0 {
        0
    } else {
        v as u64
    }
}

/// Schedule `(K_n, L_n, t_n, lambda_n)` for sample size `n`.
///
/// `topo.d` and `topo.width` enter `K_n = n^{6d + r + 2}`; `topo.depth`
/// enters the lower bound on `L_n`. For the interaction estimator pass the
/// per-group topology (input dimension `d*`). Desk mode caps `K` and `t_n`
/// and replaces `L_n` by `hp.desk` where configured; the theorem values are
/// always reported alongside.
pub fn theorem_schedule(n: usize, topo: &Topology, hp: &HyperParams, mode: ScheduleMode) -> Schedule {
    assert!(n >= 3, "schedules need ln ln n > 0, i.e. n >= 3");
    let ln_n = (n as f64).ln();
    let k_exp = (6 * topo.d + topo.width + 2) as u32;
    let k = BigUint::from(n).pow(k_exp);
    let ln_k = k_exp as f64 * ln_n;
    let ln_l = (10 * topo.depth + 10) as f64 * ln_n.ln() + 1.5 * ln_k;
    let ln_t = hp.c6.ln() + ln_l + ln_n.ln();
    let nominal = NominalSchedule {
        k: k.clone(),
        l_n: Magnitude::from_ln(ln_l),
        t_n: Magnitude::from_ln(ln_t),
        step_size: Magnitude::from_ln(-ln_l),
    };

    let resolved = match mode {
        ScheduleMode::Theorem => {
            let l_n = ln_l.exp();
            let k: Option<usize> = k.try_into().ok();
            match k {
                Some(k) if l_n.is_finite() && ln_t < (u64::MAX as f64).ln() => {
                    Some(ResolvedSchedule { k, l_n, t_n: step_count(hp.c6, l_n, ln_n), step_size: 1.0 / l_n })
                }
                _ => None,
            }
        }
        ScheduleMode::Desk => {
            let cap = hp.desk.k_max.unwrap_or(usize::MAX);
            let k = if k <= BigUint::from(cap) { k.try_into().unwrap_or(cap) } else { cap };
            let l_n = hp.desk.l_n.unwrap_or_else(|| ln_l.exp());
            let t_n = step_count(hp.c6, l_n, ln_n).min(hp.desk.t_n_max.unwrap_or(u64::MAX));
            Some(ResolvedSchedule { k, l_n, t_n, step_size: 1.0 / l_n })
        }
    };
    Schedule { mode, nominal, resolved }
}

impl HyperParams {
    /// Copy with `L_n` and `t_n` taken from a resolved schedule.
    pub fn with_schedule(&self, s: &ResolvedSchedule) -> Self {
        Self { l_n: s.l_n, t_n: s.t_n, ..*self }
    }
}
