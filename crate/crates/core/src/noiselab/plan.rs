use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::KrausChannel;

/// Single-qubit channel family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelKind {
    /// Depolarizing.
    D,
    /// Amplitude damping.
    AD,
    /// Phase damping.
    PD,
}

impl ChannelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ChannelKind::D => "D",
            ChannelKind::AD => "AD",
            ChannelKind::PD => "PD",
        }
    }

    pub fn channel(self, p: f64) -> Result<KrausChannel> {
        match self {
            ChannelKind::D => KrausChannel::depolarizing_1q(p),
            ChannelKind::AD => KrausChannel::amplitude_damping(p),
            ChannelKind::PD => KrausChannel::phase_damping(p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleQubitNoise {
    pub kind: ChannelKind,
    pub p: f64,
}

/// Where and how strongly noise enters each embedding circuit.
///
/// The single-qubit channel acts once on every qubit after the last gate. The
/// two-qubit part is always depolarizing and follows every `Rzz`.
///
/// Text form: `none`, `AD(0.1_s)`, `D(0.05_t)`, `D(0.01_s+0.05_t)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct NoisePlan {
    pub single_qubit: Option<SingleQubitNoise>,
    pub two_qubit: Option<f64>,
}

fn check_level(p: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(Error::InvalidProbability(p))
    }
}

impl NoisePlan {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn single(kind: ChannelKind, p: f64) -> Result<Self> {
        Ok(Self { single_qubit: Some(SingleQubitNoise { kind, p: check_level(p)? }), two_qubit: None })
    }

    pub fn two_qubit(p: f64) -> Result<Self> {
        Ok(Self { single_qubit: None, two_qubit: Some(check_level(p)?) })
    }

    /// Depolarizing on both placements, `D(ps_s+pt_t)`.
    pub fn combined(ps: f64, pt: f64) -> Result<Self> {
        Ok(Self {
            single_qubit: Some(SingleQubitNoise { kind: ChannelKind::D, p: check_level(ps)? }),
            two_qubit: Some(check_level(pt)?),
        })
    }

    pub fn is_empty(&self) -> bool {
        self.single_qubit.is_none() && self.two_qubit.is_none()
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(s) = self.single_qubit {
            check_level(s.p)?;
        }
        if let Some(p) = self.two_qubit {
            check_level(p)?;
        }
        Ok(())
    }
}

impl fmt::Display for NoisePlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.single_qubit, self.two_qubit) {
            (None, None) => f.write_str("none"),
            (Some(s), None) => write!(f, "{}({}_s)", s.kind.as_str(), s.p),
            (None, Some(t)) => write!(f, "D({t}_t)"),
            (Some(s), Some(t)) => write!(f, "{}({}_s+{t}_t)", s.kind.as_str(), s.p),
        }
    }
}

impl FromStr for NoisePlan {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let plan = s.trim();
        let bad = |token: &str| Error::NoisePlan { plan: s.to_string(), token: token.to_string() };
        if plan.is_empty() || plan.eq_ignore_ascii_case("none") {
            return Ok(Self::none());
        }
        let open = plan.find('(').ok_or_else(|| bad(plan))?;
        let kind = match &plan[..open] {
            "D" => ChannelKind::D,
            "AD" => ChannelKind::AD,
            "PD" => ChannelKind::PD,
            other => return Err(bad(other)),
        };
        let inner = plan[open + 1..].strip_suffix(')').ok_or_else(|| bad(&plan[open..]))?;

        let mut out = Self::none();
        for term in inner.split('+') {
            let term = term.trim();
            let (level, place) = term.rsplit_once('_').ok_or_else(|| bad(term))?;
            let p: f64 = level.parse().map_err(|_| bad(level))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(bad(level));
            }
            match place {
                "s" if out.single_qubit.is_none() => out.single_qubit = Some(SingleQubitNoise { kind, p }),
                "t" if out.two_qubit.is_none() && kind == ChannelKind::D => out.two_qubit = Some(p),
                _ => return Err(bad(term)),
            }
        }
        Ok(out)
    }
}

impl TryFrom<String> for NoisePlan {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<NoisePlan> for String {
    fn from(p: NoisePlan) -> String {
        p.to_string()
    }
}
