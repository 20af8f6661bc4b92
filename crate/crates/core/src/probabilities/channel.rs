use std::fmt;

use crate::error::{Error, Result};
use crate::lg_modes::{LGModeSpec, ModeIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelKind {
    /// One photon prepared in `l0` and detected in `l`.
    Single,
    /// Signal and idler detected together in `(l1, l2)` from a pump `l0`.
    Joint,
    /// Signal detected in `l1` with the idler summed over all modes.
    Signal,
}

impl ChannelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ChannelKind::Single => "single",
            ChannelKind::Joint => "joint",
            ChannelKind::Signal => "signal",
        }
    }
}

impl std::str::FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(ChannelKind::Single),
            "joint" => Ok(ChannelKind::Joint),
            "signal" => Ok(ChannelKind::Signal),
            other => Err(Error::InvalidInput(format!("unknown channel kind {other:?}"))),
        }
    }
}

/// Mode assignment of one probability channel.
///
/// For [`ChannelKind::Single`] the pump is the prepared mode and `signal_l`
/// the detected one. Signal and idler always have `p = 0`; all modes share
/// the width `w0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    pub kind: ChannelKind,
    pub pump: ModeIndex,
    pub signal_l: i32,
    pub idler_l: Option<i32>,
    pub w0: f64,
}

impl ChannelSpec {
    pub fn single(l0: i32, l: i32, w0: f64) -> Result<Self> {
        Self::build(ChannelKind::Single, ModeIndex::oam(l0), l, None, w0)
    }

    pub fn joint(l0: i32, l1: i32, l2: i32, w0: f64) -> Result<Self> {
        Self::build(ChannelKind::Joint, ModeIndex::oam(l0), l1, Some(l2), w0)
    }

    pub fn signal(l0: i32, l1: i32, w0: f64) -> Result<Self> {
        Self::build(ChannelKind::Signal, ModeIndex::oam(l0), l1, None, w0)
    }

    /// Same channel with a pump radial index.
    pub fn with_p0(self, p0: u32) -> Result<Self> {
        Self::build(self.kind, ModeIndex::new(self.pump.l, p0), self.signal_l, self.idler_l, self.w0)
    }

    /// Same channel with every mode width set to `w0`.
    pub fn with_w0(self, w0: f64) -> Result<Self> {
        Self::build(self.kind, self.pump, self.signal_l, self.idler_l, w0)
    }

    /// Same channel with every OAM number negated.
    pub fn mirrored(self) -> Result<Self> {
        Self::build(
            self.kind,
            ModeIndex::new(-self.pump.l, self.pump.p),
            -self.signal_l,
            self.idler_l.map(|l| -l),
            self.w0,
        )
    }

    fn build(kind: ChannelKind, pump: ModeIndex, signal_l: i32, idler_l: Option<i32>, w0: f64) -> Result<Self> {
        match (kind, idler_l) {
            (ChannelKind::Joint, None) => return Err(Error::InvalidChannel("joint channel needs an idler OAM".into())),
            (ChannelKind::Single | ChannelKind::Signal, Some(_)) => {
                return Err(Error::InvalidChannel(format!("{} channel takes no idler OAM", kind.name())))
            }
            _ => {}
        }
        if kind == ChannelKind::Single && pump.p != 0 {
            return Err(Error::InvalidChannel("single-photon channel uses p = 0 modes".into()));
        }
        let ch = Self { kind, pump, signal_l, idler_l, w0 };
        for m in ch.modes() {
            LGModeSpec::new(m, w0)?;
        }
        // the reference channel carries the shifted signal OAM
        let r = ch.signal_l as i64 - ch.delta_l() as i64;
        if r.unsigned_abs() > crate::special_functions::MAX_INDEX as u64 {
            return Err(Error::InvalidChannel(format!("reference signal OAM {r} outside the supported range")));
        }
        Ok(ch)
    }

    /// Pump, signal and (for joint channels) idler modes.
    pub fn modes(&self) -> Vec<ModeIndex> {
        let mut m = vec![self.pump, ModeIndex::oam(self.signal_l)];
        if let Some(l2) = self.idler_l {
            m.push(ModeIndex::oam(l2));
        }
        m
    }

    /// OAM mismatch: `l1 + l2 - l0` (joint), `l1 - l0` or `l - l0` otherwise.
    pub fn delta_l(&self) -> i32 {
        self.signal_l + self.idler_l.unwrap_or(0) - self.pump.l
    }

    pub fn is_conserving(&self) -> bool {
        self.delta_l() == 0
    }

    /// Momentum-conserving member of the same family: the signal OAM is
    /// shifted by `-delta_l`, pump and idler are kept.
    pub fn reference(&self) -> Self {
        Self { signal_l: self.signal_l - self.delta_l(), ..*self }
    }

    /// Identifier without commas, e.g. `joint/l0=0/p0=0/l1=1/l2=0`.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ChannelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/l0={}/p0={}", self.kind.name(), self.pump.l, self.pump.p)?;
        match (self.kind, self.idler_l) {
            (ChannelKind::Joint, Some(l2)) => write!(f, "/l1={}/l2={}", self.signal_l, l2),
            (ChannelKind::Single, _) => write!(f, "/l={}", self.signal_l),
            _ => write!(f, "/l1={}", self.signal_l),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mismatch_per_kind() {
        assert_eq!(ChannelSpec::joint(1, 2, 3, 1.0).unwrap().delta_l(), 4);
        assert_eq!(ChannelSpec::signal(2, -1, 1.0).unwrap().delta_l(), -3);
        assert_eq!(ChannelSpec::single(0, 3, 1.0).unwrap().delta_l(), 3);
    }

    #[test]
    fn reference_conserves() {
        for ch in [
            ChannelSpec::joint(0, 3, 0, 1.0).unwrap(),
            ChannelSpec::joint(2, -1, 4, 1.0).unwrap(),
            ChannelSpec::single(1, -2, 1.0).unwrap(),
            ChannelSpec::signal(0, 2, 1.0).unwrap(),
        ] {
            let r = ch.reference();
            assert!(r.is_conserving());
            assert_eq!(r.pump, ch.pump);
            assert_eq!(r.idler_l, ch.idler_l);
        }
    }

    #[test]
    fn labels() {
        assert_eq!(ChannelSpec::joint(0, 1, 0, 1.0).unwrap().label(), "joint/l0=0/p0=0/l1=1/l2=0");
        assert_eq!(ChannelSpec::single(2, 2, 1.0).unwrap().label(), "single/l0=2/p0=0/l=2");
        assert_eq!(ChannelSpec::signal(0, -1, 1.0).unwrap().with_p0(1).unwrap().label(), "signal/l0=0/p0=1/l1=-1");
    }

    #[test]
    fn rejects_bad_channels() {
        assert!(ChannelSpec::joint(0, 0, 0, 0.0).is_err());
        assert!(ChannelSpec::single(0, 31, 1.0).is_err());
        assert!(ChannelSpec::single(0, 1, 1.0).unwrap().with_p0(1).is_err());
        assert!(ChannelSpec::joint(-30, 0, 30, 1.0).is_err());
        assert!(matches!(
            ChannelSpec::build(ChannelKind::Joint, ModeIndex::oam(0), 0, None, 1.0),
            Err(Error::InvalidChannel(_))
        ));
    }

    #[test]
    fn kind_round_trip() {
        for k in [ChannelKind::Single, ChannelKind::Joint, ChannelKind::Signal] {
            assert_eq!(k.name().parse::<ChannelKind>().unwrap(), k);
        }
        assert!("both".parse::<ChannelKind>().is_err());
    }
}
