use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// One candidate regressor of the accuracy model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BasisFunction {
    NReal,
    NSyn,
    LogReal,
    LogSyn,
    LogTotal,
}

impl BasisFunction {
    pub const ALL: [BasisFunction; 5] = [
        BasisFunction::NReal,
        BasisFunction::NSyn,
        BasisFunction::LogReal,
        BasisFunction::LogSyn,
        BasisFunction::LogTotal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BasisFunction::NReal => "N_REAL",
            BasisFunction::NSyn => "N_SYN",
            BasisFunction::LogReal => "LOG_REAL",
            BasisFunction::LogSyn => "LOG_SYN",
            BasisFunction::LogTotal => "LOG_TOTAL",
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    /// Feature value at total counts `(n_real, n_syn)` with log offset `eps`.
    #[inline]
    pub fn eval(self, n_real: f64, n_syn: f64, eps: f64) -> f64 {
        match self {
            BasisFunction::NReal => n_real,
            BasisFunction::NSyn => n_syn,
            BasisFunction::LogReal => (n_real + eps).ln(),
            BasisFunction::LogSyn => (n_syn + eps).ln(),
            BasisFunction::LogTotal => (n_real + n_syn + eps).ln(),
        }
    }
}

impl fmt::Display for BasisFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BasisFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let upper = s.trim().to_ascii_uppercase();
        BasisFunction::ALL
            .into_iter()
            .find(|b| b.name() == upper)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown basis function '{s}'")))
    }
}

/// A nonempty set of basis functions, stored as a bitmask.
///
/// Subsets order by size first, then lexicographically by their members
/// in `BasisFunction::ALL` order. This is the tie-break order used by
/// model selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Subset(u8);

impl Subset {
    pub const FULL: Subset = Subset(0b11111);

    pub fn from_bits(bits: u8) -> Option<Subset> {
        (bits != 0 && bits & !Self::FULL.0 == 0).then_some(Subset(bits))
    }

    /// Builds a subset, rejecting empty and duplicated member lists.
    pub fn new(members: &[BasisFunction]) -> Result<Subset, Error> {
        let mut bits = 0u8;
        for m in members {
            let bit = 1 << m.index();
            if bits & bit != 0 {
                return Err(Error::InvalidArgument(format!("basis function {m} listed twice")));
            }
            bits |= bit;
        }
        Subset::from_bits(bits).ok_or_else(|| Error::InvalidArgument("empty subset".into()))
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        false
    }

    pub fn contains(self, b: BasisFunction) -> bool {
        self.0 & (1 << b.index()) != 0
    }

    /// Members in canonical order.
    pub fn members(self) -> impl Iterator<Item = BasisFunction> {
        BasisFunction::ALL.into_iter().filter(move |b| self.contains(*b))
    }

    /// All 31 nonempty subsets in tie-break order.
    pub fn all() -> Vec<Subset> {
        let mut v: Vec<Subset> = (1..=Self::FULL.0).map(Subset).collect();
        v.sort();
        v
    }

    fn key(self) -> (usize, Vec<usize>) {
        (self.len(), self.members().map(|b| b.index()).collect())
    }
}

impl Ord for Subset {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for Subset {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.members().map(|b| b.name()).collect();
        f.write_str(&names.join("+"))
    }
}

impl FromStr for Subset {
    type Err = Error;

    /// Accepts names joined by `+` or `,`, case-insensitive.
    fn from_str(s: &str) -> Result<Self, Error> {
        let members = s
            .split(['+', ','])
            .filter(|p| !p.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<BasisFunction>, _>>()?;
        Subset::new(&members)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use BasisFunction::*;

    #[test]
    fn thirty_one_subsets_in_order() {
        let all = Subset::all();
        assert_eq!(all.len(), 31);
        assert_eq!(all[0].to_string(), "N_REAL");
        assert_eq!(all[4].to_string(), "LOG_TOTAL");
        assert_eq!(all[5].to_string(), "N_REAL+N_SYN");
        assert_eq!(all[30], Subset::FULL);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn parse_and_display() {
        let s: Subset = "log_real+LOG_SYN, LOG_TOTAL".parse().unwrap();
        assert_eq!(s, Subset::new(&[LogReal, LogSyn, LogTotal]).unwrap());
        assert_eq!(s.to_string(), "LOG_REAL+LOG_SYN+LOG_TOTAL");
        assert!("LOG_REAL+LOG_REAL".parse::<Subset>().is_err());
        assert!("".parse::<Subset>().is_err());
        assert!("LOG_X".parse::<Subset>().is_err());
        assert!(Subset::from_bits(0).is_none());
        assert!(Subset::from_bits(32).is_none());
    }

    #[test]
    fn features_are_finite_at_origin() {
        for b in BasisFunction::ALL {
            assert!(b.eval(0.0, 0.0, 1e-8).is_finite());
        }
        assert_eq!(LogTotal.eval(0.0, 0.0, 1.0), 0.0);
        assert_eq!(LogReal.eval(2.0, 5.0, 1.0), 3f64.ln());
    }
}
