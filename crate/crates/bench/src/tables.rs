//! Row layouts of the reference experiment tables.

use std::fmt;
use std::str::FromStr;

use truncreg::{DesignKind, NoiseSpec, DEFAULT_TAIL_EXPONENT, DEFAULT_NOISE_SIGMA};

use crate::scenario::ScenarioConfig;
use crate::BenchError;

/// `(design, n, d)` for every row, in table order.
pub const ROWS: [(DesignKind, usize, usize); 14] = [
    (DesignKind::Inc, 200, 1),
    (DesignKind::Inc, 200, 2),
    (DesignKind::Hcc, 200, 2),
    (DesignKind::Ts, 200, 2),
    (DesignKind::Inc, 1000, 2),
    (DesignKind::Inc, 1000, 10),
    (DesignKind::Hcc, 1000, 10),
    (DesignKind::Ts, 1000, 10),
    (DesignKind::Inc, 2000, 2),
    (DesignKind::Hcc, 2000, 2),
    (DesignKind::Ts, 2000, 2),
    (DesignKind::Inc, 2000, 10),
    (DesignKind::Hcc, 2000, 10),
    (DesignKind::Ts, 2000, 10),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// Mixture noise, `p = 0.005`, `rho = 0.1`.
    Table1,
    /// Mixture noise, `p = 0.005`, `rho = 0.4`.
    Table2,
    Table3,
    Table4,
    Table5,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Table1, Suite::Table2, Suite::Table3, Suite::Table4, Suite::Table5];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Table1 => "table1",
            Suite::Table2 => "table2",
            Suite::Table3 => "table3",
            Suite::Table4 => "table4",
            Suite::Table5 => "table5",
        }
    }

    pub fn noise(self) -> NoiseSpec {
        let spec = match self {
            Suite::Table1 => NoiseSpec::mixture(0.005, 0.1),
            Suite::Table2 => NoiseSpec::mixture(0.005, 0.4),
            Suite::Table3 => NoiseSpec::heavy_tailed(DEFAULT_TAIL_EXPONENT),
            Suite::Table4 => NoiseSpec::asym_heavy_tailed(DEFAULT_TAIL_EXPONENT),
            Suite::Table5 => Ok(NoiseSpec::gaussian()),
        };
        spec.expect("table noise parameters are valid")
    }

    pub fn configs(self, reps: u64, base_seed: u64) -> Vec<ScenarioConfig> {
        ROWS.iter()
            .map(|&(design, n, d)| {
                ScenarioConfig::new(design, n, d, self.noise(), DEFAULT_NOISE_SIGMA, reps, base_seed)
            })
            .collect()
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        Suite::ALL
            .into_iter()
            .find(|t| t.name() == s.to_ascii_lowercase())
            .ok_or_else(|| BenchError::Config(format!("unknown suite {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_parse_and_build() {
        for suite in Suite::ALL {
            assert_eq!(suite.name().parse::<Suite>().unwrap(), suite);
            let cfgs = suite.configs(3, 1);
            assert_eq!(cfgs.len(), 14);
            assert!(cfgs.iter().all(|c| c.validate().is_ok()));
        }
        assert!("table6".parse::<Suite>().is_err());
    }
}
