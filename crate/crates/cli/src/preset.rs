use std::fmt;

use amtc::market::model_file::{Instrument, LatticeFamily, ModelSpec};
use amtc::market::LatticeParams;

/// Steps of the table grids.
pub const GRID_STEPS: [usize; 6] = [20, 40, 100, 250, 500, 1000];
/// Proportional costs of the table grids, as fractions.
pub const GRID_COSTS: [f64; 5] = [0.0, 0.0025, 0.005, 0.01, 0.02];

pub const EXAMPLE4: &str = include_str!("../presets/example4.toml");

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    /// American put with physical delivery, binomial lattice.
    Table1,
    /// Cash-settled 95/105 bull spread, binomial lattice.
    Table2,
    /// Cash-settled 95/105 bull spread, trinomial lattice.
    Table3,
    /// The two-step tree in `presets/example4.toml`.
    Example4,
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Table1 => "table1",
            Preset::Table2 => "table2",
            Preset::Table3 => "table3",
            Preset::Example4 => "example4",
        })
    }
}

impl Preset {
    pub fn is_grid(self) -> bool {
        self != Preset::Example4
    }

    /// Model of one grid cell; `None` for `example4`.
    pub fn cell(self, steps: usize, cost: f64) -> Option<ModelSpec> {
        let family = match self {
            Preset::Table1 | Preset::Table2 => LatticeFamily::Binomial,
            Preset::Table3 => LatticeFamily::Trinomial,
            Preset::Example4 => return None,
        };
        let params = LatticeParams {
            s0: 100.0,
            sigma: 0.2,
            rate: 0.1,
            maturity: 0.25,
            steps,
            cost,
            no_cost_at_time0: true,
            // the put may be left unexercised; the spread never pays less than zero
            never_exercise_step: self == Preset::Table1,
        };
        let instrument = match self {
            Preset::Table1 => Instrument::Put { strike: 100.0 },
            _ => Instrument::CashBasket {
                legs: vec![(95.0, 1.0), (105.0, -1.0)],
            },
        };
        Some(ModelSpec::Lattice {
            family,
            params,
            instrument,
        })
    }
}
