//! Crop temperature references by species and growth phase.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Species {
    Aubergine,
    Cucumber,
    Lettuce,
    Pepper,
    Tomato,
    Azalea,
    Chrysanthemum,
    Gerbera,
    Antirrhinum,
    Carnation,
    Rosebush,
}

impl Species {
    pub const ALL: [Species; 11] = [
        Species::Aubergine,
        Species::Cucumber,
        Species::Lettuce,
        Species::Pepper,
        Species::Tomato,
        Species::Azalea,
        Species::Chrysanthemum,
        Species::Gerbera,
        Species::Antirrhinum,
        Species::Carnation,
        Species::Rosebush,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Species::Aubergine => "aubergine",
            Species::Cucumber => "cucumber",
            Species::Lettuce => "lettuce",
            Species::Pepper => "pepper",
            Species::Tomato => "tomato",
            Species::Azalea => "azalea",
            Species::Chrysanthemum => "chrysanthemum",
            Species::Gerbera => "gerbera",
            Species::Antirrhinum => "antirrhinum",
            Species::Carnation => "carnation",
            Species::Rosebush => "rosebush",
        }
    }
}

impl fmt::Display for Species {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Species {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Species::ALL
            .into_iter()
            .find(|sp| sp.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown species `{s}`")))
    }
}

/// One table cell. Some published references are a range (`18/21`), a lower
/// bound (`>18`) or missing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ReferenceCell {
    Exact { value: f64 },
    Range { low: f64, high: f64 },
    AtLeast { value: f64 },
    Unspecified,
}

impl ReferenceCell {
    /// Single setpoint for the cell: the value itself, the middle of a range,
    /// or the bound of an "at least" entry.
    pub fn setpoint(&self) -> Option<f64> {
        match *self {
            ReferenceCell::Exact { value } | ReferenceCell::AtLeast { value } => Some(value),
            ReferenceCell::Range { low, high } => Some(0.5 * (low + high)),
            ReferenceCell::Unspecified => None,
        }
    }
}

/// `[from_week, until_week)`; `until_week = None` runs to the end of the crop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub from_week: f64,
    pub until_week: Option<f64>,
    pub night: ReferenceCell,
    pub day: ReferenceCell,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSchedule {
    rows: BTreeMap<Species, Vec<PhaseRow>>,
}

const fn exact(value: f64) -> ReferenceCell {
    ReferenceCell::Exact { value }
}

const fn range(low: f64, high: f64) -> ReferenceCell {
    ReferenceCell::Range { low, high }
}

fn phases(rows: &[(f64, Option<f64>, ReferenceCell, ReferenceCell)]) -> Vec<PhaseRow> {
    rows.iter()
        .map(|&(from_week, until_week, night, day)| PhaseRow {
            from_week,
            until_week,
            night,
            day,
        })
        .collect()
}

impl ReferenceSchedule {
    /// Builds a schedule; each species' rows must start at week 0, be
    /// contiguous and end with an open-ended row.
    pub fn new(rows: BTreeMap<Species, Vec<PhaseRow>>) -> Result<Self> {
        for (species, list) in &rows {
            let bad = |why: &str| Error::config(format!("{species}: {why}"));
            let first = list.first().ok_or_else(|| bad("no phase rows"))?;
            if first.from_week != 0.0 {
                return Err(bad("first phase must start at week 0"));
            }
            for pair in list.windows(2) {
                match pair[0].until_week {
                    Some(end) if end == pair[1].from_week && end > pair[0].from_week => {}
                    _ => return Err(bad("phase rows must be contiguous and non-overlapping")),
                }
            }
            if list.last().and_then(|r| r.until_week).is_some() {
                return Err(bad("last phase must run to the end"));
            }
        }
        Ok(Self { rows })
    }

    /// Published night/day references for common greenhouse crops.
    pub fn standard() -> Self {
        use Species::*;
        let u = ReferenceCell::Unspecified;
        let mut rows = BTreeMap::new();
        rows.insert(Aubergine, phases(&[(0.0, Some(4.0), exact(21.0), exact(22.0)), (4.0, None, exact(19.0), exact(21.0))]));
        rows.insert(
            Cucumber,
            phases(&[
                (0.0, Some(4.0), exact(21.0), exact(23.0)),
                (4.0, Some(10.0), exact(20.0), exact(22.0)),
                (10.0, None, exact(19.0), exact(21.0)),
            ]),
        );
        rows.insert(Lettuce, phases(&[(0.0, Some(2.0), exact(10.0), exact(10.0)), (2.0, None, exact(6.0), exact(12.0))]));
        rows.insert(Pepper, phases(&[(0.0, Some(3.0), exact(20.0), exact(23.0)), (3.0, None, exact(18.0), exact(22.0))]));
        rows.insert(
            Tomato,
            phases(&[
                (0.0, Some(1.0), exact(20.0), exact(20.0)),
                (1.0, Some(6.0), exact(18.5), exact(19.5)),
                (6.0, None, exact(17.5), exact(18.5)),
            ]),
        );
        rows.insert(Azalea, phases(&[(0.0, None, range(18.0, 21.0), ReferenceCell::AtLeast { value: 18.0 })]));
        rows.insert(Chrysanthemum, phases(&[(0.0, None, exact(17.0), exact(18.0))]));
        rows.insert(Gerbera, phases(&[(0.0, None, range(13.0, 15.0), u)]));
        rows.insert(Antirrhinum, phases(&[(0.0, None, range(10.0, 11.0), u)]));
        rows.insert(Carnation, phases(&[(0.0, None, range(12.0, 13.0), exact(18.0))]));
        rows.insert(Rosebush, phases(&[(0.0, None, exact(17.0), exact(21.0))]));
        Self::new(rows).expect("standard schedule is well formed")
    }

    pub fn rows(&self, species: Species) -> Option<&[PhaseRow]> {
        self.rows.get(&species).map(Vec::as_slice)
    }

    pub fn reference_cell(&self, species: Species, weeks_after_plant: f64, is_day: bool) -> Result<ReferenceCell> {
        if !(weeks_after_plant >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "weeks after planting must be non-negative, got {weeks_after_plant}"
            )));
        }
        let rows = self
            .rows(species)
            .ok_or_else(|| Error::InvalidInput(format!("{species} is not in the schedule")))?;
        let row = rows
            .iter()
            .find(|r| r.until_week.map_or(true, |end| weeks_after_plant < end))
            .unwrap_or(&rows[rows.len() - 1]);
        Ok(if is_day { row.day } else { row.night })
    }

    /// Temperature setpoint, °C. See [`ReferenceCell::setpoint`] for how
    /// ranges and bounds are resolved.
    pub fn reference_at(&self, species: Species, weeks_after_plant: f64, is_day: bool) -> Result<f64> {
        self.reference_cell(species, weeks_after_plant, is_day)?
            .setpoint()
            .ok_or(Error::NoReference {
                species: species.to_string(),
                column: if is_day { "day" } else { "night" },
            })
    }
}

impl Default for ReferenceSchedule {
    fn default() -> Self {
        Self::standard()
    }
}
