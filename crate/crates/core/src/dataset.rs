//! Tensile-test specimens and the transformations applied before training.
//!
//! CSV files carry the header `layout,angle_deg,sigma_mpa,eps_pct`. Recall
//! input files may drop the last two columns. Lines starting with `#` and
//! blank lines are ignored.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

pub const HEADER: &str = "layout,angle_deg,sigma_mpa,eps_pct";
pub const INPUT_HEADER: &str = "layout,angle_deg";

/// Four-layer layup, coded 1 (all longitudinal) or 2 (alternating).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Layout {
    Llll,
    Ltlt,
}

impl Layout {
    pub fn from_code(code: i64) -> Option<Self> {
        match code {
            1 => Some(Layout::Llll),
            2 => Some(Layout::Ltlt),
            _ => None,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Layout::Llll => 1,
            Layout::Ltlt => 2,
        }
    }
}

/// Measured (or simulated) outputs: tensile strength in MPa, elongation at
/// break in percent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measured {
    pub sigma_m: f64,
    pub eps_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Specimen {
    pub layout: Layout,
    pub angle_deg: f64,
    pub measured: Option<Measured>,
}

impl Specimen {
    pub fn new(layout: Layout, angle_deg: f64, sigma_m: f64, eps_m: f64) -> Self {
        Specimen {
            layout,
            angle_deg,
            measured: Some(Measured { sigma_m, eps_m }),
        }
    }

    pub fn input(layout: Layout, angle_deg: f64) -> Self {
        Specimen {
            layout,
            angle_deg,
            measured: None,
        }
    }

    pub fn key(&self) -> GroupKey {
        GroupKey::new(self.layout, self.angle_deg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Training,
    Validation,
    RecallInput,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub role: Role,
    pub rows: Vec<Specimen>,
}

/// Exact (layout, angle) pair identifying a group of specimens.
#[derive(Debug, Clone, Copy)]
pub struct GroupKey {
    pub layout: Layout,
    pub angle_deg: f64,
}

impl GroupKey {
    pub fn new(layout: Layout, angle_deg: f64) -> Self {
        // -0.0 and 0.0 must land in the same group.
        let angle_deg = if angle_deg == 0.0 { 0.0 } else { angle_deg };
        GroupKey { layout, angle_deg }
    }
}

impl PartialEq for GroupKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for GroupKey {}

impl PartialOrd for GroupKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GroupKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.layout
            .cmp(&other.layout)
            .then(self.angle_deg.total_cmp(&other.angle_deg))
    }
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.layout.code(), self.angle_deg)
    }
}

impl Dataset {
    pub fn new(role: Role, rows: Vec<Specimen>) -> Self {
        Dataset { role, rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Parses CSV text. Training and validation files must carry all four
    /// columns; recall-input files may carry two or four.
    pub fn parse_csv(text: &str, role: Role) -> Result<Dataset> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (header_line, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let columns = match header {
            HEADER => 4,
            INPUT_HEADER if role == Role::RecallInput => 2,
            _ => {
                return Err(Error::Parse {
                    line: header_line,
                    msg: format!("unexpected header `{header}`"),
                })
            }
        };

        let mut rows = Vec::new();
        for (line, text) in lines {
            let fields: Vec<&str> = text.split(',').map(str::trim).collect();
            if fields.len() != columns {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {columns} columns, found {}", fields.len()),
                });
            }
            let number = |idx: usize, name: &str| -> Result<f64> {
                let v: f64 = fields[idx].parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("malformed number `{}` in {name}", fields[idx]),
                })?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Parse {
                        line,
                        msg: format!("non-finite {name}"),
                    })
                }
            };
            let code = number(0, "layout")?;
            let layout = (code.fract() == 0.0)
                .then(|| Layout::from_code(code as i64))
                .flatten()
                .ok_or(Error::Parse {
                    line,
                    msg: "layout outside {1,2}".into(),
                })?;
            let angle = number(1, "angle_deg")?;
            let specimen = if columns == 4 {
                Specimen::new(layout, angle, number(2, "sigma_mpa")?, number(3, "eps_pct")?)
            } else {
                Specimen::input(layout, angle)
            };
            rows.push(specimen);
        }
        Ok(Dataset { role, rows })
    }

    /// Serializes with shortest round-trip float formatting, so parsing the
    /// output reproduces every field bit for bit.
    pub fn to_csv(&self) -> String {
        // only recall inputs may use the two-column form
        let with_outputs = self.role != Role::RecallInput || self.rows.iter().any(|r| r.measured.is_some());
        let mut out = String::new();
        out.push_str(if with_outputs { HEADER } else { INPUT_HEADER });
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!("{},{}", r.layout.code(), r.angle_deg));
            if with_outputs {
                let m = r.measured.unwrap_or(Measured {
                    sigma_m: f64::NAN,
                    eps_m: f64::NAN,
                });
                out.push_str(&format!(",{},{}", m.sigma_m, m.eps_m));
            }
            out.push('\n');
        }
        out
    }

    /// Appends a copy of every row with the tensile force reversed
    /// (angle + 180°) and the same outputs. Call once on raw training data.
    pub fn augment_reversed(&self) -> Dataset {
        let reversed = self.rows.iter().map(|r| Specimen {
            angle_deg: r.angle_deg + 180.0,
            ..*r
        });
        let rows = self.rows.iter().copied().chain(reversed).collect();
        Dataset { role: self.role, rows }
    }

    pub fn measured(&self) -> Result<Vec<Measured>> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| r.measured.ok_or(Error::MissingOutputs(i + 1)))
            .collect()
    }

    /// Mean (sigma, eps) for every exact (layout, angle) group.
    pub fn group_means(&self) -> Result<BTreeMap<GroupKey, Measured>> {
        let mut sums: BTreeMap<GroupKey, (f64, f64, usize)> = BTreeMap::new();
        for (r, m) in self.rows.iter().zip(self.measured()?) {
            let e = sums.entry(r.key()).or_insert((0.0, 0.0, 0));
            e.0 += m.sigma_m;
            e.1 += m.eps_m;
            e.2 += 1;
        }
        Ok(sums
            .into_iter()
            .map(|(k, (s, e, n))| {
                let n = n as f64;
                (
                    k,
                    Measured {
                        sigma_m: s / n,
                        eps_m: e / n,
                    },
                )
            })
            .collect())
    }

    pub fn inputs(&self) -> Vec<GroupKey> {
        self.rows.iter().map(Specimen::key).collect()
    }
}

/// Closed interval observed for one dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub fn apply(&self, x: f64) -> f64 {
        2.0 * (x - self.min) / (self.max - self.min) - 1.0
    }

    pub fn invert(&self, y: f64) -> f64 {
        self.min + (y + 1.0) * (self.max - self.min) / 2.0
    }

    /// Physical size of one scaled unit.
    pub fn half_width(&self) -> f64 {
        (self.max - self.min) / 2.0
    }
}

/// Index of a scaled dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    Layout = 0,
    Angle = 1,
    Sigma = 2,
    Eps = 3,
}

impl Dim {
    pub const ALL: [Dim; 4] = [Dim::Layout, Dim::Angle, Dim::Sigma, Dim::Eps];

    pub fn name(self) -> &'static str {
        match self {
            Dim::Layout => "layout",
            Dim::Angle => "angle_deg",
            Dim::Sigma => "sigma_mpa",
            Dim::Eps => "eps_pct",
        }
    }
}

/// Min-max affine maps onto [-1, +1] for both inputs and both outputs.
/// Values outside the fitted range extrapolate linearly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaler {
    pub ranges: [Range; 4],
}

impl Scaler {
    pub fn fit(d: &Dataset) -> Result<Scaler> {
        if d.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let measured = d.measured()?;
        let columns: [Vec<f64>; 4] = [
            d.rows.iter().map(|r| f64::from(r.layout.code())).collect(),
            d.rows.iter().map(|r| r.angle_deg).collect(),
            measured.iter().map(|m| m.sigma_m).collect(),
            measured.iter().map(|m| m.eps_m).collect(),
        ];
        let mut ranges = [Range { min: 0.0, max: 0.0 }; 4];
        for (dim, values) in Dim::ALL.iter().zip(&columns) {
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if max <= min {
                return Err(Error::DegenerateDimension(dim.name()));
            }
            ranges[*dim as usize] = Range { min, max };
        }
        Ok(Scaler { ranges })
    }

    pub fn range(&self, dim: Dim) -> Range {
        self.ranges[dim as usize]
    }

    pub fn apply(&self, dim: Dim, x: f64) -> f64 {
        self.range(dim).apply(x)
    }

    pub fn invert(&self, dim: Dim, y: f64) -> f64 {
        self.range(dim).invert(y)
    }

    pub fn scale_input(&self, key: GroupKey) -> [f64; 2] {
        [
            self.apply(Dim::Layout, f64::from(key.layout.code())),
            self.apply(Dim::Angle, key.angle_deg),
        ]
    }

    pub fn unscale_output(&self, y: [f64; 2]) -> Measured {
        Measured {
            sigma_m: self.invert(Dim::Sigma, y[0]),
            eps_m: self.invert(Dim::Eps, y[1]),
        }
    }

    /// Scales a dataset with outputs into training samples.
    pub fn scale(&self, d: &Dataset) -> Result<Samples> {
        let measured = d.measured()?;
        let inputs = d.rows.iter().map(|r| self.scale_input(r.key())).collect();
        let targets = measured
            .iter()
            .map(|m| [self.apply(Dim::Sigma, m.sigma_m), self.apply(Dim::Eps, m.eps_m)])
            .collect();
        Ok(Samples {
            inputs,
            targets,
            output_units: [self.range(Dim::Sigma).half_width(), self.range(Dim::Eps).half_width()],
        })
    }
}

/// Training samples in scaled space.
///
/// `output_units` converts a scaled output difference into physical units
/// per channel; unscaled problems use `[1.0, 1.0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub inputs: Vec<[f64; 2]>,
    pub targets: Vec<[f64; 2]>,
    pub output_units: [f64; 2],
}

impl Samples {
    pub fn unscaled(inputs: Vec<[f64; 2]>, targets: Vec<[f64; 2]>) -> Self {
        assert_eq!(inputs.len(), targets.len());
        Samples {
            inputs,
            targets,
            output_units: [1.0, 1.0],
        }
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}
