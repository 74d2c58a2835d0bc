//! A trained network together with the scaler it was trained under, and
//! the versioned text snapshot that persists both.
//!
//! ```text
//! lmnet-snapshot v1
//! hidden 15
//! w1 <2h values>
//! b1 <h values>
//! w2 <2h values>
//! b2 <2 values>
//! scaler layout <min> <max>
//! scaler angle_deg <min> <max>
//! scaler sigma_mpa <min> <max>
//! scaler eps_pct <min> <max>
//! ```
//!
//! Reals are written with 17 significant digits, so a reload reproduces
//! predictions bit for bit.

use std::fs;
use std::path::Path;

use crate::dataset::{Dataset, Dim, GroupKey, Measured, Range, Scaler};
use crate::error::{Error, Result};
use crate::network::MlpParams;

pub const SNAPSHOT_MAGIC: &str = "lmnet-snapshot";
pub const SNAPSHOT_VERSION: &str = "v1";

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub params: MlpParams,
    pub scaler: Scaler,
}

fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_reals(values: &[f64]) -> String {
    values.iter().map(|v| fmt_real(*v)).collect::<Vec<_>>().join(" ")
}

impl Model {
    pub fn new(params: MlpParams, scaler: Scaler) -> Self {
        Model { params, scaler }
    }

    pub fn predict(&self, key: GroupKey) -> Measured {
        let y = self.params.forward(self.scaler.scale_input(key));
        self.scaler.unscale_output(y)
    }

    pub fn predict_all(&self, d: &Dataset) -> Vec<Measured> {
        d.rows.iter().map(|r| self.predict(r.key())).collect()
    }

    pub fn to_snapshot(&self) -> String {
        let p = &self.params;
        let mut out = format!("{SNAPSHOT_MAGIC} {SNAPSHOT_VERSION}\n");
        out.push_str(&format!("hidden {}\n", p.hidden()));
        out.push_str(&format!("w1 {}\n", fmt_reals(&p.w1)));
        out.push_str(&format!("b1 {}\n", fmt_reals(&p.b1)));
        out.push_str(&format!("w2 {}\n", fmt_reals(&p.w2)));
        out.push_str(&format!("b2 {}\n", fmt_reals(&p.b2)));
        for dim in Dim::ALL {
            let r = self.scaler.range(dim);
            out.push_str(&format!(
                "scaler {} {} {}\n",
                dim.name(),
                fmt_real(r.min),
                fmt_real(r.max)
            ));
        }
        out
    }

    pub fn from_snapshot(text: &str) -> Result<Model> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let first = lines.next().ok_or_else(|| Error::Snapshot("empty file".into()))?;
        match first.split_whitespace().collect::<Vec<_>>().as_slice() {
            [SNAPSHOT_MAGIC, SNAPSHOT_VERSION] => {}
            [SNAPSHOT_MAGIC, other] => return Err(Error::SnapshotVersion(other.to_string())),
            _ => return Err(Error::Snapshot(format!("bad first line `{first}`"))),
        }

        let mut field = |name: &str| -> Result<Vec<String>> {
            let line = lines
                .next()
                .ok_or_else(|| Error::Snapshot(format!("missing `{name}`")))?;
            let mut parts = line.split_whitespace();
            if parts.next() != Some(name) {
                return Err(Error::Snapshot(format!("expected `{name}`, found `{line}`")));
            }
            Ok(parts.map(str::to_owned).collect())
        };
        let reals = |tokens: &[String], n: usize, name: &str| -> Result<Vec<f64>> {
            if tokens.len() != n {
                return Err(Error::Snapshot(format!(
                    "`{name}` has {} values, expected {n}",
                    tokens.len()
                )));
            }
            tokens
                .iter()
                .map(|t| {
                    t.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| Error::Snapshot(format!("bad number `{t}` in `{name}`")))
                })
                .collect()
        };

        let hidden_tok = field("hidden")?;
        let hidden: usize = match hidden_tok.as_slice() {
            [h] => h.parse().ok().filter(|h| *h > 0),
            _ => None,
        }
        .ok_or_else(|| Error::Snapshot("bad hidden size".into()))?;

        let mut params = MlpParams::zeros(hidden)?;
        params.w1 = reals(&field("w1")?, 2 * hidden, "w1")?;
        params.b1 = reals(&field("b1")?, hidden, "b1")?;
        params.w2 = reals(&field("w2")?, 2 * hidden, "w2")?;
        let b2 = reals(&field("b2")?, 2, "b2")?;
        params.b2 = [b2[0], b2[1]];

        let mut ranges = [Range { min: 0.0, max: 0.0 }; 4];
        for dim in Dim::ALL {
            let tokens = field("scaler")?;
            if tokens.first().map(String::as_str) != Some(dim.name()) {
                return Err(Error::Snapshot(format!("expected scaler `{}`", dim.name())));
            }
            let v = reals(&tokens[1..], 2, dim.name())?;
            if v[1] <= v[0] {
                return Err(Error::Snapshot(format!("empty scaler range for `{}`", dim.name())));
            }
            ranges[dim as usize] = Range { min: v[0], max: v[1] };
        }
        Ok(Model {
            params,
            scaler: Scaler { ranges },
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_snapshot()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Model> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Model::from_snapshot(&text)
    }
}
