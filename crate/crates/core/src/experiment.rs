//! The surrogate study: error metrics, validation and recall tables,
//! hidden-size search and the recall-group analysis.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::RangeInclusive;

use rayon::prelude::*;

use crate::dataset::{Dataset, GroupKey, Layout, Measured, Samples};
use crate::error::{Error, Result};
use crate::model::Model;
use crate::network::MlpParams;
use crate::trainer::{strictly_better, train_best, LmConfig};

/// Every specimen in the study has four layers.
pub const LAYER_COUNT: u32 = 4;

/// Mean of `(actual − simulated)²` over both outputs of every row.
pub fn mse_of(actual: &Dataset, simulated: &[Measured]) -> Result<f64> {
    if actual.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if actual.len() != simulated.len() {
        return Err(Error::RowMismatch(actual.len(), simulated.len()));
    }
    let total: f64 = actual
        .measured()?
        .iter()
        .zip(simulated)
        .map(|(a, s)| (a.sigma_m - s.sigma_m).powi(2) + (a.eps_m - s.eps_m).powi(2))
        .sum();
    Ok(total / (2 * actual.len()) as f64)
}

/// MSE of a model's descaled predictions, physical units.
pub fn mse(model: &Model, d: &Dataset) -> Result<f64> {
    mse_of(d, &model.predict_all(d))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationRow {
    pub layout: Layout,
    pub angle_deg: f64,
    pub sigma_actual: f64,
    pub eps_actual: f64,
    pub sigma_sim: f64,
    pub eps_sim: f64,
    pub d_sigma: f64,
    pub d_eps: f64,
    /// Percent of the actual value.
    pub d_sigma_rel: f64,
    pub d_eps_rel: f64,
}

impl ValidationRow {
    pub fn new(layout: Layout, angle_deg: f64, actual: Measured, sim: Measured) -> Self {
        let d_sigma = actual.sigma_m - sim.sigma_m;
        let d_eps = actual.eps_m - sim.eps_m;
        ValidationRow {
            layout,
            angle_deg,
            sigma_actual: actual.sigma_m,
            eps_actual: actual.eps_m,
            sigma_sim: sim.sigma_m,
            eps_sim: sim.eps_m,
            d_sigma,
            d_eps,
            d_sigma_rel: 100.0 * d_sigma / actual.sigma_m,
            d_eps_rel: 100.0 * d_eps / actual.eps_m,
        }
    }
}

/// Pairs measured rows with simulated outputs, in dataset order.
pub fn validation_rows(actual: &Dataset, simulated: &[Measured]) -> Result<Vec<ValidationRow>> {
    if actual.len() != simulated.len() {
        return Err(Error::RowMismatch(actual.len(), simulated.len()));
    }
    Ok(actual
        .rows
        .iter()
        .zip(actual.measured()?)
        .zip(simulated)
        .map(|((r, a), s)| ValidationRow::new(r.layout, r.angle_deg, a, *s))
        .collect())
}

pub fn validation_report(model: &Model, validation: &Dataset) -> Result<Vec<ValidationRow>> {
    validation_rows(validation, &model.predict_all(validation))
}

/// Simulated outputs taken from a tabulated dataset whose inputs must match
/// `actual` row for row.
pub fn tabulated_outputs(actual: &Dataset, simulated: &Dataset) -> Result<Vec<Measured>> {
    if actual.len() != simulated.len() {
        return Err(Error::RowMismatch(actual.len(), simulated.len()));
    }
    for (i, (a, s)) in actual.rows.iter().zip(&simulated.rows).enumerate() {
        if a.key() != s.key() {
            return Err(Error::InputMismatch(i + 1));
        }
    }
    simulated.measured()
}

pub const VALIDATION_HEADER: &str =
    "no,layers,layout,angle_deg,sigma_mpa,eps_pct,sigma_sim,eps_sim,d_sigma,d_eps,d_sigma_rel,d_eps_rel";

pub fn validation_csv(rows: &[ValidationRow]) -> String {
    let mut out = format!("{VALIDATION_HEADER}\n");
    for (i, r) in rows.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4}\n",
            i + 1,
            LAYER_COUNT,
            r.layout.code(),
            r.angle_deg,
            r.sigma_actual,
            r.eps_actual,
            r.sigma_sim,
            r.eps_sim,
            r.d_sigma,
            r.d_eps,
            r.d_sigma_rel,
            r.d_eps_rel
        ));
    }
    out
}

/// Reads back a report written by [`validation_csv`]. Error columns are
/// recomputed from the actual and simulated columns.
pub fn parse_validation_csv(text: &str) -> Result<Vec<ValidationRow>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == VALIDATION_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: "not a validation report".into(),
            })
        }
    }
    lines
        .map(|(i, l)| {
            let line = i + 1;
            let f: Vec<f64> = l
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse {
                    line,
                    msg: "malformed number".into(),
                })?;
            if f.len() != 12 {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected 12 columns, found {}", f.len()),
                });
            }
            let layout = Layout::from_code(f[2] as i64).ok_or(Error::Parse {
                line,
                msg: "layout outside {1,2}".into(),
            })?;
            Ok(ValidationRow::new(
                layout,
                f[3],
                Measured {
                    sigma_m: f[4],
                    eps_m: f[5],
                },
                Measured {
                    sigma_m: f[6],
                    eps_m: f[7],
                },
            ))
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SearchRecord {
    pub hidden: usize,
    /// Best training MSE over restarts, physical units.
    pub mse: f64,
    pub seed: u64,
    pub params: MlpParams,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub records: Vec<SearchRecord>,
    /// Index into `records` of the arg-min; ties (within the trainer's tie
    /// margin) go to the smaller h.
    pub selected: usize,
}

impl SearchResult {
    pub fn best(&self) -> &SearchRecord {
        &self.records[self.selected]
    }

    /// `hidden,train_mse,validation_mse,seed`; the validation column is
    /// empty when no validation MSEs are supplied.
    pub fn to_csv(&self, validation_mse: Option<&[f64]>) -> String {
        let mut out = String::from("hidden,train_mse,validation_mse,seed\n");
        for (i, r) in self.records.iter().enumerate() {
            let v = validation_mse
                .and_then(|v| v.get(i))
                .map(|v| format!("{v:.6}"))
                .unwrap_or_default();
            out.push_str(&format!("{},{:.6},{},{}\n", r.hidden, r.mse, v, r.seed));
        }
        out
    }
}

/// Best-of-restarts training for every hidden size in `range`, selecting
/// the lowest training MSE.
pub fn hidden_size_search(cfg: &LmConfig, range: RangeInclusive<usize>, train: &Samples) -> Result<SearchResult> {
    if range.is_empty() || *range.start() == 0 {
        return Err(Error::Config(
            "hidden range must be non-empty and start at 1 or more".into(),
        ));
    }
    let records: Vec<SearchRecord> = range
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|hidden| {
            let best = train_best(cfg, hidden, train)?;
            Ok(SearchRecord {
                hidden,
                mse: best.mse,
                seed: best.seed,
                params: best.trained.params,
            })
        })
        .collect::<Result<_>>()?;
    let selected = records.iter().enumerate().fold(0, |best, (i, r)| {
        if strictly_better(r.mse, records[best].mse) {
            i
        } else {
            best
        }
    });
    Ok(SearchResult { records, selected })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Group {
    /// Same layout, opposed tensile forces.
    G1,
    /// Inputs that coincide with training inputs.
    G2,
    /// Same layout, angles mirrored about a training angle.
    G3,
    G4,
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Group::G1 => "G1",
            Group::G2 => "G2",
            Group::G3 => "G3",
            Group::G4 => "G4",
        };
        f.write_str(s)
    }
}

/// Recall-phase grouping, keyed by input values.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupMap {
    pub reversed_pairs: Vec<(GroupKey, GroupKey)>,
    pub training_inputs: Vec<GroupKey>,
    pub mirrored_pairs: Vec<(GroupKey, GroupKey)>,
}

fn key(layout: u8, angle: f64) -> GroupKey {
    GroupKey::new(Layout::from_code(layout.into()).expect("valid code"), angle)
}

impl GroupMap {
    /// The published grouping of the 36 recall inputs.
    pub fn published() -> Self {
        let pairs = |p: &[(u8, f64, f64)]| p.iter().map(|&(l, a, b)| (key(l, a), key(l, b))).collect();
        GroupMap {
            reversed_pairs: pairs(&[(1, -10.0, 170.0), (1, 1.0, 181.0), (1, 22.0, 202.0), (2, 80.0, 260.0)]),
            training_inputs: [(1, 0.0), (1, 45.0), (1, 90.0), (2, 0.0), (2, 45.0), (2, 90.0)]
                .iter()
                .map(|&(l, a)| key(l, a))
                .collect(),
            mirrored_pairs: pairs(&[
                (1, -10.0, 10.0),
                (1, 35.0, 55.0),
                (1, 80.0, 100.0),
                (2, -10.0, 10.0),
                (2, 35.0, 55.0),
                (2, 80.0, 100.0),
            ]),
        }
    }

    /// Keeps only the pairs and training inputs present in `inputs`.
    pub fn restricted_to(&self, inputs: &[GroupKey]) -> Self {
        let has = |k: &GroupKey| inputs.contains(k);
        let both = |p: &&(GroupKey, GroupKey)| has(&p.0) && has(&p.1);
        GroupMap {
            reversed_pairs: self.reversed_pairs.iter().filter(both).copied().collect(),
            training_inputs: self.training_inputs.iter().filter(|k| has(k)).copied().collect(),
            mirrored_pairs: self.mirrored_pairs.iter().filter(both).copied().collect(),
        }
    }

    /// Label precedence: G2, then G1, then G3, else G4.
    pub fn label(&self, k: GroupKey) -> Group {
        let in_pairs = |pairs: &[(GroupKey, GroupKey)]| pairs.iter().any(|p| p.0 == k || p.1 == k);
        if self.training_inputs.contains(&k) {
            Group::G2
        } else if in_pairs(&self.reversed_pairs) {
            Group::G1
        } else if in_pairs(&self.mirrored_pairs) {
            Group::G3
        } else {
            Group::G4
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecallRow {
    pub layout: Layout,
    pub angle_deg: f64,
    pub sigma_sim: f64,
    pub eps_sim: f64,
    pub group: Group,
}

impl RecallRow {
    pub fn key(&self) -> GroupKey {
        GroupKey::new(self.layout, self.angle_deg)
    }

    fn outputs(&self) -> Measured {
        Measured {
            sigma_m: self.sigma_sim,
            eps_m: self.eps_sim,
        }
    }
}

pub fn recall(model: &Model, inputs: &[GroupKey], groups: &GroupMap) -> Vec<RecallRow> {
    inputs
        .iter()
        .map(|&k| {
            let m = model.predict(k);
            RecallRow {
                layout: k.layout,
                angle_deg: k.angle_deg,
                sigma_sim: m.sigma_m,
                eps_sim: m.eps_m,
                group: groups.label(k),
            }
        })
        .collect()
}

pub fn recall_csv(rows: &[RecallRow]) -> String {
    let mut out = String::from("no,layout,angle_deg,sigma_sim,eps_sim,group\n");
    for (i, r) in rows.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{:.4},{:.4},{}\n",
            i + 1,
            r.layout.code(),
            r.angle_deg,
            r.sigma_sim,
            r.eps_sim,
            r.group
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupEntry {
    pub group: Group,
    /// Row numbers (1-based) of the entry, e.g. `r1-r16` or `r2`.
    pub pair_id: String,
    /// Output distance for pairs, deviation norm for G2, none for G4.
    pub distance: Option<f64>,
    /// `simulated − training mean` for G2 entries.
    pub deviation: Option<(f64, f64)>,
}

fn distance(a: Measured, b: Measured) -> f64 {
    (a.sigma_m - b.sigma_m).hypot(a.eps_m - b.eps_m)
}

/// G1 and G3: output distance within each pair. G2: deviation from the
/// training group mean. G4: listing of rows not in any other group.
pub fn group_analysis(
    rows: &[RecallRow],
    groups: &GroupMap,
    training_means: &BTreeMap<GroupKey, Measured>,
) -> Result<Vec<GroupEntry>> {
    let find = |k: GroupKey| {
        rows.iter()
            .position(|r| r.key() == k)
            .ok_or_else(|| Error::MissingPairMember(k.to_string()))
    };
    let pair_entries = |group: Group, pairs: &[(GroupKey, GroupKey)]| -> Result<Vec<GroupEntry>> {
        pairs
            .iter()
            .map(|&(a, b)| {
                let (ia, ib) = (find(a)?, find(b)?);
                Ok(GroupEntry {
                    group,
                    pair_id: format!("r{}-r{}", ia + 1, ib + 1),
                    distance: Some(distance(rows[ia].outputs(), rows[ib].outputs())),
                    deviation: None,
                })
            })
            .collect()
    };

    let mut entries = pair_entries(Group::G1, &groups.reversed_pairs)?;
    for &k in &groups.training_inputs {
        let i = find(k)?;
        let mean = training_means
            .get(&k)
            .ok_or_else(|| Error::MissingGroupMean(k.to_string()))?;
        let dev = (rows[i].sigma_sim - mean.sigma_m, rows[i].eps_sim - mean.eps_m);
        entries.push(GroupEntry {
            group: Group::G2,
            pair_id: format!("r{}", i + 1),
            distance: Some(dev.0.hypot(dev.1)),
            deviation: Some(dev),
        });
    }
    entries.extend(pair_entries(Group::G3, &groups.mirrored_pairs)?);
    entries.extend(
        rows.iter()
            .enumerate()
            .filter(|(_, r)| r.group == Group::G4)
            .map(|(i, _)| GroupEntry {
                group: Group::G4,
                pair_id: format!("r{}", i + 1),
                distance: None,
                deviation: None,
            }),
    );
    Ok(entries)
}

pub fn group_report_csv(entries: &[GroupEntry]) -> String {
    let mut out = String::from("group,pair_id,distance\n");
    for e in entries {
        let d = e.distance.map(|d| format!("{d:.4}")).unwrap_or_default();
        out.push_str(&format!("{},{},{}\n", e.group, e.pair_id, d));
    }
    out
}

/// Plot data: `index,actual,simulated,channel` with channels `sigma`, `eps`.
pub fn fit_points_csv(rows: &[ValidationRow]) -> String {
    let mut out = String::from("index,actual,simulated,channel\n");
    for (i, r) in rows.iter().enumerate() {
        out.push_str(&format!("{},{:.4},{:.4},sigma\n", i + 1, r.sigma_actual, r.sigma_sim));
    }
    for (i, r) in rows.iter().enumerate() {
        out.push_str(&format!("{},{:.4},{:.4},eps\n", i + 1, r.eps_actual, r.eps_sim));
    }
    out
}
