use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::family::{Constraint, Family, Params};
use crate::tur::{evaluate, TurReport};

use super::Bound;

pub const SWEEP_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridAxis {
    pub name: String,
    pub values: Vec<f64>,
}

/// Sweep or search request.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySpec {
    pub family: Family,
    #[serde(default)]
    pub fixed: Params,
    #[serde(default)]
    pub free: Vec<Bound>,
    #[serde(default)]
    pub grid: Vec<GridAxis>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub point: Params,
    /// Coupling actually used, after any `r_ratio` conversion.
    pub g: Option<f64>,
    pub report: Option<TurReport>,
    pub status: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub family: Family,
    pub axes: Vec<String>,
    pub rows: Vec<SweepRow>,
}

fn status_of(e: &Error) -> &'static str {
    match e {
        Error::CarnotLimit(_) => "carnot-limit",
        Error::SingularGauge => "singular-gauge",
        Error::InvalidModel(_) | Error::UnknownReservoir(_) | Error::UnsupportedDimension(_) => "invalid-model",
        _ => "solver-error",
    }
}

/// Evaluate `Q` on the Cartesian product of the axes; the first axis varies slowest.
pub fn sweep(family: Family, fixed: &Params, axes: &[GridAxis]) -> SweepTable {
    let sizes: Vec<usize> = axes.iter().map(|a| a.values.len()).collect();
    let total: usize = if axes.is_empty() { 1 } else { sizes.iter().product() };
    let rows = (0..total)
        .into_par_iter()
        .map(|index| {
            let mut point = Params::new();
            let mut rest = index;
            for (axis, &n) in axes.iter().zip(&sizes).rev() {
                point.insert(axis.name.clone(), axis.values[rest % n]);
                rest /= n;
            }
            let mut p = fixed.clone();
            p.extend(point.clone());
            match family.build_resolved(&p).and_then(|(resolved, m)| Ok((resolved["g"], evaluate(&m)))) {
                Ok((g, Ok(rep))) => SweepRow { index, point, g: Some(g), report: Some(rep), status: "ok".into() },
                Ok((g, Err(e))) => SweepRow { index, point, g: Some(g), report: None, status: status_of(&e).into() },
                Err(e) => SweepRow { index, point, g: None, report: None, status: status_of(&e).into() },
            }
        })
        .collect();
    SweepTable { family, axes: axes.iter().map(|a| a.name.clone()).collect(), rows }
}

const RESULT_COLUMNS: [&str; 11] = ["g", "r0", "r", "p_c", "J_c", "sigma", "var_d", "var_c", "Q_d", "Q_c", "Q"];

impl SweepTable {
    /// Result columns not already present as a grid axis.
    fn result_columns(&self) -> Vec<usize> {
        (0..RESULT_COLUMNS.len()).filter(|&k| !self.axes.iter().any(|a| a == RESULT_COLUMNS[k])).collect()
    }

    pub fn columns(&self) -> Vec<String> {
        let mut cols = self.axes.clone();
        cols.extend(self.result_columns().into_iter().map(|k| RESULT_COLUMNS[k].to_string()));
        cols.push("status".into());
        cols
    }

    /// CSV with a versioned comment line; failed rows keep their grid values and status.
    pub fn to_csv(&self) -> String {
        let keep = self.result_columns();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns()).expect("in-memory write");
        for row in &self.rows {
            let mut fields: Vec<String> = self.axes.iter().map(|a| fmt(row.point[a])).collect();
            let values: Vec<Option<f64>> = match &row.report {
                Some(rep) => {
                    let res = &rep.reservoir;
                    let v = [rep.r0, rep.r, rep.p_c, rep.J_c, rep.sigma, rep.var_d[res], rep.var_c[res], rep.Q_d, rep.Q_c, rep.Q];
                    std::iter::once(row.g).chain(v.map(Some)).collect()
                }
                None => std::iter::once(row.g).chain(std::iter::repeat(None).take(10)).collect(),
            };
            fields.extend(keep.iter().map(|&k| values[k].map(fmt).unwrap_or_default()));
            fields.push(row.status.clone());
            w.write_record(&fields).expect("in-memory write");
        }
        let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields");
        format!("# turbox sweep v{SWEEP_FORMAT_VERSION} family={}\n{body}", self.family)
    }

    /// Successful row with the smallest `Q`.
    pub fn best(&self) -> Option<&SweepRow> {
        self.rows
            .iter()
            .filter(|r| r.report.is_some())
            .min_by(|a, b| a.report.as_ref().unwrap().Q.total_cmp(&b.report.as_ref().unwrap().Q))
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.17e}")
}
