use std::path::Path;

use serde::{Serialize, Serializer};

use super::VERDICT_TOLERANCE;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 13] = [
    "run_id",
    "seed",
    "T",
    "d",
    "regret_kind",
    "regret",
    "m",
    "n",
    "U_sum",
    "L_sum",
    "bound",
    "verdict",
    "wall_ms",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn judge(regret: f64, bound: f64) -> Self {
        if regret <= bound + VERDICT_TOLERANCE * bound.abs().max(1.0) {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// Floats go out with 17 significant digits so rows round-trip exactly.
fn sci<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{x:.16e}"))
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub run_id: String,
    pub seed: u64,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub d: usize,
    pub regret_kind: String,
    #[serde(serialize_with = "sci")]
    pub regret: f64,
    #[serde(serialize_with = "sci")]
    pub m: f64,
    #[serde(serialize_with = "sci")]
    pub n: f64,
    #[serde(rename = "U_sum", serialize_with = "sci")]
    pub u_sum: f64,
    #[serde(rename = "L_sum", serialize_with = "sci")]
    pub l_sum: f64,
    #[serde(serialize_with = "sci")]
    pub bound: f64,
    pub verdict: Verdict,
    #[serde(serialize_with = "sci")]
    pub wall_ms: f64,
}

impl RunReport {
    /// `(bound − regret)/max(1, |bound|)`; the verdict passes iff this is at
    /// least `−VERDICT_TOLERANCE`.
    pub fn relative_margin(&self) -> f64 {
        (self.bound - self.regret) / self.bound.abs().max(1.0)
    }
}

pub fn write_csv<'a>(path: &Path, rows: impl Iterator<Item = &'a RunReport>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush().map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes rows to any sink, header first.
pub fn write_csv_to<'a, W: std::io::Write>(
    sink: W,
    rows: impl Iterator<Item = &'a RunReport>,
) -> Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush().map_err(|source| Error::Io {
        path: "<stream>".to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_tolerance() {
        assert_eq!(Verdict::judge(1.0, 1.0), Verdict::Pass);
        assert_eq!(Verdict::judge(1.0 + 5e-7, 1.0), Verdict::Pass);
        assert_eq!(Verdict::judge(1.0 + 2e-6, 1.0), Verdict::Fail);
        assert_eq!(Verdict::judge(100.0 + 5e-5, 100.0), Verdict::Pass);
    }

    #[test]
    fn header_matches_serialized_fields() {
        let row = RunReport {
            run_id: "0".into(),
            seed: 1,
            horizon: 2,
            d: 3,
            regret_kind: "shifting".into(),
            regret: 0.1,
            m: 0.0,
            n: 1.0,
            u_sum: 2.0,
            l_sum: 0.5,
            bound: 1.0,
            verdict: Verdict::Pass,
            wall_ms: 0.0,
        };
        let mut buf = Vec::new();
        write_csv_to(&mut buf, std::iter::once(&row)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        let fields: Vec<_> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields[5], "1.0000000000000001e-1");
        assert_eq!(fields[5].parse::<f64>().unwrap(), 0.1);
        assert_eq!(fields[11], "pass");
    }
}
