use std::io::{Read, Write};

use crate::analyzer::{DetectionModel, OutcomeGrid};
use crate::error::{Error, Result};
use crate::qstate::Outcome;

pub const COUNT_CSV_HEADER: [&str; 8] = [
    "setting_label",
    "alpha_deg",
    "beta_deg",
    "outcome_a",
    "outcome_b",
    "mean_counts",
    "n_intervals",
    "interval_s",
];

/// Coincidence counts of one outcome pair at one setting.
#[derive(Clone, Debug, PartialEq)]
pub struct CountRow {
    pub setting_label: String,
    pub alpha_deg: f64,
    pub beta_deg: f64,
    pub outcome_a: Outcome,
    pub outcome_b: Outcome,
    /// Mean counts per interval.
    pub mean_counts: f64,
    pub n_intervals: usize,
    pub interval_s: f64,
    /// Per-interval counts; empty when only the mean is known.
    pub intervals: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CountTable {
    pub rows: Vec<CountRow>,
}

/// The nine rows of one setting, indexed `[A][B]` in `+1, 0, -1` order.
#[derive(Clone, Debug)]
pub struct SettingBlock<'a> {
    pub label: &'a str,
    pub alpha_deg: f64,
    pub beta_deg: f64,
    pub rows: [[&'a CountRow; 3]; 3],
}

impl SettingBlock<'_> {
    pub fn iter(&self) -> impl Iterator<Item = &CountRow> + '_ {
        self.rows.iter().flatten().copied()
    }

    pub fn has_intervals(&self) -> bool {
        self.iter().all(|r| r.intervals.len() >= 2)
    }
}

const ANGLE_TOL: f64 = 1e-9;

impl CountTable {
    pub fn new(rows: Vec<CountRow>) -> Self {
        Self { rows }
    }

    /// Groups rows by setting label, in order of first appearance. Every
    /// setting must have exactly one row per outcome pair and a single
    /// angle pair.
    pub fn settings(&self) -> Result<Vec<SettingBlock<'_>>> {
        let mut labels: Vec<&str> = Vec::new();
        for row in &self.rows {
            if !labels.contains(&row.setting_label.as_str()) {
                labels.push(&row.setting_label);
            }
        }
        labels
            .into_iter()
            .map(|label| {
                let mut cells: [[Option<&CountRow>; 3]; 3] = Default::default();
                let mut angles: Option<(f64, f64)> = None;
                for row in self.rows.iter().filter(|r| r.setting_label == label) {
                    if row.mean_counts < 0.0 || !row.mean_counts.is_finite() {
                        return Err(Error::Table(format!(
                            "setting `{label}`: invalid count {}",
                            row.mean_counts
                        )));
                    }
                    match angles {
                        None => angles = Some((row.alpha_deg, row.beta_deg)),
                        Some((a, b)) => {
                            if (a - row.alpha_deg).abs() > ANGLE_TOL
                                || (b - row.beta_deg).abs() > ANGLE_TOL
                            {
                                return Err(Error::Table(format!(
                                    "setting `{label}` has inconsistent angles"
                                )));
                            }
                        }
                    }
                    let cell = &mut cells[row.outcome_a.index()][row.outcome_b.index()];
                    if cell.is_some() {
                        return Err(Error::Table(format!(
                            "setting `{label}` has duplicate outcome ({}, {})",
                            row.outcome_a, row.outcome_b
                        )));
                    }
                    *cell = Some(row);
                }
                let mut rows = [[&self.rows[0]; 3]; 3];
                for a in Outcome::ALL {
                    for b in Outcome::ALL {
                        rows[a.index()][b.index()] =
                            cells[a.index()][b.index()].ok_or_else(|| {
                                Error::Table(format!(
                                    "setting `{label}` is missing outcome ({a}, {b})"
                                ))
                            })?;
                    }
                }
                let (alpha_deg, beta_deg) = angles.expect("label came from a row");
                Ok(SettingBlock {
                    label,
                    alpha_deg,
                    beta_deg,
                    rows,
                })
            })
            .collect()
    }

    /// Reads the count CSV format. Per-interval columns `c1..cN` are
    /// optional.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let column = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Csv {
                    line: 1,
                    field: name.to_string(),
                    message: "missing column".into(),
                })
        };
        let idx: Vec<usize> = COUNT_CSV_HEADER
            .iter()
            .map(|name| column(name))
            .collect::<Result<_>>()?;
        let mut interval_cols: Vec<(usize, usize)> = headers
            .iter()
            .enumerate()
            .filter_map(|(i, h)| {
                h.strip_prefix('c')
                    .and_then(|k| k.parse::<usize>().ok())
                    .map(|k| (k, i))
            })
            .collect();
        interval_cols.sort();

        let mut rows = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let field = |k: usize| record.get(idx[k]).unwrap_or("");
            let bad = |k: usize, message: String| Error::Csv {
                line,
                field: COUNT_CSV_HEADER[k].to_string(),
                message,
            };
            let number = |k: usize| -> Result<f64> {
                let text = field(k);
                text.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| bad(k, format!("expected a number, got `{text}`")))
            };
            let outcome = |k: usize| -> Result<Outcome> {
                let text = field(k);
                let spin = match text {
                    "+1" | "1" => 1,
                    "0" => 0,
                    "-1" => -1,
                    _ => return Err(bad(k, format!("expected +1, 0 or -1, got `{text}`"))),
                };
                Ok(Outcome::from_spin(spin).expect("valid spin"))
            };
            let setting_label = field(0).to_string();
            if setting_label.is_empty() {
                return Err(bad(0, "empty label".into()));
            }
            let mean_counts = number(5)?;
            if mean_counts < 0.0 {
                return Err(bad(5, format!("negative count {mean_counts}")));
            }
            let n_intervals = field(6)
                .parse::<usize>()
                .map_err(|_| bad(6, format!("expected a count, got `{}`", field(6))))?;
            let interval_s = number(7)?;
            let mut intervals = Vec::new();
            for &(k, col) in &interval_cols {
                let text = record.get(col).unwrap_or("");
                if text.is_empty() {
                    continue;
                }
                let value = text
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite() && *x >= 0.0);
                intervals.push(value.ok_or_else(|| Error::Csv {
                    line,
                    field: format!("c{k}"),
                    message: format!("expected a nonnegative count, got `{text}`"),
                })?);
            }
            if !intervals.is_empty() {
                if intervals.len() != n_intervals {
                    return Err(bad(
                        6,
                        format!(
                            "n_intervals is {n_intervals} but {} interval counts are given",
                            intervals.len()
                        ),
                    ));
                }
                let mean = intervals.iter().sum::<f64>() / intervals.len() as f64;
                if (mean - mean_counts).abs() > 1e-9 * mean_counts.abs().max(1.0) {
                    return Err(bad(
                        5,
                        format!("mean_counts {mean_counts} differs from interval mean {mean}"),
                    ));
                }
            }
            rows.push(CountRow {
                setting_label,
                alpha_deg: number(1)?,
                beta_deg: number(2)?,
                outcome_a: outcome(3)?,
                outcome_b: outcome(4)?,
                mean_counts,
                n_intervals,
                interval_s,
                intervals,
            });
        }
        Ok(Self { rows })
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let n_cols = self
            .rows
            .iter()
            .map(|r| r.intervals.len())
            .max()
            .unwrap_or(0);
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = COUNT_CSV_HEADER.iter().map(|s| s.to_string()).collect();
        header.extend((1..=n_cols).map(|k| format!("c{k}")));
        w.write_record(&header)?;
        for row in &self.rows {
            let mut record = vec![
                row.setting_label.clone(),
                row.alpha_deg.to_string(),
                row.beta_deg.to_string(),
                row.outcome_a.to_string(),
                row.outcome_b.to_string(),
                row.mean_counts.to_string(),
                row.n_intervals.to_string(),
                row.interval_s.to_string(),
            ];
            record.extend((0..n_cols).map(|k| {
                row.intervals
                    .get(k)
                    .map(|c| c.to_string())
                    .unwrap_or_default()
            }));
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Divides every count by the detection weight of its outcome pair:
/// `1/(η_A η_B)` for `(±1, ±1)`, `1/η_A` for `(±1, 0)`, `1/η_B` for
/// `(0, ±1)` and 1 for `(0, 0)`.
pub fn correct_counts(table: &CountTable, det: &DetectionModel) -> Result<CountTable> {
    det.validate()?;
    let rows = table
        .rows
        .iter()
        .map(|row| {
            let w = det.weight(row.outcome_a, row.outcome_b);
            CountRow {
                mean_counts: row.mean_counts / w,
                intervals: row.intervals.iter().map(|c| c / w).collect(),
                ..row.clone()
            }
        })
        .collect();
    Ok(CountTable { rows })
}

/// Normalized outcome probabilities of one setting.
#[derive(Clone, Debug, PartialEq)]
pub struct SettingProbabilities {
    pub label: String,
    pub alpha_deg: f64,
    pub beta_deg: f64,
    pub corrected_total: f64,
    pub grid: OutcomeGrid,
}

/// Divides each corrected count by its setting's corrected total.
pub fn probability_table(corrected: &CountTable) -> Result<Vec<SettingProbabilities>> {
    corrected
        .settings()?
        .into_iter()
        .map(|block| {
            let total: f64 = block.iter().map(|r| r.mean_counts).sum();
            if total <= 0.0 || !total.is_finite() {
                return Err(Error::Table(format!(
                    "setting `{}` has zero total counts",
                    block.label
                )));
            }
            let mut p = [[0.0; 3]; 3];
            for (i, row) in block.rows.iter().enumerate() {
                for (j, cell) in row.iter().enumerate() {
                    p[i][j] = cell.mean_counts / total;
                }
            }
            Ok(SettingProbabilities {
                label: block.label.to_string(),
                alpha_deg: block.alpha_deg,
                beta_deg: block.beta_deg,
                corrected_total: total,
                grid: OutcomeGrid::new(p),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(label: &str, a: i8, b: i8, mean: f64) -> CountRow {
        CountRow {
            setting_label: label.into(),
            alpha_deg: -16.0,
            beta_deg: 14.0,
            outcome_a: Outcome::from_spin(a).unwrap(),
            outcome_b: Outcome::from_spin(b).unwrap(),
            mean_counts: mean,
            n_intervals: 12,
            interval_s: 60.0,
            intervals: Vec::new(),
        }
    }

    fn printed_table() -> CountTable {
        CountTable::new(vec![
            row("ab'", 1, 1, 2.20),
            row("ab'", 1, -1, 18.04),
            row("ab'", -1, 1, 17.37),
            row("ab'", -1, -1, 1.78),
            row("ab'", 1, 0, 21.92),
            row("ab'", 0, 1, 33.67),
            row("ab'", -1, 0, 21.43),
            row("ab'", 0, -1, 28.74),
            row("ab'", 0, 0, 66.50),
        ])
    }

    #[test]
    fn correction_factors() {
        let corrected = correct_counts(&printed_table(), &DetectionModel::default()).unwrap();
        let find = |a: i8, b: i8| {
            corrected
                .rows
                .iter()
                .find(|r| r.outcome_a.spin() == a && r.outcome_b.spin() == b)
                .unwrap()
                .mean_counts
        };
        assert!((find(1, 1) - 2.20 / (0.431 * 0.434)).abs() < 1e-12);
        assert!((find(1, 1) - 11.71).abs() / 11.71 < 0.01);
        assert!((find(1, 0) - 21.92 / 0.431).abs() < 1e-12);
        assert!((find(1, 0) - 50.47).abs() / 50.47 < 0.01);
        assert_eq!(find(0, 0), 66.50);
    }

    #[test]
    fn zero_efficiency_rejected() {
        let det = DetectionModel {
            eta_a: 0.0,
            eta_b: 0.4,
        };
        assert!(correct_counts(&printed_table(), &det).is_err());
    }

    #[test]
    fn probabilities_normalize() {
        let corrected = correct_counts(&printed_table(), &DetectionModel::default()).unwrap();
        let probs = probability_table(&corrected).unwrap();
        assert_eq!(probs.len(), 1);
        assert!((probs[0].grid.total() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn missing_and_duplicate_rows() {
        let mut t = printed_table();
        t.rows.pop();
        let err = t.settings().unwrap_err().to_string();
        assert!(err.contains("missing outcome (0, 0)"), "{err}");

        let mut t = printed_table();
        t.rows.push(row("ab'", 1, 1, 3.0));
        assert!(t.settings().unwrap_err().to_string().contains("duplicate"));

        let zero = CountTable::new(
            printed_table()
                .rows
                .into_iter()
                .map(|r| CountRow {
                    mean_counts: 0.0,
                    ..r
                })
                .collect(),
        );
        assert!(probability_table(&zero).is_err());
    }

    #[test]
    fn csv_diagnostics() {
        let header = COUNT_CSV_HEADER.join(",");
        let text = format!("{header}\nab,0,0,+1,2,1.0,12,60\n");
        let err = CountTable::read_csv(text.as_bytes()).unwrap_err();
        match err {
            Error::Csv { line, field, .. } => {
                assert_eq!(line, 2);
                assert_eq!(field, "outcome_b");
            }
            other => panic!("unexpected {other}"),
        }
        let text = "setting_label,alpha_deg\nab,0\n";
        assert!(matches!(
            CountTable::read_csv(text.as_bytes()),
            Err(Error::Csv { field, .. }) if field == "beta_deg"
        ));
        let text = format!("{header},c1,c2\nab,0,0,+1,0,1.5,2,60,1,2\nab,0,0,0,0,1.0,2,60,1,x\n");
        assert!(matches!(
            CountTable::read_csv(text.as_bytes()),
            Err(Error::Csv { line: 3, field, .. }) if field == "c2"
        ));
    }

    #[test]
    fn csv_round_trip_with_intervals() {
        let mut t = printed_table();
        t.rows[0].n_intervals = 3;
        t.rows[0].intervals = vec![1.0, 2.0, 3.6];
        t.rows[0].mean_counts = 6.6 / 3.0;
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = CountTable::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, t);
    }
}
