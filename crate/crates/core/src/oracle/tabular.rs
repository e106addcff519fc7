//! Outcomes looked up from a precomputed table of simulation runs.
//!
//! The CSV layout is one column per physical input followed by a `label`
//! column holding `-1` or `1`.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Domain, Oracle, Transform};
use crate::error::{Error, Result, Violation};
use crate::monotone::{Label, UnitPoint};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub inputs: Vec<f64>,
    pub label: Label,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<TableRow>,
}

impl Table {
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    pub fn from_reader(reader: impl std::io::Read) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.len() < 2 || &header[header.len() - 1] != "label" {
            return Err(Error::usage(
                "table needs at least one input column followed by a `label` column",
            ));
        }
        let columns: Vec<String> = header.iter().take(header.len() - 1).map(String::from).collect();
        let mut rows = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::usage(format!("row {}: `{s}` is not a number", line + 1)))
            };
            let inputs = rec
                .iter()
                .take(columns.len())
                .map(parse)
                .collect::<Result<Vec<_>>>()?;
            let raw = parse(&rec[columns.len()])?;
            let label = match raw as i64 {
                -1 if raw == -1.0 => Label::Negative,
                1 if raw == 1.0 => Label::Positive,
                _ => {
                    return Err(Error::usage(format!(
                        "row {}: label must be -1 or 1, got {raw}",
                        line + 1
                    )))
                }
            };
            rows.push(TableRow { inputs, label });
        }
        Ok(Self { columns, rows })
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_writer(std::fs::File::create(path)?)
    }

    pub fn to_writer(&self, writer: impl std::io::Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = self.columns.clone();
        header.push("label".into());
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec: Vec<String> = row.inputs.iter().map(|v| v.to_string()).collect();
            rec.push(row.label.as_i8().to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn key(values: &[f64]) -> Vec<i64> {
    values.iter().map(|v| (v * 1e6).round() as i64).collect()
}

/// A table seen through a discrete transform.
#[derive(Clone, Debug)]
pub struct TabularOracle {
    transform: Transform,
    domain: Option<Domain>,
    lookup: HashMap<Vec<i64>, Label>,
}

impl TabularOracle {
    /// Builds the oracle after checking that every row maps into the unit
    /// cube, that the labels are monotone there, and that every lawful point
    /// of a finite domain has a row.
    pub fn new(table: Table, transform: Transform) -> Result<Self> {
        transform.validate()?;
        let p = transform.dimension();
        if table.columns.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                actual: table.columns.len(),
            });
        }
        let mut units = Vec::with_capacity(table.rows.len());
        let mut lookup = HashMap::with_capacity(table.rows.len());
        for row in &table.rows {
            let u = transform.inverse(&row.inputs)?;
            if let Some(prev) = lookup.insert(key(&row.inputs), row.label) {
                if prev != row.label {
                    return Err(Error::usage(format!(
                        "table lists {:?} twice with different labels",
                        row.inputs
                    )));
                }
            }
            units.push((u, row.label));
        }
        for (a, la) in &units {
            if *la != Label::Positive {
                continue;
            }
            for (b, lb) in &units {
                if *lb == Label::Negative && a.leq(b) {
                    return Err(Error::NonMonotone(Violation {
                        negative: b.clone(),
                        positive: a.clone(),
                    }));
                }
            }
        }
        let domain = transform.domain();
        if let Some(points) = domain.as_ref().and_then(Domain::points) {
            for x in points {
                let phys = transform.apply(&x)?;
                if !lookup.contains_key(&key(&phys)) {
                    return Err(Error::usage(format!("table has no row for inputs {phys:?}")));
                }
            }
        }
        Ok(Self {
            transform,
            domain,
            lookup,
        })
    }

    pub fn transform(&self) -> &Transform {
        &self.transform
    }

    pub fn len(&self) -> usize {
        self.lookup.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lookup.is_empty()
    }
}

impl Oracle for TabularOracle {
    fn dimension(&self) -> usize {
        self.transform.dimension()
    }

    fn evaluate(&self, x: &UnitPoint) -> Result<Label> {
        let phys = self.transform.apply(x)?;
        self.lookup
            .get(&key(&phys))
            .copied()
            .ok_or_else(|| Error::Domain(format!("no table row for inputs {phys:?}")))
    }

    fn domain(&self) -> Option<&Domain> {
        self.domain.as_ref()
    }

    fn id(&self) -> String {
        format!("table_{}rows", self.lookup.len())
    }
}

/// A monotone stand-in for the 67 × 15 crash table: glance durations
/// 0–6.6 s by 0.1 s, decelerations -10.3 to -3.3 m/s² by 0.5 m/s². A crash
/// (`+1`) happens iff `glance + 0.5 (decel + 10.3) >= threshold`.
pub fn synthetic_crash_table(threshold: f64) -> Table {
    let mut rows = Vec::with_capacity(67 * 15);
    for i in 0..67 {
        let glance = (i as f64 * 0.1 * 10.0).round() / 10.0;
        for j in 0..15 {
            let decel = ((-10.3 + 0.5 * j as f64) * 10.0).round() / 10.0;
            let label = Label::from_sign(glance + 0.5 * (decel + 10.3) - threshold + 1e-9);
            rows.push(TableRow {
                inputs: vec![glance, decel],
                label,
            });
        }
    }
    Table {
        columns: vec!["glance_duration".into(), "deceleration".into()],
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_table_covers_both_crash_lattices() {
        let table = synthetic_crash_table(4.0);
        assert_eq!(table.rows.len(), 67 * 15);
        let gg = TabularOracle::new(table.clone(), Transform::crash_full_grid()).unwrap();
        let ai = TabularOracle::new(table, Transform::crash_inner_grid()).unwrap();
        let x = UnitPoint::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(gg.evaluate(&x).unwrap(), ai.evaluate(&x).unwrap());
        assert!(gg.evaluate(&UnitPoint::new(vec![0.3, 0.5]).unwrap()).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let table = synthetic_crash_table(3.0);
        let mut buf = Vec::new();
        table.to_writer(&mut buf).unwrap();
        let back = Table::from_reader(buf.as_slice()).unwrap();
        assert_eq!(back, table);
    }

    #[test]
    fn audit_names_the_violating_pair() {
        let mut table = synthetic_crash_table(4.0);
        let last = table.rows.len() - 1;
        table.rows[last].label = Label::Negative;
        match TabularOracle::new(table, Transform::crash_full_grid()) {
            Err(Error::NonMonotone(v)) => {
                assert_eq!(v.negative, UnitPoint::new(vec![1.0, 1.0]).unwrap());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn incomplete_tables_are_rejected() {
        let mut table = synthetic_crash_table(4.0);
        table.rows.pop();
        assert!(TabularOracle::new(table, Transform::crash_full_grid()).is_err());
    }

    #[test]
    fn bad_labels_are_rejected() {
        let csv = "a,label\n0.5,0\n";
        assert!(Table::from_reader(csv.as_bytes()).is_err());
    }
}
