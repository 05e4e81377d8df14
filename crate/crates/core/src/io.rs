//! CSV ingestion of survey reports and CSV storage of posterior draws.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reporting::{day_interval, HeapSet, ReportedDataset, ReportedDuration, Unit};
use crate::sampler::PosteriorDraws;
use crate::scalar::Scalar;

/// Rows dropped because their interval lies entirely past the last day.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionReport {
    pub rows_read: usize,
    pub rows_used: usize,
    pub excluded: usize,
    pub excluded_by_unit: BTreeMap<Unit, usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub dataset: ReportedDataset,
    pub exclusions: ExclusionReport,
}

fn parse_row(record: &csv::StringRecord, line: u64) -> Result<ReportedDuration> {
    let parse_err = |message: String| Error::Parse { line, message };
    if record.len() != 2 {
        return Err(parse_err(format!("expected 2 fields, found {}", record.len())));
    }
    let z_text = record[0].trim();
    let z: u32 = z_text
        .parse()
        .map_err(|_| parse_err(format!("`{z_text}` is not a non-negative integer")))?;
    let unit: Unit = record[1].parse().map_err(parse_err)?;
    Ok(ReportedDuration::new(z, unit))
}

/// Reads a `z,unit` CSV. Units are names (any case, optional plural) or the
/// codes 1 to 4.
pub fn ingest_reader<R: Read>(reader: R, heap: HeapSet) -> Result<Ingested> {
    let mut csv = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(reader);
    let headers = csv.headers()?.clone();
    let names: Vec<String> = headers.iter().map(str::to_ascii_lowercase).collect();
    if names != ["z", "unit"] {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header `z,unit`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut report = ExclusionReport::default();
    let mut records = Vec::new();
    let mut row = csv::StringRecord::new();
    while csv.read_record(&mut row)? {
        let line = row.position().map_or(0, |p| p.line());
        if row.iter().all(str::is_empty) {
            continue;
        }
        report.rows_read += 1;
        let record = parse_row(&row, line)?;
        match day_interval(&record, &heap) {
            Ok(_) => records.push(record),
            Err(Error::OutOfWindow { unit, .. }) => {
                report.excluded += 1;
                *report.excluded_by_unit.entry(unit).or_insert(0) += 1;
            }
            Err(e) => return Err(Error::Parse { line, message: e.to_string() }),
        }
    }
    if records.is_empty() {
        return Err(Error::EmptyData);
    }
    report.rows_used = records.len();
    if report.excluded > 0 {
        log::info!("excluded {} record(s) beyond the two-year window", report.excluded);
    }
    Ok(Ingested { dataset: ReportedDataset::new(records, heap)?, exclusions: report })
}

pub fn ingest_path(path: impl AsRef<Path>, heap: HeapSet) -> Result<Ingested> {
    ingest_reader(File::open(path)?, heap)
}

/// Writes records in input order with lowercase unit names.
pub fn write_dataset_csv<W: Write>(dataset: &ReportedDataset, writer: W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["z", "unit"])?;
    for r in dataset.records() {
        csv.write_record([r.z.to_string(), r.unit.name().to_string()])?;
    }
    csv.flush()?;
    Ok(())
}

/// Draws as read back from CSV, `[chain][iteration][parameter]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DrawTable {
    pub parameter_names: Vec<String>,
    pub chains: Vec<Vec<Vec<f64>>>,
}

/// Columns `chain,iteration,<parameters>`, one row per post-warm-up draw.
/// Values use the shortest representation that parses back exactly.
pub fn write_draws_csv<T: Scalar, W: Write>(draws: &PosteriorDraws<T>, writer: W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    let mut header = vec!["chain".to_string(), "iteration".to_string()];
    header.extend(draws.parameter_names.iter().cloned());
    csv.write_record(&header)?;
    for (c, chain) in draws.draws.iter().enumerate() {
        for (i, theta) in chain.iter().enumerate() {
            let mut row = vec![c.to_string(), i.to_string()];
            row.extend(theta.iter().map(|v| v.as_f64().to_string()));
            csv.write_record(&row)?;
        }
    }
    csv.flush()?;
    Ok(())
}

pub fn read_draws_csv<R: Read>(reader: R) -> Result<DrawTable> {
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = csv.headers()?.clone();
    if headers.len() < 3 || &headers[0] != "chain" || &headers[1] != "iteration" {
        return Err(Error::Parse {
            line: 1,
            message: "expected header `chain,iteration,<parameters>`".into(),
        });
    }
    let parameter_names: Vec<String> = headers.iter().skip(2).map(str::to_string).collect();
    let mut chains: Vec<Vec<Vec<f64>>> = Vec::new();
    for row in csv.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let parse_err = |message: String| Error::Parse { line, message };
        let index = |s: &str| -> Result<usize> {
            s.parse().map_err(|_| parse_err(format!("`{s}` is not an index")))
        };
        let (chain, iteration) = (index(&row[0])?, index(&row[1])?);
        if chain == chains.len() {
            chains.push(Vec::new());
        } else if chain + 1 != chains.len() {
            return Err(parse_err(format!("chain {chain} is out of order")));
        }
        let current = chains.last_mut().expect("pushed above");
        if iteration != current.len() {
            return Err(parse_err(format!("iteration {iteration} is out of order")));
        }
        let theta = row
            .iter()
            .skip(2)
            .map(|s| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_err(format!("`{s}` is not a finite number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        current.push(theta);
    }
    if chains.is_empty() {
        return Err(Error::EmptyData);
    }
    Ok(DrawTable { parameter_names, chains })
}

pub fn read_draws_path(path: impl AsRef<Path>) -> Result<DrawTable> {
    read_draws_csv(File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ingest(text: &str) -> Result<Ingested> {
        ingest_reader(text.as_bytes(), HeapSet::default())
    }

    #[test]
    fn heaped_day_row() {
        let got = ingest("z,unit\n14,day\n").unwrap();
        let r = got.dataset.records()[0];
        assert_eq!(r, ReportedDuration::days(14));
        let i = day_interval(&r, got.dataset.heap()).unwrap();
        assert_eq!((i.lo, i.hi), (12, 16));
    }

    #[test]
    fn two_years_is_excluded() {
        let got = ingest("z,unit\n2,year\n3,Week\n24,3\n").unwrap();
        assert_eq!(got.dataset.len(), 1);
        assert_eq!(got.exclusions.rows_read, 3);
        assert_eq!(got.exclusions.excluded, 2);
        assert_eq!(got.exclusions.excluded_by_unit[&Unit::Year], 1);
        assert_eq!(got.exclusions.excluded_by_unit[&Unit::Month], 1);
    }

    #[test]
    fn unknown_unit_names_the_line() {
        match ingest("z,unit\n3,day\n5,fortnight\n") {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("fortnight"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(ingest("z,unit\n-1,day\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(ingest("z,unit\n0,year\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(ingest("z,unit\n1,day,x\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(ingest("days,unit\n1,day\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn nothing_usable() {
        assert!(matches!(ingest("z,unit\n"), Err(Error::EmptyData)));
        assert!(matches!(ingest("z,unit\n5,year\n800,day\n"), Err(Error::EmptyData)));
    }

    #[test]
    fn dataset_round_trip() {
        let data = ingest("z,unit\n14,DAY\n3,weeks\n1,4\n0,month\n").unwrap().dataset;
        let mut buf = Vec::new();
        write_dataset_csv(&data, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "z,unit\n14,day\n3,week\n1,year\n0,month\n"
        );
        assert_eq!(ingest_reader(buf.as_slice(), HeapSet::default()).unwrap().dataset, data);
    }

    #[test]
    fn draws_round_trip() {
        let draws = PosteriorDraws::<f64> {
            draws: vec![
                vec![vec![0.1, -1e-300], vec![1.0 / 3.0, 2.5]],
                vec![vec![f64::MAX, 0.0], vec![-7.25, 1e17]],
            ],
            parameter_names: vec!["delta_1".into(), "log_sigma".into()],
            accept_stats: vec![0.8; 2],
            divergence_count: vec![0; 2],
            step_sizes: vec![0.1; 2],
            leapfrog_steps: vec![10; 2],
            inv_metric: vec![vec![1.0; 2]; 2],
            warning_count: vec![0; 2],
        };
        let mut buf = Vec::new();
        write_draws_csv(&draws, &mut buf).unwrap();
        let table = read_draws_csv(buf.as_slice()).unwrap();
        assert_eq!(table.parameter_names, draws.parameter_names);
        assert_eq!(table.chains, draws.draws);
        assert!(read_draws_csv("chain,iteration,a\n1,0,1.0\n".as_bytes()).is_err());
        assert!(read_draws_csv("chain,iteration,a\n0,0,nan\n".as_bytes()).is_err());
    }
}
