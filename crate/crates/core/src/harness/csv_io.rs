use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::experiment::{sort_rows, BatchEstimate, BatchStats};
use crate::error::Result;

pub const RAW_HEADER: [&str; 7] = ["payoff", "method", "n", "N", "batch", "estimate", "runtime_ms"];
pub const SUMMARY_HEADER: [&str; 7] = ["payoff", "method", "n", "N", "mean", "stddev", "batches"];

fn write_records<W: Write, T: Serialize>(out: W, header: &[&str], records: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn read_records<R: Read, T: DeserializeOwned>(input: R) -> Result<Vec<T>> {
    csv::Reader::from_reader(input).deserialize().map(|r| r.map_err(Into::into)).collect()
}

/// Raw per-batch rows, sorted by `(payoff, method, N, batch)`.
pub fn write_rows<W: Write>(out: W, rows: &[BatchEstimate]) -> Result<()> {
    let mut sorted = rows.to_vec();
    sort_rows(&mut sorted);
    write_records(out, &RAW_HEADER, &sorted)
}

pub fn write_summary<W: Write>(out: W, stats: &[BatchStats]) -> Result<()> {
    write_records(out, &SUMMARY_HEADER, stats)
}

pub fn write_csv(rows: &[BatchEstimate], path: &Path) -> Result<()> {
    write_rows(File::create(path)?, rows)
}

pub fn write_summary_csv(stats: &[BatchStats], path: &Path) -> Result<()> {
    write_summary(File::create(path)?, stats)
}

pub fn read_csv(path: &Path) -> Result<Vec<BatchEstimate>> {
    read_records(File::open(path)?)
}

pub fn read_summary_csv(path: &Path) -> Result<Vec<BatchStats>> {
    read_records(File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(batch: usize, paths: u64, estimate: f64) -> BatchEstimate {
        BatchEstimate {
            payoff: "asian".into(),
            method: "forward".into(),
            n: 64,
            paths,
            batch,
            estimate,
            runtime_ms: 0.0,
        }
    }

    #[test]
    fn empty_file_has_header_only() {
        let mut buf = Vec::new();
        write_rows(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "payoff,method,n,N,batch,estimate,runtime_ms\n");
        let mut buf = Vec::new();
        write_summary(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "payoff,method,n,N,mean,stddev,batches\n");
    }

    #[test]
    fn single_row_layout() {
        let mut buf = Vec::new();
        write_rows(&mut buf, &[row(0, 2, 5.25)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines, vec!["payoff,method,n,N,batch,estimate,runtime_ms", "asian,forward,64,2,0,5.25,0.0"]);
    }

    #[test]
    fn round_trip_is_exact_and_sorted() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        let rows = vec![row(1, 4, 0.1 + 0.2), row(0, 4, 1.0 / 3.0), row(0, 2, -2.5e-17)];
        write_csv(&rows, &path).unwrap();
        let back = read_csv(&path).unwrap();
        assert_eq!(back, vec![rows[2].clone(), rows[1].clone(), rows[0].clone()]);

        let stats = crate::harness::summarize(&rows);
        let spath = dir.path().join("summary.csv");
        write_summary_csv(&stats, &spath).unwrap();
        assert_eq!(read_summary_csv(&spath).unwrap(), stats);
    }
}
