//! JSON-lines cell archives: a header line, then one record per line.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{CellRecord, CellRecordJson, ProcessError, Sampler};
use crate::direction::PhiSpec;

pub const ARCHIVE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveHeader {
    pub schema_version: u32,
    pub d: usize,
    pub gamma: f64,
    pub phi: PhiSpec,
    pub seed: u64,
    pub sampler: Sampler,
}

pub struct ArchiveWriter<W: Write> {
    out: W,
    written: usize,
}

impl<W: Write> ArchiveWriter<W> {
    pub fn new(mut out: W, header: &ArchiveHeader) -> Result<Self, ProcessError> {
        let line = serde_json::to_string(header).map_err(|e| ProcessError::Archive(e.to_string()))?;
        writeln!(out, "{line}").map_err(|e| ProcessError::Archive(e.to_string()))?;
        Ok(ArchiveWriter { out, written: 0 })
    }

    pub fn write(&mut self, rec: &CellRecord) -> Result<(), ProcessError> {
        let line =
            serde_json::to_string(&CellRecordJson::from(rec)).map_err(|e| ProcessError::Archive(e.to_string()))?;
        writeln!(self.out, "{line}").map_err(|e| ProcessError::Archive(e.to_string()))?;
        self.written += 1;
        Ok(())
    }

    pub fn written(&self) -> usize {
        self.written
    }

    pub fn finish(mut self) -> Result<W, ProcessError> {
        self.out.flush().map_err(|e| ProcessError::Archive(e.to_string()))?;
        Ok(self.out)
    }
}

/// Streams records without holding the archive in memory.
pub struct ArchiveReader<R: BufRead> {
    lines: std::io::Lines<R>,
    pub header: ArchiveHeader,
    line_no: usize,
}

impl<R: BufRead> ArchiveReader<R> {
    pub fn new(input: R) -> Result<Self, ProcessError> {
        let mut lines = input.lines();
        let first = lines
            .next()
            .ok_or_else(|| ProcessError::Archive("missing header line".into()))?
            .map_err(|e| ProcessError::Archive(e.to_string()))?;
        let header: ArchiveHeader =
            serde_json::from_str(&first).map_err(|e| ProcessError::Archive(format!("header: {e}")))?;
        if header.schema_version != ARCHIVE_SCHEMA_VERSION {
            return Err(ProcessError::Archive(format!(
                "schema_version {} (expected {ARCHIVE_SCHEMA_VERSION})",
                header.schema_version
            )));
        }
        Ok(ArchiveReader {
            lines,
            header,
            line_no: 1,
        })
    }

    /// Next record in wire form, skipping polytope validation.
    pub fn next_raw(&mut self) -> Option<Result<CellRecordJson, ProcessError>> {
        loop {
            let line = match self.lines.next()? {
                Ok(l) => l,
                Err(e) => return Some(Err(ProcessError::Archive(e.to_string()))),
            };
            self.line_no += 1;
            if line.trim().is_empty() {
                continue;
            }
            return Some(
                serde_json::from_str(&line)
                    .map_err(|e| ProcessError::Archive(format!("line {}: {e}", self.line_no))),
            );
        }
    }
}

impl<R: BufRead> Iterator for ArchiveReader<R> {
    type Item = Result<CellRecord, ProcessError>;

    fn next(&mut self) -> Option<Self::Item> {
        let raw = self.next_raw()?;
        Some(raw.and_then(|j| CellRecord::try_from(j).map_err(ProcessError::from)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::direction::DirectionalDistribution;
    use crate::process::{zero_cell, ProcessConfig};
    use crate::rng;

    fn header() -> ArchiveHeader {
        ArchiveHeader {
            schema_version: ARCHIVE_SCHEMA_VERSION,
            d: 2,
            gamma: 1.0,
            phi: PhiSpec::Isotropic,
            seed: 3,
            sampler: Sampler::ZeroCell,
        }
    }

    #[test]
    fn empty_archive_has_header_only() {
        let w = ArchiveWriter::new(Vec::new(), &header()).unwrap();
        let bytes = w.finish().unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert_eq!(text.lines().count(), 1);
        let mut r = ArchiveReader::new(&bytes[..]).unwrap();
        assert_eq!(r.header, header());
        assert!(r.next().is_none());
    }

    #[test]
    fn records_round_trip_bit_for_bit() {
        let cfg = ProcessConfig::new(1.0, DirectionalDistribution::isotropic(2).unwrap(), 3).unwrap();
        let recs: Vec<_> = (0..5)
            .map(|i| zero_cell(&cfg, &mut rng::substream(3, 0, i)).unwrap())
            .collect();
        let mut w = ArchiveWriter::new(Vec::new(), &header()).unwrap();
        for r in &recs {
            w.write(r).unwrap();
        }
        let bytes = w.finish().unwrap();
        let back: Vec<CellRecord> = ArchiveReader::new(&bytes[..]).unwrap().map(|r| r.unwrap()).collect();
        assert_eq!(back, recs);
    }

    #[test]
    fn wrong_schema_is_rejected() {
        let mut h = header();
        h.schema_version = 99;
        let line = serde_json::to_string(&h).unwrap();
        assert!(ArchiveReader::new(line.as_bytes()).is_err());
    }
}
