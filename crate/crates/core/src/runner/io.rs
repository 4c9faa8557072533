//! On-disk formats.
//!
//! | file            | columns                                                |
//! |-----------------|--------------------------------------------------------|
//! | `stats.csv`     | generation, evaluations, max_fitness, qd_score, coverage |
//! | `archive.csv`   | m, j, fitness, genome                                  |
//! | `histogram.csv` | generation, total_modules, bricks, joints, count       |
//! | trajectory      | step, x, y, z                                          |
//! | `manifest.toml` | resolved config plus schema/tool version and run seed  |
//!
//! Floats are written in shortest round-trip form, so reading a file back
//! yields the exact values that were recorded.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::genome::{Descriptor, Genome};
use crate::metrics::GenerationStats;
use crate::search::Archive;
use crate::sim::TrajectoryPoint;

use super::{ExperimentConfig, RunnerError};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;
pub const STATS_HEADER: [&str; 5] = ["generation", "evaluations", "max_fitness", "qd_score", "coverage"];
pub const ARCHIVE_HEADER: [&str; 4] = ["m", "j", "fitness", "genome"];
pub const HISTOGRAM_HEADER: [&str; 5] = ["generation", "total_modules", "bricks", "joints", "count"];
pub const TRAJECTORY_HEADER: [&str; 4] = ["step", "x", "y", "z"];

fn writer(path: &Path) -> Result<csv::Writer<File>, RunnerError> {
    let file = File::create(path).map_err(|e| RunnerError::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> RunnerError + '_ {
    move |e| RunnerError::Csv { path: path.to_path_buf(), message: e.to_string() }
}

pub fn write_stats(path: &Path, stats: &[GenerationStats]) -> Result<(), RunnerError> {
    let mut w = writer(path)?;
    let err = csv_err(path);
    w.write_record(STATS_HEADER).map_err(&err)?;
    for s in stats {
        w.write_record([
            s.generation.to_string(),
            s.evaluations.to_string(),
            s.max_fitness.to_string(),
            s.qd_score.to_string(),
            s.coverage.to_string(),
        ])
        .map_err(&err)?;
    }
    w.flush().map_err(|e| RunnerError::io(path, e))
}

pub fn write_histogram(path: &Path, stats: &[GenerationStats]) -> Result<(), RunnerError> {
    let mut w = writer(path)?;
    let err = csv_err(path);
    w.write_record(HISTOGRAM_HEADER).map_err(&err)?;
    for s in stats {
        for b in &s.histogram {
            w.write_record([s.generation, b.total_modules, b.bricks, b.joints, b.count].map(|v| v.to_string()))
                .map_err(&err)?;
        }
    }
    w.flush().map_err(|e| RunnerError::io(path, e))
}

pub fn write_archive(path: &Path, archive: &Archive) -> Result<(), RunnerError> {
    let mut w = writer(path)?;
    let err = csv_err(path);
    w.write_record(ARCHIVE_HEADER).map_err(&err)?;
    for ind in archive.iter() {
        w.write_record([
            ind.descriptor.m.to_string(),
            ind.descriptor.j.to_string(),
            ind.fitness.to_string(),
            ind.genome.to_text(),
        ])
        .map_err(&err)?;
    }
    w.flush().map_err(|e| RunnerError::io(path, e))
}

pub fn write_trajectory(path: &Path, trajectory: &[TrajectoryPoint]) -> Result<(), RunnerError> {
    let mut w = writer(path)?;
    let err = csv_err(path);
    w.write_record(TRAJECTORY_HEADER).map_err(&err)?;
    for p in trajectory {
        w.write_record([p.step.to_string(), p.root[0].to_string(), p.root[1].to_string(), p.root[2].to_string()])
            .map_err(&err)?;
    }
    w.flush().map_err(|e| RunnerError::io(path, e))
}

pub fn write_manifest(path: &Path, cfg: &ExperimentConfig, repetition: usize, run_seed: u64) -> Result<(), RunnerError> {
    let mut text = format!(
        "schema_version = {MANIFEST_SCHEMA_VERSION}\ntool_version = \"{}\"\nrepetition = {repetition}\nrun_seed = {run_seed}\ntotal_evaluations = {}\n",
        env!("CARGO_PKG_VERSION"),
        cfg.total_evaluations()
    );
    text.push_str(&cfg.resolved().to_toml_string());
    let mut f = File::create(path).map_err(|e| RunnerError::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| RunnerError::io(path, e))
}

#[derive(Clone, Debug, PartialEq)]
pub struct StatsRow {
    pub generation: usize,
    pub evaluations: usize,
    pub max_fitness: f64,
    pub qd_score: f64,
    pub coverage: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArchiveRow {
    pub descriptor: Descriptor,
    pub fitness: f64,
    pub genome: Genome,
}

fn reader(path: &Path, header: &[&str]) -> Result<csv::Reader<File>, RunnerError> {
    let file = File::open(path).map_err(|e| RunnerError::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let found = r.headers().map_err(csv_err(path))?;
    if found.iter().ne(header.iter().copied()) {
        return Err(RunnerError::Csv {
            path: path.to_path_buf(),
            message: format!("unexpected header `{}`, expected `{}`", found.iter().collect::<Vec<_>>().join(","), header.join(",")),
        });
    }
    Ok(r)
}

fn field<T: std::str::FromStr>(path: &Path, record: &csv::StringRecord, idx: usize, name: &str) -> Result<T, RunnerError> {
    let line = record.position().map_or(0, |p| p.line());
    record.get(idx).and_then(|v| v.parse().ok()).ok_or_else(|| RunnerError::Csv {
        path: path.to_path_buf(),
        message: format!("line {line}: bad or missing `{name}`"),
    })
}

pub fn read_stats(path: &Path) -> Result<Vec<StatsRow>, RunnerError> {
    let mut r = reader(path, &STATS_HEADER)?;
    r.records()
        .map(|rec| {
            let rec = rec.map_err(csv_err(path))?;
            Ok(StatsRow {
                generation: field(path, &rec, 0, "generation")?,
                evaluations: field(path, &rec, 1, "evaluations")?,
                max_fitness: field(path, &rec, 2, "max_fitness")?,
                qd_score: field(path, &rec, 3, "qd_score")?,
                coverage: field(path, &rec, 4, "coverage")?,
            })
        })
        .collect()
}

pub fn read_archive(path: &Path) -> Result<Vec<ArchiveRow>, RunnerError> {
    let mut r = reader(path, &ARCHIVE_HEADER)?;
    r.records()
        .map(|rec| {
            let rec = rec.map_err(csv_err(path))?;
            let line = rec.position().map_or(0, |p| p.line());
            let text = rec.get(3).unwrap_or_default();
            let genome = Genome::from_text(text).map_err(|e| RunnerError::Csv {
                path: path.to_path_buf(),
                message: format!("line {line}: {e}"),
            })?;
            Ok(ArchiveRow {
                descriptor: Descriptor::new(field(path, &rec, 0, "m")?, field(path, &rec, 1, "j")?),
                fitness: field(path, &rec, 2, "fitness")?,
                genome,
            })
        })
        .collect()
}
