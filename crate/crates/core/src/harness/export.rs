use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{RunRecord, ScoreMatrix};

pub const CSV_COLUMNS: [&str; 12] = [
    "run_id",
    "algorithm",
    "objective",
    "dimension",
    "budget",
    "num_workers",
    "seed",
    "eval_index",
    "sigma",
    "lambda_eff",
    "best_fitness",
    "reco_fitness",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Csv,
    Json,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            _ => Err(Error::Parse(format!("unknown format '{s}', expected csv or json"))),
        }
    }
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

/// One row per trace entry, header always present.
pub fn write_records_csv<W: Write>(records: &[RunRecord], w: W) -> std::result::Result<(), csv::Error> {
    let mut out = csv_writer(w);
    out.write_record(CSV_COLUMNS)?;
    for r in records {
        let fixed = [
            r.run_id.to_string(),
            r.algorithm().name().to_string(),
            r.objective.clone(),
            r.config.dimension.to_string(),
            r.config.budget.to_string(),
            r.config.num_workers.to_string(),
            r.config.seed.to_string(),
        ];
        for row in &r.trace {
            let mut fields = fixed.to_vec();
            fields.push(row.eval_index.to_string());
            fields.push(row.sigma.to_string());
            fields.push(row.lambda_eff.to_string());
            fields.push(row.best_fitness.to_string());
            fields.push(row.reco_fitness.map(|f| f.to_string()).unwrap_or_default());
            out.write_record(&fields)?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn records_to_csv(records: &[RunRecord]) -> String {
    let mut buf = Vec::new();
    write_records_csv(records, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is UTF-8")
}

pub fn records_to_json(records: &[RunRecord]) -> String {
    serde_json::to_string_pretty(records).expect("records serialize")
}

pub fn records_from_json(text: &str) -> std::result::Result<Vec<RunRecord>, serde_json::Error> {
    serde_json::from_str(text)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

pub fn export_records(records: &[RunRecord], format: ExportFormat, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    match format {
        ExportFormat::Csv => {
            write_records_csv(records, &mut w).map_err(|source| Error::Csv { path: path.to_path_buf(), source })?
        }
        ExportFormat::Json => {
            serde_json::to_writer_pretty(&mut w, records)
                .map_err(|source| Error::Json { path: path.to_path_buf(), source })?;
            writeln!(w).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        }
    }
    finish(w, path)
}

/// CSV: `algorithm,score` followed by one `wins_vs_<name>` column per algorithm.
pub fn export_matrix(matrix: &ScoreMatrix, format: ExportFormat, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
    match format {
        ExportFormat::Csv => {
            let mut out = csv_writer(&mut w);
            let mut header = vec!["algorithm".to_string(), "score".to_string()];
            header.extend(matrix.algorithms.iter().map(|a| format!("wins_vs_{a}")));
            out.write_record(&header).map_err(csv_err)?;
            for (i, a) in matrix.algorithms.iter().enumerate() {
                let mut row = vec![a.clone(), matrix.scores[i].to_string()];
                row.extend(matrix.wins[i].iter().map(|v| v.to_string()));
                out.write_record(&row).map_err(csv_err)?;
            }
            out.flush().map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        }
        ExportFormat::Json => {
            serde_json::to_writer_pretty(&mut w, matrix)
                .map_err(|source| Error::Json { path: path.to_path_buf(), source })?;
            writeln!(w).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        }
    }
    finish(w, path)
}

pub fn import_records(path: &Path) -> Result<Vec<RunRecord>> {
    let f = File::open(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    serde_json::from_reader(BufReader::new(f)).map_err(|source| Error::Json { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{FunctionKind, ObjectiveSpec};
    use crate::harness::run_experiment;
    use crate::optimizers::{Algorithm, OptimizerConfig};

    #[test]
    fn empty_is_header_only() {
        assert_eq!(records_to_csv(&[]), format!("{}\n", CSV_COLUMNS.join(",")));
    }

    #[test]
    fn one_generation_one_row() {
        let cfg = OptimizerConfig::new(Algorithm::Tbpsa, 5, 20).with_workers(20);
        let rec = run_experiment(&cfg, &ObjectiveSpec::simple(FunctionKind::Sphere, 5).unwrap()).unwrap();
        let text = records_to_csv(&[rec]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(text.ends_with('\n'));
        assert!(lines[1].starts_with("0,tbpsa,fn=sphere dim=5,5,20,20,0,20,"));
        assert_eq!(lines[1].split(',').count(), 12);
    }

    #[test]
    fn json_round_trip_and_file_errors() {
        let cfg = OptimizerConfig::new(Algorithm::NaiveTbpsa, 2, 300).with_workers(3).with_seed(5);
        let rec = run_experiment(&cfg, &ObjectiveSpec::simple(FunctionKind::Ackley, 2).unwrap()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        export_records(std::slice::from_ref(&rec), ExportFormat::Json, &path).unwrap();
        assert_eq!(import_records(&path).unwrap(), vec![rec.clone()]);

        let bad = dir.path().join("missing").join("r.csv");
        let err = export_records(&[rec], ExportFormat::Csv, &bad).unwrap_err();
        assert!(err.to_string().contains("missing"), "{err}");
    }
}
