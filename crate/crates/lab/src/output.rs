//! Artifact writers. Each artifact is written by one call from one thread,
//! so file contents depend only on the run's results.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::LabError;
use crate::run::Artifacts;

/// Gnuplot hint for a table: `y` columns against `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub x: &'static str,
    pub y: Vec<&'static str>,
    pub log_y: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File name part between the stem and `.csv`.
    pub suffix: &'static str,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub plot: Option<Plot>,
}

/// 17 significant digits, enough for an exact `f64` round trip.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_err(path: &Path) -> impl FnOnce(std::io::Error) -> LabError + '_ {
    move |source| LabError::Write { path: path.to_path_buf(), source }
}

pub fn write_csv(path: &Path, table: &Table) -> Result<(), LabError> {
    let to_io = |e: csv::Error| std::io::Error::other(e.to_string());
    let mut w = csv::Writer::from_path(path).map_err(to_io).map_err(write_err(path))?;
    w.write_record(&table.header).map_err(to_io).map_err(write_err(path))?;
    for row in &table.rows {
        w.write_record(row).map_err(to_io).map_err(write_err(path))?;
    }
    w.flush().map_err(write_err(path))
}

pub fn gnuplot_script(csv_name: &str, plot: &Plot) -> String {
    let mut s = String::from("set datafile separator ','\nset key autotitle columnhead\n");
    if plot.log_y {
        s.push_str("set logscale y\n");
    }
    s.push_str(&format!("set xlabel '{}'\n", plot.x));
    let series: Vec<String> = plot
        .y
        .iter()
        .enumerate()
        .map(|(i, y)| {
            let file = if i == 0 { format!("'{csv_name}'") } else { "''".to_string() };
            format!("{file} using (column('{}')):(column('{y}')) with lines title '{y}'", plot.x)
        })
        .collect();
    s.push_str(&format!("plot {}\n", series.join(", \\\n     ")));
    s
}

/// Writes `<stem>.summary.json`, one `<stem>.<suffix>.csv` per table and,
/// with `gnuplot`, a `<stem>.<suffix>.gp` script next to each plottable table.
pub fn write_artifacts(art: &Artifacts, dir: &Path, stem: &str, gnuplot: bool) -> Result<Vec<PathBuf>, LabError> {
    fs::create_dir_all(dir).map_err(write_err(dir))?;
    let mut written = Vec::new();
    let summary = dir.join(format!("{stem}.summary.json"));
    let mut text = serde_json::to_string_pretty(&art.summary).expect("summary serializes");
    text.push('\n');
    fs::write(&summary, text).map_err(write_err(&summary))?;
    written.push(summary);
    for t in &art.tables {
        let name = format!("{stem}.{}.csv", t.suffix);
        let path = dir.join(&name);
        write_csv(&path, t)?;
        written.push(path);
        if let (true, Some(plot)) = (gnuplot, &t.plot) {
            let gp = dir.join(format!("{stem}.{}.gp", t.suffix));
            fs::write(&gp, gnuplot_script(&name, plot)).map_err(write_err(&gp))?;
            written.push(gp);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, std::f64::consts::PI * 1e-300, 1e308, -2.5e-7] {
            let s = fmt_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
            let digits = s.split('e').next().unwrap().chars().filter(char::is_ascii_digit).count();
            assert_eq!(digits, 17);
        }
    }

    #[test]
    fn empty_table_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        let t = Table { suffix: "trace", header: vec!["t".into(), "sup_norm".into()], rows: Vec::new(), plot: None };
        write_csv(&path, &t).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "t,sup_norm\n");
    }

    #[test]
    fn gnuplot_names_every_series() {
        let s = gnuplot_script("run.trace.csv", &Plot { x: "t", y: vec!["sup_norm", "J"], log_y: true });
        assert!(s.contains("set logscale y"));
        assert!(s.contains("'run.trace.csv' using (column('t')):(column('sup_norm'))"));
        assert!(s.contains("'' using (column('t')):(column('J'))"));
    }
}
