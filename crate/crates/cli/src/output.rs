//! CSV emission with the manifest header, plus the JSON sidecar and the
//! gnuplot script written next to a CSV file.

use crate::config::Config;
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const TOOL: &str = concat!("seaowc ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub config_path: Option<String>,
    pub seed: Option<u64>,
    /// Worker threads used; results do not depend on it.
    pub workers: Option<usize>,
    pub config: Config,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, config_path: Option<&Path>, seed: Option<u64>, config: &Config) -> Self {
        RunManifest {
            tool_version: TOOL.into(),
            command: command.into(),
            config_path: config_path.map(|p| p.display().to_string()),
            seed,
            workers: None,
            config: config.clone(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    /// Comment block for the top of a CSV. The timestamp and worker count
    /// live only in the sidecar so that reruns give identical bytes.
    pub fn header(&self) -> String {
        let mut s = format!(
            "# {}\n# command: {}\n# config_path: {}\n# seed: {}\n# resolved config:\n",
            self.tool_version,
            self.command,
            self.config_path.as_deref().unwrap_or("-"),
            self.seed.map_or("-".into(), |v| v.to_string()),
        );
        for line in self.config.to_toml().lines() {
            s.push_str(if line.is_empty() { "#" } else { "# " });
            s.push_str(line);
            s.push('\n');
        }
        s
    }
}

/// Probability-like values: shortest round-trip scientific notation.
pub fn sci(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:e}")
    }
}

pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> usize {
        self.columns.iter().position(|c| *c == name).expect("known column") + 1
    }

    fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()
    }
}

/// A gnuplot figure: one panel per y column, one line per distinct value
/// of the key columns.
pub struct Plot {
    pub x: &'static str,
    pub panels: Vec<(&'static str, &'static str, bool)>,
    pub keys: Vec<&'static str>,
    pub xlabel: &'static str,
}

impl Plot {
    fn script(&self, table: &Table, csv_name: &str, png_name: &str) -> String {
        let key_cols: Vec<usize> = self.keys.iter().map(|k| table.column(k)).collect();
        let mut series: Vec<Vec<String>> = Vec::new();
        for r in &table.rows {
            let k: Vec<String> = key_cols.iter().map(|&c| r[c - 1].clone()).collect();
            if !series.contains(&k) {
                series.push(k);
            }
        }
        let mut s = format!(
            "set datafile separator ','\nset datafile commentschars '#'\n\
             set terminal pngcairo size 900,{} noenhanced\nset output '{png_name}'\nset multiplot layout {},1\n\
             set grid\nset key outside right\nset xlabel '{}'\n",
            420 * self.panels.len(),
            self.panels.len(),
            self.xlabel
        );
        let x = table.column(self.x);
        for &(col, label, logy) in &self.panels {
            s.push_str(&format!("set ylabel '{label}'\n{}set logscale y\n", if logy { "" } else { "un" }));
            let y = table.column(col);
            let lines: Vec<String> = series
                .iter()
                .map(|k| {
                    let cond: Vec<String> = key_cols
                        .iter()
                        .zip(k)
                        .map(|(c, v)| format!("strcol({c}) eq '{v}'"))
                        .collect();
                    let cond = if cond.is_empty() { "1".into() } else { cond.join(" && ") };
                    format!(
                        "'{csv_name}' using {x}:(({cond}) ? ${y} : 1/0) with linespoints title '{}'",
                        k.join(" ")
                    )
                })
                .collect();
            s.push_str("plot ");
            s.push_str(&lines.join(", \\\n     "));
            s.push('\n');
        }
        s.push_str("unset multiplot\n");
        s
    }
}

fn sibling(path: &Path, ext: &str) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(ext);
    path.with_file_name(name)
}

/// Writes the table to `output` (stdout when None). A file output also gets
/// `<output>.manifest.json` and, with a plot, `<stem>.gp`.
pub fn emit(output: Option<&Path>, manifest: &RunManifest, table: &Table, plot: Option<&Plot>) -> std::io::Result<()> {
    let Some(path) = output else {
        let stdout = std::io::stdout();
        let mut lock = stdout.lock();
        lock.write_all(manifest.header().as_bytes())?;
        return table.write_csv(lock);
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut buf = manifest.header().into_bytes();
    table.write_csv(&mut buf)?;
    std::fs::write(path, buf)?;
    std::fs::write(
        sibling(path, ".manifest.json"),
        serde_json::to_string_pretty(manifest).expect("manifest serializes") + "\n",
    )?;
    if let Some(p) = plot {
        let name = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
        let png = path.with_extension("png");
        let png = png.file_name().unwrap_or_default().to_string_lossy();
        std::fs::write(path.with_extension("gp"), p.script(table, &name, &png))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scientific_format_round_trips() {
        for v in [5.03e-3, 1.0, 0.0, 1e-300, 0.123456789012345] {
            assert_eq!(sci(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(sci(f64::NAN), "NaN");
    }

    #[test]
    fn header_lines_are_comments() {
        let m = RunManifest::new("analyze", None, Some(3), &Config::default());
        assert!(m.header().lines().all(|l| l.starts_with('#')));
        assert!(!m.header().contains(&m.timestamp));
    }

    #[test]
    fn quoted_fields() {
        let mut t = Table::new(vec!["a", "note"]);
        t.rows.push(vec!["1".into(), "x, y".into()]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,note\n1,\"x, y\"\n");
    }
}
