use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Summary row of one estimator.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub estimator: String,
    pub mean_tilt_angle: f64,
    pub mean_yaw_proxy: Option<f64>,
    pub convergence_time: Option<f64>,
    pub invalid_samples: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub window: [f64; 2],
    pub rows: Vec<ReportRow>,
}

const HEADER: [&str; 5] = ["estimator", "mean_tilt_angle_rad", "mean_yaw_proxy_rad", "convergence_time_s", "invalid_samples"];

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

impl ComparisonReport {
    pub fn row(&self, name: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.estimator == name)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# window_t0={:.16e},window_t1={:.16e}", self.window[0], self.window[1])?;
        let mut out = csv::Writer::from_writer(w);
        out.write_record(HEADER)?;
        for r in &self.rows {
            out.write_record([
                r.estimator.clone(),
                format!("{:.16e}", r.mean_tilt_angle),
                opt(r.mean_yaw_proxy),
                opt(r.convergence_time),
                r.invalid_samples.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(mut r: R) -> Result<Self> {
        let bad = |reason: String| Error::IncompatibleReports(reason);
        let mut first = String::new();
        r.read_line(&mut first)?;
        let window = parse_window(first.trim()).ok_or_else(|| bad(format!("missing window line, found {first:?}")))?;
        let mut rd = csv::Reader::from_reader(r);
        if rd.headers()?.iter().ne(HEADER) {
            return Err(bad("unexpected report header".into()));
        }
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let num = |i: usize| -> Result<Option<f64>> {
                let f = rec.get(i).unwrap_or("").trim();
                if f.is_empty() {
                    Ok(None)
                } else {
                    f.parse().map(Some).map_err(|e| bad(format!("bad number {f:?}: {e}")))
                }
            };
            rows.push(ReportRow {
                estimator: rec.get(0).unwrap_or("").to_owned(),
                mean_tilt_angle: num(1)?.ok_or_else(|| bad("missing tilt mean".into()))?,
                mean_yaw_proxy: num(2)?,
                convergence_time: num(3)?,
                invalid_samples: rec.get(4).unwrap_or("").trim().parse().map_err(|e| bad(format!("{e}")))?,
            });
        }
        Ok(ComparisonReport { window, rows })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    /// Plain-text table.
    pub fn to_table(&self) -> String {
        let mut s = format!("window [{}, {}] s\n", self.window[0], self.window[1]);
        s += &format!("{:<16} {:>12} {:>12} {:>10} {:>8}\n", "estimator", "tilt (rad)", "yaw (rad)", "t_conv (s)", "invalid");
        for r in &self.rows {
            let f = |x: Option<f64>, p: usize| x.map(|v| format!("{v:.p$}")).unwrap_or_else(|| "-".into());
            s += &format!(
                "{:<16} {:>12.4} {:>12} {:>10} {:>8}\n",
                r.estimator,
                r.mean_tilt_angle,
                f(r.mean_yaw_proxy, 4),
                f(r.convergence_time, 3),
                r.invalid_samples
            );
        }
        s
    }
}

fn parse_window(line: &str) -> Option<[f64; 2]> {
    let rest = line.strip_prefix('#')?.trim();
    let mut t0 = None;
    let mut t1 = None;
    for kv in rest.split(',') {
        let (k, v) = kv.split_once('=')?;
        match k.trim() {
            "window_t0" => t0 = v.trim().parse().ok(),
            "window_t1" => t1 = v.trim().parse().ok(),
            _ => {}
        }
    }
    Some([t0?, t1?])
}

/// One line of the merged ranking.
#[derive(Clone, Debug, PartialEq)]
pub struct Ranked {
    pub estimator: String,
    pub mean_tilt_angle: f64,
    pub mean_yaw_proxy: Option<f64>,
    /// Number of reports the estimator appeared in.
    pub reports: usize,
}

/// Averages each estimator over the reports (in order of first appearance) and
/// stably sorts by mean tilt error, then mean heading-proxy error.
pub fn compare(reports: &[ComparisonReport]) -> Result<Vec<Ranked>> {
    let first = reports.first().ok_or_else(|| Error::IncompatibleReports("no reports given".into()))?;
    if let Some(r) = reports.iter().find(|r| r.window != first.window) {
        return Err(Error::IncompatibleReports(format!(
            "windows differ: {:?} vs {:?}",
            first.window, r.window
        )));
    }
    let mut acc: Vec<(String, f64, f64, usize, usize)> = Vec::new();
    for row in reports.iter().flat_map(|r| &r.rows) {
        let i = match acc.iter().position(|a| a.0 == row.estimator) {
            Some(i) => i,
            None => {
                acc.push((row.estimator.clone(), 0.0, 0.0, 0, 0));
                acc.len() - 1
            }
        };
        acc[i].1 += row.mean_tilt_angle;
        acc[i].3 += 1;
        if let Some(y) = row.mean_yaw_proxy {
            acc[i].2 += y;
            acc[i].4 += 1;
        }
    }
    let mut ranked: Vec<Ranked> = acc
        .into_iter()
        .map(|(name, tilt, yaw, n, ny)| Ranked {
            estimator: name,
            mean_tilt_angle: tilt / n as f64,
            mean_yaw_proxy: (ny > 0).then(|| yaw / ny as f64),
            reports: n,
        })
        .collect();
    ranked.sort_by(|a, b| {
        a.mean_tilt_angle.total_cmp(&b.mean_tilt_angle).then_with(|| match (a.mean_yaw_proxy, b.mean_yaw_proxy) {
            (Some(x), Some(y)) => x.total_cmp(&y),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => std::cmp::Ordering::Equal,
        })
    });
    Ok(ranked)
}

pub fn ranking_table(ranked: &[Ranked]) -> String {
    let mut s = format!("{:<4} {:<16} {:>12} {:>12} {:>8}\n", "rank", "estimator", "tilt (rad)", "yaw (rad)", "reports");
    for (i, r) in ranked.iter().enumerate() {
        let yaw = r.mean_yaw_proxy.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into());
        s += &format!("{:<4} {:<16} {:>12.4} {:>12} {:>8}\n", i + 1, r.estimator, r.mean_tilt_angle, yaw, r.reports);
    }
    s
}
