use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::measurement::{ImuSample, TrueState};
use crate::so3::{Rotation, Vec3};

/// Fixed leading columns of every run record.
pub const BASE_COLUMNS: [&str; 31] = [
    "t", "R11", "R12", "R13", "R21", "R22", "R23", "R31", "R32", "R33", "v.x", "v.y", "v.z", "omega.x",
    "omega.y", "omega.z", "vdot.x", "vdot.y", "vdot.z", "y_v.x", "y_v.y", "y_v.z", "y_g.x", "y_g.y", "y_g.z",
    "y_a.x", "y_a.y", "y_a.z", "y_m.x", "y_m.y", "y_m.z",
];

/// Time series of truth, measurements and named estimator columns.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunRecord {
    pub truth: Vec<TrueState>,
    pub samples: Vec<ImuSample>,
    /// Estimator column names, `<estimator>.<field>`.
    pub columns: Vec<String>,
    /// One row of estimator values per time step, aligned with `columns`.
    pub values: Vec<Vec<f64>>,
}

impl RunRecord {
    pub fn new(columns: Vec<String>) -> Self {
        RunRecord { columns, ..Default::default() }
    }

    pub fn len(&self) -> usize {
        self.truth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.truth.is_empty()
    }

    pub fn push(&mut self, truth: TrueState, sample: ImuSample, values: Vec<f64>) {
        debug_assert_eq!(values.len(), self.columns.len());
        self.truth.push(truth);
        self.samples.push(sample);
        self.values.push(values);
    }

    /// Values of one estimator column over time.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.values.iter().map(|row| row[j]).collect())
    }

    /// A 3-vector assembled from `<prefix>.x`, `.y`, `.z`.
    pub fn vec3_column(&self, prefix: &str) -> Option<Vec<Vec3>> {
        let idx: Vec<usize> = ["x", "y", "z"]
            .iter()
            .map(|c| self.columns.iter().position(|n| *n == format!("{prefix}.{c}")))
            .collect::<Option<_>>()?;
        Some(self.values.iter().map(|row| Vec3::new(row[idx[0]], row[idx[1]], row[idx[2]])).collect())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(BASE_COLUMNS.iter().copied().chain(self.columns.iter().map(String::as_str)))?;
        let mut row: Vec<String> = Vec::with_capacity(BASE_COLUMNS.len() + self.columns.len());
        for ((s, y), extra) in self.truth.iter().zip(&self.samples).zip(&self.values) {
            row.clear();
            row.extend(base_values(s, y).iter().chain(extra).map(|x| fmt(*x)));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<RunRecord> {
        let mut rd = csv::ReaderBuilder::new().flexible(true).from_reader(r);
        let header = rd.headers()?.clone();
        if header.len() < BASE_COLUMNS.len() || header.iter().zip(BASE_COLUMNS).any(|(a, b)| a != b) {
            return Err(Error::MalformedRecord { last_complete_row: 0, reason: "unexpected header".into() });
        }
        let mut rec = RunRecord::new(header.iter().skip(BASE_COLUMNS.len()).map(str::to_owned).collect());
        for (complete, result) in rd.records().enumerate() {
            let malformed = |reason: String| Error::MalformedRecord { last_complete_row: complete, reason };
            let row = result.map_err(|e| malformed(e.to_string()))?;
            if row.len() != header.len() {
                return Err(malformed(format!("expected {} fields, found {}", header.len(), row.len())));
            }
            let nums = row
                .iter()
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| malformed(e.to_string()))?;
            let (s, y) = from_base(&nums);
            if let Some(prev) = rec.truth.last() {
                if !(s.t > prev.t) {
                    return Err(malformed("time is not increasing".into()));
                }
            }
            rec.push(s, y, nums[BASE_COLUMNS.len()..].to_vec());
        }
        Ok(rec)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(f)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<RunRecord> {
        RunRecord::read_csv(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn base_values(s: &TrueState, y: &ImuSample) -> Vec<f64> {
    let mut v = Vec::with_capacity(BASE_COLUMNS.len());
    v.push(s.t);
    v.extend(s.r.to_row_major());
    for w in [s.v, s.omega, s.vdot, y.y_v, y.y_g, y.y_a, y.y_m] {
        v.extend(w.iter());
    }
    v
}

fn from_base(n: &[f64]) -> (TrueState, ImuSample) {
    let v3 = |i: usize| Vec3::new(n[i], n[i + 1], n[i + 2]);
    let s = TrueState { t: n[0], r: Rotation::from_row_major_unchecked(&n[1..10]), v: v3(10), omega: v3(13), vdot: v3(16) };
    let y = ImuSample { t: n[0], y_v: v3(19), y_g: v3(22), y_a: v3(25), y_m: v3(28) };
    (s, y)
}
