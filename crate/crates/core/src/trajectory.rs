//! Uniformly sampled state trajectories and their CSV form.
//!
//! CSV layout: header `t,x1,…,xn`, one row per sample, `t` strictly increasing
//! with uniform spacing (1e-9 relative tolerance).

use std::io::{Read, Write};

use crate::error::{Error, Result};

const SPACING_RTOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryDataset {
    t0: f64,
    dt: f64,
    states: Vec<Vec<f64>>,
}

impl TrajectoryDataset {
    pub fn new(t0: f64, dt: f64, states: Vec<Vec<f64>>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
        }
        let Some(first) = states.first() else {
            return Err(Error::InsufficientData("trajectory has no states".into()));
        };
        let n = first.len();
        if n == 0 {
            return Err(Error::InvalidArgument("state dimension must be at least 1".into()));
        }
        for (i, s) in states.iter().enumerate() {
            if s.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "state {i} has {} components, expected {n}",
                    s.len()
                )));
            }
            if s.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("state {i}")));
            }
        }
        Ok(TrajectoryDataset { t0, dt, states })
    }

    pub fn n(&self) -> usize {
        self.states[0].len()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn last(&self) -> &[f64] {
        self.states.last().expect("non-empty by construction")
    }

    /// Consecutive `(X_i, X_{i+1})` pairs.
    pub fn pairs(&self) -> impl Iterator<Item = (&[f64], &[f64])> + '_ {
        self.states.windows(2).map(|w| (w[0].as_slice(), w[1].as_slice()))
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.n()).map(|i| format!("x{i}")));
        out.write_record(&header)?;
        for (i, s) in self.states.iter().enumerate() {
            let mut rec = vec![self.time(i).to_string()];
            rec.extend(s.iter().map(|v| v.to_string()));
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// Parses the CSV layout, rejecting bad headers and nonuniform time.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
        let header = rdr.headers()?.clone();
        let n = header.len().saturating_sub(1);
        if n == 0 || header.get(0).map(str::trim) != Some("t") {
            return Err(Error::Parse("header must be \"t,x1,...,xn\"".into()));
        }
        for (i, h) in header.iter().skip(1).enumerate() {
            if h.trim() != format!("x{}", i + 1) {
                return Err(Error::Parse(format!("header column {} is {h:?}, expected x{}", i + 2, i + 1)));
            }
        }
        let mut times = Vec::new();
        let mut states = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = row + 2;
            let vals = rec
                .iter()
                .map(|f| {
                    f.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("line {line}: {f:?}: {e}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            if vals.len() != n + 1 {
                return Err(Error::Parse(format!(
                    "line {line}: {} fields, expected {}",
                    vals.len(),
                    n + 1
                )));
            }
            times.push(vals[0]);
            states.push(vals[1..].to_vec());
        }
        if times.is_empty() {
            return Err(Error::InsufficientData("CSV has no data rows".into()));
        }
        // single-row files carry no spacing; unit step is a placeholder
        let dt = if times.len() >= 2 {
            (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64
        } else {
            1.0
        };
        if !(dt > 0.0) {
            return Err(Error::Parse("time column must be strictly increasing".into()));
        }
        for (i, w) in times.windows(2).enumerate() {
            let step = w[1] - w[0];
            if !(step > 0.0) {
                return Err(Error::Parse(format!("time not strictly increasing at row {}", i + 2)));
            }
            if (step - dt).abs() > SPACING_RTOL * dt {
                return Err(Error::Parse(format!(
                    "nonuniform time spacing at row {}: {step} vs {dt}",
                    i + 2
                )));
            }
        }
        Self::new(times[0], dt, states)
    }
}
