use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One control period: state at `t`, the torque reference and the voltages
/// actually applied over `[t, t + Ts)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: f64,
    pub i_d: f64,
    pub i_q: f64,
    pub omega_m: f64,
    pub tau_em: f64,
    pub tau_ref: f64,
    pub v_d: f64,
    pub v_q: f64,
    #[serde(with = "flag")]
    pub saturated: bool,
    #[serde(with = "flag")]
    pub out_of_omega: bool,
}

// flags are written as 0/1
mod flag {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(u8::from(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(false),
            1 => Ok(true),
            v => Err(serde::de::Error::custom(format!("flag must be 0 or 1, got {v}"))),
        }
    }
}

pub const CSV_COLUMNS: [&str; 10] =
    ["t", "i_d", "i_q", "omega_m", "tau_em", "tau_ref", "v_d", "v_q", "saturated", "out_of_omega"];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimTrace {
    pub ts: f64,
    pub records: Vec<TraceRecord>,
}

impl SimTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.t)
    }

    /// Records with `t` in `[from, to]`.
    pub fn window(&self, from: f64, to: f64) -> &[TraceRecord] {
        let a = self.records.partition_point(|r| r.t < from);
        let b = self.records.partition_point(|r| r.t <= to);
        &self.records[a..b.max(a)]
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.records {
            out.serialize(r).map_err(|e| Error::invalid("trace csv", e.to_string()))?;
        }
        out.flush().map_err(|e| Error::invalid("trace csv", e.to_string()))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    /// Reads a trace; the sampling period is taken from the first two rows.
    pub fn read_csv<R: std::io::Read>(r: R, origin: &Path) -> Result<Self> {
        let parse = |reason: String| Error::Parse { path: origin.to_path_buf(), reason };
        let mut rdr = csv::Reader::from_reader(r);
        let header: Vec<String> =
            rdr.headers().map_err(|e| parse(e.to_string()))?.iter().map(str::to_owned).collect();
        if header != CSV_COLUMNS {
            return Err(parse(format!("unexpected columns {header:?}")));
        }
        let records = rdr
            .deserialize()
            .collect::<std::result::Result<Vec<TraceRecord>, _>>()
            .map_err(|e| parse(e.to_string()))?;
        let ts = match records.as_slice() {
            [a, b, ..] => b.t - a.t,
            _ => 0.0,
        };
        Ok(Self { ts, records })
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(f), path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SimTrace {
        let records = (0..4)
            .map(|k| TraceRecord {
                t: k as f64 * 40e-6,
                i_d: 0.1 / 3.0,
                i_q: -1.0 / 7.0 * k as f64,
                omega_m: std::f64::consts::PI,
                tau_em: 1e-17,
                tau_ref: 0.6,
                v_d: -2.5,
                v_q: 57.73502691896258,
                saturated: k == 2,
                out_of_omega: k == 3,
            })
            .collect();
        SimTrace { ts: 40e-6, records }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let tr = sample();
        let text = tr.to_csv_string().unwrap();
        assert!(text.starts_with(&CSV_COLUMNS.join(",")));
        let back = SimTrace::read_csv(text.as_bytes(), Path::new("mem")).unwrap();
        assert_eq!(back.records, tr.records);
        assert_eq!(back.ts, 40e-6);
    }

    #[test]
    fn rejects_wrong_header() {
        let text = "t,i_d\n0,0\n";
        assert!(SimTrace::read_csv(text.as_bytes(), Path::new("mem")).is_err());
    }

    #[test]
    fn window_bounds() {
        let tr = sample();
        assert_eq!(tr.window(40e-6, 80e-6).len(), 2);
        assert_eq!(tr.window(1.0, 2.0).len(), 0);
    }
}
