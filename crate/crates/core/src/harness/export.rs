//! CSV / JSON persistence. Every file is written to a temporary sibling and
//! renamed into place.

use std::collections::BTreeMap;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::metrics::Metrics;
use super::sim::{Series, SimResult};
use crate::error::{Error, Result};

pub const SERIES_HEADER: [&str; 5] = ["t", "theta_d", "theta_meas", "u", "e"];

/// Writes `path` through `fill`, replacing any existing file only once the
/// new content is complete.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        fill(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn write_series_csv(series: &Series, path: &Path) -> Result<()> {
    write_atomic(path, |w| {
        let mut wtr = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        wtr.write_record(SERIES_HEADER)?;
        for k in 0..series.len() {
            wtr.write_record([
                series.t[k].to_string(),
                series.theta_d[k].to_string(),
                series.theta_meas[k].to_string(),
                series.u[k].to_string(),
                series.e[k].to_string(),
            ])?;
        }
        wtr.flush()
    })
}

/// One `<joint>.csv` per joint in `dir` (created if missing).
pub fn export_csv(r: &SimResult, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    r.joints
        .iter()
        .map(|j| {
            let path = dir.join(format!("{}.csv", j.joint));
            write_series_csv(&j.series, &path)?;
            Ok(path)
        })
        .collect()
}

pub fn read_series_csv(path: &Path) -> Result<Series> {
    #[derive(Deserialize)]
    struct Row {
        t: f64,
        theta_d: f64,
        theta_meas: f64,
        u: f64,
        e: f64,
    }
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut s = Series::default();
    for row in rdr.deserialize::<Row>() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        s.t.push(row.t);
        s.theta_d.push(row.theta_d);
        s.theta_meas.push(row.theta_meas);
        s.u.push(row.u);
        s.e.push(row.e);
    }
    Ok(s)
}

/// `{"scenario": name, "joints": {"s1": {...}, ...}}`.
pub fn export_metrics(r: &SimResult, path: &Path) -> Result<()> {
    let joints: BTreeMap<String, Metrics> = r.joints.iter().map(|j| (j.joint.to_string(), j.metrics)).collect();
    let doc = serde_json::json!({ "scenario": r.scenario.name, "joints": joints });
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, &doc)?;
        w.write_all(b"\n")
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{run_scenario, Scenario};

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let mut s = Scenario::endpoint("x", 0.6981, 0.3491);
        s.duration = 10.0;
        s.noise_amplitude = 0.003;
        let r = run_scenario(&s).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let paths = export_csv(&r, dir.path()).unwrap();
        assert_eq!(paths.len(), 2);
        for (j, p) in r.joints.iter().zip(&paths) {
            let back = read_series_csv(p).unwrap();
            assert_eq!(back, j.series);
            let text = std::fs::read_to_string(p).unwrap();
            assert!(!text.contains('\r'));
            assert_eq!(text.lines().count(), 156);
            assert_eq!(text.lines().next().unwrap(), "t,theta_d,theta_meas,u,e");
        }
    }

    #[test]
    fn empty_series_gives_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("empty.csv");
        write_series_csv(&Series::default(), &p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "t,theta_d,theta_meas,u,e\n");
        assert!(read_series_csv(&p).unwrap().is_empty());
    }

    #[test]
    fn unwritable_path_reports_it() {
        let err = write_series_csv(&Series::default(), Path::new("/nonexistent/dir/x.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/x.csv"));
    }
}
