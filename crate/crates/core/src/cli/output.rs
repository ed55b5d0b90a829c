//! CSV number formatting, atomic file writes and the run summary.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

/// Scientific notation with 17 significant digits, `.` as decimal point.
/// Enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `path` through a sibling temporary file and a rename, so readers
/// never observe a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| {
        io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name")
    })?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp: PathBuf = dir.join(tmp_name);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// One acceptance decision.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Record {
    pub suite: String,
    pub criterion: String,
    pub measured: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Record {
    /// `measured <= threshold` (NaN fails).
    pub fn at_most(
        suite: &str,
        criterion: impl Into<String>,
        measured: f64,
        threshold: f64,
    ) -> Self {
        Self {
            suite: suite.into(),
            criterion: criterion.into(),
            measured,
            threshold,
            pass: measured <= threshold,
        }
    }

    /// `measured >= threshold` (NaN fails).
    pub fn at_least(
        suite: &str,
        criterion: impl Into<String>,
        measured: f64,
        threshold: f64,
    ) -> Self {
        Self {
            pass: measured >= threshold,
            ..Self::at_most(suite, criterion, measured, threshold)
        }
    }

    /// `measured < threshold` (NaN fails).
    pub fn below(suite: &str, criterion: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self {
            pass: measured < threshold,
            ..Self::at_most(suite, criterion, measured, threshold)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub schema: u32,
    pub records: Vec<Record>,
}

impl Summary {
    pub fn new(records: Vec<Record>) -> Self {
        Self { schema: 1, records }
    }

    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn to_json(&self) -> String {
        // Non-finite measurements are not representable in JSON; serde_json
        // writes them as null.
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
        assert_eq!(fmt_f64(0.0), "0.0000000000000000e0");
        assert_eq!(fmt_f64(-1234.5), "-1.2345000000000000e3");
        for v in [
            0.1,
            1.0 / 3.0,
            std::f64::consts::PI,
            6.02e23,
            -1e-300,
            f64::MIN_POSITIVE,
        ] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        write_atomic(&p, b"one\n").unwrap();
        write_atomic(&p, b"two\n").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two\n");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn records_and_summary() {
        let r = Record::at_most("s", "c", f64::NAN, 1.0);
        assert!(!r.pass);
        assert!(Record::at_least("s", "order", 2.0, 1.7).pass);
        assert!(!Record::below("s", "c", 1.0, 1.0).pass);
        let s = Summary::new(vec![Record::at_most(
            "kernel-checks",
            "flux_jump",
            1e-15,
            1e-12,
        )]);
        assert!(s.all_pass());
        let v: serde_json::Value = serde_json::from_str(&s.to_json()).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["records"][0]["criterion"], "flux_jump");
        assert_eq!(v["records"][0]["pass"], true);
    }
}
