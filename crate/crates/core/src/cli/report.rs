use std::io::{self, Write};

use serde::{Serialize, Serializer};

/// Acceptance rule of a check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
    Within(f64, f64),
}

impl Bound {
    pub fn accepts(&self, measured: f64) -> bool {
        match *self {
            Bound::AtMost(b) => measured <= b,
            Bound::AtLeast(b) => measured >= b,
            Bound::Within(lo, hi) => (lo..=hi).contains(&measured),
        }
    }

    fn text(&self) -> String {
        match *self {
            Bound::AtMost(b) => format!("<={b:e}"),
            Bound::AtLeast(b) => format!(">={b:e}"),
            Bound::Within(lo, hi) => format!("[{lo:e};{hi:e}]"),
        }
    }
}

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.text())
    }
}

fn finite_or_null<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub suite: String,
    pub check: String,
    #[serde(serialize_with = "finite_or_null")]
    pub measured: f64,
    pub bound: Bound,
    pub pass: bool,
}

/// Measured quantity reported without an acceptance rule.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Record {
    pub suite: String,
    pub name: String,
    #[serde(serialize_with = "finite_or_null")]
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Report {
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub records: Vec<Record>,
}

impl Report {
    pub fn new(seed: u64) -> Self {
        Report {
            seed,
            pass: true,
            ..Default::default()
        }
    }

    pub fn check(&mut self, suite: &str, check: &str, measured: f64, bound: Bound) {
        // NaN never passes.
        let pass = bound.accepts(measured);
        self.pass &= pass;
        self.checks.push(Check {
            suite: suite.into(),
            check: check.into(),
            measured,
            bound,
            pass,
        });
    }

    pub fn record(&mut self, suite: &str, name: &str, value: f64) {
        self.records.push(Record {
            suite: suite.into(),
            name: name.into(),
            value,
        });
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# seed={}", self.seed)?;
        writeln!(out, "suite,check,measured,bound,pass")?;
        for c in &self.checks {
            writeln!(out, "{},{},{:e},{},{}", c.suite, c.check, c.measured, c.bound.text(), c.pass)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds() {
        assert!(Bound::AtMost(1.0).accepts(1.0));
        assert!(!Bound::AtMost(1.0).accepts(f64::NAN));
        assert!(Bound::AtLeast(10.0).accepts(11.0));
        assert!(!Bound::Within(1.7, 2.3).accepts(2.4));
    }

    #[test]
    fn failure_is_sticky_and_named() {
        let mut r = Report::new(3);
        r.check("a", "ok", 1e-16, Bound::AtMost(1e-14));
        r.check("a", "bad", 1e-3, Bound::AtMost(1e-30));
        r.check("b", "ok", 2.0, Bound::Within(1.7, 2.3));
        assert!(!r.pass);
        assert_eq!(r.first_failure().unwrap().check, "bad");
        let json = r.to_json();
        assert!(json.contains("\"bound\": \"<=1e-30\""));
        assert!(json.ends_with("}\n"));
        let mut csv = Vec::new();
        r.write_csv(&mut csv).unwrap();
        assert!(String::from_utf8(csv).unwrap().contains("a,bad,1e-3,<=1e-30,false\n"));
    }

    #[test]
    fn non_finite_measurements_serialize_as_null() {
        let mut r = Report::new(0);
        r.check("s", "c", f64::NAN, Bound::AtMost(1.0));
        assert!(r.to_json().contains("\"measured\": null"));
        assert!(!r.pass);
    }
}
