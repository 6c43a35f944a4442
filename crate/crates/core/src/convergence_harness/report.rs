use std::fmt::Write;

/// Relative tolerance band for monotone decrease of a gap sequence.
pub const MONOTONE_BAND: f64 = 0.1;
/// Gaps below this are at the exactness floor and never count as increases.
pub const EXACT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub eps: f64,
    pub metric_id: String,
    pub value: f64,
    pub claimed_limit: f64,
    pub gap: f64,
}

/// A named check; only asserted flags decide [`ConvergenceReport::pass`].
#[derive(Debug, Clone, PartialEq)]
pub struct Flag {
    pub name: String,
    pub pass: bool,
    pub asserted: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceReport {
    pub study_id: String,
    pub rows: Vec<ReportRow>,
    pub flags: Vec<Flag>,
}

/// `true` when every step satisfies `v[k+1] <= (1 + band) v[k]` or lies
/// below the exactness floor.
pub fn monotone_within_band(values: &[f64], band: f64) -> bool {
    values.windows(2).all(|w| w[1] <= (1.0 + band) * w[0] || w[1] <= EXACT_FLOOR)
}

impl ConvergenceReport {
    pub fn new(study_id: impl Into<String>) -> Self {
        ConvergenceReport { study_id: study_id.into(), ..Default::default() }
    }

    pub fn push(&mut self, eps: f64, metric_id: impl Into<String>, value: f64, claimed_limit: f64) {
        let gap = (value - claimed_limit).abs();
        self.rows.push(ReportRow { eps, metric_id: metric_id.into(), value, claimed_limit, gap });
    }

    pub fn flag(&mut self, name: impl Into<String>, pass: bool, asserted: bool) {
        self.flags.push(Flag { name: name.into(), pass, asserted });
    }

    /// Rows of one metric in insertion order.
    pub fn metric(&self, id: &str) -> Vec<&ReportRow> {
        self.rows.iter().filter(|r| r.metric_id == id).collect()
    }

    pub fn gaps(&self, id: &str) -> Vec<f64> {
        self.metric(id).iter().map(|r| r.gap).collect()
    }

    /// Distinct metric ids in order of first appearance.
    pub fn metric_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = Vec::new();
        for r in &self.rows {
            if !ids.contains(&r.metric_id) {
                ids.push(r.metric_id.clone());
            }
        }
        ids
    }

    pub fn pass(&self) -> bool {
        self.flags.iter().filter(|f| f.asserted).all(|f| f.pass)
    }

    /// CSV with a `# seed=` comment line, then one header row.
    pub fn to_csv(&self, seed: u64) -> String {
        let mut s = format!("# seed={seed}\nstudy_id,eps,metric_id,value,claimed_limit,gap\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{:e},{},{:e},{:e},{:e}",
                self.study_id, r.eps, r.metric_id, r.value, r.claimed_limit, r.gap
            );
        }
        s
    }

    /// `key=value` lines: one per flag, then the overall verdict.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for f in &self.flags {
            let _ = writeln!(s, "{}.{}={}", self.study_id, f.name, f.pass);
        }
        let _ = writeln!(s, "{}.pass={}", self.study_id, self.pass());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotone_band_and_floor() {
        assert!(monotone_within_band(&[1.0, 0.5, 0.54, 0.3], 0.1));
        assert!(!monotone_within_band(&[1.0, 0.5, 0.6], 0.1));
        assert!(monotone_within_band(&[1e-15, 3e-15, 2e-14], 0.1));
        assert!(monotone_within_band(&[], 0.1));
    }

    #[test]
    fn csv_layout() {
        let mut r = ConvergenceReport::new("s");
        r.push(0.25, "m", 0.5, 0.25);
        r.flag("ok", false, false);
        let csv = r.to_csv(9);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# seed=9");
        assert_eq!(lines[1], "study_id,eps,metric_id,value,claimed_limit,gap");
        assert_eq!(lines[2], "s,2.5e-1,m,5e-1,2.5e-1,2.5e-1");
        assert!(r.pass());
        assert_eq!(r.summary(), "s.ok=false\ns.pass=true\n");
    }
}
