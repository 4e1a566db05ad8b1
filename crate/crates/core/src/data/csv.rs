use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::DataError;
use crate::analysis::MetricsSeries;
use crate::scalar::format_fixed;

pub const METRICS_HEADER: &str = "day,group,gamma,eta,fraction_unvaccinated,matched_today,cumulative_utility";

/// One line per row, fractions and utilities with six decimals.
pub fn metrics_to_csv(series: &MetricsSeries) -> String {
    let mut rows: Vec<_> = series.rows.iter().collect();
    rows.sort_by(|a, b| a.day.cmp(&b.day).then_with(|| a.group.cmp(&b.group)));
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for row in rows {
        let group = if row.group.contains([',', '"', '\n']) {
            format!("\"{}\"", row.group.replace('"', "\"\""))
        } else {
            row.group.clone()
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.day,
            group,
            row.gamma,
            row.eta,
            format_fixed(&row.fraction_unvaccinated(), 6),
            row.matched_today,
            format_fixed(&row.cumulative_utility, 6)
        )
        .expect("writing to a String");
    }
    out
}

pub fn export_metrics(series: &MetricsSeries, path: &Path) -> Result<(), DataError> {
    fs::write(path, metrics_to_csv(series)).map_err(|e| DataError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::MetricsRow;
    use crate::scalar::parse_rational;

    fn row(day: usize, group: &str, gamma: usize, eta: usize) -> MetricsRow {
        MetricsRow {
            day,
            group: group.to_string(),
            gamma,
            eta,
            matched_today: eta,
            cumulative_utility: parse_rational("0.5").unwrap(),
        }
    }

    #[test]
    fn empty_series_is_header_only() {
        assert_eq!(metrics_to_csv(&MetricsSeries::default()), format!("{METRICS_HEADER}\n"));
    }

    #[test]
    fn rows_sorted_and_formatted() {
        let series = MetricsSeries {
            rows: vec![row(2, "old", 4, 3), row(1, "old", 1, 0), row(2, "all", 4, 3), row(1, "all", 0, 0)],
        };
        let text = metrics_to_csv(&series);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[1], "1,all,0,0,0.000000,0,0.500000");
        assert_eq!(lines[2], "1,old,1,0,1.000000,0,0.500000");
        assert_eq!(lines[4], "2,old,4,3,0.250000,3,0.500000");
    }

    #[test]
    fn writes_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        export_metrics(&MetricsSeries::default(), &path).unwrap();
        assert!(fs::read_to_string(&path).unwrap().starts_with("day,group"));
        assert!(export_metrics(&MetricsSeries::default(), &dir.path().join("no/such/dir.csv")).is_err());
    }
}
