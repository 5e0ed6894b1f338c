//! CSV emission with locale-independent, round-trip number formatting.

use std::io::Write;

use iptv_amc::sim::Estimate;

use crate::error::{CliError, CliResult};

pub const RESULT_HEADER: [&str; 13] = [
    "sweep_value",
    "Pb_analysis",
    "Pb_sim",
    "Pb_sim_ci99",
    "EY_analysis",
    "EY_sim",
    "EY_sim_ci99",
    "Pd_analysis",
    "Pd_sim",
    "Pd_sim_ci99",
    "alpha_used",
    "state_count",
    "wall_seconds",
];

/// One output line of `analyze` or `simulate`; `None` leaves the cell empty.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultRow {
    pub sweep_value: f64,
    pub pb_analysis: Option<f64>,
    pub pb_sim: Option<Estimate>,
    pub ey_analysis: Option<f64>,
    pub ey_sim: Option<Estimate>,
    pub pd_analysis: Option<f64>,
    pub pd_sim: Option<Estimate>,
    pub alpha_used: Option<f64>,
    pub state_count: Option<u64>,
    pub wall_seconds: Option<f64>,
}

/// Shortest representation that parses back to the same `f64`, switching
/// to exponent form for very small or very large magnitudes.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 {
        "0".into()
    } else if !(1e-4..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

fn estimate(e: Option<Estimate>) -> [String; 2] {
    match e {
        Some(e) => [format_number(e.mean), opt(e.half_width)],
        None => [String::new(), String::new()],
    }
}

impl ResultRow {
    pub fn fields(&self) -> Vec<String> {
        let [pb, pb_ci] = estimate(self.pb_sim);
        let [ey, ey_ci] = estimate(self.ey_sim);
        let [pd, pd_ci] = estimate(self.pd_sim);
        vec![
            format_number(self.sweep_value),
            opt(self.pb_analysis),
            pb,
            pb_ci,
            opt(self.ey_analysis),
            ey,
            ey_ci,
            opt(self.pd_analysis),
            pd,
            pd_ci,
            opt(self.alpha_used),
            self.state_count.map(|n| n.to_string()).unwrap_or_default(),
            opt(self.wall_seconds),
        ]
    }
}

/// Writes a header and rows.
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<()> {
    let io = |e: csv::Error| CliError::Runtime(format!("writing CSV: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Runtime(format!("writing CSV: {e}")))
}

pub fn write_results<W: Write>(out: W, rows: &[ResultRow]) -> CliResult<()> {
    write_csv(out, &RESULT_HEADER, rows.iter().map(ResultRow::fields))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, 1.0, 0.1, 2.4, 1.0 / 3.0, 1.234e-9, 6.02e23, -0.5, 17.272012345678] {
            let s = format_number(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_number(20.0), "20");
        assert_eq!(format_number(1e-5), "1e-5");
    }

    #[test]
    fn header_only_for_no_rows() {
        let mut buf = Vec::new();
        write_results(&mut buf, &[]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.trim_end(), RESULT_HEADER.join(","));
    }

    #[test]
    fn empty_cells_for_missing_metrics() {
        let row = ResultRow {
            sweep_value: 2.0,
            pb_analysis: Some(0.25),
            ..Default::default()
        };
        let mut buf = Vec::new();
        write_results(&mut buf, &[row]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "2,0.25,,,,,,,,,,,");
    }
}
