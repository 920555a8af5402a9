//! Report schemas and renderers: every subcommand produces either a `Report`
//! (quantity/value/reference/verdict rows) or a `ScanReport` (eta curve),
//! rendered as aligned text, pretty JSON, or CSV. All three formats print
//! values to 12 significant digits from the same formatting routine.

use serde::{Deserialize, Serialize};

/// One computed quantity with an optional reference value and the verdict of
/// comparing against it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Row {
    pub quantity: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reference: Option<f64>,
    pub verdict: String,
}

/// A table of computed quantities for one scenario.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub scenario: String,
    pub rows: Vec<Row>,
    /// Machine-readable attachments (certificates, witness summaries).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub extras: Option<serde_json::Value>,
}

/// One sampled point of a sharpness scan.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanRow {
    pub eta: f64,
    pub quantum: f64,
    pub local: f64,
    pub pnc: f64,
    /// Set on rows inserted at a bound crossing ("local" or "pnc").
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub crossing: Option<String>,
}

/// A sharpness scan: the quantum value curve against the constant bounds.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanReport {
    pub scenario: String,
    pub side: String,
    pub rows: Vec<ScanRow>,
}

/// Formats to 12 significant digits: fixed point while the exponent fits,
/// scientific otherwise.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-4..12).contains(&exp) {
        format!("{:.11e}", x)
    } else {
        let decimals = (11 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    }
}

/// Compares a value against its reference: "equals" within `tol`, otherwise
/// "violates" above and "satisfies" below.
pub fn verdict(value: f64, reference: f64, tol: f64) -> &'static str {
    if (value - reference).abs() <= tol {
        "equals"
    } else if value > reference {
        "violates"
    } else {
        "satisfies"
    }
}

/// Output format selected with `--format`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.to_text(),
            Format::Json => serde_json::to_string_pretty(self).expect("report serializes"),
            Format::Csv => self.to_csv(),
        }
    }

    fn to_text(&self) -> String {
        let mut out = format!("scenario: {}\n", self.scenario);
        let qw = self
            .rows
            .iter()
            .map(|r| r.quantity.len())
            .max()
            .unwrap_or(8)
            .max("quantity".len());
        let vw = 18;
        out.push_str(&format!(
            "{:<qw$}  {:>vw$}  {:>vw$}  {}\n",
            "quantity", "value", "reference", "verdict"
        ));
        for r in &self.rows {
            let reference = r.reference.map_or("-".to_string(), fmt_sig);
            out.push_str(&format!(
                "{:<qw$}  {:>vw$}  {:>vw$}  {}\n",
                r.quantity,
                fmt_sig(r.value),
                reference,
                r.verdict
            ));
        }
        out
    }

    fn to_csv(&self) -> String {
        let mut out = String::from("quantity,value,reference,verdict\n");
        for r in &self.rows {
            let reference = r.reference.map_or(String::new(), fmt_sig);
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.quantity,
                fmt_sig(r.value),
                reference,
                r.verdict
            ));
        }
        out
    }
}

impl ScanReport {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.to_text(),
            Format::Json => serde_json::to_string_pretty(self).expect("scan serializes"),
            Format::Csv => self.to_csv(),
        }
    }

    fn to_text(&self) -> String {
        let mut out = format!("scenario: {} (smearing {})\n", self.scenario, self.side);
        let w = 18;
        out.push_str(&format!(
            "{:>w$}  {:>w$}  {:>w$}  {:>w$}\n",
            "eta", "quantum", "local", "pnc"
        ));
        for r in &self.rows {
            let marker = r
                .crossing
                .as_ref()
                .map_or(String::new(), |c| format!("  <- {c} bound crossing"));
            out.push_str(&format!(
                "{:>w$}  {:>w$}  {:>w$}  {:>w$}{}\n",
                fmt_sig(r.eta),
                fmt_sig(r.quantum),
                fmt_sig(r.local),
                fmt_sig(r.pnc),
                marker
            ));
        }
        out
    }

    fn to_csv(&self) -> String {
        let mut out = String::from("eta,quantum,local,pnc\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt_sig(r.eta),
                fmt_sig(r.quantum),
                fmt_sig(r.local),
                fmt_sig(r.pnc)
            ));
        }
        out
    }
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(5.0), "5.00000000000");
        assert_eq!(fmt_sig(-4.0), "-4.00000000000");
        assert_eq!(fmt_sig(1.7320508075688772), "1.73205080757");
        assert_eq!(fmt_sig(0.6666666666666666), "0.666666666667");
        assert_eq!(fmt_sig(6.928203230275509), "6.92820323028");
        assert_eq!(fmt_sig(123.456), "123.456000000");
        // Outside the fixed-point window.
        assert_eq!(fmt_sig(1.5e-5), "1.50000000000e-5");
        assert_eq!(fmt_sig(1e12), "1.00000000000e12");
    }

    #[test]
    fn verdict_classification() {
        assert_eq!(verdict(1.5, 1.0, 1e-6), "violates");
        assert_eq!(verdict(0.5, 1.0, 1e-6), "satisfies");
        assert_eq!(verdict(1.0 + 1e-9, 1.0, 1e-6), "equals");
        assert_eq!(verdict(1.0 - 1e-9, 1.0, 1e-6), "equals");
    }

    #[test]
    fn report_json_round_trips() {
        let report = Report {
            scenario: "demo".into(),
            rows: vec![
                Row {
                    quantity: "local_bound".into(),
                    value: 5.0,
                    reference: Some(5.0),
                    verdict: "equals".into(),
                },
                Row {
                    quantity: "aux".into(),
                    value: 0.25,
                    reference: None,
                    verdict: "equals".into(),
                },
            ],
            extras: Some(serde_json::json!({"note": 1})),
        };
        let text = report.render(Format::Json);
        let back: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(back.scenario, report.scenario);
        assert_eq!(back.rows.len(), 2);
        assert_eq!(back.rows[0].value, 5.0);
        assert_eq!(back.rows[1].reference, None);
    }

    #[test]
    fn csv_has_header_and_one_line_per_row() {
        let report = Report {
            scenario: "demo".into(),
            rows: vec![Row {
                quantity: "q".into(),
                value: 1.0,
                reference: Some(2.0),
                verdict: "satisfies".into(),
            }],
            extras: None,
        };
        let csv = report.render(Format::Csv);
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines[0], "quantity,value,reference,verdict");
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[1], "q,1.00000000000,2.00000000000,satisfies");
    }

    #[test]
    fn scan_csv_header_is_fixed() {
        let scan = ScanReport {
            scenario: "demo".into(),
            side: "alice".into(),
            rows: vec![ScanRow {
                eta: 0.5,
                quantum: 3.0,
                local: 5.0,
                pnc: 4.0,
                crossing: None,
            }],
        };
        let csv = scan.render(Format::Csv);
        assert!(csv.starts_with("eta,quantum,local,pnc\n"));
        let text = scan.render(Format::Text);
        assert!(text.contains("0.500000000000"));
    }
}
