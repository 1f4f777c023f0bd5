//! Number formatting shared by the CSV writers.

/// Fixed two-decimal display; `NA` for missing values. Negative zero is
/// printed as `0.00`.
pub fn fixed2(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => {
            let s = format!("{x:.2}");
            if s == "-0.00" {
                "0.00".into()
            } else {
                s
            }
        }
        _ => "NA".into(),
    }
}

/// Shortest round-trip representation; `NA` for missing values.
pub fn full(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => "NA".into(),
    }
}

pub fn parse_optional(field: &str) -> Result<Option<f64>, std::num::ParseFloatError> {
    match field.trim() {
        "" | "NA" => Ok(None),
        s => s.parse().map(Some),
    }
}

/// Parses `"a,b,c"` into floats.
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| format!("not a number: {t:?}"))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_rules() {
        assert_eq!(fixed2(Some(105.0 / 124.0)), "0.85");
        assert_eq!(fixed2(Some(33.0 / 142.0)), "0.23");
        assert_eq!(fixed2(Some(-0.001)), "0.00");
        assert_eq!(fixed2(None), "NA");
        assert_eq!(full(Some(0.1)), "0.1");
        assert_eq!(parse_optional("NA").unwrap(), None);
        assert_eq!(parse_optional("2.5").unwrap(), Some(2.5));
        assert_eq!(parse_list("0, 0.5,4").unwrap(), vec![0.0, 0.5, 4.0]);
        assert!(parse_list("1,x").is_err());
    }
}
