//! Number formatting shared by the JSON and CSV writers.

/// Rounds to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() || digits == 0 {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

/// CSV cell: ten significant digits, `NaN` for undefined values.
pub fn csv_number(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        let r = round_sig(x, 10);
        // keep roundoff-sized values short
        if r != 0.0 && r.abs() < 1e-6 {
            format!("{r:e}")
        } else {
            r.to_string()
        }
    }
}

/// Pretty JSON with every float rounded to ten significant digits.
pub fn json_rounded<T: serde::Serialize>(value: &T) -> serde_json::Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

fn round_value(v: &mut serde_json::Value) {
    use serde_json::Value;
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64().and_then(|x| serde_json::Number::from_f64(round_sig(x, 10))) {
                *n = x;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round_sig(0.16605339062, 10), 0.1660533906);
        assert_eq!(round_sig(1.0, 10), 1.0);
        assert_eq!(round_sig(0.0, 10), 0.0);
        assert_eq!(round_sig(-1.234567890123, 4), -1.235);
        assert_eq!(csv_number(0.5625), "0.5625");
        assert_eq!(csv_number(f64::NAN), "NaN");
        assert_eq!(csv_number(3.081487911e-33), "3.081487911e-33");
        assert_eq!(csv_number(0.0), "0");
    }

    #[test]
    fn json_floats_are_rounded() {
        let s = json_rounded(&serde_json::json!({"a": [0.123456789012345, 3], "b": {"c": 1.0}})).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["a"][0], 0.123456789);
        assert_eq!(v["a"][1], 3);
        assert!(s.ends_with('\n'));
    }
}
