use crate::geometry::Point;

/// Significant digits in every printed number.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// `%.12g`-style rendering: shortest of fixed or scientific, trailing zeros
/// trimmed, independent of locale.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    let p = SIGNIFICANT_DIGITS;
    let sci = format!("{:.*e}", p - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= p as i32 {
        let m = trim(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn point(p: &Point) -> String {
    let parts: Vec<String> = p.coords().iter().map(|&c| num(c)).collect();
    format!("({})", parts.join(", "))
}

pub fn points(ps: &[Point]) -> String {
    ps.iter().map(point).collect::<Vec<_>>().join(" ")
}
