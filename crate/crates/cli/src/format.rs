/// Shortest decimal that parses back to the same `f64`. Plain notation in
/// `[1e-5, 1e16)`, exponent notation outside it.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::num;

    #[test]
    fn round_trips() {
        for x in [0.0, 1.0, -2.5, 0.1, 1.0 / 3.0, 1e-7, 6.02e23, 1e300, f64::MIN_POSITIVE, 123456789.0] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(6.0), "6");
        assert_eq!(num(0.5), "0.5");
        assert_eq!(num(1e20), "1e20");
        assert_eq!(num(-1.5e-9), "-1.5e-9");
    }
}
