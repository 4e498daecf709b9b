//! Number formatting shared by report and table writers.

/// Format with six significant digits: plain decimal notation in a sane
/// magnitude range, scientific notation outside it. Keeps golden files
/// stable across writers.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0.00000".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-5..6).contains(&mag) {
        format!("{x:.5e}")
    } else {
        let decimals = (5 - mag).max(0) as usize;
        format!("{x:.decimals$}")
    }
}

#[cfg(test)]
mod tests {
    use super::sig6;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.16666666), "0.166667");
        assert_eq!(sig6(1.0 / 3.0), "0.333333");
        assert_eq!(sig6(0.5), "0.500000");
        assert_eq!(sig6(123.456789), "123.457");
        assert_eq!(sig6(7.000122502858408e-5), "0.0000700012");
        assert_eq!(sig6(2.449971416416559e-9), "2.44997e-9");
        assert_eq!(sig6(0.0), "0.00000");
        assert_eq!(sig6(-0.125), "-0.125000");
    }
}
