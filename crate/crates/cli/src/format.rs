//! Number formatting and plain-text rendering shared by the subcommands.

/// Formats `x` with ten significant digits. Values in `[1e-4, 1e10)` use
/// fixed notation, everything else scientific; zero prints as `0`.
pub fn sig10(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    // The exponent is read after rounding so that a carry into a new leading
    // digit (9.9999999999 -> 10.00000000) is accounted for.
    let sci = format!("{x:.9e}");
    let exp: i32 = sci
        .rsplit('e')
        .next()
        .and_then(|e| e.parse().ok())
        .expect("scientific formatting always has an exponent");
    if (-4..10).contains(&exp) {
        let decimals = (9 - exp) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

pub fn csv(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = headers.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Right-aligned columns separated by two spaces.
pub fn table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: &mut dyn Iterator<Item = &str>| {
        let parts: Vec<String> = cells
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect();
        let mut l = parts.join("  ");
        l.push('\n');
        l
    };
    let mut out = line(&mut headers.iter().copied());
    for row in rows {
        out.push_str(&line(&mut row.iter().map(String::as_str)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_significant_digits() {
        assert_eq!(sig10(0.0), "0");
        assert_eq!(sig10(1.0), "1.000000000");
        assert_eq!(sig10(9.228169203286535e-3), "0.009228169203");
        assert_eq!(sig10(-0.0625), "-0.06250000000");
        assert_eq!(sig10(1.25), "1.250000000");
        assert_eq!(sig10(123456.789), "123456.7890");
        assert_eq!(sig10(9.228169203286535e-5), "9.228169203e-5");
        assert_eq!(sig10(3e12), "3.000000000e12");
        assert_eq!(sig10(9.99999999999), "10.00000000");
    }

    #[test]
    fn aligned_table() {
        let t = table(&["a", "long"], &[vec!["1".into(), "2".into()]]);
        assert_eq!(t, "a  long\n1     2\n");
    }
}
