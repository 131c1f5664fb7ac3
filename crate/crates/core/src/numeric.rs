//! Small numeric helpers shared by the enumeration engine.

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Format with `digits` significant digits, or shortest round-trip when `digits` is `None`.
pub fn format_significant(x: f64, digits: Option<usize>) -> String {
    let Some(digits) = digits else {
        return format!("{x}");
    };
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let digits = digits.max(1);
    let magnitude = x.abs().log10().floor() as i32;
    if !(-4..15).contains(&magnitude) {
        return format!("{:.*e}", digits - 1, x);
    }
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // A rounding carry can add a digit (9.999995 -> 10.00000); trim back.
    if decimals > 0 && s.contains('.') {
        let trimmed = s.trim_end_matches('0').trim_end_matches('.');
        trimmed.to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut xs = vec![1.0e16];
        xs.extend(std::iter::repeat(1.0).take(1000));
        xs.push(-1.0e16);
        assert_eq!(compensated_sum(xs.iter().copied()), 1000.0);
        let naive: f64 = xs.iter().sum();
        assert_ne!(naive, 1000.0);
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_significant(-0.667212598528206, Some(6)), "-0.667213");
        assert_eq!(format_significant(0.9563261937724757, Some(6)), "0.956326");
        assert_eq!(format_significant(2.0, Some(6)), "2");
        assert_eq!(format_significant(0.001259356850631502, Some(6)), "0.00125936");
        assert_eq!(format_significant(1.5e-9, Some(6)), "1.50000e-9");
        assert_eq!(format_significant(0.0, Some(6)), "0");
        assert_eq!(format_significant(0.1, None), "0.1");
    }
}
