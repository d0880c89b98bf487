//! start:end:step dB range syntax used by every SNR-valued flag.

use std::str::FromStr;

#[derive(Debug, Clone, Copy)]
pub struct DbRange {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl DbRange {
    pub fn grid(&self) -> Vec<f64> {
        let n = ((self.end - self.start) / self.step).round().max(0.0) as usize;
        let mut g: Vec<f64> = (0..=n).map(|i| self.start + i as f64 * self.step).collect();
        if let Some(last) = g.last_mut() {
            if (*last - self.end).abs() < 1e-9 {
                *last = self.end;
            } else if *last < self.end - 1e-9 {
                g.push(self.end);
            }
        }
        g
    }
}

impl FromStr for DbRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected start:end:step in dB, got '{s}'"));
        }
        let parse = |p: &str| {
            p.parse::<f64>()
                .map_err(|_| format!("'{p}' is not a number"))
        };
        let (start, end, step) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
        if !step.is_finite() || step <= 0.0 {
            return Err(format!("step must be positive, got {step}"));
        }
        if end < start {
            return Err(format!("range end {end} below start {start}"));
        }
        Ok(DbRange { start, end, step })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_grid() {
        let r: DbRange = "0:25:5".parse().unwrap();
        assert_eq!(r.grid(), vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0]);
        let single: DbRange = "20:20:1".parse().unwrap();
        assert_eq!(single.grid(), vec![20.0]);
        assert!("1:2".parse::<DbRange>().is_err());
        assert!("2:1:1".parse::<DbRange>().is_err());
        assert!("0:1:0".parse::<DbRange>().is_err());
        assert!("a:1:1".parse::<DbRange>().is_err());
    }
}
