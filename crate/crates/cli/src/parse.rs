//! Flag value parsers: counts in scientific notation and `start:stop:step`
//! ranges.

/// Largest integer that round-trips through `f64` exactly.
const MAX_EXACT: f64 = 9_007_199_254_740_992.0;

pub fn count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if !(v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v <= MAX_EXACT) {
        return Err(format!("not a nonnegative integer: {s}"));
    }
    Ok(v as u64)
}

pub fn size(s: &str) -> Result<usize, String> {
    count(s).and_then(|v| usize::try_from(v).map_err(|e| e.to_string()))
}

pub fn real(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("not finite: {s}"))
    }
}

/// Parsed `--n` value; a newtype so clap treats it as one argument.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeList(pub Vec<usize>);

/// Parsed real grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RealGrid(pub Vec<f64>);

pub fn sizes(s: &str) -> Result<SizeList, String> {
    size_list(s).map(SizeList)
}

pub fn grid(s: &str) -> Result<RealGrid, String> {
    real_range(s).map(RealGrid)
}

/// Integer list: `a`, `a,b,c` or inclusive `start:stop:step` (step
/// defaults to 1). Parts may be mixed with commas.
pub fn size_list(s: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let fields: Vec<&str> = part.split(':').collect();
        match fields.as_slice() {
            [v] => out.push(size(v)?),
            [a, b] | [a, b, _] => {
                let (start, stop) = (size(a)?, size(b)?);
                let step = match fields.get(2) {
                    Some(st) => size(st)?,
                    None => 1,
                };
                if step == 0 {
                    return Err(format!("zero step in {part}"));
                }
                if stop < start {
                    return Err(format!("empty range {part}"));
                }
                out.extend((start..=stop).step_by(step));
            }
            _ => return Err(format!("bad range {part}; expected start:stop:step")),
        }
    }
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(out)
}

/// Real grid `start:stop:step`, inclusive of `stop` up to rounding.
pub fn real_range(s: &str) -> Result<Vec<f64>, String> {
    let fields: Vec<&str> = s.split(':').collect();
    let [a, b, c] = fields.as_slice() else {
        if let [v] = fields.as_slice() {
            return Ok(vec![real(v)?]);
        }
        return Err(format!("bad range {s}; expected start:stop:step"));
    };
    let (start, stop, step) = (real(a)?, real(b)?, real(c)?);
    if step <= 0.0 || stop < start {
        return Err(format!("empty range {s}"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(count("1e7"), Ok(10_000_000));
        assert_eq!(count("2.5E3"), Ok(2500));
        assert_eq!(count("42"), Ok(42));
        assert!(count("1.5").is_err());
        assert!(count("-3").is_err());
        assert!(count("1e30").is_err());
    }

    #[test]
    fn lists_and_ranges() {
        assert_eq!(size_list("50:200:50"), Ok(vec![50, 100, 150, 200]));
        assert_eq!(size_list("1:3"), Ok(vec![1, 2, 3]));
        assert_eq!(size_list("5,1e2, 7"), Ok(vec![5, 100, 7]));
        assert_eq!(size_list("50:120:50"), Ok(vec![50, 100]));
        assert!(size_list("5:1").is_err());
        assert!(size_list("1:5:0").is_err());
        assert!(size_list("").is_err());
    }

    #[test]
    fn real_ranges() {
        let g = real_range("0:1:0.1").unwrap();
        assert_eq!(g.len(), 11);
        assert!((g[10] - 1.0).abs() < 1e-12);
        assert_eq!(real_range("2.5"), Ok(vec![2.5]));
        assert!(real_range("1:0:0.1").is_err());
    }
}
