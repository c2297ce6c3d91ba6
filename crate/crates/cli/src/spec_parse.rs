//! Parsers for grid, window and target flags.

use homonym_core::collision::parse_count;

/// `start:stop:points` (log-spaced, rounded, deduplicated) or an explicit
/// comma-separated list such as `10,100,1e3`.
pub fn parse_grid(s: &str) -> Result<Vec<u64>, String> {
    let grid = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, points] = parts[..] else {
            return Err(format!("grid `{s}` must be start:stop:points"));
        };
        let start = parse_positive(start)?;
        let stop = parse_positive(stop)?;
        let points: usize = points
            .trim()
            .parse()
            .map_err(|_| format!("bad point count `{points}`"))?;
        if points == 0 {
            return Err("grid needs at least one point".into());
        }
        if stop < start {
            return Err(format!("grid stop {stop} is below start {start}"));
        }
        log_spaced(start, stop, points)
    } else {
        let mut v = s
            .split(',')
            .map(|t| parse_count(t.trim()).ok_or_else(|| format!("bad group size `{t}`")))
            .collect::<Result<Vec<_>, _>>()?;
        v.sort_unstable();
        v.dedup();
        v
    };
    if grid.is_empty() {
        return Err("grid is empty".into());
    }
    if grid[0] == 0 {
        return Err("group sizes must be >= 1".into());
    }
    Ok(grid)
}

fn parse_positive(t: &str) -> Result<u64, String> {
    match parse_count(t.trim()) {
        Some(v) if v >= 1 => Ok(v),
        _ => Err(format!("`{t}` is not a positive integer")),
    }
}

pub fn log_spaced(start: u64, stop: u64, points: usize) -> Vec<u64> {
    if points == 1 || start == stop {
        return vec![start];
    }
    let (lo, hi) = ((start as f64).ln(), (stop as f64).ln());
    let mut v: Vec<u64> = (0..points)
        .map(|i| (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp().round() as u64)
        .map(|n| n.clamp(start, stop))
        .collect();
    v.dedup();
    v
}

/// `n_min:n_max`.
pub fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("window `{s}` must be n_min:n_max"))?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("bad n_min `{a}`"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("bad n_max `{b}`"))?;
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo < hi) {
        return Err(format!("window `{s}` needs 0 < n_min < n_max"));
    }
    Ok((lo, hi))
}

pub fn parse_target(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 1.0 => Ok(v),
        _ => Err(format!("target `{s}` must be a number >= 1")),
    }
}

/// `PERIOD=path`.
pub fn parse_period_file(s: &str) -> Result<(String, std::path::PathBuf), String> {
    let (p, f) = s
        .split_once('=')
        .ok_or_else(|| format!("`{s}` must be PERIOD=path"))?;
    if p.trim().is_empty() || f.trim().is_empty() {
        return Err(format!("`{s}` must be PERIOD=path"));
    }
    Ok((p.trim().to_string(), f.trim().into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = parse_grid("1:100:20").unwrap();
        assert_eq!(g[0], 1);
        assert_eq!(*g.last().unwrap(), 100);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(parse_grid("1e3:1e3:5").unwrap(), vec![1000]);
        assert_eq!(parse_grid("100,10,1e3,10").unwrap(), vec![10, 100, 1000]);
        assert_eq!(parse_grid("10:1000:3").unwrap(), vec![10, 100, 1000]);
        assert!(parse_grid("0:10:3").is_err());
        assert!(parse_grid("10:1:3").is_err());
        assert!(parse_grid("1:10").is_err());
        assert!(parse_grid("1:10:0").is_err());
        assert!(parse_grid("0,5").is_err());
    }

    #[test]
    fn windows_and_targets() {
        assert_eq!(parse_window("5000:50000").unwrap(), (5000.0, 50000.0));
        assert!(parse_window("50000:5000").is_err());
        assert!(parse_window("5000").is_err());
        assert_eq!(parse_target("3.2e8").unwrap(), 3.2e8);
        assert!(parse_target("0").is_err());
        assert_eq!(
            parse_period_file("1916-1940=a.csv").unwrap(),
            ("1916-1940".to_string(), "a.csv".into())
        );
        assert!(parse_period_file("a.csv").is_err());
    }
}
