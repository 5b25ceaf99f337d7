//! Parsers for the sweep-grid flag syntaxes.

use anyhow::{bail, Context, Result};

/// Parses a measurement grid: either `start:stop:step` (inclusive) or a
/// comma-separated list.
pub fn parse_m_grid(text: &str) -> Result<Vec<usize>> {
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            bail!("grid must be start:stop:step, got `{text}`");
        }
        let start: usize = parts[0]
            .parse()
            .with_context(|| format!("bad grid start `{}`", parts[0]))?;
        let stop: usize = parts[1]
            .parse()
            .with_context(|| format!("bad grid stop `{}`", parts[1]))?;
        let step: usize = parts[2]
            .parse()
            .with_context(|| format!("bad grid step `{}`", parts[2]))?;
        if step == 0 || start == 0 || stop < start {
            bail!("grid `{text}` must satisfy start >= 1, stop >= start, step >= 1");
        }
        Ok((start..=stop).step_by(step).collect())
    } else {
        text.split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<usize>()
                    .with_context(|| format!("bad grid value `{tok}`"))
            })
            .collect()
    }
}

/// Parses a weight grid: `lo:hi:count` (log-spaced, inclusive ends) or a
/// comma-separated list.
pub fn parse_betas(text: &str) -> Result<Vec<f64>> {
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            bail!("beta grid must be lo:hi:count, got `{text}`");
        }
        let lo: f64 = parts[0]
            .parse()
            .with_context(|| format!("bad beta lo `{}`", parts[0]))?;
        let hi: f64 = parts[1]
            .parse()
            .with_context(|| format!("bad beta hi `{}`", parts[1]))?;
        let count: usize = parts[2]
            .parse()
            .with_context(|| format!("bad beta count `{}`", parts[2]))?;
        if lo <= 0.0 || hi < lo || count == 0 {
            bail!("beta grid `{text}` must satisfy 0 < lo <= hi, count >= 1");
        }
        if count == 1 {
            return Ok(vec![lo]);
        }
        let (llo, lhi) = (lo.log10(), hi.log10());
        Ok((0..count)
            .map(|k| 10f64.powf(llo + (lhi - llo) * k as f64 / (count - 1) as f64))
            .collect())
    } else {
        text.split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .with_context(|| format!("bad beta value `{tok}`"))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_forms() {
        assert_eq!(parse_m_grid("100:700:50").unwrap().len(), 13);
        assert_eq!(parse_m_grid("10,20,30").unwrap(), vec![10, 20, 30]);
        assert!(parse_m_grid("0:10:2").is_err());
        assert!(parse_m_grid("5:1:2").is_err());
        assert!(parse_m_grid("a:b:c").is_err());
    }

    #[test]
    fn beta_forms() {
        let betas = parse_betas("1e-2:1e2:9").unwrap();
        assert_eq!(betas.len(), 9);
        assert!((betas[4] - 1.0).abs() < 1e-12);
        assert!((betas[0] - 0.01).abs() < 1e-14);
        assert!((betas[8] - 100.0).abs() < 1e-10);
        assert_eq!(parse_betas("0.5,2").unwrap(), vec![0.5, 2.0]);
        assert!(parse_betas("0:1:5").is_err());
    }
}
