//! Parameter parsing shared by the commands.

/// A field order given as `q` or `p^m`.
pub fn parse_q(s: &str) -> Result<u64, String> {
    let s = s.trim();
    let q = match s.split_once('^') {
        Some((p, m)) => {
            let p: u64 = p.trim().parse().map_err(|_| format!("bad prime in {s:?}"))?;
            let m: u32 = m.trim().parse().map_err(|_| format!("bad exponent in {s:?}"))?;
            p.checked_pow(m).ok_or_else(|| format!("{s} overflows"))?
        }
        None => s.parse().map_err(|_| format!("bad field order {s:?}"))?,
    };
    if kmul_core::field::prime_power(q).is_none() {
        return Err(format!("{q} is not a prime power"));
    }
    Ok(q)
}

/// Comma-separated values and inclusive ranges `a..b`, order preserved.
fn parse_list(s: &str) -> Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match item.split_once("..") {
            Some((a, b)) => {
                let a: u64 = a.trim().parse().map_err(|_| format!("bad range {item:?}"))?;
                let b: u64 = b.trim().parse().map_err(|_| format!("bad range {item:?}"))?;
                if a > b {
                    return Err(format!("empty range {item:?}"));
                }
                out.extend(a..=b);
            }
            None => out.push(parse_q_or_int(item)?),
        }
    }
    if out.is_empty() {
        return Err(format!("empty list {s:?}"));
    }
    Ok(out)
}

fn parse_q_or_int(s: &str) -> Result<u64, String> {
    if s.contains('^') {
        parse_q(s)
    } else {
        s.parse().map_err(|_| format!("bad value {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    pub q: Vec<u64>,
    pub n: Vec<usize>,
    pub k: Vec<usize>,
}

pub const DEFAULT_GRID: &str = "q=2,3,5;n=1..8;k=2,3";

impl Grid {
    /// `q=2,3,5;n=1..8;k=2,3`; every axis is required.
    pub fn parse(spec: &str) -> Result<Grid, String> {
        let (mut q, mut n, mut k) = (None, None, None);
        for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, vals) = part
                .split_once('=')
                .ok_or_else(|| format!("grid axis {part:?} lacks '='"))?;
            let vals = parse_list(vals)?;
            let slot = match key.trim() {
                "q" => &mut q,
                "n" => &mut n,
                "k" => &mut k,
                other => return Err(format!("unknown grid axis {other:?}")),
            };
            if slot.replace(vals).is_some() {
                return Err(format!("grid axis {key:?} given twice"));
            }
        }
        let q = q.ok_or("grid lacks q")?;
        for &v in &q {
            if kmul_core::field::prime_power(v).is_none() {
                return Err(format!("{v} is not a prime power"));
            }
        }
        let to_usize = |v: Vec<u64>| v.into_iter().map(|x| x as usize).collect::<Vec<_>>();
        Ok(Grid {
            q,
            n: to_usize(n.ok_or("grid lacks n")?),
            k: to_usize(k.ok_or("grid lacks k")?),
        })
    }

    /// Cells in grid order: `q` outermost, then `n`, then `k`.
    pub fn cells(&self) -> Vec<(u64, usize, usize)> {
        let mut out = Vec::with_capacity(self.q.len() * self.n.len() * self.k.len());
        for &q in &self.q {
            for &n in &self.n {
                for &k in &self.k {
                    out.push((q, n, k));
                }
            }
        }
        out
    }
}

/// One field element: comma-separated coordinate labels.
pub fn parse_element(s: &str) -> Result<Vec<u32>, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| format!("bad coordinate {t:?} in {s:?}"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders() {
        assert_eq!(parse_q("9").unwrap(), 9);
        assert_eq!(parse_q("3^2").unwrap(), 9);
        assert_eq!(parse_q("2^4").unwrap(), 16);
        assert!(parse_q("6").is_err());
        assert!(parse_q("4^2").is_ok());
        assert!(parse_q("x").is_err());
    }

    #[test]
    fn default_grid() {
        let g = Grid::parse(DEFAULT_GRID).unwrap();
        assert_eq!(g.q, vec![2, 3, 5]);
        assert_eq!(g.n, (1..=8).collect::<Vec<_>>());
        assert_eq!(g.k, vec![2, 3]);
        let cells = g.cells();
        assert_eq!(cells.len(), 48);
        assert_eq!(cells[0], (2, 1, 2));
        assert_eq!(cells[1], (2, 1, 3));
        assert_eq!(cells[47], (5, 8, 3));
    }

    #[test]
    fn grid_errors() {
        assert!(Grid::parse("q=2;n=1").is_err());
        assert!(Grid::parse("q=6;n=1;k=2").is_err());
        assert!(Grid::parse("q=2;n=3..1;k=2").is_err());
        assert!(Grid::parse("q=2;q=3;n=1;k=2").is_err());
        assert!(Grid::parse("q=2;n=1;k=2;z=1").is_err());
    }

    #[test]
    fn elements() {
        assert_eq!(parse_element("1, 0,3").unwrap(), vec![1, 0, 3]);
        assert!(parse_element("1,,2").is_err());
    }
}
