use super::{dist, norm, Direction};
use crate::error::{Error, Result};
use crate::rational::{parse_decimal, to_f64};

#[derive(Clone, Debug)]
pub struct TangentOptions {
    /// Angular resolution (chordal).
    pub delta_out: f64,
    /// Coarsest shell index k that must contribute, shells being
    /// |x| ∈ (2^{-k-1}, 2^{-k}]. `None` uses the finer half of the
    /// populated shells.
    pub start_shell: Option<i32>,
}

impl Default for TangentOptions {
    fn default() -> Self {
        TangentOptions { delta_out: 1e-3, start_shell: None }
    }
}

fn shell_of(r: f64) -> i32 {
    // |x| ∈ (2^{-k-1}, 2^{-k}]  ⟺  k = ⌈−log₂|x|⌉ − 1 … adjusted at exact powers
    let k = (-r.log2()).floor() as i32;
    if 2f64.powi(-k) < r {
        k - 1
    } else {
        k
    }
}

/// Estimates the tangent directions of a sampled set accumulating at 0:
/// a direction survives when every shell from the start scale down to the
/// finest populated shell has a sample within `delta_out` of it. The result
/// is a `delta_out`-net of surviving directions.
pub fn estimate_tangent_directions(points: &[Vec<f64>], opts: &TangentOptions) -> Result<Vec<Direction>> {
    if points.is_empty() {
        return Err(Error::Invalid("no sample points".into()));
    }
    let mut shells: std::collections::BTreeMap<i32, Vec<Direction>> = Default::default();
    for p in points {
        let r = norm(p);
        if r == 0.0 {
            return Err(Error::Domain("sample points must exclude the origin".into()));
        }
        shells.entry(shell_of(r)).or_default().push(Direction::new(p.clone())?);
    }
    let kmin = *shells.keys().next().unwrap();
    let kmax = *shells.keys().next_back().unwrap();
    let start = opts.start_shell.unwrap_or(kmin + (kmax - kmin) / 2).clamp(kmin, kmax);
    let used: Vec<&Vec<Direction>> = (start..=kmax).map(|k| shells.get(&k).map_or(&EMPTY, |v| v)).collect();
    let d = opts.delta_out;
    // candidates from the two finest populated shells, thinned to a d/4-net
    let mut candidates: Vec<Direction> = Vec::new();
    for k in [kmax, kmax - 1] {
        for w in shells.get(&k).into_iter().flatten() {
            if candidates.iter().all(|c| c.dist(w) >= d / 4.0) {
                candidates.push(w.clone());
            }
        }
    }
    let survivors: Vec<Direction> = candidates
        .into_iter()
        .filter(|c| used.iter().all(|shell| shell.iter().any(|w| dist(&c.0, &w.0) < d)))
        .collect();
    // greedy clustering at radius d; representative is the normalised mean
    let mut clusters: Vec<Vec<Direction>> = Vec::new();
    for s in survivors {
        match clusters.iter_mut().find(|cl| cl[0].dist(&s) < d) {
            Some(cl) => cl.push(s),
            None => clusters.push(vec![s]),
        }
    }
    clusters
        .into_iter()
        .map(|cl| {
            let n = cl[0].n();
            let mean: Vec<f64> = (0..n).map(|i| cl.iter().map(|w| w.0[i]).sum::<f64>()).collect();
            Direction::new(mean)
        })
        .collect()
}

static EMPTY: Vec<Direction> = Vec::new();

/// One point per line, comma-separated rational or decimal coordinates;
/// blank lines and lines starting with `#` are skipped.
pub fn parse_points_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let p = line
            .split(',')
            .map(|f| parse_decimal(f).map(|q| to_f64(&q)))
            .collect::<Result<Vec<f64>>>()
            .map_err(|e| Error::Invalid(format!("line {}: {e}", lineno + 1)))?;
        if let Some(first) = out.first() {
            if first.len() != p.len() {
                return Err(Error::DimensionMismatch { expected: first.len(), got: p.len() });
            }
        }
        out.push(p);
    }
    Ok(out)
}
