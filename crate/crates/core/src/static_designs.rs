//! Static designs: full grid (SG), inner grid (SI), uniform Monte Carlo (MC)
//! and plain randomized Latin hypercube (LHD).

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monotone::UnitPoint;
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StaticKind {
    Sg,
    Si,
    Mc,
    Lhd,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StaticDesignSpec {
    pub kind: StaticKind,
    pub dimension: usize,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
}

impl StaticDesignSpec {
    pub fn generate(&self) -> Result<Vec<UnitPoint>> {
        match self.kind {
            StaticKind::Sg => gen_sg(self.dimension, self.n),
            StaticKind::Si => gen_si(self.dimension, self.n),
            StaticKind::Mc => gen_mc(self.dimension, self.n, self.seed),
            StaticKind::Lhd => gen_lhd(self.dimension, self.n, self.seed),
        }
    }
}

/// Exact integer `p`-th root of `n`, if there is one.
pub fn integer_root(n: usize, p: usize) -> Option<usize> {
    if p == 0 {
        return None;
    }
    let guess = (n as f64).powf(1.0 / p as f64).round() as usize;
    (guess.saturating_sub(1)..=guess + 1).find(|m| (*m as u128).checked_pow(p as u32) == Some(n as u128))
}

/// The closest valid run counts `m^p` on either side of `n`, with `m >= min_m`.
fn nearest_powers(n: usize, p: usize, min_m: usize) -> (Option<usize>, usize) {
    let mut m = min_m;
    let mut below = None;
    loop {
        let v = (m as u128).pow(p as u32);
        if v > n as u128 {
            return (below, v as usize);
        }
        below = Some(v as usize);
        m += 1;
    }
}

fn grid_root(kind: &str, p: usize, n: usize, min_m: usize) -> Result<usize> {
    if p == 0 {
        return Err(Error::usage("dimension must be positive"));
    }
    match integer_root(n, p) {
        Some(m) if m >= min_m => Ok(m),
        _ => {
            let (below, above) = nearest_powers(n, p, min_m);
            let hint = match below {
                Some(b) => format!("n={b} or n={above}"),
                None => format!("n={above}"),
            };
            Err(Error::usage(format!(
                "{kind} needs n = m^{p} with m >= {min_m}; {n} is not valid, try {hint}"
            )))
        }
    }
}

/// Cartesian product of `levels` in lexicographic order.
pub(crate) fn cartesian(levels: &[f64], p: usize) -> Vec<UnitPoint> {
    let m = levels.len();
    let total = m.pow(p as u32);
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; p];
    for _ in 0..total {
        out.push(UnitPoint::from_unchecked(idx.iter().map(|&i| levels[i]).collect()));
        for k in (0..p).rev() {
            idx[k] += 1;
            if idx[k] < m {
                break;
            }
            idx[k] = 0;
        }
    }
    out
}

/// Full grid `{0, 1/(m-1), ..., 1}^p` with `m = n^(1/p) >= 2`.
pub fn gen_sg(p: usize, n: usize) -> Result<Vec<UnitPoint>> {
    let m = grid_root("SG", p, n, 2)?;
    let levels: Vec<f64> = (0..m).map(|z| z as f64 / (m - 1) as f64).collect();
    Ok(cartesian(&levels, p))
}

/// Inner grid `{1/(m+1), ..., m/(m+1)}^p` with `m = n^(1/p) >= 1`.
pub fn gen_si(p: usize, n: usize) -> Result<Vec<UnitPoint>> {
    let m = grid_root("SI", p, n, 1)?;
    let levels: Vec<f64> = (1..=m).map(|z| z as f64 / (m + 1) as f64).collect();
    Ok(cartesian(&levels, p))
}

/// `n` independent uniform points.
pub fn gen_mc(p: usize, n: usize, seed: u64) -> Result<Vec<UnitPoint>> {
    if p == 0 {
        return Err(Error::usage("dimension must be positive"));
    }
    let mut rng = rng::seeded(seed);
    Ok((0..n)
        .map(|_| UnitPoint::from_unchecked((0..p).map(|_| rng.gen::<f64>()).collect()))
        .collect())
}

/// Randomized Latin hypercube: in every dimension each interval
/// `[k/n, (k+1)/n)` holds exactly one coordinate.
pub fn gen_lhd(p: usize, n: usize, seed: u64) -> Result<Vec<UnitPoint>> {
    if p == 0 {
        return Err(Error::usage("dimension must be positive"));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut rng = rng::seeded(seed);
    let mut columns = Vec::with_capacity(p);
    for _ in 0..p {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let col: Vec<f64> = perm
            .into_iter()
            .map(|k| {
                let v = (k as f64 + rng.gen::<f64>()) / n as f64;
                // guard the open right end against rounding
                v.min((k as f64 + 1.0) / n as f64 - f64::EPSILON).max(k as f64 / n as f64)
            })
            .collect();
        columns.push(col);
    }
    Ok((0..n)
        .map(|i| UnitPoint::from_unchecked(columns.iter().map(|c| c[i]).collect()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sg_examples() {
        let d = gen_sg(2, 9).unwrap();
        let coords: Vec<Vec<f64>> = d.iter().map(|p| p.coords().to_vec()).collect();
        assert_eq!(coords.len(), 9);
        assert_eq!(coords[0], vec![0.0, 0.0]);
        assert_eq!(coords[1], vec![0.0, 0.5]);
        assert_eq!(coords[8], vec![1.0, 1.0]);
        assert_eq!(
            gen_sg(1, 2).unwrap(),
            vec![UnitPoint::new(vec![0.0]).unwrap(), UnitPoint::new(vec![1.0]).unwrap()]
        );
        let cube = gen_sg(3, 27).unwrap();
        let corners = cube
            .iter()
            .filter(|p| p.coords().iter().all(|c| *c == 0.0 || *c == 1.0))
            .count();
        assert_eq!((cube.len(), corners), (27, 8));
    }

    #[test]
    fn sg_rejects_non_powers_with_hint() {
        let msg = gen_sg(2, 10).unwrap_err().to_string();
        assert!(msg.contains("n=9 or n=16"), "{msg}");
        assert!(gen_sg(2, 1).is_err());
    }

    #[test]
    fn si_examples() {
        let d = gen_si(2, 4).unwrap();
        assert_eq!(d[0].coords(), &[1.0 / 3.0, 1.0 / 3.0]);
        assert_eq!(d[3].coords(), &[2.0 / 3.0, 2.0 / 3.0]);
        assert_eq!(gen_si(1, 1).unwrap()[0].coords(), &[0.5]);
        let levels: Vec<f64> = gen_si(2, 9).unwrap().iter().map(|p| p.coords()[1]).take(3).collect();
        assert_eq!(levels, vec![0.25, 0.5, 0.75]);
    }

    #[test]
    fn grid_structure_counts() {
        for p in 1..=3 {
            for m in 2usize..=5 {
                let n = m.pow(p as u32);
                let sg = gen_sg(p, n).unwrap();
                let interior = sg
                    .iter()
                    .filter(|x| x.coords().iter().all(|c| *c > 0.0 && *c < 1.0))
                    .count();
                assert_eq!(interior, (m - 2).pow(p as u32));
                let si = gen_si(p, n).unwrap();
                assert!(si.iter().all(|x| x.coords().iter().all(|c| *c > 0.0 && *c < 1.0)));
            }
        }
    }

    #[test]
    fn mc_is_seeded() {
        assert_eq!(gen_mc(3, 20, 5).unwrap(), gen_mc(3, 20, 5).unwrap());
        assert_ne!(gen_mc(3, 20, 5).unwrap(), gen_mc(3, 20, 6).unwrap());
    }

    #[test]
    fn mc_marginal_means_are_central() {
        let d = gen_mc(2, 100_000, 17).unwrap();
        for k in 0..2 {
            let mean = d.iter().map(|x| x.coords()[k]).sum::<f64>() / d.len() as f64;
            assert!((mean - 0.5).abs() < 0.005, "{mean}");
        }
    }

    #[test]
    fn mc_passes_ks_against_uniform() {
        let n = 100_000;
        let mut xs: Vec<f64> = gen_mc(1, n, 23).unwrap().iter().map(|x| x.coords()[0]).collect();
        xs.sort_by(f64::total_cmp);
        let d = xs
            .iter()
            .enumerate()
            .map(|(i, x)| ((i + 1) as f64 / n as f64 - x).abs().max((x - i as f64 / n as f64).abs()))
            .fold(0.0, f64::max);
        // 1% critical value of the one-sample KS statistic
        let critical = 1.628 / (n as f64).sqrt();
        assert!(d < critical, "D = {d}");
    }

    #[test]
    fn lhd_hits_every_bin_once() {
        for (p, n, seed) in [(2, 81, 1), (3, 17, 2), (5, 7, 3), (4, 1, 9)] {
            let d = gen_lhd(p, n, seed).unwrap();
            for k in 0..p {
                let mut bins: Vec<usize> = d
                    .iter()
                    .map(|x| (x.coords()[k] * n as f64).floor() as usize)
                    .collect();
                bins.sort_unstable();
                assert_eq!(bins, (0..n).collect::<Vec<_>>());
            }
        }
    }
}
