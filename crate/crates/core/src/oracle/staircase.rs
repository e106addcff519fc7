use rand::Rng as _;

use super::Oracle;
use crate::error::{Error, Result};
use crate::monotone::{Label, UnitPoint};
use crate::rng;

/// Random monotone function on an `m^p` cell grid: a cell is positive iff it
/// dominates one of a random set of generator cells. Continuous queries are
/// resolved by the cell that contains them (the last cell is closed).
#[derive(Clone, Debug)]
pub struct Staircase {
    p: usize,
    resolution: usize,
    seed: u64,
    generators: Vec<Vec<usize>>,
}

impl Staircase {
    pub fn random(p: usize, resolution: usize, seed: u64) -> Result<Self> {
        if p == 0 {
            return Err(Error::usage("dimension must be positive"));
        }
        if resolution < 2 {
            return Err(Error::usage("staircase resolution must be at least 2"));
        }
        let mut rng = rng::seeded(seed);
        let count = rng.gen_range(0..=2 * resolution);
        let raw: Vec<Vec<usize>> = (0..count)
            .map(|_| (0..p).map(|_| rng.gen_range(0..resolution)).collect())
            .collect();
        Ok(Self::from_generators(p, resolution, seed, raw))
    }

    /// Builds the oracle from explicit generator cells, keeping the minimal ones.
    pub fn from_generators(p: usize, resolution: usize, seed: u64, raw: Vec<Vec<usize>>) -> Self {
        let leq = |a: &[usize], b: &[usize]| a.iter().zip(b).all(|(x, y)| x <= y);
        let mut generators: Vec<Vec<usize>> = Vec::new();
        for g in raw {
            if generators.iter().any(|h| leq(h, &g)) {
                continue;
            }
            generators.retain(|h| !leq(&g, h));
            generators.push(g);
        }
        generators.sort();
        Self {
            p,
            resolution,
            seed,
            generators,
        }
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn generators(&self) -> &[Vec<usize>] {
        &self.generators
    }

    pub fn cell_of(&self, x: &UnitPoint) -> Vec<usize> {
        x.coords()
            .iter()
            .map(|c| ((c * self.resolution as f64).floor() as usize).min(self.resolution - 1))
            .collect()
    }

    pub fn cell_label(&self, cell: &[usize]) -> Label {
        if self
            .generators
            .iter()
            .any(|g| g.iter().zip(cell).all(|(a, b)| a <= b))
        {
            Label::Positive
        } else {
            Label::Negative
        }
    }
}

impl Oracle for Staircase {
    fn dimension(&self) -> usize {
        self.p
    }

    fn evaluate(&self, x: &UnitPoint) -> Result<Label> {
        if x.dimension() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                actual: x.dimension(),
            });
        }
        Ok(self.cell_label(&self.cell_of(x)))
    }

    fn id(&self) -> String {
        format!("staircase_p{}_m{}_s{}", self.p, self.resolution, self.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_cells(p: usize, m: usize) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for _ in 0..p {
            out = out
                .into_iter()
                .flat_map(|c| {
                    (0..m).map(move |i| {
                        let mut c = c.clone();
                        c.push(i);
                        c
                    })
                })
                .collect();
        }
        out
    }

    #[test]
    fn every_staircase_is_monotone_on_its_cells() {
        for p in 1..=3 {
            for m in 2..=9 {
                for seed in 0..6 {
                    let s = Staircase::random(p, m, seed).unwrap();
                    let cells = all_cells(p, m);
                    for a in &cells {
                        for b in &cells {
                            if a.iter().zip(b).all(|(x, y)| x <= y) {
                                assert!(
                                    !(s.cell_label(a) == Label::Positive
                                        && s.cell_label(b) == Label::Negative),
                                    "p={p} m={m} seed={seed} {a:?} {b:?}"
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn seeded_construction_is_reproducible() {
        let a = Staircase::random(3, 7, 99).unwrap();
        let b = Staircase::random(3, 7, 99).unwrap();
        assert_eq!(a.generators(), b.generators());
    }

    #[test]
    fn no_generators_means_constant_negative() {
        let s = Staircase::from_generators(2, 4, 0, vec![]);
        let x = UnitPoint::new(vec![1.0, 1.0]).unwrap();
        assert_eq!(s.evaluate(&x).unwrap(), Label::Negative);
    }

    #[test]
    fn boundary_queries_fall_in_the_last_cell() {
        let s = Staircase::from_generators(1, 4, 0, vec![vec![3]]);
        assert_eq!(s.evaluate(&UnitPoint::new(vec![1.0]).unwrap()).unwrap(), Label::Positive);
        assert_eq!(s.evaluate(&UnitPoint::new(vec![0.74]).unwrap()).unwrap(), Label::Negative);
    }
}
