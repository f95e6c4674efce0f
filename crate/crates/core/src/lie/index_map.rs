use serde::{Deserialize, Serialize};

use super::group::{GroupElement, Mat};
use super::LieError;

/// One factor of an output tuple: the ordered product of the listed inputs,
/// each optionally inverted.
pub type Block = Vec<(usize, bool)>;

/// A map G^p → G^r whose components are words in the inputs, e.g. m_{12},
/// the projections p_i, the face maps Δ_i, μ(g,h) = (gh⁻¹, h).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexMap {
    arity_in: usize,
    blocks: Vec<Block>,
}

impl IndexMap {
    pub fn new(arity_in: usize, blocks: Vec<Block>) -> Result<Self, LieError> {
        for b in &blocks {
            if b.is_empty() {
                return Err(LieError::Arity("empty block".into()));
            }
            if b.iter().any(|&(i, _)| i >= arity_in) {
                return Err(LieError::Arity(format!("block index out of range for arity {arity_in}")));
            }
        }
        Ok(IndexMap { arity_in, blocks })
    }

    /// Blocks given as plain index lists, no inversions; `"12,3"`-style grouping.
    pub fn grouping(arity_in: usize, groups: &[&[usize]]) -> Result<Self, LieError> {
        IndexMap::new(arity_in, groups.iter().map(|g| g.iter().map(|&i| (i, false)).collect()).collect())
    }

    pub fn identity(arity: usize) -> Self {
        IndexMap { arity_in: arity, blocks: (0..arity).map(|i| vec![(i, false)]).collect() }
    }

    pub fn projection(arity_in: usize, i: usize) -> Self {
        IndexMap { arity_in, blocks: vec![vec![(i, false)]] }
    }

    /// The face map Δ_i : G^{q} → G^{q−1}: Δ_0 drops the first entry, Δ_q drops
    /// the last, and 0 < i < q multiplies entries i−1 and i (0-based).
    pub fn face(q: usize, i: usize) -> Self {
        assert!(q >= 1 && i <= q);
        let mut blocks = Vec::with_capacity(q.saturating_sub(1));
        if i == 0 {
            blocks.extend((1..q).map(|j| vec![(j, false)]));
        } else if i == q {
            blocks.extend((0..q - 1).map(|j| vec![(j, false)]));
        } else {
            for j in 0..q {
                if j == i - 1 {
                    blocks.push(vec![(j, false), (j + 1, false)]);
                } else if j != i {
                    blocks.push(vec![(j, false)]);
                }
            }
        }
        IndexMap { arity_in: q, blocks }
    }

    pub fn arity_in(&self) -> usize {
        self.arity_in
    }

    pub fn arity_out(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// `self ∘ inner`: first apply `inner`, then `self`.
    pub fn compose(&self, inner: &IndexMap) -> Result<IndexMap, LieError> {
        if inner.arity_out() != self.arity_in {
            return Err(LieError::Arity("composition arity mismatch".into()));
        }
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let mut out = Vec::new();
                for &(i, inv) in b {
                    let sub = &inner.blocks[i];
                    if inv {
                        out.extend(sub.iter().rev().map(|&(j, s)| (j, !s)));
                    } else {
                        out.extend(sub.iter().copied());
                    }
                }
                out
            })
            .collect();
        Ok(IndexMap { arity_in: inner.arity_in, blocks })
    }

    pub fn apply(&self, point: &[GroupElement]) -> Vec<GroupElement> {
        self.blocks
            .iter()
            .map(|b| {
                let mut acc: Option<GroupElement> = None;
                for &(i, inv) in b {
                    let f = if inv { point[i].inverse() } else { point[i].clone() };
                    acc = Some(match acc {
                        None => f,
                        Some(a) => a.mul(&f),
                    });
                }
                acc.expect("blocks are nonempty")
            })
            .collect()
    }

    /// Pushforward of one tangent tuple by the product rule.
    pub fn push_tangent(&self, point: &[GroupElement], tangent: &[Mat]) -> Vec<Mat> {
        self.blocks
            .iter()
            .map(|b| {
                let factors: Vec<(Mat, Mat)> = b
                    .iter()
                    .map(|&(i, inv)| {
                        if inv {
                            let gi = point[i].inverse();
                            let d = -(gi.matrix() * &tangent[i] * gi.matrix());
                            (gi.matrix().clone(), d)
                        } else {
                            (point[i].matrix().clone(), tangent[i].clone())
                        }
                    })
                    .collect();
                let n = factors.len();
                let mut total = Mat::zeros(factors[0].0.nrows(), factors[0].0.ncols());
                for j in 0..n {
                    let mut term = if j == 0 { factors[0].1.clone() } else { factors[0].0.clone() };
                    for (k, f) in factors.iter().enumerate().skip(1) {
                        term = if k == j { term * &f.1 } else { term * &f.0 };
                    }
                    total += term;
                }
                total
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::group::{max_abs, GroupTag};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn face_maps_on_triples() {
        let f1 = IndexMap::face(3, 1);
        assert_eq!(f1.blocks(), &[vec![(0, false), (1, false)], vec![(2, false)]]);
        let f2 = IndexMap::face(3, 2);
        assert_eq!(f2.blocks(), &[vec![(0, false)], vec![(1, false), (2, false)]]);
        assert_eq!(IndexMap::face(3, 0).blocks(), &[vec![(1, false)], vec![(2, false)]]);
        assert_eq!(IndexMap::face(3, 3).blocks(), &[vec![(0, false)], vec![(1, false)]]);
    }

    #[test]
    fn composition_matches_sequential_application() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pt: Vec<_> = (0..4).map(|_| GroupElement::random(GroupTag::SU2, 2, 1.0, &mut rng)).collect();
        let inner = IndexMap::new(4, vec![vec![(0, false), (1, true)], vec![(2, false), (3, false)], vec![(3, true)]]).unwrap();
        let outer = IndexMap::new(3, vec![vec![(1, true), (0, false)], vec![(2, false)]]).unwrap();
        let composed = outer.compose(&inner).unwrap();
        let a = outer.apply(&inner.apply(&pt));
        let b = composed.apply(&pt);
        for (x, y) in a.iter().zip(&b) {
            assert!(x.distance(y) < 1e-14);
        }
        let tan: Vec<Mat> = pt.iter().map(|g| g.tangent(&GroupTag::SU2.random_algebra(2, 1.0, &mut rng))).collect();
        let ta = outer.push_tangent(&inner.apply(&pt), &inner.push_tangent(&pt, &tan));
        let tb = composed.push_tangent(&pt, &tan);
        for (x, y) in ta.iter().zip(&tb) {
            assert!(max_abs(&(x - y)) < 1e-13);
        }
    }

    #[test]
    fn pushforward_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let pt: Vec<_> = (0..2).map(|_| GroupElement::random(GroupTag::SU2, 2, 1.0, &mut rng)).collect();
        let xs: Vec<Mat> = (0..2).map(|_| GroupTag::SU2.random_algebra(2, 1.0, &mut rng)).collect();
        let map = IndexMap::new(2, vec![vec![(0, false), (1, true)]]).unwrap();
        let h = 1e-6;
        let shift = |s: f64| -> Vec<GroupElement> {
            pt.iter().zip(&xs).map(|(g, x)| g.mul(&GroupElement::exp(GroupTag::SU2, &(x * crate::lie::c64(s, 0.0))))).collect()
        };
        let fd = (map.apply(&shift(h))[0].matrix() - map.apply(&shift(-h))[0].matrix()) / crate::lie::c64(2.0 * h, 0.0);
        let tan: Vec<Mat> = pt.iter().zip(&xs).map(|(g, x)| g.tangent(x)).collect();
        let exact = &map.push_tangent(&pt, &tan)[0];
        assert!(max_abs(&(fd - exact)) < 1e-9);
    }
}
