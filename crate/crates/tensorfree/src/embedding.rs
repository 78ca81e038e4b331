//! Embeddings of bipartite matrices along the edges of a bipartite graph.
//!
//! Edge `i = (t(i), b(i))` places `X_i ∈ M_{d_t} ⊗ M_{d_b}` on top leg
//! `t(i)` and bottom leg `q + b(i)` of `M_{d_t}^{⊗q} ⊗ M_{d_b}^{⊗r}`, with the
//! identity elsewhere. Identity factors only short-circuit the wiring of a
//! trace invariant, so every normalized invariant of the embedded family is
//! a normalized bipartite invariant of the original one:
//! `tr_α̲(Y_w) = tr_{(β_t, β_b)}(X_w)`, where `β_t` is the first return of
//! each top `α_s` to the positions whose edge uses leg `s` (same for `β_b`).
//! [`EmbeddingGraph::pull_back`] does this rewriting, which keeps the large
//! space implicit.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cumulant::LinearStatistic;
use crate::error::{Error, Result};
use crate::perm::{PermTuple, Permutation};
use crate::rmt::embed_on_legs;
use crate::tensors::MultipartiteMatrix;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingGraph {
    pub q: usize,
    pub r: usize,
    /// `(top, bottom)` per edge, both 0-based; the bottom leg is `q + bottom`.
    pub edges: Vec<(usize, usize)>,
}

impl EmbeddingGraph {
    pub fn new(q: usize, r: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if q == 0 || r == 0 {
            return Err(Error::Invalid("both sides of the graph need a vertex".into()));
        }
        if edges.is_empty() {
            return Err(Error::Invalid("graph has no edges".into()));
        }
        for (i, &(t, b)) in edges.iter().enumerate() {
            if t >= q || b >= r {
                return Err(Error::Invalid(format!("edge {i} = ({t}, {b}) leaves the {q}+{r} vertices")));
            }
            if edges[..i].contains(&(t, b)) {
                return Err(Error::Invalid(format!("edge ({t}, {b}) repeated: (t, b) must be injective")));
            }
        }
        Ok(EmbeddingGraph { q, r, edges })
    }

    /// One top vertex joined to `r` bottom vertices.
    pub fn star(r: usize) -> Result<Self> {
        Self::new(1, r, (0..r).map(|b| (0, b)).collect())
    }

    /// Two top and two bottom vertices with edges `(1,3), (1,4), (2,4)`.
    pub fn grid() -> Self {
        EmbeddingGraph { q: 2, r: 2, edges: vec![(0, 0), (0, 1), (1, 1)] }
    }

    pub fn k(&self) -> usize {
        self.edges.len()
    }

    pub fn legs(&self) -> usize {
        self.q + self.r
    }

    pub fn dims(&self, dt: usize, db: usize) -> Vec<usize> {
        let mut d = vec![dt; self.q];
        d.extend(std::iter::repeat_n(db, self.r));
        d
    }

    /// The two legs (0-based, increasing) edge `i` acts on.
    pub fn edge_legs(&self, i: usize) -> [usize; 2] {
        let (t, b) = self.edges[i];
        [t, self.q + b]
    }

    /// Dense `Y_i`. Only for small dimensions.
    pub fn embed(&self, xs: &[MultipartiteMatrix]) -> Result<Vec<MultipartiteMatrix>> {
        if xs.len() != self.k() {
            return Err(Error::Invalid(format!("{} matrices for {} edges", xs.len(), self.k())));
        }
        let d0 = xs[0].dims();
        if d0.len() != 2 || xs.iter().any(|x| x.dims() != d0) {
            return Err(Error::Dimension("embedding needs bipartite matrices of equal dims".into()));
        }
        let dims = self.dims(d0[0], d0[1]);
        xs.iter().enumerate().map(|(i, x)| embed_on_legs(x.data(), &self.edge_legs(i), &dims)).collect()
    }

    /// The bipartite tuple `(β_t, β_b)` with `tr_α̲(Y_w) = tr_{β_t, β_b}(X_w)`.
    pub fn reduce_tuple(&self, alpha: &PermTuple, word: &[usize]) -> Result<PermTuple> {
        if alpha.r() != self.legs() {
            return Err(Error::Dimension(format!("tuple has {} legs, graph has {}", alpha.r(), self.legs())));
        }
        if word.len() != alpha.p() {
            return Err(Error::Dimension("word length differs from p".into()));
        }
        if let Some(&w) = word.iter().find(|&&w| w >= self.k()) {
            return Err(Error::Invalid(format!("word symbol {w} is not an edge")));
        }
        let p = alpha.p();
        let mut top = vec![0usize; p];
        let mut bottom = vec![0usize; p];
        for s in 0..self.legs() {
            let pos: Vec<usize> = (0..p).filter(|&k| self.edge_legs(word[k]).contains(&s)).collect();
            if pos.is_empty() {
                continue;
            }
            let fr = alpha.get(s).first_return(&pos);
            let target = if s < self.q { &mut top } else { &mut bottom };
            for (a, &k) in pos.iter().enumerate() {
                target[k] = pos[fr.apply(a)];
            }
        }
        PermTuple::new(vec![Permutation::from_images(top)?, Permutation::from_images(bottom)?])
    }

    /// Rewrite a statistic of the embedded family as one of the edge matrices.
    pub fn pull_back(&self, stat: &LinearStatistic) -> Result<LinearStatistic> {
        let mut terms: BTreeMap<PermTuple, f64> = BTreeMap::new();
        for (t, c) in &stat.terms {
            *terms.entry(self.reduce_tuple(t, &stat.word)?).or_insert(0.0) += c;
        }
        Ok(LinearStatistic { terms: terms.into_iter().filter(|(_, c)| *c != 0.0).collect(), word: stat.word.clone() })
    }

    /// Whether the edges used by `word` share no leg, in which case the
    /// embedded matrices commute and are classically independent.
    pub fn legs_disjoint(&self, word: &[usize]) -> bool {
        let mut used: Vec<usize> = Vec::new();
        let mut edges: Vec<usize> = word.to_vec();
        edges.sort_unstable();
        edges.dedup();
        for e in edges {
            for l in self.edge_legs(e) {
                if used.contains(&l) {
                    return false;
                }
                used.push(l);
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_repeated_edge() {
        assert!(EmbeddingGraph::new(1, 2, vec![(0, 0), (0, 0)]).is_err());
        assert!(EmbeddingGraph::new(1, 2, vec![(0, 2)]).is_err());
    }

    #[test]
    fn star_reduction_of_plain_trace() {
        let g = EmbeddingGraph::star(3).unwrap();
        let gamma = Permutation::full_cycle(2);
        let t = g.reduce_tuple(&PermTuple::constant(&gamma, 4), &[0, 1]).unwrap();
        // shared top leg keeps the cycle, the two bottoms close separately
        assert_eq!(t, PermTuple::new(vec![gamma, Permutation::identity(2)]).unwrap());
    }
}
