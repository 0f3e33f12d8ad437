//! Vertex types `θ = (s, d1, d2, d3)` with `d1 + d2 + d3 <= Δ`, densely indexed.

use crate::Q;

/// Dense enumeration of the type space `T_Δ`.
///
/// A type index is `s * per_colour() + k` where `k` enumerates the degree
/// triples. Pairs `(c, θ)` of an assigned colour and a type are indexed as
/// `c * len() + θ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeIndex {
    delta: usize,
    triples: Vec<[usize; 3]>,
    lookup: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl TypeIndex {
    pub fn new(delta: usize) -> Self {
        let side = delta + 1;
        let mut lookup = vec![ABSENT; side * side * side];
        let mut triples = Vec::new();
        for total in 0..=delta {
            for a in (0..=total).rev() {
                for b in (0..=total - a).rev() {
                    let c = total - a - b;
                    lookup[(a * side + b) * side + c] = triples.len() as u32;
                    triples.push([a, b, c]);
                }
            }
        }
        TypeIndex { delta, triples, lookup }
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    /// Number of degree triples, `C(Δ+3, 3)`.
    pub fn per_colour(&self) -> usize {
        self.triples.len()
    }

    /// `|T_Δ| = 3·C(Δ+3, 3)`.
    pub fn len(&self) -> usize {
        Q * self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Dimension of the `(c, θ)` space.
    pub fn pair_len(&self) -> usize {
        Q * self.len()
    }

    pub fn triple_index(&self, d: [usize; 3]) -> Option<usize> {
        if d.iter().sum::<usize>() > self.delta {
            return None;
        }
        let side = self.delta + 1;
        let i = self.lookup[(d[0] * side + d[1]) * side + d[2]];
        (i != ABSENT).then_some(i as usize)
    }

    pub fn index(&self, s: usize, d: [usize; 3]) -> Option<usize> {
        self.triple_index(d).map(|k| s * self.per_colour() + k)
    }

    pub fn pair(&self, c: usize, theta: usize) -> usize {
        c * self.len() + theta
    }

    /// `(s, [d1, d2, d3])` of a type index.
    pub fn decode(&self, theta: usize) -> (usize, [usize; 3]) {
        let k = self.per_colour();
        (theta / k, self.triples[theta % k])
    }

    pub fn total_degree(&self, theta: usize) -> usize {
        self.triples[theta % self.per_colour()].iter().sum()
    }

    /// `θ^{+χ}`: one more neighbour of planted colour `chi`; `None` when the
    /// total degree would exceed Δ.
    pub fn plus(&self, theta: usize, chi: usize) -> Option<usize> {
        let (s, mut d) = self.decode(theta);
        d[chi] += 1;
        self.index(s, d)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, [usize; 3])> + '_ {
        (0..self.len()).map(move |t| {
            let (s, d) = self.decode(t);
            (t, s, d)
        })
    }
}

/// The colour in `{0,1,2}` different from both `a` and `b` (`a != b`).
pub fn third_colour(a: usize, b: usize) -> usize {
    debug_assert_ne!(a, b);
    3 - a - b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poisson::binomial_coefficient;

    #[test]
    fn size_matches_closed_form() {
        for delta in 0..9 {
            let idx = TypeIndex::new(delta);
            assert_eq!(idx.len() as f64, 3.0 * binomial_coefficient(delta + 3, 3));
        }
        assert_eq!(TypeIndex::new(2).len(), 30);
    }

    #[test]
    fn decode_inverts_index() {
        let idx = TypeIndex::new(5);
        for (t, s, d) in idx.iter() {
            assert_eq!(idx.index(s, d), Some(t));
        }
    }

    #[test]
    fn plus_increments_one_coordinate() {
        let idx = TypeIndex::new(3);
        for (t, s, d) in idx.iter() {
            for chi in 0..3 {
                let total: usize = d.iter().sum();
                match idx.plus(t, chi) {
                    Some(t2) => {
                        assert!(total < 3);
                        let (s2, d2) = idx.decode(t2);
                        assert_eq!(s2, s);
                        for r in 0..3 {
                            assert_eq!(d2[r], d[r] + usize::from(r == chi));
                        }
                    }
                    None => assert_eq!(total, 3),
                }
            }
        }
    }
}
