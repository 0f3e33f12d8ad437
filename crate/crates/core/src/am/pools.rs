use rand::Rng;

/// Which pool a live vertex sits in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Pool {
    Forced,
    Two(usize),
    Three,
}

/// Live vertices grouped by list size, with 2-list vertices further bucketed
/// by live degree. Every operation is O(1) except weighted selection, which
/// is linear in the number of degree buckets.
#[derive(Debug, Clone)]
pub(crate) struct Pools {
    forced: Vec<u32>,
    three: Vec<u32>,
    two: Vec<Vec<u32>>,
    two_len: usize,
    slot: Vec<u32>,
    pow: Vec<f64>,
}

impl Pools {
    pub fn new(n: usize, max_degree: usize, alpha: f64) -> Self {
        Pools {
            forced: Vec::new(),
            three: Vec::new(),
            two: vec![Vec::new(); max_degree + 1],
            two_len: 0,
            slot: vec![u32::MAX; n],
            pow: (0..=max_degree).map(|i| if i == 0 { 0.0 } else { (i as f64).powf(alpha) }).collect(),
        }
    }

    fn bag(&mut self, pool: Pool) -> &mut Vec<u32> {
        match pool {
            Pool::Forced => &mut self.forced,
            Pool::Three => &mut self.three,
            Pool::Two(i) => &mut self.two[i],
        }
    }

    pub fn insert(&mut self, v: usize, pool: Pool) {
        if let Pool::Two(_) = pool {
            self.two_len += 1;
        }
        let bag = self.bag(pool);
        let pos = bag.len() as u32;
        bag.push(v as u32);
        self.slot[v] = pos;
    }

    pub fn remove(&mut self, v: usize, pool: Pool) {
        if let Pool::Two(_) = pool {
            self.two_len -= 1;
        }
        let pos = self.slot[v] as usize;
        let bag = self.bag(pool);
        debug_assert_eq!(bag[pos] as usize, v);
        bag.swap_remove(pos);
        if let Some(&moved) = bag.get(pos) {
            self.slot[moved as usize] = pos as u32;
        }
        self.slot[v] = u32::MAX;
    }

    pub fn forced_len(&self) -> usize {
        self.forced.len()
    }

    pub fn two_len(&self) -> usize {
        self.two_len
    }

    pub fn three_len(&self) -> usize {
        self.three.len()
    }

    #[cfg(test)]
    pub fn bucket_len(&self, degree: usize) -> usize {
        self.two[degree].len()
    }

    pub fn pick_forced<R: Rng>(&self, rng: &mut R) -> usize {
        self.forced[rng.random_range(0..self.forced.len())] as usize
    }

    pub fn pick_three<R: Rng>(&self, rng: &mut R) -> usize {
        self.three[rng.random_range(0..self.three.len())] as usize
    }

    /// A 2-list vertex drawn with probability proportional to
    /// `degree^alpha`; uniform over all 2-list vertices when every such
    /// weight is zero.
    pub fn pick_two<R: Rng>(&self, rng: &mut R) -> usize {
        debug_assert!(self.two_len > 0);
        let total: f64 = self.two.iter().zip(&self.pow).map(|(b, p)| p * b.len() as f64).sum();
        if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            let mut last = None;
            for (b, p) in self.two.iter().zip(&self.pow) {
                if b.is_empty() || *p == 0.0 {
                    continue;
                }
                let w = p * b.len() as f64;
                last = Some(b);
                if r < w {
                    return b[rng.random_range(0..b.len())] as usize;
                }
                r -= w;
            }
            let b = last.unwrap();
            return b[rng.random_range(0..b.len())] as usize;
        }
        let mut k = rng.random_range(0..self.two_len);
        for b in &self.two {
            if k < b.len() {
                return b[k] as usize;
            }
            k -= b.len();
        }
        unreachable!()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{seeded, Purpose};

    #[test]
    fn insert_remove_keeps_slots_consistent() {
        let mut p = Pools::new(10, 4, 1.0);
        for v in 0..10 {
            p.insert(v, Pool::Two(v % 5));
        }
        p.remove(3, Pool::Two(3));
        p.remove(8, Pool::Two(3));
        p.remove(0, Pool::Two(0));
        assert_eq!(p.two_len(), 7);
        assert_eq!(p.bucket_len(3), 0);
        p.insert(3, Pool::Forced);
        let mut rng = seeded(Purpose::Uniform, 1);
        assert_eq!(p.pick_forced(&mut rng), 3);
    }

    #[test]
    fn single_candidate_is_certain() {
        let mut p = Pools::new(3, 5, 14.0);
        p.insert(2, Pool::Two(4));
        let mut rng = seeded(Purpose::Uniform, 3);
        for _ in 0..50 {
            assert_eq!(p.pick_two(&mut rng), 2);
        }
    }

    #[test]
    fn zero_weights_fall_back_to_uniform() {
        let mut p = Pools::new(4, 3, 2.0);
        p.insert(0, Pool::Two(0));
        p.insert(1, Pool::Two(0));
        let mut rng = seeded(Purpose::Uniform, 5);
        let hits = (0..4000).filter(|_| p.pick_two(&mut rng) == 0).count();
        assert!((hits as f64 - 2000.0).abs() < 4.0 * 1000f64.sqrt());
    }

    fn frequency_of_heavier(alpha: f64, draws: usize) -> f64 {
        let mut p = Pools::new(2, 2, alpha);
        p.insert(0, Pool::Two(1));
        p.insert(1, Pool::Two(2));
        let mut rng = seeded(Purpose::Uniform, 11);
        (0..draws).filter(|_| p.pick_two(&mut rng) == 1).count() as f64 / draws as f64
    }

    #[test]
    fn degree_power_probabilities() {
        let n = 100_000;
        for alpha in [1.0, 14.0] {
            let p = 2f64.powf(alpha) / (1.0 + 2f64.powf(alpha));
            let f = frequency_of_heavier(alpha, n);
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!((f - p).abs() <= 3.0 * sigma + 1e-12, "alpha={alpha} f={f} p={p}");
        }
    }
}
