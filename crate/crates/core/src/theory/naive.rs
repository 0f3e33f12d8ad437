//! Direct nested-loop evaluation of every type-space quantity for small Δ,
//! sharing no code with the indexed implementation beyond `exp` and
//! factorials. Used as a cross-check.

use crate::{Error, Result, Q};

fn fact(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// All quantities over the full cube `[0, Δ]^3` of degree triples; entries
/// with `d1+d2+d3 > Δ` stay zero.
#[derive(Debug, Clone)]
pub struct NaiveSystem {
    pub delta: usize,
    side: usize,
    w: Vec<f64>,
    u: Vec<f64>,
    p: Vec<f64>,
    m: Vec<f64>,
    pub e: [[f64; Q]; Q],
    pub kappa: [[[f64; Q]; Q]; Q],
    dw: Vec<f64>,
    du: Vec<f64>,
}

impl NaiveSystem {
    fn cube(&self) -> usize {
        self.side * self.side * self.side
    }

    fn t(&self, s: usize, d: [usize; 3]) -> usize {
        ((s * self.side + d[0]) * self.side + d[1]) * self.side + d[2]
    }

    fn ct(&self, c: usize, s: usize, d: [usize; 3]) -> usize {
        c * Q * self.cube() + self.t(s, d)
    }

    pub fn w(&self, s: usize, d: [usize; 3]) -> f64 {
        self.w[self.t(s, d)]
    }

    pub fn u(&self, c: usize, s: usize, d: [usize; 3]) -> f64 {
        self.u[self.ct(c, s, d)]
    }

    pub fn p(&self, c: usize, s: usize, d: [usize; 3]) -> f64 {
        self.p[self.ct(c, s, d)]
    }

    /// `M[(c', s', d'), (c, s, d)]`.
    pub fn m(&self, child: (usize, usize, [usize; 3]), parent: (usize, usize, [usize; 3])) -> f64 {
        let n = Q * Q * self.cube();
        self.m[self.ct(child.0, child.1, child.2) * n + self.ct(parent.0, parent.1, parent.2)]
    }

    pub fn dw(&self, s: usize, d: [usize; 3]) -> f64 {
        self.dw[self.t(s, d)]
    }

    pub fn du(&self, c: usize, s: usize, d: [usize; 3]) -> f64 {
        self.du[self.ct(c, s, d)]
    }
}

pub fn naive_system(u_deg: &[f64], w_deg: &[f64], beta: f64, alpha: f64) -> Result<NaiveSystem> {
    let delta = u_deg.len() - 1;
    let side = delta + 1;
    let cube = side * side * side;
    let n = Q * Q * cube;
    let mut sys = NaiveSystem {
        delta,
        side,
        w: vec![0.0; Q * cube],
        u: vec![0.0; n],
        p: vec![0.0; n],
        m: vec![0.0; n * n],
        e: [[0.0; Q]; Q],
        kappa: [[[0.0; Q]; Q]; Q],
        dw: vec![0.0; Q * cube],
        du: vec![0.0; n],
    };
    let z = 2.0 + (-beta).exp();
    let x = |s: usize, s2: usize| if s == s2 { (-beta).exp() / z } else { 1.0 / z };
    let triples: Vec<[usize; 3]> = (0..side)
        .flat_map(|a| (0..side).flat_map(move |b| (0..side).map(move |c| [a, b, c])))
        .filter(|d| d[0] + d[1] + d[2] <= delta)
        .collect();
    let deg = |d: &[usize; 3]| d[0] + d[1] + d[2];
    let powa = |l: usize| if l == 0 { 0.0 } else { (l as f64).powf(alpha) };

    for s in 0..Q {
        for d in &triples {
            let l = deg(d);
            let mut shape = fact(l) / (fact(d[0]) * fact(d[1]) * fact(d[2]));
            for s2 in 0..Q {
                shape *= x(s, s2).powi(d[s2] as i32);
            }
            let t = sys.t(s, *d);
            sys.w[t] = w_deg[l] / 3.0 * shape;
            for c in 0..Q {
                let ct = sys.ct(c, s, *d);
                sys.u[ct] = u_deg[l] / 9.0 * shape;
            }
        }
    }

    let mut ua = 0.0;
    for c in 0..Q {
        for s in 0..Q {
            for d in &triples {
                ua += powa(deg(d)) * sys.u(c, s, *d);
            }
        }
    }
    if !(ua > 0.0) {
        return Err(Error::degenerate("no weighted 2-list mass"));
    }
    for c in 0..Q {
        for s in 0..Q {
            for d in &triples {
                let mut others = 0.0;
                for chi in 0..Q {
                    if chi != c {
                        others += sys.u(chi, s, *d);
                    }
                }
                let ct = sys.ct(c, s, *d);
                sys.p[ct] = powa(deg(d)) * others / (2.0 * ua);
            }
        }
    }

    for s in 0..Q {
        for s2 in 0..Q {
            let mut acc = 0.0;
            for d in &triples {
                let mut mass = sys.w(s2, *d);
                for c in 0..Q {
                    mass += sys.u(c, s2, *d);
                }
                acc += d[s] as f64 * mass;
            }
            sys.e[s][s2] = acc;
        }
    }

    for c in 0..Q {
        for s in 0..Q {
            for d in &triples {
                for c2 in 0..Q {
                    if c2 == c {
                        continue;
                    }
                    let c3 = (0..Q).find(|&k| k != c && k != c2).unwrap();
                    for s2 in 0..Q {
                        for d2 in &triples {
                            let mut up = *d2;
                            up[s] += 1;
                            if deg(&up) > delta {
                                continue;
                            }
                            let val = d[s2] as f64 * (d2[s] + 1) as f64 * sys.u(c3, s2, up) / sys.e[s][s2];
                            let (row, col) = (sys.ct(c2, s2, *d2), sys.ct(c, s, *d));
                            sys.m[row * n + col] = val;
                        }
                    }
                }
            }
        }
    }

    // progeny Σ_ℓ M^ℓ p until the terms vanish
    let mut term = sys.p.clone();
    let mut total = term.clone();
    for _ in 0..100_000 {
        let mut next = vec![0.0; n];
        for row in 0..n {
            let mut acc = 0.0;
            for col in 0..n {
                acc += sys.m[row * n + col] * term[col];
            }
            next[row] = acc;
        }
        let size: f64 = next.iter().sum();
        for i in 0..n {
            total[i] += next[i];
        }
        term = next;
        if size < 1e-18 {
            break;
        }
    }
    for c in 0..Q {
        for s in 0..Q {
            for d in &triples {
                for s2 in 0..Q {
                    sys.kappa[c][s][s2] += d[s2] as f64 * total[sys.ct(c, s, *d)];
                }
            }
        }
    }

    for s in 0..Q {
        for d in &triples {
            let mut out = 0.0;
            for s2 in 0..Q {
                let mut k = 0.0;
                for c in 0..Q {
                    k += sys.kappa[c][s2][s];
                }
                out += d[s2] as f64 * k / sys.e[s][s2];
            }
            let t = sys.t(s, *d);
            sys.dw[t] = -out * sys.w[t];
            for c in 0..Q {
                let mut rate = -powa(deg(d)) / ua - out;
                let mut gain = 0.0;
                for s2 in 0..Q {
                    let mut up = *d;
                    up[s2] += 1;
                    if deg(&up) <= delta {
                        gain += sys.kappa[c][s2][s] * (d[s2] + 1) as f64 * (sys.w(s, up) + sys.u(c, s, up))
                            / sys.e[s][s2];
                    }
                }
                let ct = sys.ct(c, s, *d);
                rate *= sys.u[ct];
                sys.du[ct] = rate + gain;
            }
        }
    }
    Ok(sys)
}
