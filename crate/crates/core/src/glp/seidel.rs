//! Seidel's randomized incremental linear programming in small dimension,
//! with move-to-front and mandatory box bounds.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Half-space `a · x <= b`.
#[derive(Clone, Debug)]
pub struct Row {
    pub a: Vec<f64>,
    pub b: f64,
}

impl Row {
    pub fn new(a: Vec<f64>, b: f64) -> Self {
        Self { a, b }
    }

    fn violation(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        let mut scale = 1.0 + self.b.abs();
        for (ai, xi) in self.a.iter().zip(x) {
            s += ai * xi;
            scale += (ai * xi).abs();
        }
        (s - self.b) / scale
    }
}

const TOL: f64 = 1e-12;

/// Maximizes `c · x` over the rows intersected with `lo <= x <= hi`.
/// Returns `None` when the region is empty.
pub fn maximize(c: &[f64], rows: &[Row], lo: &[f64], hi: &[f64], seed: u64) -> Option<Vec<f64>> {
    let mut order: Vec<Row> = rows.to_vec();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    solve(c, order, lo, hi)
}

fn solve(c: &[f64], mut rows: Vec<Row>, lo: &[f64], hi: &[f64]) -> Option<Vec<f64>> {
    let d = c.len();
    if d == 0 {
        return rows.iter().all(|r| r.b >= -TOL * (1.0 + r.b.abs())).then(Vec::new);
    }
    let mut x: Vec<f64> = (0..d).map(|k| if c[k] > 0.0 { hi[k] } else { lo[k] }).collect();
    for i in 0..rows.len() {
        if rows[i].violation(&x) <= TOL {
            continue;
        }
        let h = &rows[i];
        let j = (0..d)
            .max_by(|&p, &q| h.a[p].abs().total_cmp(&h.a[q].abs()))
            .unwrap();
        let aj = h.a[j];
        if aj.abs() < 1e-300 {
            return None;
        }
        // x_j = g0 + sum_k g[k] x_k over k != j
        let g0 = h.b / aj;
        let g: Vec<f64> = (0..d).filter(|&k| k != j).map(|k| -h.a[k] / aj).collect();
        let reduce = |r: &Row| {
            let a: Vec<f64> = (0..d)
                .filter(|&k| k != j)
                .zip(&g)
                .map(|(k, gk)| r.a[k] + r.a[j] * gk)
                .collect();
            Row::new(a, r.b - r.a[j] * g0)
        };
        let mut sub: Vec<Row> = Vec::with_capacity(i + 2);
        sub.push(Row::new(g.clone(), hi[j] - g0));
        sub.push(Row::new(g.iter().map(|v| -v).collect(), g0 - lo[j]));
        sub.extend(rows[..i].iter().map(reduce));
        let c2: Vec<f64> = (0..d).filter(|&k| k != j).zip(&g).map(|(k, gk)| c[k] + c[j] * gk).collect();
        let lo2: Vec<f64> = (0..d).filter(|&k| k != j).map(|k| lo[k]).collect();
        let hi2: Vec<f64> = (0..d).filter(|&k| k != j).map(|k| hi[k]).collect();
        let y = solve(&c2, sub, &lo2, &hi2)?;
        let xj = g0 + y.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>();
        let mut it = y.into_iter();
        x = (0..d).map(|k| if k == j { xj } else { it.next().unwrap() }).collect();
        rows[..=i].rotate_right(1);
    }
    Some(x)
}
