use crate::error::{Error, Result};

/// Row-major dense LU with partial pivoting, for small cell-local systems.
#[derive(Debug, Clone)]
pub struct DenseLu {
    n: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
}

impl DenseLu {
    pub fn factor(mut a: Vec<f64>, n: usize) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = 1e-14 * scale;
        let mut piv = vec![0; n];
        for k in 0..n {
            let (p, big) = (k..n)
                .map(|r| (r, a[r * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(big > tol) {
                return Err(Error::Singular { pivot: k });
            }
            piv[k] = p;
            if p != k {
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
            }
            let d = a[k * n + k];
            for r in k + 1..n {
                let m = a[r * n + k] / d;
                a[r * n + k] = m;
                if m != 0.0 {
                    for c in k + 1..n {
                        a[r * n + c] -= m * a[k * n + c];
                    }
                }
            }
        }
        Ok(DenseLu { n, lu: a, piv })
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for k in 0..n {
            b.swap(k, self.piv[k]);
        }
        for k in 0..n {
            for r in k + 1..n {
                b[r] -= self.lu[r * n + k] * b[k];
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for c in k + 1..n {
                s -= self.lu[k * n + c] * b[c];
            }
            b[k] = s / self.lu[k * n + k];
        }
    }
}
