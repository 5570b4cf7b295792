//! Symmetric tridiagonal eigensolver: Sturm-sequence bisection for the lowest
//! eigenvalues, inverse iteration for eigenvectors.

/// Symmetric tridiagonal matrix: diagonal `d`, off-diagonal `e` (len n−1).
pub(crate) struct SymTridiag {
    pub d: Vec<f64>,
    pub e: Vec<f64>,
}

impl SymTridiag {
    pub fn n(&self) -> usize {
        self.d.len()
    }

    fn norm_bound(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.n() {
            let left = if i > 0 { self.e[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < self.n() {
                self.e[i].abs()
            } else {
                0.0
            };
            m = m.max(self.d[i].abs() + left + right);
        }
        m
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.n();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.e[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.e[i].abs() } else { 0.0 };
            lo = lo.min(self.d[i] - left - right);
            hi = hi.max(self.d[i] + left + right);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: f64) -> usize {
        let n = self.n();
        let pivmin =
            f64::MIN_POSITIVE * self.e.iter().fold(1.0f64, |m, &ei| m.max(ei * ei)) / f64::EPSILON;
        let mut count = 0;
        let mut q = self.d[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..n {
            if q.abs() < pivmin {
                q = -pivmin;
            }
            q = self.d[i] - x - self.e[i - 1] * self.e[i - 1] / q;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The k-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        // Widen slightly so the counts bracket strictly.
        let pad = 1e-12 * (hi - lo).abs().max(1.0);
        lo -= pad;
        hi += pad;
        for _ in 0..120 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) <= k {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// The `m` lowest eigenvalues, ascending.
    pub fn lowest_eigenvalues(&self, m: usize) -> Vec<f64> {
        (0..m).map(|k| self.eigenvalue(k)).collect()
    }

    /// Solve (T − shift·I)x = rhs by banded LU with partial pivoting.
    fn solve_shifted(&self, shift: f64, rhs: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut diag: Vec<f64> = self.d.iter().map(|&di| di - shift).collect();
        let mut sup1: Vec<f64> = self.e.clone();
        sup1.push(0.0);
        let mut sup2 = vec![0.0; n];
        let mut sub: Vec<f64> = self.e.clone();
        let mut b = rhs.to_vec();
        let tiny = f64::MIN_POSITIVE / f64::EPSILON;
        for k in 0..n - 1 {
            if sub[k].abs() > diag[k].abs() {
                // Swap rows k and k+1.
                std::mem::swap(&mut diag[k], &mut sub[k]);
                std::mem::swap(&mut sup1[k], &mut diag[k + 1]);
                if k + 1 < n - 1 {
                    sup2[k] = sup1[k + 1];
                    sup1[k + 1] = 0.0;
                }
                b.swap(k, k + 1);
            }
            if diag[k].abs() < tiny {
                diag[k] = tiny.copysign(if diag[k] == 0.0 { 1.0 } else { diag[k] });
            }
            let m = sub[k] / diag[k];
            diag[k + 1] -= m * sup1[k];
            if k + 1 < n - 1 {
                sup1[k + 1] -= m * sup2[k];
            }
            b[k + 1] -= m * b[k];
        }
        if diag[n - 1].abs() < tiny {
            diag[n - 1] = tiny.copysign(if diag[n - 1] == 0.0 { 1.0 } else { diag[n - 1] });
        }
        let mut x = vec![0.0; n];
        x[n - 1] = b[n - 1] / diag[n - 1];
        if n >= 2 {
            x[n - 2] = (b[n - 2] - sup1[n - 2] * x[n - 1]) / diag[n - 2];
        }
        for k in (0..n.saturating_sub(2)).rev() {
            x[k] = (b[k] - sup1[k] * x[k + 1] - sup2[k] * x[k + 2]) / diag[k];
        }
        x
    }

    fn residual_norm(&self, lambda: f64, v: &[f64]) -> f64 {
        let n = self.n();
        let mut acc = 0.0;
        for i in 0..n {
            let mut r = (self.d[i] - lambda) * v[i];
            if i > 0 {
                r += self.e[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                r += self.e[i] * v[i + 1];
            }
            acc += r * r;
        }
        acc.sqrt()
    }

    /// Eigenvector for an eigenvalue from [`Self::eigenvalue`], by inverse
    /// iteration. `previous` holds already-computed eigenpairs for
    /// re-orthogonalization against near-degenerate neighbours.
    pub fn eigenvector(&self, lambda: f64, previous: &[(f64, Vec<f64>)]) -> Option<Vec<f64>> {
        let n = self.n();
        let scale = self.norm_bound().max(1.0);
        // Deterministic pseudo-random start (xorshift), reproducible runs.
        let mut state = 0x9e37_79b9_7f4a_7c15u64 ^ (lambda.to_bits().rotate_left(17));
        let mut v: Vec<f64> = (0..n)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect();
        normalize(&mut v);
        let close: Vec<&Vec<f64>> = previous
            .iter()
            .filter(|(mu, _)| (mu - lambda).abs() < 1e-8 * scale)
            .map(|(_, vec)| vec)
            .collect();
        for attempt in 0..4 {
            let shift = lambda + attempt as f64 * 1e-13 * scale;
            for _ in 0..5 {
                let mut w = self.solve_shifted(shift, &v);
                if w.iter().any(|x| !x.is_finite()) {
                    break;
                }
                for other in &close {
                    let dot: f64 = w.iter().zip(other.iter()).map(|(a, b)| a * b).sum();
                    for (wi, oi) in w.iter_mut().zip(other.iter()) {
                        *wi -= dot * oi;
                    }
                }
                normalize(&mut w);
                v = w;
                if self.residual_norm(lambda, &v) <= 64.0 * f64::EPSILON * scale * (n as f64).sqrt()
                {
                    return Some(v);
                }
            }
            if self.residual_norm(lambda, &v) <= 1e-10 * scale {
                return Some(v);
            }
        }
        None
    }
}

fn normalize(v: &mut [f64]) {
    let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}
