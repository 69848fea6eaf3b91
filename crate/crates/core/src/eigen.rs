//! Dense real nonsymmetric eigensolver: Householder reduction to Hessenberg
//! form, Francis double-shift QR to real Schur form, then back-substitution
//! for the eigenvectors.
//!
//! Follows the classical EISPACK `orthes`/`hqr2` pair. The back-substitution
//! clamps zero pivots to `eps·‖H‖` and rescales partial solutions whenever
//! they grow past `1/√eps`, so (nearly) defective matrices still produce
//! finite vectors instead of overflowing.

use std::ops::{Index, IndexMut};

use faer::{c64, Mat};

const EPS: f64 = f64::EPSILON;

/// Square row-major scratch matrix indexed with signed coordinates, which
/// keeps the descending loops of the algorithm readable.
struct Sq {
    n: usize,
    a: Vec<f64>,
}

impl Sq {
    fn zeros(n: usize) -> Self {
        Sq {
            n,
            a: vec![0.0; n * n],
        }
    }
}

impl Index<(isize, isize)> for Sq {
    type Output = f64;
    fn index(&self, (i, j): (isize, isize)) -> &f64 {
        &self.a[i as usize * self.n + j as usize]
    }
}

impl IndexMut<(isize, isize)> for Sq {
    fn index_mut(&mut self, (i, j): (isize, isize)) -> &mut f64 {
        &mut self.a[i as usize * self.n + j as usize]
    }
}

fn cdiv(xr: f64, xi: f64, yr: f64, yi: f64) -> (f64, f64) {
    if yr.abs() > yi.abs() {
        let r = yi / yr;
        let d = yr + r * yi;
        ((xr + r * xi) / d, (xi - r * xr) / d)
    } else {
        let r = yr / yi;
        let d = yi + r * yr;
        ((r * xr + xi) / d, (r * xi - xr) / d)
    }
}

fn orthes(h: &mut Sq, v: &mut Sq) {
    let n = h.n as isize;
    let (low, high) = (0isize, n - 1);
    let mut ort = vec![0.0; h.n];

    for m in (low + 1)..high {
        let scale: f64 = (m..=high).map(|i| h[(i, m - 1)].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut hh = 0.0;
        for i in (m..=high).rev() {
            ort[i as usize] = h[(i, m - 1)] / scale;
            hh += ort[i as usize] * ort[i as usize];
        }
        let mut g = hh.sqrt();
        if ort[m as usize] > 0.0 {
            g = -g;
        }
        hh -= ort[m as usize] * g;
        ort[m as usize] -= g;

        for j in m..n {
            let mut f = 0.0;
            for i in (m..=high).rev() {
                f += ort[i as usize] * h[(i, j)];
            }
            f /= hh;
            for i in m..=high {
                h[(i, j)] -= f * ort[i as usize];
            }
        }
        for i in 0..=high {
            let mut f = 0.0;
            for j in (m..=high).rev() {
                f += ort[j as usize] * h[(i, j)];
            }
            f /= hh;
            for j in m..=high {
                h[(i, j)] -= f * ort[j as usize];
            }
        }
        ort[m as usize] *= scale;
        h[(m, m - 1)] = scale * g;
    }

    for i in 0..n {
        for j in 0..n {
            v[(i, j)] = if i == j { 1.0 } else { 0.0 };
        }
    }
    for m in ((low + 1)..high).rev() {
        if h[(m, m - 1)] == 0.0 {
            continue;
        }
        for i in (m + 1)..=high {
            ort[i as usize] = h[(i, m - 1)];
        }
        for j in m..=high {
            let mut g = 0.0;
            for i in m..=high {
                g += ort[i as usize] * v[(i, j)];
            }
            // Double division avoids possible underflow.
            g = (g / ort[m as usize]) / h[(m, m - 1)];
            for i in m..=high {
                v[(i, j)] += g * ort[i as usize];
            }
        }
    }
}

/// Returns `false` if the QR iteration fails to converge.
fn hqr2(h: &mut Sq, v: &mut Sq, d: &mut [f64], e: &mut [f64]) -> bool {
    let nn = h.n as isize;
    let mut n = nn - 1;
    let (low, high) = (0isize, nn - 1);
    let mut exshift = 0.0;
    let (mut p, mut q, mut r, mut s, mut z) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut t, mut w, mut x, mut y);

    let mut norm = 0.0;
    for i in 0..nn {
        for j in (i - 1).max(0)..nn {
            norm += h[(i, j)].abs();
        }
    }

    let max_iter = 100 * nn.max(1);
    let mut iter = 0;
    let mut total = 0;
    while n >= low {
        // Look for a single small sub-diagonal element.
        let mut l = n;
        while l > low {
            s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[(l, l - 1)].abs() < EPS * s {
                break;
            }
            l -= 1;
        }

        if l == n {
            // One root found.
            h[(n, n)] += exshift;
            d[n as usize] = h[(n, n)];
            e[n as usize] = 0.0;
            n -= 1;
            iter = 0;
        } else if l == n - 1 {
            // Two roots found.
            w = h[(n, n - 1)] * h[(n - 1, n)];
            p = (h[(n - 1, n - 1)] - h[(n, n)]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            h[(n, n)] += exshift;
            h[(n - 1, n - 1)] += exshift;
            x = h[(n, n)];

            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                d[(n - 1) as usize] = x + z;
                d[n as usize] = d[(n - 1) as usize];
                if z != 0.0 {
                    d[n as usize] = x - w / z;
                }
                e[(n - 1) as usize] = 0.0;
                e[n as usize] = 0.0;
                x = h[(n, n - 1)];
                s = x.abs() + z.abs();
                p = x / s;
                q = z / s;
                r = (p * p + q * q).sqrt();
                p /= r;
                q /= r;

                for j in (n - 1)..nn {
                    z = h[(n - 1, j)];
                    h[(n - 1, j)] = q * z + p * h[(n, j)];
                    h[(n, j)] = q * h[(n, j)] - p * z;
                }
                for i in 0..=n {
                    z = h[(i, n - 1)];
                    h[(i, n - 1)] = q * z + p * h[(i, n)];
                    h[(i, n)] = q * h[(i, n)] - p * z;
                }
                for i in low..=high {
                    z = v[(i, n - 1)];
                    v[(i, n - 1)] = q * z + p * v[(i, n)];
                    v[(i, n)] = q * v[(i, n)] - p * z;
                }
            } else {
                d[(n - 1) as usize] = x + p;
                d[n as usize] = x + p;
                e[(n - 1) as usize] = z;
                e[n as usize] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            total += 1;
            if total > max_iter {
                return false;
            }

            x = h[(n, n)];
            y = 0.0;
            w = 0.0;
            if l < n {
                y = h[(n - 1, n - 1)];
                w = h[(n, n - 1)] * h[(n - 1, n)];
            }

            // Wilkinson's exceptional shift.
            if iter == 10 {
                exshift += x;
                for i in low..=n {
                    h[(i, i)] -= x;
                }
                s = h[(n, n - 1)].abs() + h[(n - 1, n - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }

            // Second exceptional shift.
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in low..=n {
                        h[(i, i)] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }
            iter += 1;

            // Look for two consecutive small sub-diagonal elements.
            let mut m = n - 2;
            while m >= l {
                z = h[(m, m)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - z - r - s;
                r = h[(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h[(m, m - 1)].abs() * (q.abs() + r.abs())
                    < EPS * (p.abs() * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs()))
                {
                    break;
                }
                m -= 1;
            }

            for i in (m + 2)..=n {
                h[(i, i - 2)] = 0.0;
                if i > m + 2 {
                    h[(i, i - 3)] = 0.0;
                }
            }

            // Double QR step on rows l..=n and columns m..=n.
            for k in m..n {
                let notlast = k != n - 1;
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if notlast { h[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s == 0.0 {
                    continue;
                }
                if k != m {
                    h[(k, k - 1)] = -s * x;
                } else if l != m {
                    h[(k, k - 1)] = -h[(k, k - 1)];
                }
                p += s;
                x = p / s;
                y = q / s;
                z = r / s;
                q /= p;
                r /= p;

                for j in k..nn {
                    p = h[(k, j)] + q * h[(k + 1, j)];
                    if notlast {
                        p += r * h[(k + 2, j)];
                        h[(k + 2, j)] -= p * z;
                    }
                    h[(k, j)] -= p * x;
                    h[(k + 1, j)] -= p * y;
                }
                for i in 0..=n.min(k + 3) {
                    p = x * h[(i, k)] + y * h[(i, k + 1)];
                    if notlast {
                        p += z * h[(i, k + 2)];
                        h[(i, k + 2)] -= p * r;
                    }
                    h[(i, k)] -= p;
                    h[(i, k + 1)] -= p * q;
                }
                for i in low..=high {
                    p = x * v[(i, k)] + y * v[(i, k + 1)];
                    if notlast {
                        p += z * v[(i, k + 2)];
                        v[(i, k + 2)] -= p * r;
                    }
                    v[(i, k)] -= p;
                    v[(i, k + 1)] -= p * q;
                }
            }
        }
    }

    if norm == 0.0 {
        return true;
    }

    // Back-substitute for the eigenvectors of the quasi-triangular form.
    for n in (0..nn).rev() {
        p = d[n as usize];
        q = e[n as usize];

        if q == 0.0 {
            let mut l = n;
            h[(n, n)] = 1.0;
            for i in (0..n).rev() {
                w = h[(i, i)] - p;
                r = 0.0;
                for j in l..=n {
                    r += h[(i, j)] * h[(j, n)];
                }
                if e[i as usize] < 0.0 {
                    z = w;
                    s = r;
                    continue;
                }
                l = i;
                if e[i as usize] == 0.0 {
                    h[(i, n)] = if w != 0.0 { -r / w } else { -r / (EPS * norm) };
                } else {
                    x = h[(i, i + 1)];
                    y = h[(i + 1, i)];
                    q = (d[i as usize] - p) * (d[i as usize] - p) + e[i as usize] * e[i as usize];
                    t = (x * s - z * r) / q;
                    h[(i, n)] = t;
                    h[(i + 1, n)] = if x.abs() > z.abs() {
                        (-r - w * t) / x
                    } else {
                        (-s - y * t) / z
                    };
                }
                t = h[(i, n)].abs();
                if (EPS * t) * t > 1.0 {
                    for j in i..=n {
                        h[(j, n)] /= t;
                    }
                }
            }
        } else if q < 0.0 {
            let mut l = n - 1;

            // Last vector component imaginary so the matrix is triangular.
            if h[(n, n - 1)].abs() > h[(n - 1, n)].abs() {
                h[(n - 1, n - 1)] = q / h[(n, n - 1)];
                h[(n - 1, n)] = -(h[(n, n)] - p) / h[(n, n - 1)];
            } else {
                let (cr, ci) = cdiv(0.0, -h[(n - 1, n)], h[(n - 1, n - 1)] - p, q);
                h[(n - 1, n - 1)] = cr;
                h[(n - 1, n)] = ci;
            }
            h[(n, n - 1)] = 0.0;
            h[(n, n)] = 1.0;
            for i in (0..n - 1).rev() {
                let mut ra = 0.0;
                let mut sa = 0.0;
                for j in l..=n {
                    ra += h[(i, j)] * h[(j, n - 1)];
                    sa += h[(i, j)] * h[(j, n)];
                }
                w = h[(i, i)] - p;

                if e[i as usize] < 0.0 {
                    z = w;
                    r = ra;
                    s = sa;
                    continue;
                }
                l = i;
                if e[i as usize] == 0.0 {
                    let (cr, ci) = cdiv(-ra, -sa, w, q);
                    h[(i, n - 1)] = cr;
                    h[(i, n)] = ci;
                } else {
                    x = h[(i, i + 1)];
                    y = h[(i + 1, i)];
                    let di = d[i as usize] - p;
                    let mut vr = di * di + e[i as usize] * e[i as usize] - q * q;
                    let vi = di * 2.0 * q;
                    if vr == 0.0 && vi == 0.0 {
                        vr = EPS * norm * (w.abs() + q.abs() + x.abs() + y.abs() + z.abs());
                    }
                    let (cr, ci) = cdiv(x * r - z * ra + q * sa, x * s - z * sa - q * ra, vr, vi);
                    h[(i, n - 1)] = cr;
                    h[(i, n)] = ci;
                    if x.abs() > z.abs() + q.abs() {
                        h[(i + 1, n - 1)] = (-ra - w * h[(i, n - 1)] + q * h[(i, n)]) / x;
                        h[(i + 1, n)] = (-sa - w * h[(i, n)] - q * h[(i, n - 1)]) / x;
                    } else {
                        let (cr, ci) = cdiv(-r - y * h[(i, n - 1)], -s - y * h[(i, n)], z, q);
                        h[(i + 1, n - 1)] = cr;
                        h[(i + 1, n)] = ci;
                    }
                }
                t = h[(i, n - 1)].abs().max(h[(i, n)].abs());
                if (EPS * t) * t > 1.0 {
                    for j in i..=n {
                        h[(j, n - 1)] /= t;
                        h[(j, n)] /= t;
                    }
                }
            }
        }
    }

    // Back-transform to eigenvectors of the original matrix.
    for j in (low..nn).rev() {
        for i in low..=high {
            z = 0.0;
            for k in low..=j.min(high) {
                z += v[(i, k)] * h[(k, j)];
            }
            v[(i, j)] = z;
        }
    }
    true
}

/// Eigenvalues and (unnormalized) eigenvectors of a real square matrix.
///
/// Complex eigenvalues come in adjacent conjugate pairs with conjugate
/// vectors. Returns `None` if the QR iteration does not converge.
pub(crate) fn real_eigen(a: &Mat<f64>) -> Option<(Vec<c64>, Vec<Vec<c64>>)> {
    let n = a.nrows();
    let mut h = Sq::zeros(n);
    for i in 0..n {
        for j in 0..n {
            h.a[i * n + j] = a[(i, j)];
        }
    }
    let mut v = Sq::zeros(n);
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    if n == 0 {
        return Some((Vec::new(), Vec::new()));
    }
    orthes(&mut h, &mut v);
    if !hqr2(&mut h, &mut v, &mut d, &mut e) {
        return None;
    }

    let col = |j: usize| (0..n).map(|i| v.a[i * n + j]).collect::<Vec<f64>>();
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    let mut j = 0;
    while j < n {
        if e[j] == 0.0 || j + 1 == n {
            values.push(c64::new(d[j], 0.0));
            vectors.push(col(j).into_iter().map(|x| c64::new(x, 0.0)).collect());
            j += 1;
        } else {
            let vec: Vec<c64> = col(j)
                .into_iter()
                .zip(col(j + 1))
                .map(|(re, im)| c64::new(re, im))
                .collect();
            values.push(c64::new(d[j], e[j]));
            values.push(c64::new(d[j + 1], e[j + 1]));
            // Columns (j, j+1) hold re/im of the vector for d + i·e[j].
            let conj = vec.iter().map(|z| z.conj()).collect();
            vectors.push(vec);
            vectors.push(conj);
            j += 2;
        }
    }
    Some((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(a: &Mat<f64>, l: c64, v: &[c64]) -> f64 {
        let n = a.nrows();
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        (0..n)
            .map(|i| {
                let av: c64 = (0..n).map(|j| v[j] * a[(i, j)]).sum();
                (av - l * v[i]).norm_sqr()
            })
            .sum::<f64>()
            .sqrt()
            / norm
    }

    #[test]
    fn residuals_of_random_matrix() {
        let n = 9;
        let a = Mat::from_fn(n, n, |i, j| {
            ((i * 7 + j * 13) % 11) as f64 - 5.0 + if i == j { 0.5 } else { 0.0 }
        });
        let (vals, vecs) = real_eigen(&a).unwrap();
        assert_eq!(vals.len(), n);
        for (l, v) in vals.iter().zip(&vecs) {
            assert!(residual(&a, *l, v) < 1e-12, "{l}");
        }
        // Trace is preserved.
        let tr: f64 = (0..n).map(|i| a[(i, i)]).sum();
        let sum: c64 = vals.iter().sum();
        assert!((sum.re - tr).abs() < 1e-10 && sum.im.abs() < 1e-10);
    }

    #[test]
    fn rotation_pair() {
        let a = Mat::from_fn(2, 2, |i, j| [[0.0, -1.0], [1.0, 0.0]][i][j]);
        let (vals, vecs) = real_eigen(&a).unwrap();
        for (l, v) in vals.iter().zip(&vecs) {
            assert!((l.norm() - 1.0).abs() < 1e-14);
            assert!(residual(&a, *l, v) < 1e-14);
        }
        assert!((vals[0] - vals[1].conj()).norm() < 1e-14);
    }

    #[test]
    fn jordan_block_stays_finite() {
        let n = 24;
        let a = Mat::from_fn(n, n, |i, j| {
            if i == j {
                1.0
            } else if j == i + 1 {
                1e-3
            } else {
                0.0
            }
        });
        let (vals, vecs) = real_eigen(&a).unwrap();
        for (l, v) in vals.iter().zip(&vecs) {
            assert!(l.re.is_finite() && l.im.is_finite());
            assert!(v.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
            assert!(v.iter().any(|z| z.norm() > 0.0));
        }
    }

    #[test]
    fn upper_triangular_eigenvalues_exact() {
        let a = Mat::from_fn(4, 4, |i, j| if j >= i { (i + 2 * j + 1) as f64 } else { 0.0 });
        let (vals, _) = real_eigen(&a).unwrap();
        let mut re: Vec<f64> = vals.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        assert_eq!(re, vec![1.0, 4.0, 7.0, 10.0]);
    }
}
