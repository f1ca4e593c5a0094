//! Iterative parametrization of U(n) adapted to LU decompositions: the
//! recursive product V_n = diag(V_{n-1}, 1) H_n with H_n a chain of planar
//! factors, closed-form H entries and LU diagonals, an exact Haar sampler
//! in these coordinates, and the Haar density rewritten in the
//! (principal-minor radius, phase) variables consumed by the unitary
//! multiplicative weight.

use crate::ensemble::CMatrix;
use crate::error::{Result, RmtError};
use crate::quad;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Index of the pair (j, k), 1 <= j < k <= n, in the flattened angle
/// arrays (ordered by k, then j).
pub fn pair_index(j: usize, k: usize) -> usize {
    debug_assert!(1 <= j && j < k);
    (k - 2) * (k - 1) / 2 + (j - 1)
}

/// The angle set: alpha_j for j = 1..n, and phi_{j,k}, psi_{j,k} for
/// 1 <= j < k <= n.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UnitaryCoordinates {
    pub n: usize,
    pub alpha: Vec<f64>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
}

impl UnitaryCoordinates {
    pub fn new(n: usize, alpha: Vec<f64>, phi: Vec<f64>, psi: Vec<f64>) -> Result<Self> {
        let pairs = n * (n - 1) / 2;
        if alpha.len() != n || phi.len() != pairs || psi.len() != pairs {
            return Err(RmtError::Domain("coordinate vector lengths mismatch".into()));
        }
        if alpha.iter().chain(psi.iter()).any(|&a| !(-PI..PI).contains(&a) && a != PI) {
            return Err(RmtError::Domain("alpha/psi angles outside (-pi, pi]".into()));
        }
        if phi.iter().any(|&p| !(0.0..=PI / 2.0).contains(&p)) {
            return Err(RmtError::Domain("phi angles outside [0, pi/2]".into()));
        }
        Ok(UnitaryCoordinates { n, alpha, phi, psi })
    }

    pub fn phi_at(&self, j: usize, k: usize) -> f64 {
        self.phi[pair_index(j, k)]
    }

    pub fn psi_at(&self, j: usize, k: usize) -> f64 {
        self.psi[pair_index(j, k)]
    }

    /// Principal-minor radii r_l = prod_{j <= l < k} cos(phi_{j,k}),
    /// l = 1..n-1.
    pub fn radii(&self) -> Vec<f64> {
        (1..self.n)
            .map(|l| {
                let mut r = 1.0;
                for j in 1..=l {
                    for k in l + 1..=self.n {
                        r *= self.phi_at(j, k).cos();
                    }
                }
                r
            })
            .collect()
    }

    /// Principal-minor phases: varphi_l = alpha_1 + sum_{j=l+1}^n alpha_j
    /// for l < n, and varphi_n = alpha_1 (the determinant phase).
    pub fn minor_phases(&self) -> Vec<f64> {
        (1..=self.n)
            .map(|l| {
                let mut p = self.alpha[0];
                for j in l + 1..=self.n {
                    p += self.alpha[j - 1];
                }
                wrap_angle(p)
            })
            .collect()
    }
}

pub fn wrap_angle(mut t: f64) -> f64 {
    while t <= -PI {
        t += 2.0 * PI;
    }
    while t > PI {
        t -= 2.0 * PI;
    }
    t
}

/// The planar factor Phi_{j,k} embedded in dimension `dim` (k <= dim):
/// nontrivial entries at (j,j), (j,k), (k,j), (k,k), 1-based.
fn phi_factor(c: &UnitaryCoordinates, j: usize, k: usize, dim: usize) -> CMatrix {
    let mut m = CMatrix::identity(dim, dim);
    let phi = c.phi_at(j, k);
    let psi = c.psi_at(j, k);
    let (jj, kk) = (j - 1, k - 1);
    if j == 1 {
        let alpha = c.alpha[k - 1];
        m[(jj, jj)] = Complex64::from_polar(phi.cos(), alpha);
        m[(jj, kk)] = Complex64::from_polar(phi.sin(), psi);
        m[(kk, jj)] = -Complex64::from_polar(phi.sin(), -psi);
        m[(kk, kk)] = Complex64::from_polar(phi.cos(), -alpha);
    } else {
        m[(jj, jj)] = Complex64::new(phi.cos(), 0.0);
        m[(jj, kk)] = Complex64::from_polar(phi.sin(), psi);
        m[(kk, jj)] = -Complex64::from_polar(phi.sin(), -psi);
        m[(kk, kk)] = Complex64::new(phi.cos(), 0.0);
    }
    m
}

/// H_k = Phi_{1,k} Phi_{2,k} ... Phi_{k-1,k}, embedded in dimension `dim`.
pub fn h_matrix(c: &UnitaryCoordinates, k: usize, dim: usize) -> CMatrix {
    let mut h = CMatrix::identity(dim, dim);
    for j in 1..k {
        h *= phi_factor(c, j, k, dim);
    }
    h
}

/// Closed-form entries of H_k (top-left (k-1)x(k-1) block upper
/// triangular), embedded in dimension `dim`.
pub fn h_matrix_entries(c: &UnitaryCoordinates, k: usize, dim: usize) -> CMatrix {
    let mut m = CMatrix::identity(dim, dim);
    let cosp = |j: usize| c.phi_at(j, k).cos();
    let sinp = |j: usize| c.phi_at(j, k).sin();
    let alpha = c.alpha[k - 1];
    for row in 1..=k {
        for col in 1..=k {
            let v = if row < k && col < k {
                if col < row {
                    Complex64::new(0.0, 0.0)
                } else if row == col {
                    if row == 1 {
                        Complex64::from_polar(cosp(1), alpha)
                    } else {
                        Complex64::new(cosp(row), 0.0)
                    }
                } else {
                    // row < col < k
                    let mut prod = 1.0;
                    for l in row + 1..col {
                        prod *= cosp(l);
                    }
                    let phase = c.psi_at(row, k) - c.psi_at(col, k);
                    -Complex64::from_polar(sinp(col) * sinp(row) * prod, phase)
                }
            } else if row < k && col == k {
                let mut prod = 1.0;
                for l in row + 1..k {
                    prod *= cosp(l);
                }
                Complex64::from_polar(sinp(row) * prod, c.psi_at(row, k))
            } else if row == k && col == 1 {
                -Complex64::from_polar(sinp(1), -c.psi_at(1, k))
            } else if row == k && col < k {
                let mut prod = 1.0;
                for l in 1..col {
                    prod *= cosp(l);
                }
                -Complex64::from_polar(sinp(col) * prod, -(c.psi_at(col, k) + alpha))
            } else {
                // row == k, col == k
                let mut prod = 1.0;
                for l in 1..k {
                    prod *= cosp(l);
                }
                Complex64::from_polar(prod, -alpha)
            };
            m[(row - 1, col - 1)] = v;
        }
    }
    m
}

/// Build the unitary matrix from its coordinates via the recursion
/// V_k = diag(V_{k-1}, 1) H_k.
pub fn build_unitary(c: &UnitaryCoordinates) -> CMatrix {
    let n = c.n;
    let mut v = CMatrix::identity(n, n);
    v[(0, 0)] = Complex64::from_polar(1.0, c.alpha[0]);
    for k in 2..=n {
        v *= h_matrix(c, k, n);
    }
    v
}

/// Closed-form diagonal of U in the LU decomposition V = L U, plus the
/// principal-minor radii and phases.
pub struct LuDiagonals {
    pub u: Vec<Complex64>,
    pub radii: Vec<f64>,
    pub phases: Vec<f64>,
}

pub fn lu_diagonals(c: &UnitaryCoordinates) -> Result<LuDiagonals> {
    let n = c.n;
    let radii = c.radii();
    if radii.iter().any(|&r| r <= 0.0) {
        return Err(RmtError::Data(
            "vanishing principal-minor radius: LU decomposition degenerates".into(),
        ));
    }
    let mut u = Vec::with_capacity(n);
    for l in 1..=n {
        if l == 1 {
            let mut phase = 0.0;
            for j in 1..=n {
                phase += c.alpha[j - 1];
            }
            let mut amp = 1.0;
            for k in 2..=n {
                amp *= c.phi_at(1, k).cos();
            }
            u.push(Complex64::from_polar(amp, phase));
        } else {
            let mut amp = 1.0;
            for k in l + 1..=n {
                amp *= c.phi_at(l, k).cos();
            }
            let mut denom = 1.0;
            for j in 1..l {
                denom *= c.phi_at(j, l).cos();
            }
            if denom == 0.0 {
                return Err(RmtError::Data("vanishing principal minor".into()));
            }
            u.push(Complex64::from_polar(amp / denom, -c.alpha[l - 1]));
        }
    }
    Ok(LuDiagonals {
        u,
        radii,
        phases: c.minor_phases(),
    })
}

/// Exact Haar sampler in the iterative coordinates: alpha and psi uniform
/// on (-pi, pi], phi_{j,k} by inverse CDF of the density
/// 2 (k-j) cos^{2(k-j)-1}(phi) sin(phi), i.e. phi = arccos(U^{1/(2(k-j))}).
pub fn sample_haar_coordinates<R: Rng>(n: usize, rng: &mut R) -> UnitaryCoordinates {
    let alpha: Vec<f64> = (0..n).map(|_| rng.gen_range(-PI..PI)).collect();
    let pairs = n * (n - 1) / 2;
    let mut phi = vec![0.0; pairs];
    let mut psi = vec![0.0; pairs];
    for k in 2..=n {
        for j in 1..k {
            let u: f64 = rng.gen_range(0.0..1.0);
            let m = (k - j) as f64;
            phi[pair_index(j, k)] = u.powf(1.0 / (2.0 * m)).acos();
            psi[pair_index(j, k)] = rng.gen_range(-PI..PI);
        }
    }
    UnitaryCoordinates { n, alpha, phi, psi }
}

/// A point in the rewritten coordinates: minor radii r_1..r_{n-1}, minor
/// phases varphi_1..varphi_n, the wide angles phi_{j,k} with k - j >= 2,
/// and all psi angles.
#[derive(Clone, Debug)]
pub struct RPhiPoint {
    pub r: Vec<f64>,
    pub phases: Vec<f64>,
    pub phi_wide: Vec<f64>,
    pub psi: Vec<f64>,
}

/// Index of (j, k) with k - j >= 2 in `phi_wide` (ordered by k then j).
pub fn wide_index(j: usize, k: usize, n: usize) -> usize {
    debug_assert!(j + 1 < k && k <= n);
    let mut idx = 0;
    for kk in 3..=n {
        for jj in 1..kk - 1 {
            if (jj, kk) == (j, k) {
                return idx;
            }
            idx += 1;
        }
    }
    unreachable!()
}

pub fn wide_count(n: usize) -> usize {
    if n < 3 {
        0
    } else {
        (n - 1) * (n - 2) / 2
    }
}

impl RPhiPoint {
    pub fn from_coordinates(c: &UnitaryCoordinates) -> Self {
        let mut phi_wide = Vec::with_capacity(wide_count(c.n));
        for k in 3..=c.n {
            for j in 1..k - 1 {
                phi_wide.push(c.phi_at(j, k));
            }
        }
        RPhiPoint {
            r: c.radii(),
            phases: c.minor_phases(),
            phi_wide,
            psi: c.psi.clone(),
        }
    }

    /// Upper bound R_j of r_j given the wide angles (all factors with
    /// k - l >= 2).
    pub fn radius_bound(&self, j: usize, n: usize) -> f64 {
        let mut bound = 1.0;
        for l in 1..=j {
            for k in j + 1..=n {
                if k == l + 1 {
                    continue;
                }
                bound *= self.phi_wide[wide_index(l, k, n)].cos();
            }
        }
        bound
    }
}

/// Haar density in the (r, phase, Theta) coordinates:
/// prod_k (k-1)!/(2 pi^k) * prod_l r_l * prod_{k-j>=2} tan(phi_{j,k}),
/// supported on 0 < r_j < R_j(Theta) with uniform phases and psi.
pub fn haar_density_rphi(n: usize, p: &RPhiPoint) -> Result<f64> {
    if p.r.len() != n - 1 || p.phases.len() != n || p.phi_wide.len() != wide_count(n) {
        return Err(RmtError::Domain("coordinate lengths mismatch".into()));
    }
    for (j, &r) in p.r.iter().enumerate() {
        let bound = p.radius_bound(j + 1, n);
        if r <= 0.0 || r >= bound {
            return Err(RmtError::Domain(format!(
                "radius r_{} = {r} outside (0, {bound})",
                j + 1
            )));
        }
    }
    let mut norm = 1.0;
    let mut fact = 1.0;
    for k in 1..=n {
        if k > 1 {
            fact *= (k - 1) as f64;
        }
        norm *= fact / (2.0 * PI.powi(k as i32));
    }
    let mut dens = norm;
    for &r in &p.r {
        dens *= r;
    }
    for &phi in &p.phi_wide {
        dens *= phi.tan();
    }
    Ok(dens)
}

/// Normalization check of the rewritten Haar density for n = 2 by direct
/// quadrature (no wide angles; the density is r_1 / (4 pi^3)).
pub fn haar_density_normalization_n2() -> f64 {
    let (rad, _) = quad::adaptive(
        &mut |r| {
            haar_density_rphi(
                2,
                &RPhiPoint {
                    r: vec![r],
                    phases: vec![0.0, 0.0],
                    phi_wide: vec![],
                    psi: vec![0.0],
                },
            )
            .unwrap_or(0.0)
        },
        1e-9,
        1.0 - 1e-9,
        1e-12,
    );
    // phases (2 of them: varphi_1 and the determinant phase alpha_1... the
    // angular variables are varphi_1, alpha_1, psi_{1,2}, each over 2 pi
    rad * (2.0 * PI).powi(3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{haar_unitary_qr, lu_diagonal, seeded_rng};
    use approx::assert_relative_eq;

    #[test]
    fn n1_is_a_phase() {
        let c = UnitaryCoordinates::new(1, vec![0.7], vec![], vec![]).unwrap();
        let v = build_unitary(&c);
        assert!((v[(0, 0)] - Complex64::from_polar(1.0, 0.7)).norm() < 1e-15);
    }

    #[test]
    fn n2_identity_at_zero_angles() {
        let c = UnitaryCoordinates::new(2, vec![0.0, 0.0], vec![0.0], vec![1.1]).unwrap();
        let v = build_unitary(&c);
        assert!((v - CMatrix::identity(2, 2)).norm() < 1e-15);
    }

    #[test]
    fn coordinate_validation() {
        assert!(UnitaryCoordinates::new(2, vec![0.0, 4.0], vec![0.0], vec![0.0]).is_err());
        assert!(UnitaryCoordinates::new(2, vec![0.0, 0.0], vec![2.0], vec![0.0]).is_err());
        assert!(UnitaryCoordinates::new(2, vec![0.0], vec![0.0], vec![0.0]).is_err());
    }

    #[test]
    fn h_matrix_closed_form_matches_product() {
        let mut rng = seeded_rng(21);
        for n in 2..=6 {
            let c = sample_haar_coordinates(n, &mut rng);
            for k in 2..=n {
                let prod = h_matrix(&c, k, n);
                let closed = h_matrix_entries(&c, k, n);
                assert!(
                    (&prod - &closed).norm() < 1e-13,
                    "n={n} k={k}: defect {}",
                    (&prod - &closed).norm()
                );
            }
        }
    }

    #[test]
    fn h_matrix_structurals() {
        let mut rng = seeded_rng(22);
        let n = 4;
        let c = sample_haar_coordinates(n, &mut rng);
        let h = h_matrix(&c, n, n);
        // top-left (n-1)x(n-1) block is upper triangular
        for row in 2..n {
            for col in 1..row {
                assert!(h[(row - 1, col - 1)].norm() < 1e-14);
            }
        }
        // h_{n,n} = e^{-i alpha_n} prod cos(phi_{l,n})
        let mut amp = 1.0;
        for l in 1..n {
            amp *= c.phi_at(l, n).cos();
        }
        let want = Complex64::from_polar(amp, -c.alpha[n - 1]);
        assert!((h[(n - 1, n - 1)] - want).norm() < 1e-14);
        // n=2 case: h_{1,1} = e^{i alpha_2} cos(phi_{1,2})
        let c2 = sample_haar_coordinates(2, &mut rng);
        let h2 = h_matrix(&c2, 2, 2);
        let want2 = Complex64::from_polar(c2.phi_at(1, 2).cos(), c2.alpha[1]);
        assert!((h2[(0, 0)] - want2).norm() < 1e-14);
    }

    #[test]
    fn built_matrices_are_unitary() {
        let mut rng = seeded_rng(23);
        for n in 1..=6 {
            for _ in 0..100 {
                let c = sample_haar_coordinates(n, &mut rng);
                let v = build_unitary(&c);
                let defect = (v.adjoint() * &v - CMatrix::identity(n, n)).norm();
                assert!(defect < 1e-12, "n={n}: unitarity defect {defect}");
            }
        }
    }

    #[test]
    fn lu_closed_form_matches_numeric_lu() {
        let mut rng = seeded_rng(24);
        for n in 2..=5 {
            for _ in 0..50 {
                let c = sample_haar_coordinates(n, &mut rng);
                let v = build_unitary(&c);
                let closed = lu_diagonals(&c).unwrap();
                let numeric = lu_diagonal(&v).unwrap();
                for (a, b) in closed.u.iter().zip(numeric.iter()) {
                    assert!((a - b).norm() < 1e-12, "n={n}: {a} vs {b}");
                }
                // radii equal |det V_{l x l}|
                for l in 1..n {
                    let minor = v.view((0, 0), (l, l)).clone_owned().determinant();
                    assert!((closed.radii[l - 1] - minor.norm()).abs() < 1e-12);
                    assert!(
                        (Complex64::from_polar(1.0, closed.phases[l - 1])
                            - minor / minor.norm())
                        .norm()
                            < 1e-10
                    );
                }
            }
        }
    }

    #[test]
    fn determinant_is_first_phase() {
        let mut rng = seeded_rng(25);
        for n in 1..=5 {
            let c = sample_haar_coordinates(n, &mut rng);
            let v = build_unitary(&c);
            let det = v.determinant();
            assert!(
                (det - Complex64::from_polar(1.0, c.alpha[0])).norm() < 1e-12,
                "n={n}"
            );
        }
    }

    #[test]
    fn n2_lu_specialization() {
        let mut rng = seeded_rng(26);
        let c = sample_haar_coordinates(2, &mut rng);
        let d = lu_diagonals(&c).unwrap();
        let want_u11 =
            Complex64::from_polar(c.phi_at(1, 2).cos(), c.alpha[0] + c.alpha[1]);
        let want_u22 = Complex64::from_polar(1.0 / c.phi_at(1, 2).cos(), -c.alpha[1]);
        assert!((d.u[0] - want_u11).norm() < 1e-14);
        assert!((d.u[1] - want_u22).norm() < 1e-14);
        assert!((d.u[0] * d.u[1] - Complex64::from_polar(1.0, c.alpha[0])).norm() < 1e-14);
    }

    #[test]
    fn adjacent_phi_inverse_cdf_is_uniform_in_cos_squared() {
        // k - j = 1: cos^2(phi) should be uniform on (0,1); KS at 1e4 draws
        let mut rng = seeded_rng(27);
        let mut xs: Vec<f64> = (0..10_000)
            .map(|_| {
                let c = sample_haar_coordinates(2, &mut rng);
                c.phi_at(1, 2).cos().powi(2)
            })
            .collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = xs.len() as f64;
        let mut d = 0.0f64;
        for (i, &x) in xs.iter().enumerate() {
            d = d.max((x - i as f64 / n).abs());
            d = d.max(((i as f64 + 1.0) / n - x).abs());
        }
        assert!(d < 0.02, "KS {d}");
    }

    #[test]
    fn cue_trace_second_moment() {
        // E |tr V|^2 = 1 for Haar U(n)
        let mut rng = seeded_rng(28);
        for n in 2..=4 {
            let draws = 20_000;
            let mut mean = 0.0;
            let mut m2 = 0.0;
            for i in 0..draws {
                let c = sample_haar_coordinates(n, &mut rng);
                let v = build_unitary(&c);
                let tr: Complex64 = (0..n).map(|j| v[(j, j)]).sum();
                let t = tr.norm_sqr();
                let delta = t - mean;
                mean += delta / (i + 1) as f64;
                m2 += delta * (t - mean);
            }
            let se = (m2 / (draws as f64 - 1.0) / draws as f64).sqrt();
            assert!(
                (mean - 1.0).abs() < 3.0 * se.max(0.02),
                "n={n}: E|tr|^2 = {mean} +- {se}"
            );
        }
    }

    #[test]
    fn rphi_density_normalizes_and_matches_qr_marginal() {
        // n=2 normalization by quadrature
        assert_relative_eq!(haar_density_normalization_n2(), 1.0, epsilon = 1e-7);

        // marginal of r_1 is 2 r on (0,1): KS of r^2 against uniform,
        // with r = |v_11| from QR-Haar
        let mut rng = seeded_rng(29);
        let mut xs: Vec<f64> = (0..10_000)
            .map(|_| haar_unitary_qr(2, &mut rng)[(0, 0)].norm_sqr())
            .collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = xs.len() as f64;
        let mut d = 0.0f64;
        for (i, &x) in xs.iter().enumerate() {
            d = d.max((x - i as f64 / n).abs());
            d = d.max(((i as f64 + 1.0) / n - x).abs());
        }
        assert!(d < 0.02, "KS {d}");
    }

    #[test]
    fn rphi_density_rejects_out_of_range_radius() {
        let p = RPhiPoint {
            r: vec![1.5],
            phases: vec![0.0, 0.0],
            phi_wide: vec![],
            psi: vec![0.0],
        };
        assert!(haar_density_rphi(2, &p).is_err());
    }

    #[test]
    fn coordinates_serde_round_trip() {
        let mut rng = seeded_rng(30);
        let c = sample_haar_coordinates(3, &mut rng);
        let s = serde_json::to_string(&c).unwrap();
        let back: UnitaryCoordinates = serde_json::from_str(&s).unwrap();
        let va = build_unitary(&c);
        let vb = build_unitary(&back);
        assert!((va - vb).norm() < 1e-15);
    }
}
