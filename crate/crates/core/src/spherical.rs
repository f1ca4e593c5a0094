//! Group integrals (HCIZ, the Bessel kernel of the Hankel class, and
//! Gelfand-Naimark) and the four spherical transforms with regularized
//! inverses, plus Monte Carlo group-average oracles.
//!
//! All three determinantal kernels are evaluated through one confluent
//! divided-difference scheme: coincident (or nearly coincident, within
//! 1e-8 of the argument scale) entries are grouped and the determinant
//! rows/columns are replaced by mixed partial derivatives divided by
//! factorials, which is the l'Hopital limit of det[g(x_j, s_k)] /
//! (Delta(x) Delta(s)).
//!
//! The Bessel-kernel group average carries the sign (-1)^{n(n-1)/2}
//! relative to the bare determinant ratio; the normalization phi(x,s) -> 1
//! at coinciding arguments and the Monte Carlo oracles fix it.

use crate::ensemble::{
    c_nu, chiral_embed, haar_orthogonal_qr, haar_unitary_qr, haar_usp_qr, iota, lu_diagonal,
    vandermonde, CMatrix, MatrixSpace, Nu, SpaceKind,
};
use crate::error::{Result, RmtError};
use crate::quad;
use crate::special::{gamma, superfactorial};
use crate::transforms::hankel_kernel_entire;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

const CONFLUENT_TOL: f64 = 1e-8;

/// The three determinantal kernels.
#[derive(Clone, Copy, Debug)]
enum Kernel {
    /// g(x, s) = e^{i x s}
    Hciz,
    /// g(x, s) = J_nu(2 sqrt(xs)) (xs)^{-nu/2}, entire in xs
    Bessel { nu: f64 },
    /// g(x, s) = x^s
    Power,
}

impl Kernel {
    /// Mixed partial d^p_x d^q_s g(x, s) / (p! q!).
    fn mixed_partial(&self, p: usize, q: usize, x: Complex64, s: Complex64) -> Complex64 {
        let scale = 1.0 / (gamma(p as f64 + 1.0) * gamma(q as f64 + 1.0));
        match *self {
            Kernel::Hciz => {
                // d^q_s e^{ixs} = (ix)^q e^{ixs};
                // d^p_x of that by Leibniz over x^q and e^{ixs}
                let i = Complex64::i();
                let mut acc = Complex64::new(0.0, 0.0);
                for m in 0..=p.min(q) {
                    let binom = binomial(p, m);
                    let falling = falling_factorial(q, m);
                    acc += binom * falling * x.powu((q - m) as u32) * (i * s).powu((p - m) as u32);
                }
                acc * i.powu(q as u32) * (i * x * s).exp() * scale
            }
            Kernel::Bessel { nu } => {
                // with K(a) = J_nu(2 sqrt(a)) a^{-nu/2}: K^{(r)}(a) = (-1)^r K_{nu+r}(a)
                debug_assert!(x.im == 0.0 && s.im == 0.0);
                let (xr, sr) = (x.re, s.re);
                let mut acc = 0.0;
                for m in 0..=p.min(q) {
                    let r = q + p - m;
                    let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
                    acc += binomial(p, m)
                        * falling_factorial(q, m)
                        * xr.powi((q - m) as i32)
                        * sr.powi((p - m) as i32)
                        * sign
                        * hankel_kernel_entire(nu + r as f64, (xr * sr).max(0.0));
                }
                Complex64::new(acc * scale, 0.0)
            }
            Kernel::Power => {
                // d^p_x d^q_s x^s: expand in x^{s-p} (ln x)^m
                let lnx = x.ln();
                // coefficients c_m of (ln x)^m after p x-derivatives of
                // (ln x)^q x^s, tracked by recursion on p
                let mut coeffs: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); q + 1];
                coeffs[q] = Complex64::new(1.0, 0.0);
                for step in 0..p {
                    let mut next = vec![Complex64::new(0.0, 0.0); q + 1];
                    for (m, &c) in coeffs.iter().enumerate() {
                        if c.norm() == 0.0 {
                            continue;
                        }
                        // d/dx [ (ln x)^m x^{s-step} ] =
                        //   m (ln x)^{m-1} x^{s-step-1} + (s-step)(ln x)^m x^{s-step-1}
                        next[m] += c * (s - step as f64);
                        if m > 0 {
                            next[m - 1] += c * m as f64;
                        }
                    }
                    coeffs = next;
                }
                let mut acc = Complex64::new(0.0, 0.0);
                let mut lnpow = Complex64::new(1.0, 0.0);
                for &c in &coeffs {
                    acc += c * lnpow;
                    lnpow *= lnx;
                }
                acc * ((s - p as f64) * lnx).exp() * scale
            }
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc *= (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

fn falling_factorial(n: usize, k: usize) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc *= (n - i) as f64;
    }
    acc
}

/// Cluster nearly coincident nodes into (representative, multiplicity).
fn group_nodes(v: &[Complex64]) -> Vec<(Complex64, usize)> {
    let scale = v.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    let mut sorted: Vec<Complex64> = v.to_vec();
    sorted.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    let mut groups: Vec<(Complex64, usize)> = Vec::new();
    for z in sorted {
        match groups.last_mut() {
            Some((rep, count)) if (z - *rep).norm() <= CONFLUENT_TOL * scale => {
                // running mean keeps the representative centered
                *rep = (*rep * (*count as f64) + z) / (*count as f64 + 1.0);
                *count += 1;
            }
            _ => groups.push((z, 1)),
        }
    }
    groups
}

/// lim det[g(x_j, s_k)] / (Delta(x) Delta(s)) with confluent divided
/// differences on both sides: within a group of coincident nodes the rows
/// (columns) become derivatives over factorials, and the surviving
/// inter-group Vandermonde factors (x_b - x_a)^{m_a m_b} are divided out.
fn confluent_ratio(kernel: Kernel, x: &[Complex64], s: &[Complex64]) -> Complex64 {
    let n = x.len();
    assert_eq!(s.len(), n);
    let gx = group_nodes(x);
    let gs = group_nodes(s);
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    let mut row = 0;
    for &(xv, xmult) in &gx {
        for p in 0..xmult {
            let mut col = 0;
            for &(sv, smult) in &gs {
                for q in 0..smult {
                    m[(row, col)] = kernel.mixed_partial(p, q, xv, sv);
                    col += 1;
                }
            }
            row += 1;
        }
    }
    let mut inter = Complex64::new(1.0, 0.0);
    for groups in [&gx, &gs] {
        for a in 0..groups.len() {
            for b in a + 1..groups.len() {
                let diff = groups[b].0 - groups[a].0;
                inter *= diff.powu((groups[a].1 * groups[b].1) as u32);
            }
        }
    }
    m.determinant() / inter
}

/// HCIZ integral over U(n): the Haar average of
/// exp(i tr K diag(x) K^{-1} diag(s)); coincident arguments are handled by
/// divided differences, and phi(x, 0) = phi(0, s) = 1.
pub fn hciz_unitary(x: &[f64], s: &[f64]) -> Complex64 {
    let n = x.len();
    assert_eq!(s.len(), n);
    if n == 1 {
        return (Complex64::i() * x[0] * s[0]).exp();
    }
    let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let sc: Vec<Complex64> = s.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let prefactor = superfactorial(n as u32 - 1);
    // det / (Delta(ix) Delta(s)) = det / (i^{n(n-1)/2} Delta(x) Delta(s))
    let ipow = Complex64::i().powu((n * (n - 1) / 2) as u32);
    prefactor * confluent_ratio(Kernel::Hciz, &xc, &sc) / ipow
}

/// Spherical function of the Hankel class: the K_nu group average of
/// exp(i tr K iota(x) K^{-1} iota(s)), normalized to 1 at the origin.
pub fn bessel_group_kernel(x: &[f64], s: &[f64], nu: Nu) -> f64 {
    let n = x.len();
    assert_eq!(s.len(), n);
    let nuv = nu.value();
    if n == 1 {
        return gamma(nuv + 1.0) * hankel_kernel_entire(nuv, x[0] * s[0]);
    }
    let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let sc: Vec<Complex64> = s.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut pref = 1.0;
    let mut fact = 1.0;
    for j in 0..n {
        if j > 0 {
            fact *= j as f64;
        }
        pref *= fact * gamma(j as f64 + nuv + 1.0);
    }
    let sign = if (n * (n - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let v = confluent_ratio(Kernel::Bessel { nu: nuv }, &xc, &sc);
    sign * pref * v.re
}

/// Gelfand-Naimark integral: the U(n) Haar average of the generalized
/// power |K diag(x) K^{-1}|^s, with divided differences at degeneracies.
pub fn gelfand_naimark(x: &[f64], s: &[Complex64]) -> Complex64 {
    let n = x.len();
    assert_eq!(s.len(), n);
    let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    if n == 1 {
        return (s[0] * xc[0].ln()).exp();
    }
    superfactorial(n as u32 - 1) * confluent_ratio(Kernel::Power, &xc, s)
}

/// Gelfand-Naimark spherical function evaluated on the unit circle
/// (the normalized Schur character), s pairwise distinct integers.
pub fn gelfand_naimark_unit_circle(theta: &[f64], s: &[i64]) -> Result<Complex64> {
    let n = theta.len();
    for j in 0..n {
        for k in j + 1..n {
            if s[j] == s[k] {
                return Err(RmtError::Domain(
                    "repeated integer parameters carry no information (Delta(s) = 0)".into(),
                ));
            }
        }
    }
    let x: Vec<Complex64> = theta
        .iter()
        .map(|&t| Complex64::from_polar(1.0, t))
        .collect();
    let sc: Vec<Complex64> = s.iter().map(|&k| Complex64::new(k as f64, 0.0)).collect();
    if n == 1 {
        return Ok(Complex64::from_polar(1.0, theta[0] * s[0] as f64));
    }
    // x^s is single-valued for integer s, so the Power kernel with the
    // principal log is safe on the circle
    Ok(superfactorial(n as u32 - 1) * confluent_ratio(Kernel::Power, &x, &sc))
}

// ---------------------------------------------------------------------------
// Monte Carlo estimates

#[derive(Clone, Copy, Debug)]
pub struct McEstimate {
    pub mean: Complex64,
    pub std_err: f64,
    pub samples: usize,
}

impl McEstimate {
    /// Accuracy error when the achieved standard error exceeds `tol`.
    pub fn require_precision(&self, tol: f64) -> Result<Complex64> {
        if self.std_err > tol {
            return Err(RmtError::Accuracy(format!(
                "Monte Carlo standard error {:.3e} exceeds requested {tol:.3e}",
                self.std_err
            )));
        }
        Ok(self.mean)
    }
}

/// Deterministic streaming mean and standard error of complex samples.
pub fn mc_mean_complex(values: impl Iterator<Item = Complex64>) -> McEstimate {
    let mut mean = Complex64::new(0.0, 0.0);
    let mut m2 = 0.0;
    let mut count = 0usize;
    for v in values {
        count += 1;
        let delta = v - mean;
        mean += delta / count as f64;
        m2 += (delta.conj() * (v - mean)).re;
    }
    let var = if count > 1 { m2 / (count - 1) as f64 } else { f64::NAN };
    McEstimate {
        mean,
        std_err: (var / count as f64).sqrt(),
        samples: count,
    }
}

/// Haar-average oracle for the HCIZ integral (QR-based sampler,
/// independent of the iterative-coordinates module).
pub fn mc_hciz<R: rand::Rng>(x: &[f64], s: &[f64], samples: usize, rng: &mut R) -> McEstimate {
    let n = x.len();
    let dx = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(x[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let ds = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(s[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    mc_mean_complex((0..samples).map(|_| {
        let k = haar_unitary_qr(n, rng);
        let tr = (&k * &dx * k.adjoint() * &ds).trace();
        (Complex64::i() * tr).exp()
    }))
}

/// Group-average oracle for the Hankel-class spherical function; the group
/// is selected by the matrix space (U(n) x U(n+nu), O(2n), O(2n+1), or
/// USp(2n)).
pub fn mc_bessel_group<R: rand::Rng>(
    space: &MatrixSpace,
    x: &[f64],
    s: &[f64],
    samples: usize,
    rng: &mut R,
) -> McEstimate {
    let n = space.n();
    assert_eq!(x.len(), n);
    let ix = iota(space, x);
    let is = iota(space, s);
    match space.kind() {
        SpaceKind::ChiralRect => {
            let (r, c) = (ix.nrows(), ix.ncols());
            let ex = chiral_embed(&ix);
            let es = chiral_embed(&is);
            mc_mean_complex((0..samples).map(|_| {
                let k1 = haar_unitary_qr(r, rng);
                let k2 = haar_unitary_qr(c, rng);
                let mut k = CMatrix::zeros(r + c, r + c);
                k.view_mut((0, 0), (r, r)).copy_from(&k1);
                k.view_mut((r, r), (c, c)).copy_from(&k2);
                let tr = (&k * &ex * k.adjoint() * &es).trace();
                (Complex64::i() * tr).exp()
            }))
        }
        SpaceKind::IoEven | SpaceKind::IoOdd => {
            let m = space.ambient_rows();
            mc_mean_complex((0..samples).map(|_| {
                let o = haar_orthogonal_qr(m, rng);
                let oc = o.map(|v| Complex64::new(v, 0.0));
                let tr = (&oc * &ix * oc.transpose() * &is).trace();
                (Complex64::i() * tr).exp()
            }))
        }
        SpaceKind::Usp => mc_mean_complex((0..samples).map(|_| {
            let k = haar_usp_qr(n, rng);
            let tr = (&k * &ix * k.adjoint() * &is).trace();
            (Complex64::i() * tr).exp()
        })),
        _ => panic!("mc_bessel_group requires a Hankel-class space"),
    }
}

/// Haar-average oracle for the Gelfand-Naimark integral (n = x.len()).
pub fn mc_gelfand_naimark<R: rand::Rng>(
    x: &[f64],
    s: &[Complex64],
    samples: usize,
    rng: &mut R,
) -> McEstimate {
    let n = x.len();
    let dx = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(x[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    mc_mean_complex(
        (0..samples)
            .filter_map(|_| {
                let k = haar_unitary_qr(n, rng);
                let m = &k * &dx * k.adjoint();
                generalized_power(&m, s).ok()
            })
            .take(samples),
    )
}

/// Generalized power |X|^s = prod_j det(X_{j x j})^{s_j - s_{j+1} - 1}
/// det(X)^{s_n}, computed from the pivot-free LU diagonal.
pub fn generalized_power(x: &CMatrix, s: &[Complex64]) -> Result<Complex64> {
    let n = x.nrows();
    assert_eq!(s.len(), n);
    let u = lu_diagonal(x)?;
    // det X_{j x j} = u_1 ... u_j
    let mut minors = Vec::with_capacity(n);
    let mut acc = Complex64::new(1.0, 0.0);
    for &d in &u {
        acc *= d;
        minors.push(acc);
    }
    let mut out = Complex64::new(0.0, 0.0);
    for (j, &minor) in minors.iter().enumerate() {
        let exponent = if j + 1 < n {
            s[j] - s[j + 1] - 1.0
        } else {
            s[n - 1]
        };
        out += exponent * minor.ln();
    }
    Ok(out.exp())
}

/// Generalized power for integer exponents (unitary matrices): uses exact
/// integer powers of the principal minors, avoiding log branches.
pub fn generalized_power_int(x: &CMatrix, s: &[i64]) -> Result<Complex64> {
    let n = x.nrows();
    let u = lu_diagonal(x)?;
    let mut minors = Vec::with_capacity(n);
    let mut acc = Complex64::new(1.0, 0.0);
    for &d in &u {
        acc *= d;
        minors.push(acc);
    }
    let mut out = Complex64::new(1.0, 0.0);
    for (j, &minor) in minors.iter().enumerate() {
        let e = if j + 1 < n { s[j] - s[j + 1] - 1 } else { s[n - 1] };
        out *= powi_complex(minor, e);
    }
    Ok(out)
}

fn powi_complex(z: Complex64, e: i64) -> Complex64 {
    if e >= 0 {
        z.powu(e as u32)
    } else {
        z.powu((-e) as u32).inv()
    }
}

// ---------------------------------------------------------------------------
// spherical transforms

/// phi(x, s) for the additive Hermitian space (the HCIZ spherical function).
pub fn phi_herm(x: &[f64], s: &[f64]) -> Complex64 {
    hciz_unitary(x, s)
}

/// Forward spherical transform on Herm(n) by tensor quadrature of
/// int f(x) phi(x, s) dx over [lo, hi]^n.
pub fn spherical_herm_quad(
    f: &dyn Fn(&[f64]) -> f64,
    s: &[f64],
    lo: f64,
    hi: f64,
    nodes: usize,
) -> Complex64 {
    let n = s.len();
    let axes: Vec<(f64, f64, usize)> = vec![(lo, hi, nodes); n];
    let re = quad::tensor_integral(&axes, &mut |x| (f(x) * phi_herm(x, s)).re);
    let im = quad::tensor_integral(&axes, &mut |x| (f(x) * phi_herm(x, s)).im);
    Complex64::new(re, im)
}

/// Forward spherical transform from spectral samples: the sample mean of
/// phi(x_i, s).
pub fn spherical_herm_mc(samples: &[Vec<f64>], s: &[f64]) -> McEstimate {
    mc_mean_complex(samples.iter().map(|x| phi_herm(x, s)))
}

/// Regularized inverse spherical transform on Herm(n), n <= 2:
/// f(x) = lim (prod_j (j!)^2)^{-1} Delta(x)^2 (2 pi)^{-n}
///        int Sf(s) phi(-x, s) Delta(s)^2 e^{-eps s^2} ds.
pub fn spherical_herm_inverse(
    sf: &dyn Fn(&[f64]) -> Complex64,
    x: &[f64],
    epsilon: f64,
    l: f64,
    nodes: usize,
) -> Result<f64> {
    let n = x.len();
    if n > 3 {
        return Err(RmtError::Domain("inverse spherical transforms are exposed for n <= 3".into()));
    }
    let minus_x: Vec<f64> = x.iter().map(|&v| -v).collect();
    let mut pref = 1.0;
    let mut fact = 1.0;
    for j in 1..=n {
        fact *= j as f64;
        pref *= fact * fact;
    }
    let integrand = |s: &[f64]| -> Complex64 {
        let d = vandermonde(s);
        let damp: f64 = s.iter().map(|&v| -epsilon * v * v).sum();
        sf(s) * phi_herm(&minus_x, s) * d * d * damp.exp()
    };
    let axes: Vec<(f64, f64, usize)> = vec![(-l, l, nodes); n];
    let re = quad::tensor_integral(&axes, &mut |s| integrand(s).re);
    let dv = vandermonde(x);
    Ok(dv * dv / (pref * (2.0 * PI).powi(n as i32)) * re)
}

/// Forward spherical transform on the Hankel class M_nu by quadrature over
/// [0, hi]^n against the Bessel spherical function.
pub fn spherical_hankel_quad(
    f: &dyn Fn(&[f64]) -> f64,
    s: &[f64],
    nu: Nu,
    hi: f64,
    nodes: usize,
) -> f64 {
    let n = s.len();
    let axes: Vec<(f64, f64, usize)> = vec![(0.0, hi, nodes); n];
    quad::tensor_integral(&axes, &mut |x| f(x) * bessel_group_kernel(x, s, nu))
}

pub fn spherical_hankel_mc(samples: &[Vec<f64>], s: &[f64], nu: Nu) -> McEstimate {
    mc_mean_complex(
        samples
            .iter()
            .map(|x| Complex64::new(bessel_group_kernel(x, s, nu), 0.0)),
    )
}

/// Regularized inverse spherical transform on M_nu (n <= 2):
/// f(x) = lim Delta(x)^2 / (n! C_nu)^2 int Sf(s) phi(x, s) Delta(s)^2
///        prod (x_j s_j)^nu e^{-eps s_j} ds.
pub fn spherical_hankel_inverse(
    sf: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    nu: Nu,
    usp: bool,
    epsilon: f64,
    hi: f64,
    nodes: usize,
) -> Result<f64> {
    let n = x.len();
    if n > 3 {
        return Err(RmtError::Domain("inverse spherical transforms are exposed for n <= 3".into()));
    }
    let c = c_nu(n, nu, usp);
    let nfact = gamma(n as f64 + 1.0);
    let nuv = nu.value();
    let integrand = |s: &[f64]| -> f64 {
        let d = vandermonde(s);
        let mut w = 1.0;
        for (&xj, &sj) in x.iter().zip(s.iter()) {
            w *= (xj * sj).powf(nuv) * (-epsilon * sj).exp();
        }
        sf(s) * bessel_group_kernel(x, s, nu) * d * d * w
    };
    let axes: Vec<(f64, f64, usize)> = vec![(0.0, hi, nodes); n];
    let integral = quad::tensor_integral(&axes, &mut |s| integrand(s));
    let dv = vandermonde(x);
    Ok(dv * dv / (nfact * c).powi(2) * integral)
}

/// Forward spherical transform on Herm_+(n) by quadrature:
/// int f(x) phi(x, s) prod x_j^{-n} dx. Reduces to the Mellin transform at
/// n = 1; the transform equals one at s = (2n-1, ..., n), where the
/// generalized power equals det(X)^n and cancels the measure.
pub fn spherical_hermplus_quad(
    f: &dyn Fn(&[f64]) -> f64,
    s: &[Complex64],
    hi: f64,
    nodes: usize,
) -> Complex64 {
    let n = s.len();
    let axes: Vec<(f64, f64, usize)> = vec![(1e-9, hi, nodes); n];
    let val = |x: &[f64]| -> Complex64 {
        let meas: f64 = x.iter().map(|&v| v.powi(-(n as i32))).product();
        f(x) * meas * gelfand_naimark(x, s)
    };
    let re = quad::tensor_integral(&axes, &mut |x| val(x).re);
    let im = quad::tensor_integral(&axes, &mut |x| val(x).im);
    Complex64::new(re, im)
}

/// Forward spherical transform on Herm_+(n) as the sample mean of the
/// generalized power |X|^s over positive definite draws.
pub fn spherical_hermplus_mc(samples: &[CMatrix], s: &[Complex64]) -> Result<McEstimate> {
    let mut vals = Vec::with_capacity(samples.len());
    for m in samples {
        vals.push(generalized_power(m, s)?);
    }
    Ok(mc_mean_complex(vals.into_iter()))
}

/// Regularized inverse spherical transform on Herm_+(n), n <= 2, along the
/// contour s_0 + c_extra + i t with s_0 = (0, ..., n-1):
/// f(x) = (-1)^{n(n-1)/2} / prod_j (j!)^2 Delta(x)^2 (2 pi)^{-n}
///        int Delta(s_0 + it)^2 phi(x^{-1}, s) Sf(s) e^{-eps t^2} dt.
/// `c_extra` shifts the contour inside the analyticity strip (the
/// Vandermonde is translation invariant, so only phi and Sf see it).
pub fn spherical_hermplus_inverse(
    sf: &dyn Fn(&[Complex64]) -> Complex64,
    x: &[f64],
    c_extra: f64,
    epsilon: f64,
    l: f64,
    nodes: usize,
) -> Result<f64> {
    let n = x.len();
    if n > 3 {
        return Err(RmtError::Domain("inverse spherical transforms are exposed for n <= 3".into()));
    }
    let x_inv: Vec<f64> = x.iter().map(|&v| 1.0 / v).collect();
    let mut pref = 1.0;
    let mut fact = 1.0;
    for j in 1..=n {
        fact *= j as f64;
        pref *= fact * fact;
    }
    let sign = if (n * (n - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let integrand = |t: &[f64]| -> Complex64 {
        let s: Vec<Complex64> = t
            .iter()
            .enumerate()
            .map(|(j, &tj)| Complex64::new(j as f64 + c_extra, tj))
            .collect();
        let dv: Complex64 = {
            let mut acc = Complex64::new(1.0, 0.0);
            for j in 0..n {
                for k in j + 1..n {
                    acc *= s[k] - s[j];
                }
            }
            acc
        };
        let damp: f64 = t.iter().map(|&v| -epsilon * v * v).sum();
        sf(&s) * gelfand_naimark(&x_inv, &s) * dv * dv * damp.exp()
    };
    let axes: Vec<(f64, f64, usize)> = vec![(-l, l, nodes); n];
    let re = quad::tensor_integral(&axes, &mut |t| integrand(t).re);
    let dv = vandermonde(x);
    Ok(sign * dv * dv / (pref * (2.0 * PI).powi(n as i32)) * re)
}

/// Forward spherical transform on U(n): int f(theta) phi(e^{i theta}, s)
/// d theta with s pairwise distinct integers, by the trapezoid rule
/// (spectrally accurate for periodic integrands).
pub fn spherical_unitary_quad(
    f: &dyn Fn(&[f64]) -> f64,
    s: &[i64],
    nodes: usize,
) -> Result<Complex64> {
    let n = s.len();
    for j in 0..n {
        for k in j + 1..n {
            if s[j] == s[k] {
                return Err(RmtError::Domain("repeated s entries: Delta(s) = 0".into()));
            }
        }
    }
    let h = 2.0 * PI / nodes as f64;
    let total = nodes.pow(n as u32);
    let mut theta = vec![0.0; n];
    let mut acc = Complex64::new(0.0, 0.0);
    for flat in 0..total {
        let mut rem = flat;
        for d in (0..n).rev() {
            theta[d] = -PI + (rem % nodes) as f64 * h;
            rem /= nodes;
        }
        acc += f(&theta) * gelfand_naimark_unit_circle(&theta, s)?;
    }
    Ok(acc * h.powi(n as i32))
}

/// Forward spherical transform on U(n) as the sample mean of |X|^s,
/// using the matrix-integral form valid on the decreasing chamber and
/// extended to all distinct integer s by permutation symmetry.
pub fn spherical_unitary_mc(samples: &[CMatrix], s: &[i64]) -> Result<McEstimate> {
    let n = s.len();
    for j in 0..n {
        for k in j + 1..n {
            if s[j] == s[k] {
                return Err(RmtError::Domain("repeated s entries: Delta(s) = 0".into()));
            }
        }
    }
    let mut sorted: Vec<i64> = s.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mut vals = Vec::with_capacity(samples.len());
    for m in samples {
        // measure-zero LU failures abort only the affected sample
        match generalized_power_int(m, &sorted) {
            Ok(v) => vals.push(v),
            Err(_) => continue,
        }
    }
    if vals.is_empty() {
        return Err(RmtError::Data("no usable samples".into()));
    }
    Ok(mc_mean_complex(vals.into_iter()))
}

/// Regularized inverse spherical transform on U(n) truncated at
/// |s_j| <= cutoff:
/// f(e^{i theta}) = (2 pi)^{-n} / prod_j (j!)^2 |Delta(e^{i theta})|^2
///   sum_s Sf(s) phi(e^{-i theta}, s) Delta(s)^2 e^{-eps s^2}.
pub fn spherical_unitary_inverse(
    sf: &dyn Fn(&[i64]) -> Complex64,
    theta: &[f64],
    epsilon: f64,
    cutoff: i64,
) -> Result<f64> {
    let n = theta.len();
    if n > 3 {
        return Err(RmtError::Domain("inverse spherical transforms are exposed for n <= 3".into()));
    }
    let mut pref = 1.0;
    let mut fact = 1.0;
    for j in 1..=n {
        fact *= j as f64;
        pref *= fact * fact;
    }
    let minus_theta: Vec<f64> = theta.iter().map(|&t| -t).collect();
    let width = (2 * cutoff + 1) as usize;
    let total = width.pow(n as u32);
    let mut s = vec![0i64; n];
    let mut acc = Complex64::new(0.0, 0.0);
    'outer: for flat in 0..total {
        let mut rem = flat;
        for d in (0..n).rev() {
            s[d] = (rem % width) as i64 - cutoff;
            rem /= width;
        }
        for j in 0..n {
            for k in j + 1..n {
                if s[j] == s[k] {
                    continue 'outer;
                }
            }
        }
        let mut dsq = 1.0;
        for j in 0..n {
            for k in j + 1..n {
                dsq *= (s[k] - s[j]) as f64;
            }
        }
        let damp: f64 = s.iter().map(|&k| -epsilon * (k * k) as f64).sum();
        acc += sf(&s)
            * gelfand_naimark_unit_circle(&minus_theta, &s)?
            * dsq
            * dsq
            * damp.exp();
    }
    let z: Vec<Complex64> = theta
        .iter()
        .map(|&t| Complex64::from_polar(1.0, t))
        .collect();
    let dabs2 = crate::ensemble::vandermonde_complex(&z).norm_sqr();
    Ok((acc.re) * dabs2 / (pref * (2.0 * PI).powi(n as i32)))
}
