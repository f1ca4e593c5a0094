//! The derivative principles: joint spectral densities expressed as a
//! Vandermonde polynomial times a Vandermonde polynomial of differential
//! operators acting on a weight of simpler matrix statistics, for all six
//! matrix spaces, plus the additive convolution corollaries, LU weights,
//! and the polynomial-ensemble weight recovery.
//!
//! The Hankel-class principle carries the sign (-1)^{n(n-1)/2} in its
//! prefactor, consistent with the normalization of the Bessel spherical
//! function in [`crate::spherical`]; with it the chiral Gaussian maps to
//! the (positive) Laguerre density on every n.

use crate::ensemble::{c_nu, vandermonde, vandermonde_complex, MatrixSpace, Nu, SpaceKind};
use crate::error::{Result, RmtError};
use crate::grid::{GridAxis, GridDensity};
use crate::haar::UnitaryCoordinates;
use crate::quad;
use crate::special::{gamma, superfactorial};
use crate::transforms::{
    abel_inverse, abel_inverse_half, fourier_series_weight, fourier_weight, gamma_mellin_axis,
    mellin_inverse_1d,
};
use crate::weights::{
    apply_vandermonde, finite_difference_oracle, Atom, Domain, OpKind, Term, VandermondeOperator,
    WeightFunction,
};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Which Vandermonde factor multiplies the operator image.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VdKind {
    /// Delta(x)
    PlainX,
    /// Delta(lambda^2) (signed-eigenvalue forms)
    SquaredArg,
    /// prod_j lambda_j * Delta(lambda^2) (odd signed-eigenvalue form)
    SquaredArgTimesArg,
    /// Delta(e^{i theta})
    UnitCircle,
}

/// Weight preprocessing applied before the Vandermonde operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightPreprocessor {
    Identity,
    AbelInverse(u32),
    AbelHalf(Nu),
    LuWeight,
    TorusWeight,
}

/// The resolved (operator, prefactor, preprocessor) triple of one space.
#[derive(Clone, Debug)]
pub struct PrincipleCase {
    pub space: MatrixSpace,
    pub operator: VandermondeOperator,
    pub prefactor: f64,
    pub preprocessor: WeightPreprocessor,
}

impl PrincipleCase {
    pub fn for_space(space: &MatrixSpace) -> Result<Self> {
        let n = space.n();
        let case = match space.kind() {
            SpaceKind::Herm => PrincipleCase {
                space: *space,
                operator: VandermondeOperator::new(OpKind::FlatDeriv, n),
                prefactor: 1.0 / superfactorial(n as u32),
                preprocessor: WeightPreprocessor::Identity,
            },
            SpaceKind::IoEven | SpaceKind::IoOdd | SpaceKind::Usp | SpaceKind::ChiralRect => {
                let nu = space.nu().unwrap();
                let preprocessor = match nu {
                    Nu::Int(m) => WeightPreprocessor::AbelInverse(m),
                    half => WeightPreprocessor::AbelHalf(half),
                };
                // the anti-self-dual case reuses the odd antisymmetric
                // constants: the squared-singular-value statistics agree
                let c = c_nu(n, nu, false);
                let nfact = gamma(n as f64 + 1.0);
                PrincipleCase {
                    space: *space,
                    operator: VandermondeOperator::new(OpKind::HankelDeriv(nu), n),
                    prefactor: half_turn_sign(n) / (nfact * c),
                    preprocessor,
                }
            }
            SpaceKind::HermPlus => PrincipleCase {
                space: *space,
                operator: VandermondeOperator::new(OpKind::MellinDeriv, n),
                prefactor: 1.0 / superfactorial(n as u32),
                preprocessor: WeightPreprocessor::LuWeight,
            },
            SpaceKind::Unitary => PrincipleCase {
                space: *space,
                operator: VandermondeOperator::new(OpKind::TorusDeriv, n),
                prefactor: 1.0 / superfactorial(n as u32),
                preprocessor: WeightPreprocessor::TorusWeight,
            },
        };
        Ok(case)
    }
}

/// (-1)^{n(n-1)/2}
pub fn half_turn_sign(n: usize) -> f64 {
    if (n * (n - 1) / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// A joint spectral density of the form
/// prefactor * Vd(x) * (operator image weight)(x).
#[derive(Clone, Debug)]
pub struct PrincipleDensity {
    pub arity: usize,
    pub prefactor: f64,
    pub vd: VdKind,
    pub weight: WeightFunction,
    /// Count of torus coefficients at repeated indices that the operator
    /// annihilates (logged for transparency).
    pub annihilated: usize,
}

impl PrincipleDensity {
    pub fn eval_complex(&self, x: &[f64]) -> Complex64 {
        let vd = match self.vd {
            VdKind::PlainX => Complex64::new(vandermonde(x), 0.0),
            VdKind::SquaredArg => {
                let sq: Vec<f64> = x.iter().map(|&v| v * v).collect();
                Complex64::new(vandermonde(&sq), 0.0)
            }
            VdKind::SquaredArgTimesArg => {
                let sq: Vec<f64> = x.iter().map(|&v| v * v).collect();
                let prod: f64 = x.iter().product();
                Complex64::new(prod * vandermonde(&sq), 0.0)
            }
            VdKind::UnitCircle => {
                let z: Vec<Complex64> =
                    x.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
                vandermonde_complex(&z)
            }
        };
        self.prefactor * vd * self.weight.eval_complex(x)
    }

    /// Real density value; the imaginary residual of the unitary case must
    /// vanish to round-off.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_complex(x).re
    }

    /// Tensor-quadrature mass over a box (n <= 3).
    pub fn mass(&self, lo: f64, hi: f64, nodes: usize) -> f64 {
        let axes: Vec<(f64, f64, usize)> = vec![(lo, hi, nodes); self.arity];
        quad::tensor_integral(&axes, &mut |x| self.eval(x))
    }

    /// Mass over [0, hi]^n via the substitution x_j = t_j^2, which removes
    /// the x^{-1/2} endpoint singularities of half-integer weights.
    pub fn mass_halfline(&self, hi: f64, nodes: usize) -> f64 {
        let axes: Vec<(f64, f64, usize)> = vec![(0.0, hi.sqrt(), nodes); self.arity];
        let mut x = vec![0.0; self.arity];
        quad::tensor_integral(&axes, &mut |t| {
            let mut jac = 1.0;
            for (xi, &ti) in x.iter_mut().zip(t.iter()) {
                *xi = ti * ti;
                jac *= 2.0 * ti;
            }
            jac * self.eval(&x)
        })
    }

    /// Reject densities that are detectably negative on a probe grid.
    fn check_nonnegative(&self, lo: f64, hi: f64) -> Result<()> {
        let steps = 24usize.pow(self.arity.min(2) as u32);
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        let per_axis = if self.arity == 1 { 97 } else { 17 };
        let axes: Vec<GridAxis> = vec![GridAxis::new(lo, hi, per_axis); self.arity];
        let counts: Vec<usize> = axes.iter().map(|a| a.count).collect();
        let total: usize = counts.iter().product();
        let _ = steps;
        for flat in 0..total {
            let mut idx = flat;
            let mut x = vec![0.0; self.arity];
            for d in (0..self.arity).rev() {
                x[d] = axes[d].point(idx % counts[d]);
                idx /= counts[d];
            }
            let v = self.eval(&x);
            scale = scale.max(v.abs());
            worst = worst.min(v);
        }
        if worst < -1e-8 * scale.max(1e-300) {
            return Err(RmtError::Domain(format!(
                "derivative-principle output is negative ({worst:.3e}) on the probe grid: \
                 the input is not a valid (pseudo-)diagonal density"
            )));
        }
        Ok(())
    }
}

fn require_symmetric(w: &WeightFunction) -> Result<()> {
    if !w.symmetric {
        return Err(RmtError::Domain(
            "the diagonal weight must be permutation symmetric".into(),
        ));
    }
    if w.arity >= 2 {
        for seed in [[0.31f64, -0.77], [1.2, 0.45], [-0.6, 2.0]] {
            let mut a = vec![0.0; w.arity];
            a[0] = seed[0];
            a[1] = seed[1];
            let mut b = a.clone();
            b.swap(0, 1);
            let (va, vb) = (w.eval_complex(&a), w.eval_complex(&b));
            if (va - vb).norm() > 1e-8 * (1.0 + va.norm()) {
                return Err(RmtError::Domain(
                    "weight evaluates asymmetrically under argument swap".into(),
                ));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// the six principles

/// Hermitian: f(x) = (prod_{j<=n} j!)^{-1} Delta(x) Delta(-d/dx) f_diag(x).
pub fn derivative_principle_herm(f_diag: &WeightFunction) -> Result<PrincipleDensity> {
    if f_diag.domain != Domain::RealLine {
        return Err(RmtError::Type("Hermitian principle needs a real-line weight".into()));
    }
    require_symmetric(f_diag)?;
    let n = f_diag.arity;
    let op = VandermondeOperator::new(OpKind::FlatDeriv, n);
    let image = apply_vandermonde(&op, f_diag)?;
    Ok(PrincipleDensity {
        arity: n,
        prefactor: 1.0 / superfactorial(n as u32),
        vd: VdKind::PlainX,
        weight: image,
        annihilated: 0,
    })
}

/// Unified Hankel-class principle: squared-singular-value density from the
/// pseudo-diagonal density (a function of the pre-squared variable).
pub fn derivative_principle_hankel_unified(
    f_diag: &WeightFunction,
    nu: Nu,
) -> Result<PrincipleDensity> {
    if f_diag.domain != Domain::RealLine {
        return Err(RmtError::Type("Hankel principle needs a real-line weight".into()));
    }
    require_symmetric(f_diag)?;
    if !f_diag.is_even_each_axis() {
        return Err(RmtError::Domain(
            "the pseudo-diagonal density must be even in each argument".into(),
        ));
    }
    let n = f_diag.arity;
    let w = match nu {
        Nu::Int(m) => abel_inverse(f_diag, m)?,
        half => abel_inverse_half(f_diag, half)?,
    };
    let op = VandermondeOperator::new(OpKind::HankelDeriv(nu), n);
    let image = apply_vandermonde(&op, &w)?;
    let c = c_nu(n, nu, false);
    let nfact = gamma(n as f64 + 1.0);
    let out = PrincipleDensity {
        arity: n,
        prefactor: half_turn_sign(n) / (nfact * c),
        vd: VdKind::PlainX,
        weight: image,
        annihilated: 0,
    };
    out.check_nonnegative(1e-3, 12.0)?;
    Ok(out)
}

/// Antisymmetric even (2n x 2n): nu = -1/2.
pub fn derivative_principle_io_even(f_diag: &WeightFunction) -> Result<PrincipleDensity> {
    derivative_principle_hankel_unified(f_diag, Nu::MinusHalf)
}

/// Antisymmetric odd (2n+1 x 2n+1) and anti-self-dual: nu = +1/2.
pub fn derivative_principle_io_odd(f_diag: &WeightFunction) -> Result<PrincipleDensity> {
    derivative_principle_hankel_unified(f_diag, Nu::PlusHalf)
}

/// Signed-eigenvalue form of the antisymmetric principles:
/// even: f_ev(l) = s_n pi^{n/2} / (2^{n(n-1)} n! C_{-1/2})
///        Delta(l^2) Delta(-d^2) f_diag(l);
/// odd adds prod l_j, prod(-d/dl), and 2^{-n^2} in place of 2^{-n(n-1)}.
pub fn eigenvalue_form_io(f_diag: &WeightFunction, odd: bool) -> Result<PrincipleDensity> {
    if f_diag.domain != Domain::RealLine {
        return Err(RmtError::Type("eigenvalue form needs a real-line weight".into()));
    }
    require_symmetric(f_diag)?;
    if !f_diag.is_even_each_axis() {
        return Err(RmtError::Domain(
            "the pseudo-diagonal density must be even in each argument".into(),
        ));
    }
    let n = f_diag.arity;
    let nfact = gamma(n as f64 + 1.0);
    let op = VandermondeOperator::new(OpKind::FlatSecondDeriv, n);
    let (weight, prefactor, vd) = if odd {
        let mut pre = f_diag.clone();
        for axis in 0..n {
            pre = crate::weights::apply_one_dim(OpKind::FlatDeriv, axis, &pre)?;
        }
        let image = apply_vandermonde(&op, &pre)?;
        let c = c_nu(n, Nu::PlusHalf, false);
        (
            image,
            half_turn_sign(n) * PI.powf(n as f64 / 2.0)
                / (2f64.powi((n * n) as i32) * nfact * c),
            VdKind::SquaredArgTimesArg,
        )
    } else {
        let image = apply_vandermonde(&op, f_diag)?;
        let c = c_nu(n, Nu::MinusHalf, false);
        (
            image,
            half_turn_sign(n) * PI.powf(n as f64 / 2.0)
                / (2f64.powi((n * (n - 1)) as i32) * nfact * c),
            VdKind::SquaredArg,
        )
    };
    Ok(PrincipleDensity {
        arity: n,
        prefactor,
        vd,
        weight,
        annihilated: 0,
    })
}

/// Positive definite Hermitian: f(x) = (prod j!)^{-1} Delta(x)
/// Delta(-x d/dx) g(x) with g the normalized LU-diagonal weight.
pub fn derivative_principle_hermplus(g: &WeightFunction) -> Result<PrincipleDensity> {
    if g.domain != Domain::HalfLine {
        return Err(RmtError::Type("Herm_+ principle needs a half-line weight".into()));
    }
    require_symmetric(g)?;
    let n = g.arity;
    let op = VandermondeOperator::new(OpKind::MellinDeriv, n);
    let image = apply_vandermonde(&op, g)?;
    Ok(PrincipleDensity {
        arity: n,
        prefactor: 1.0 / superfactorial(n as u32),
        vd: VdKind::PlainX,
        weight: image,
        annihilated: 0,
    })
}

/// Unitary: f(e^{i theta}) = (prod j!)^{-1} Delta(e^{i theta})
/// Delta(i d/dtheta) g(theta), exact in Fourier coefficients. Coefficients
/// of g at repeated indices are annihilated by the operator; their count
/// is reported on the output.
pub fn derivative_principle_unitary(g: &WeightFunction) -> Result<PrincipleDensity> {
    if g.domain != Domain::Torus {
        return Err(RmtError::Type("unitary principle needs a torus weight".into()));
    }
    require_symmetric(g)?;
    let n = g.arity;
    // count repeated-index coefficient patterns on the support
    let mut annihilated = 0usize;
    for t in &g.terms {
        let supports: Vec<Vec<i64>> = t
            .atoms
            .iter()
            .map(|a| match a {
                Atom::Trig { coeffs } => coeffs.keys().copied().collect(),
                _ => vec![],
            })
            .collect();
        let mut stack = vec![(0usize, Vec::<i64>::new())];
        while let Some((axis, prefix)) = stack.pop() {
            if axis == n {
                let mut sorted = prefix.clone();
                sorted.sort_unstable();
                if sorted.windows(2).any(|w| w[0] == w[1]) {
                    annihilated += 1;
                }
                continue;
            }
            for &k in &supports[axis] {
                let mut next = prefix.clone();
                next.push(k);
                stack.push((axis + 1, next));
            }
        }
    }
    let op = VandermondeOperator::new(OpKind::TorusDeriv, n);
    let image = apply_vandermonde(&op, g)?;
    Ok(PrincipleDensity {
        arity: n,
        prefactor: 1.0 / superfactorial(n as u32),
        vd: VdKind::UnitCircle,
        weight: image,
        annihilated,
    })
}

// ---------------------------------------------------------------------------
// additive convolution

/// Closed-form additive convolution of two pure-Gaussian product weights
/// (polynomial-free atoms), term by term and axis by axis.
pub fn convolve_gaussian_weights(
    a: &WeightFunction,
    b: &WeightFunction,
) -> Result<WeightFunction> {
    if a.domain != Domain::RealLine || b.domain != Domain::RealLine || a.arity != b.arity {
        return Err(RmtError::Type("convolution needs real-line weights of equal arity".into()));
    }
    let mut terms = Vec::new();
    for ta in &a.terms {
        for tb in &b.terms {
            let mut atoms = Vec::with_capacity(a.arity);
            for (atom_a, atom_b) in ta.atoms.iter().zip(&tb.atoms) {
                let (Atom::Gaussian { poly: pa, rate: ra, drift: da },
                     Atom::Gaussian { poly: pb, rate: rb, drift: db }) = (atom_a, atom_b)
                else {
                    return Err(RmtError::Type("non-Gaussian atom in convolution".into()));
                };
                if pa.len() != 1 || pb.len() != 1 {
                    return Err(RmtError::Type(
                        "closed-form convolution covers polynomial-free Gaussian atoms; \
                         use the grid path otherwise"
                            .into(),
                    ));
                }
                let mass =
                    |c: f64, r: f64, d: f64| c * (PI / r).sqrt() * (d * d / (4.0 * r)).exp();
                let (m1, m2) = (mass(pa[0], *ra, *da), mass(pb[0], *rb, *db));
                let (mu1, var1) = (da / (2.0 * ra), 1.0 / (2.0 * ra));
                let (mu2, var2) = (db / (2.0 * rb), 1.0 / (2.0 * rb));
                let var = var1 + var2;
                let mu = mu1 + mu2;
                let rate = 0.5 / var;
                let drift = mu / var;
                let amp = m1 * m2 / (2.0 * PI * var).sqrt() * (-mu * mu / (2.0 * var)).exp();
                atoms.push(Atom::Gaussian { poly: vec![amp], rate, drift });
            }
            terms.push(Term { atoms });
        }
    }
    WeightFunction::new(Domain::RealLine, a.arity, terms, a.symmetric && b.symmetric)
}

/// Additive convolution corollary: convolve the (pseudo-)diagonal
/// densities, then apply the space's derivative principle.
pub fn additive_convolve(
    fa_diag: &WeightFunction,
    fb_diag: &WeightFunction,
    space: &MatrixSpace,
) -> Result<PrincipleDensity> {
    let conv = convolve_gaussian_weights(fa_diag, fb_diag)?;
    match space.kind() {
        SpaceKind::Herm => derivative_principle_herm(&conv),
        SpaceKind::IoEven | SpaceKind::IoOdd | SpaceKind::Usp | SpaceKind::ChiralRect => {
            derivative_principle_hankel_unified(&conv, space.nu().unwrap())
        }
        _ => Err(RmtError::Type(
            "additive convolution applies to the additive spaces (Herm, M_nu)".into(),
        )),
    }
}

// ---------------------------------------------------------------------------
// LU weights and the unitary multiplicative weight

/// Closed-form LU-diagonal weight of the complex Wishart ensemble
/// X = G^dagger G (G dof x n standard complex Ginibre):
/// u_jj are independent Gamma(dof - j + 1) variables, so
/// g(u) = prod_j u_j^{dof-n} e^{-u_j} / Gamma(dof - j + 1).
pub fn lu_weight_wishart(n: usize, dof: usize) -> Result<WeightFunction> {
    if dof < n {
        return Err(RmtError::Config("Wishart dof must be at least n".into()));
    }
    let mut norm = 1.0;
    for j in 1..=n {
        norm /= gamma((dof - j + 1) as f64 + 1.0 - 1.0);
    }
    let atom = Atom::Gamma {
        poly: vec![1.0],
        exponent: (dof - n) as f64,
        rate: 1.0,
    };
    let mut w = WeightFunction::polya(atom, n);
    w = w.scale(norm);
    Ok(w)
}

/// The normalized LU weight g(u) = f_u(u) prod u_j^{-n+j} from positive
/// definite samples: returns the per-sample g-coordinates (u_11..u_nn) for
/// histogram comparison against a closed form.
pub fn lu_diagonals_of_samples(samples: &[crate::ensemble::CMatrix]) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(samples.len());
    for m in samples {
        let d = crate::ensemble::lu_diagonal(m)?;
        let mut u = Vec::with_capacity(d.len());
        for z in d {
            if z.re <= 0.0 || z.im.abs() > 1e-8 * z.re.abs() {
                return Err(RmtError::Data(format!(
                    "non-positive LU pivot {z} in a positive definite sample"
                )));
            }
            u.push(z.re);
        }
        out.push(u);
    }
    Ok(out)
}

/// Estimate the multiplicative torus weight g of an invariant unitary
/// ensemble from principal-minor radii and phases: the Fourier coefficient
/// at any integer vector s with distinct entries is the ensemble average of
/// prod_l (r_l e^{i phase_l})^{t_l - t_{l+1} - 1} e^{i phase_n t_n} with t
/// the decreasing rearrangement of s; coefficients at repeated indices
/// vanish. Samples with a radius at 1 beyond round-off are skipped
/// (a measure-zero event).
pub fn unitary_weight_g(coords: &[UnitaryCoordinates], cutoff: i64) -> Result<WeightFunction> {
    let n = coords
        .first()
        .map(|c| c.n)
        .ok_or_else(|| RmtError::Data("empty sample stream".into()))?;
    // precompute (radii, phases), skipping degenerate samples
    let mut stats: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(coords.len());
    for c in coords {
        let r = c.radii();
        if r.iter().any(|&v| v >= 1.0 + 1e-12) {
            continue;
        }
        stats.push((r, c.minor_phases()));
    }
    if stats.is_empty() {
        return Err(RmtError::Data("no usable samples".into()));
    }
    let width = (2 * cutoff + 1) as usize;
    let total = width.pow(n as u32);
    let mut terms = Vec::new();
    let mut s = vec![0i64; n];
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
        let mut t = s.clone();
        t.sort_unstable_by(|a, b| b.cmp(a));
        // ensemble average of the chamber monomial
        let mut mean = Complex64::new(0.0, 0.0);
        for (i, (r, ph)) in stats.iter().enumerate() {
            let mut v = Complex64::from_polar(1.0, ph[n - 1] * t[n - 1] as f64);
            for l in 0..n - 1 {
                let e = t[l] - t[l + 1] - 1;
                debug_assert!(e >= 0);
                v *= Complex64::from_polar(r[l].min(1.0), ph[l]).powu(e as u32);
            }
            mean += (v - mean) / (i + 1) as f64;
        }
        // one separable term: (2 pi)^{-n} mean * prod_j e^{-i s_j theta_j}
        let mut atoms = Vec::with_capacity(n);
        for (j, &sj) in s.iter().enumerate() {
            let c = if j == 0 {
                mean / (2.0 * PI).powi(n as i32)
            } else {
                Complex64::new(1.0, 0.0)
            };
            let coeffs: BTreeMap<i64, Complex64> = [(-sj, c)].into_iter().collect();
            atoms.push(Atom::Trig { coeffs });
        }
        terms.push(Term { atoms });
    }
    let mut w = WeightFunction::new(Domain::Torus, n, terms, true)?;
    w.prune();
    Ok(w)
}

/// The multiplicative weight of the circular unitary ensemble:
/// g(theta) = (2 pi)^{-n} perm[e^{-i (j-1) theta_k}].
pub fn cue_weight(n: usize) -> WeightFunction {
    let perms = crate::weights::signed_permutations(n);
    let mut terms = Vec::new();
    for (perm, _) in perms {
        let mut atoms = Vec::with_capacity(n);
        for (k, &rowj) in perm.iter().enumerate() {
            let c = if k == 0 {
                Complex64::new(1.0 / (2.0 * PI).powi(n as i32), 0.0)
            } else {
                Complex64::new(1.0, 0.0)
            };
            let coeffs: BTreeMap<i64, Complex64> = [(-(rowj as i64), c)].into_iter().collect();
            atoms.push(Atom::Trig { coeffs });
        }
        terms.push(Term { atoms });
    }
    WeightFunction::new(Domain::Torus, n, terms, true).unwrap()
}

// ---------------------------------------------------------------------------
// polynomial-ensemble weight recovery

/// Recover the additive weight w with Delta(-d/dx) w = det[w_k(x_j)] by the
/// Fourier route: since F[Delta(-d/dx) w](s) = Delta(is) F w(s), the weight
/// is w = F^{-1}[ det[F w_k(s_j)] / (i^{n(n-1)/2} Delta(s)) ], evaluated on
/// a grid (n <= 2). Near-coincident quadrature nodes are handled by divided
/// differences with the analytic derivative d/ds F w_k = i F[x w_k].
pub fn polynomial_ensemble_weight_fourier(
    ws: &[WeightFunction],
    axes: Vec<GridAxis>,
) -> Result<GridDensity> {
    let at = polynomial_ensemble_weight_fourier_fn(ws)?;
    let n = ws.len();
    let out = GridDensity::from_fn(vec![crate::grid::DomainKind::RealLine; n], axes, |x| at(x));
    if out.values.iter().any(|v| !v.is_finite()) {
        return Err(RmtError::Accuracy("inverse transform failed on the grid".into()));
    }
    Ok(out)
}

/// Pointwise evaluator behind [`polynomial_ensemble_weight_fourier`].
pub fn polynomial_ensemble_weight_fourier_fn(
    ws: &[WeightFunction],
) -> Result<impl Fn(&[f64]) -> f64> {
    let n = ws.len();
    if n > 2 {
        return Err(RmtError::Domain("Fourier weight recovery gridded for n <= 2".into()));
    }
    for w in ws {
        if w.arity != 1 || w.domain != Domain::RealLine {
            return Err(RmtError::Type("component weights must be univariate real-line".into()));
        }
    }
    let ws = ws.to_vec();
    // x-multiplied weights for the derivative
    let xws: Vec<WeightFunction> = ws
        .iter()
        .map(|w| {
            let mut out = w.clone();
            for t in &mut out.terms {
                let Atom::Gaussian { poly, .. } = &mut t.atoms[0] else {
                    unreachable!()
                };
                let mut shifted = vec![0.0];
                shifted.extend_from_slice(poly);
                *poly = shifted;
            }
            out
        })
        .collect();
    // i^{n(n-1)/2} from Delta(is) = i^{n(n-1)/2} Delta(s)
    let ipow = Complex64::i().powu((n * (n - 1) / 2) as u32);
    let ratio = move |s: &[f64]| -> Complex64 {
        // det[F w_k(s_j)] / (i^{n(n-1)/2} Delta(s)) via divided differences
        match n {
            1 => fourier_weight(&ws[0], &[s[0]]).unwrap(),
            2 => {
                let scale = s[0].abs().max(s[1].abs()).max(1.0);
                let f = |k: usize, t: f64| fourier_weight(&ws[k], &[t]).unwrap();
                let dd = if (s[1] - s[0]).abs() > 1e-6 * scale {
                    let det = f(0, s[0]) * f(1, s[1]) - f(0, s[1]) * f(1, s[0]);
                    det / (s[1] - s[0])
                } else {
                    // confluent column: [F w_k(s), d/ds F w_k(s)]
                    let mid = 0.5 * (s[0] + s[1]);
                    let df = |k: usize| {
                        Complex64::i() * fourier_weight(&xws[k], &[mid]).unwrap()
                    };
                    f(0, mid) * df(1) - df(0) * f(1, mid)
                };
                dd / ipow
            }
            _ => unreachable!(),
        }
    };
    // boundedness probe
    for &t in &[0.0, 0.5, 2.0, 5.0] {
        let probe = if n == 1 { vec![t] } else { vec![t, -0.3 * t - 0.1] };
        let v = ratio(&probe);
        if !v.re.is_finite() || v.norm() > 1e8 {
            return Err(RmtError::Accuracy(
                "unbounded det/Vandermonde ratio: ensemble not representable in this class".into(),
            ));
        }
    }
    let l = 10.0;
    Ok(move |x: &[f64]| -> f64 {
        crate::transforms::fourier_inverse_fn(&ratio, x, 0.0, l, 1e-10, 72)
            .map(|v| v.re)
            .unwrap_or(f64::NAN)
    })
}

/// Mellin-route counterpart for multiplicative polynomial ensembles,
/// n <= 2, evaluated pointwise: w(x) = M^{-1}[ det[M w_k(s_j)] / Delta(s) ].
/// Distinct per-axis contour offsets keep the Vandermonde away from zero.
pub fn polynomial_ensemble_weight_mellin_at(
    gammas: &[(f64, f64)], // (exponent, rate) of w_k(x) = x^exponent e^{-rate x}
    c: f64,
    x: &[f64],
) -> Result<f64> {
    let n = gammas.len();
    if n != 2 {
        return Err(RmtError::Domain("Mellin weight recovery implemented for n = 2".into()));
    }
    let offsets = [0.0, 0.37];
    let m_at = |k: usize, s: Complex64| -> Complex64 {
        gamma_mellin_axis(&[1.0], gammas[k].0, gammas[k].1, s)
    };
    // iterated univariate inversion: first in s_1, then in s_2
    let inner = |x0: f64, s1: Complex64| -> Complex64 {
        // univariate inverse Mellin in the first variable of
        // det[M w_k(s_j)] / (s_1 - s_0)... here variables are (s0, s1):
        // ratio(s0, s1) = (Mw0(s0) Mw1(s1) - Mw0(s1) Mw1(s0)) / (s1 - s0)
        let m = |s0: Complex64| (m_at(0, s0) * m_at(1, s1) - m_at(0, s1) * m_at(1, s0)) / (s1 - s0);
        let f = |t: f64| {
            let s0 = Complex64::new(c + offsets[0], t);
            m(s0) * (-s0 * x0.ln()).exp()
        };
        let mut total = Complex64::new(0.0, 0.0);
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut quiet = 0;
        while lo < 300.0 {
            let (vp, _) = quad::adaptive_complex(&mut |t| f(t), lo, hi, 1e-11);
            let (vm, _) = quad::adaptive_complex(&mut |t| f(t), -hi, -lo, 1e-11);
            total += vp + vm;
            if (vp + vm).norm() < 1e-11 {
                quiet += 1;
                if quiet >= 3 {
                    break;
                }
            } else {
                quiet = 0;
            }
            lo = hi;
            hi *= 2.0;
        }
        total / (2.0 * PI)
    };
    let v = mellin_inverse_1d(
        &|s1| inner(x[0], s1),
        x[1],
        c + offsets[1],
        1e-8,
        1e-9,
    )?;
    Ok(v)
}

// ---------------------------------------------------------------------------
// grid path

/// Apply a principle case to a gridded weight via the finite-difference
/// oracle: prefactor * Vd(x) * (FD Vandermonde image)(x).
pub fn principle_on_grid(
    case: &PrincipleCase,
    weight_grid: &GridDensity,
    tol: f64,
) -> Result<GridDensity> {
    let image = finite_difference_oracle(&case.operator, weight_grid, tol)?;
    let mut out = image;
    for flat in 0..out.values.len() {
        let idx = out.unravel(flat);
        let p = out.point(&idx);
        out.values[flat] *= case.prefactor * vandermonde(&p);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn phi(t: f64) -> f64 {
        (-t * t / 2.0).exp() / (2.0 * PI).sqrt()
    }

    #[test]
    fn herm_n1_is_identity() {
        let w = WeightFunction::gaussian_product(1, 0.0, 1.0);
        let f = derivative_principle_herm(&w).unwrap();
        for &x in &[-1.0, 0.0, 2.3] {
            assert_relative_eq!(f.eval(&[x]), phi(x), epsilon = 1e-14);
        }
    }

    #[test]
    fn herm_n2_gue_joint_density() {
        let w = WeightFunction::gaussian_product(2, 0.0, 1.0);
        let f = derivative_principle_herm(&w).unwrap();
        // closed form (1/2)(x2-x1)^2 phi(x1) phi(x2)
        let direct = |x: &[f64]| 0.5 * (x[1] - x[0]).powi(2) * phi(x[0]) * phi(x[1]);
        for pt in [[1.0, -1.0], [0.3, 0.9], [2.0, 2.0], [-0.4, 1.7]] {
            assert_relative_eq!(f.eval(&pt), direct(&pt), epsilon = 1e-13);
        }
        // reference value at (1, -1): 2 phi(1)^2 = 0.117102
        assert_relative_eq!(f.eval(&[1.0, -1.0]), 2.0 * phi(1.0) * phi(1.0), epsilon = 1e-13);
        assert!((f.eval(&[1.0, -1.0]) - 0.117102).abs() < 1e-5);
        // vanishes on the diagonal
        assert_eq!(f.eval(&[0.7, 0.7]), 0.0);
        // normalizes
        assert_relative_eq!(f.mass(-9.0, 9.0, 60), 1.0, max_relative = 1e-6);
    }

    #[test]
    fn herm_rejects_asymmetric_weight() {
        let w = WeightFunction::product(vec![
            Atom::Gaussian { poly: vec![1.0], rate: 0.5, drift: 0.0 },
            Atom::Gaussian { poly: vec![1.0], rate: 1.5, drift: 0.0 },
        ])
        .unwrap();
        assert!(matches!(
            derivative_principle_herm(&w),
            Err(RmtError::Domain(_))
        ));
    }

    #[test]
    fn io_even_n1_is_chi_square_of_one_dof() {
        let w = WeightFunction::gaussian_product(1, 0.0, 1.0);
        let f = derivative_principle_io_even(&w).unwrap();
        for &x in &[0.2f64, 1.0, 3.5] {
            let want = (-x / 2.0).exp() / (2.0 * PI * x).sqrt();
            assert_relative_eq!(f.eval(&[x]), want, epsilon = 1e-13);
        }
        // tail inherits e^{-x/2}
        let ratio = f.eval(&[24.0]) / f.eval(&[12.0]);
        let want = ((-12.0f64) / 2.0).exp() * (12.0f64 / 24.0).sqrt();
        assert_relative_eq!(ratio, want, max_relative = 1e-10);
    }

    #[test]
    fn io_odd_n1_matches_text_identity() {
        // f(x) = -f_diag'(sqrt(x)) = sqrt(x) phi(sqrt(x)) for standard
        // normal pseudo-diagonals
        let w = WeightFunction::gaussian_product(1, 0.0, 1.0);
        let f = derivative_principle_io_odd(&w).unwrap();
        for &x in &[0.2f64, 1.0, 3.5] {
            assert_relative_eq!(f.eval(&[x]), x.sqrt() * phi(x.sqrt()), epsilon = 1e-13);
        }
        // normalization
        assert_relative_eq!(f.mass_halfline(45.0, 200), 1.0, max_relative = 1e-6);
    }

    #[test]
    fn io_odd_rejects_increasing_diagonal_density() {
        // f_diag prop. to y^2 phi(y) increases away from zero; the n=1 odd
        // principle would be negative near the origin
        let amp = 1.0 / (2.0f64.sqrt() * PI.sqrt()); // normalizes y^2 e^{-y^2/2}... value irrelevant
        let w = WeightFunction::polya(
            Atom::Gaussian { poly: vec![0.0, 0.0, amp], rate: 0.5, drift: 0.0 },
            1,
        );
        assert!(matches!(
            derivative_principle_io_odd(&w),
            Err(RmtError::Domain(_))
        ));
    }

    #[test]
    fn chiral_nu0_yields_laguerre() {
        // n=1: pseudo-diagonal density e^{-y^2}/sqrt(pi) maps to e^{-x}
        let w = WeightFunction::gaussian_product(1, 0.0, 0.5);
        let f = derivative_principle_hankel_unified(&w, Nu::Int(0)).unwrap();
        for &x in &[0.0, 0.7, 3.0] {
            assert_relative_eq!(f.eval(&[x]), (-x).exp(), epsilon = 1e-12);
        }
        // n=2: (1/2) Delta^2 e^{-x1-x2}
        let w2 = WeightFunction::gaussian_product(2, 0.0, 0.5);
        let f2 = derivative_principle_hankel_unified(&w2, Nu::Int(0)).unwrap();
        for pt in [[0.5f64, 2.0], [1.0, 1.0], [0.1, 4.0]] {
            let want = 0.5 * (pt[1] - pt[0]).powi(2) * (-(pt[0] + pt[1])).exp();
            assert!(
                (f2.eval(&pt) - want).abs() < 1e-10,
                "{} vs {want}",
                f2.eval(&pt)
            );
        }
    }

    #[test]
    fn minus_half_reduces_to_io_even() {
        let w = WeightFunction::gaussian_product(2, 0.0, 1.0);
        let a = derivative_principle_hankel_unified(&w, Nu::MinusHalf).unwrap();
        let b = derivative_principle_io_even(&w).unwrap();
        for pt in [[0.4, 1.1], [2.0, 0.3]] {
            assert_relative_eq!(a.eval(&pt), b.eval(&pt), epsilon = 1e-12);
        }
    }

    #[test]
    fn io_even_n2_normalizes() {
        let w = WeightFunction::gaussian_product(2, 0.0, 1.0);
        let f = derivative_principle_io_even(&w).unwrap();
        assert_relative_eq!(f.mass_halfline(60.0, 160), 1.0, max_relative = 1e-4);
    }

    #[test]
    fn eigenvalue_forms_are_consistent_with_squared_forms() {
        // n=1 even: f_ev = f_diag
        let w = WeightFunction::gaussian_product(1, 0.0, 1.0);
        let fe = eigenvalue_form_io(&w, false).unwrap();
        for &l in &[0.3, 1.2] {
            assert_relative_eq!(fe.eval(&[l]), phi(l), epsilon = 1e-13);
        }
        // n=1 odd: f_ev(l) = |l| f(l^2)
        let fo = eigenvalue_form_io(&w, true).unwrap();
        let f = derivative_principle_io_odd(&w).unwrap();
        for &l in &[0.4, 1.5] {
            assert_relative_eq!(fo.eval(&[l]), l * f.eval(&[l * l]), epsilon = 1e-12);
        }
        // n=2 even: f_ev(l) = f(l^2) l1 l2 (on the positive quadrant) and
        // it integrates to 1 over R^2 (quadrature)
        let w2 = WeightFunction::gaussian_product(2, 0.0, 1.0);
        let fe2 = eigenvalue_form_io(&w2, false).unwrap();
        let f2 = derivative_principle_io_even(&w2).unwrap();
        for pt in [[0.5, 1.3], [0.9, 2.1]] {
            let sq = [pt[0] * pt[0], pt[1] * pt[1]];
            assert_relative_eq!(
                fe2.eval(&pt),
                pt[0] * pt[1] * f2.eval(&sq),
                epsilon = 1e-11
            );
        }
        assert_relative_eq!(fe2.mass(-7.0, 7.0, 120), 1.0, max_relative = 1e-6);
    }

    #[test]
    fn gue_plus_gue_is_gue_of_doubled_variance() {
        let w = WeightFunction::gaussian_product(2, 0.0, 1.0);
        let f = additive_convolve(&w, &w, &MatrixSpace::herm(2)).unwrap();
        // GUE with variance 2: (diagonal weight N(0,2)) through the principle
        let w2 = WeightFunction::gaussian_product(2, 0.0, 2.0);
        let direct = derivative_principle_herm(&w2).unwrap();
        for pt in [[0.0, 1.0], [-1.3, 2.2], [0.5, 0.5]] {
            assert!((f.eval(&pt) - direct.eval(&pt)).abs() < 1e-12);
        }
    }

    #[test]
    fn convolution_identity_element() {
        // adding a near-delta diagonal weight changes nothing appreciably
        let w = WeightFunction::gaussian_product(1, 0.0, 1.0);
        let delta_ish = WeightFunction::gaussian_product(1, 0.0, 1e-10);
        let f = additive_convolve(&w, &delta_ish, &MatrixSpace::herm(1)).unwrap();
        let direct = derivative_principle_herm(&w).unwrap();
        for &x in &[-1.0, 0.4, 2.0] {
            assert_relative_eq!(f.eval(&[x]), direct.eval(&[x]), max_relative = 1e-8);
        }
    }

    #[test]
    fn chiral_plus_chiral_closed_form() {
        // two 1x1 Ginibre pseudo-diagonals N(0,1/2) + N(0,1/2) = N(0,1)
        // gives f(x) = (1/2) e^{-x/2}
        let w = WeightFunction::gaussian_product(1, 0.0, 0.5);
        let f = additive_convolve(&w, &w, &MatrixSpace::chiral(1, 0)).unwrap();
        for &x in &[0.1, 1.0, 4.0] {
            assert_relative_eq!(f.eval(&[x]), 0.5 * (-x / 2.0).exp(), epsilon = 1e-12);
        }
    }

    #[test]
    fn convolve_domain_mismatch_is_type_error() {
        let a = WeightFunction::gaussian_product(1, 0.0, 1.0);
        let b = WeightFunction::exp_product(1, 1.0);
        assert!(matches!(
            convolve_gaussian_weights(&a, &b),
            Err(RmtError::Type(_))
        ));
    }

    #[test]
    fn wishart_lu_weight_closed_form() {
        // n=1: g = e^{-u}
        let g = lu_weight_wishart(1, 1).unwrap();
        assert_relative_eq!(g.eval(&[0.9]), (-0.9f64).exp(), epsilon = 1e-13);
        // n=2 dof=2: g = e^{-u1-u2}; swap symmetry
        let g = lu_weight_wishart(2, 2).unwrap();
        assert_relative_eq!(g.eval(&[0.3, 1.4]), (-1.7f64).exp(), epsilon = 1e-13);
        assert_relative_eq!(g.eval(&[1.4, 0.3]), g.eval(&[0.3, 1.4]), epsilon = 1e-15);
    }

    #[test]
    fn hermplus_principle_gives_lue() {
        let g = lu_weight_wishart(2, 2).unwrap();
        let f = derivative_principle_hermplus(&g).unwrap();
        for pt in [[0.5f64, 2.0], [1.0, 3.0]] {
            let want = 0.5 * (pt[1] - pt[0]).powi(2) * (-(pt[0] + pt[1])).exp();
            assert!((f.eval(&pt) - want).abs() < 1e-12);
        }
        // n=1: f = g
        let g1 = lu_weight_wishart(1, 1).unwrap();
        let f1 = derivative_principle_hermplus(&g1).unwrap();
        assert_relative_eq!(f1.eval(&[1.2]), (-1.2f64).exp(), epsilon = 1e-13);
    }

    #[test]
    fn cue_weight_reproduces_cue_density() {
        // n=2
        let g = cue_weight(2);
        let f = derivative_principle_unitary(&g).unwrap();
        for pt in [[0.4, -1.0], [2.0, 0.1]] {
            let z: Vec<Complex64> = pt.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
            let want = vandermonde_complex(&z).norm_sqr() / (2.0 * (2.0 * PI).powi(2));
            assert_relative_eq!(f.eval(&pt), want, epsilon = 1e-12);
        }
        // n=1: g = (2pi)^{-1} maps to itself
        let g1 = cue_weight(1);
        let f1 = derivative_principle_unitary(&g1).unwrap();
        assert_relative_eq!(f1.eval(&[0.77]), 1.0 / (2.0 * PI), epsilon = 1e-14);
        // n=3: matches the Weyl density with F = 1 to high accuracy
        let g3 = cue_weight(3);
        let f3 = derivative_principle_unitary(&g3).unwrap();
        for pt in [[0.4, -1.0, 2.2], [1.0, 0.0, -2.0]] {
            let z: Vec<Complex64> = pt.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
            let want = vandermonde_complex(&z).norm_sqr() / (6.0 * (2.0 * PI).powi(3));
            assert_relative_eq!(f3.eval(&pt), want, epsilon = 1e-10);
            assert!(f3.eval(&pt) >= 0.0);
        }
    }

    #[test]
    fn unitary_weight_mc_estimates_cue_coefficients() {
        use crate::ensemble::seeded_rng;
        use crate::haar::sample_haar_coordinates;
        let mut rng = seeded_rng(41);
        let coords: Vec<UnitaryCoordinates> =
            (0..20_000).map(|_| sample_haar_coordinates(2, &mut rng)).collect();
        let g = unitary_weight_g(&coords, 2).unwrap();
        // Fourier coefficients: 1 at permutations of (0,1), ~0 elsewhere
        let f10 = fourier_series_weight(&g, &[1, 0]).unwrap();
        let f01 = fourier_series_weight(&g, &[0, 1]).unwrap();
        let f20 = fourier_series_weight(&g, &[2, 0]).unwrap();
        assert!((f10 - Complex64::new(1.0, 0.0)).norm() < 0.05, "{f10}");
        assert!((f01 - Complex64::new(1.0, 0.0)).norm() < 0.05, "{f01}");
        assert!(f20.norm() < 0.05, "{f20}");
        // the estimated weight runs the principle and stays close to CUE
        let f = derivative_principle_unitary(&g).unwrap();
        let exact = derivative_principle_unitary(&cue_weight(2)).unwrap();
        for pt in [[0.5, -0.5], [1.2, 2.6]] {
            assert!((f.eval(&pt) - exact.eval(&pt)).abs() < 0.05);
        }
    }

    #[test]
    fn polynomial_ensemble_weight_forward_check() {
        // w_k(x) = x^{k-1} e^{-x^2/2}, n = 2: the recovered w satisfies
        // Delta(-d/dx) w = det[w_k(x_j)] (checked by finite differences)
        let ws: Vec<WeightFunction> = (0..2)
            .map(|k| {
                let mut poly = vec![0.0; k + 1];
                poly[k] = 1.0;
                WeightFunction::product(vec![Atom::Gaussian { poly, rate: 0.5, drift: 0.0 }])
                    .unwrap()
            })
            .collect();
        // coarse grid sanity: the gridded weight is finite and real
        let axes = vec![GridAxis::new(-3.0, 3.0, 25), GridAxis::new(-3.0, 3.0, 25)];
        let wg = polynomial_ensemble_weight_fourier(&ws, axes).unwrap();
        assert!(wg.values.iter().all(|v| v.is_finite()));

        // forward check at probe points with 4th-order stencils on
        // pointwise evaluations: (D2 - D1) w = det[w_k(x_j)]
        let w_at = polynomial_ensemble_weight_fourier_fn(&ws).unwrap();
        let h = 0.05;
        let d4 = |g: &dyn Fn(f64) -> f64, t: f64| {
            (-g(t + 2.0 * h) + 8.0 * g(t + h) - 8.0 * g(t - h) + g(t - 2.0 * h)) / (12.0 * h)
        };
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for pt in [[0.6f64, -0.9], [1.2, 0.3], [-0.4, 1.6]] {
            let along0 = |t: f64| w_at(&[t, pt[1]]);
            let along1 = |t: f64| w_at(&[pt[0], t]);
            // (D2 - D1) with D = -d/dx is d/dx_1 - d/dx_2
            let image = d4(&along0, pt[0]) - d4(&along1, pt[1]);
            let det = ws[0].eval(&[pt[0]]) * ws[1].eval(&[pt[1]])
                - ws[0].eval(&[pt[1]]) * ws[1].eval(&[pt[0]]);
            worst = worst.max((image - det).abs());
            scale = scale.max(det.abs());
        }
        assert!(worst < 1e-3 * scale.max(1.0), "max err {worst}, scale {scale}");
    }

    #[test]
    fn polynomial_ensemble_weight_n1_is_w1() {
        let w1 = WeightFunction::gaussian_product(1, 0.3, 0.9);
        let axes = vec![GridAxis::new(-4.0, 4.0, 41)];
        let w = polynomial_ensemble_weight_fourier(&[w1.clone()], axes).unwrap();
        for (i, x) in w.axes[0].points().enumerate() {
            assert!((w.values[i] - w1.eval(&[x])).abs() < 1e-7);
        }
    }

    #[test]
    fn laguerre_multiplicative_weight_via_mellin() {
        // w_k(x) = x^{k-1} e^{-x}: det[M w_k(s_j)] / Delta(s) inverts to a
        // weight with Delta(-x d/dx) w = det[w_k(x_j)]
        let gammas = [(0.0, 1.0), (1.0, 1.0)];
        let at = |x: &[f64]| polynomial_ensemble_weight_mellin_at(&gammas, 1.6, x).unwrap();
        let h = 1e-4;
        for pt in [[0.8, 1.9], [1.4, 0.6]] {
            // finite-difference Delta(-x d/dx) at pt
            let d0 = |x: &[f64]| {
                let mut xp = x.to_vec();
                xp[0] += h;
                let mut xm = x.to_vec();
                xm[0] -= h;
                -x[0] * (at(&xp) - at(&xm)) / (2.0 * h)
            };
            let image = {
                // (D2 - D1) w at pt
                let mut xp = pt.to_vec();
                xp[1] += h;
                let mut xm = pt.to_vec();
                xm[1] -= h;
                let d1w = -pt[1] * (at(&xp) - at(&xm)) / (2.0 * h);
                d1w - d0(&pt)
            };
            let det = pt[0].powi(0) * (-pt[0]).exp() * pt[1].powi(1) * (-pt[1]).exp()
                - pt[1].powi(0) * (-pt[1]).exp() * pt[0].powi(1) * (-pt[0]).exp();
            assert!(
                (image - det).abs() < 2e-3 * det.abs().max(0.05),
                "{image} vs {det}"
            );
        }
    }

    #[test]
    fn uniqueness_probe_detects_perturbations() {
        // adding a nonzero symmetric Gaussian perturbation to the weight
        // changes the principle output somewhere
        use crate::ensemble::seeded_rng;
        use rand::Rng;
        let mut rng = seeded_rng(42);
        let base = WeightFunction::gaussian_product(2, 0.0, 1.0);
        let f0 = derivative_principle_herm(&base).unwrap();
        for _ in 0..10 {
            let rate: f64 = rng.gen_range(0.3..1.5);
            let amp: f64 = rng.gen_range(0.05..0.3);
            let pert = WeightFunction::polya(
                Atom::Gaussian { poly: vec![amp], rate, drift: 0.0 },
                2,
            );
            let sum = base.add(&pert).unwrap();
            let f1 = derivative_principle_herm(&sum).unwrap();
            let mut max_change = 0.0f64;
            for pt in [[0.3, -0.9], [1.5, 0.2], [-1.0, 2.0], [0.0, 1.0]] {
                max_change = max_change.max((f1.eval(&pt) - f0.eval(&pt)).abs());
            }
            assert!(max_change > 1e-6, "perturbation not detected");
        }
    }

    #[test]
    fn grid_path_matches_symbolic_on_gue() {
        let w = WeightFunction::gaussian_product(2, 0.0, 1.0);
        let case = PrincipleCase::for_space(&MatrixSpace::herm(2)).unwrap();
        let axes = vec![GridAxis::new(-4.0, 4.0, 161), GridAxis::new(-4.0, 4.0, 161)];
        let wgrid = w.to_grid(axes);
        let fgrid = principle_on_grid(&case, &wgrid, 1e-2).unwrap();
        let sym = derivative_principle_herm(&w).unwrap();
        let mut worst = 0.0f64;
        for flat in 0..fgrid.values.len() {
            let idx = fgrid.unravel(flat);
            if idx.iter().any(|&i| i < 4 || i > 156) {
                continue;
            }
            let p = fgrid.point(&idx);
            worst = worst.max((fgrid.values[flat] - sym.eval(&p)).abs());
        }
        assert!(worst < 2e-3, "max abs err {worst}");
    }
}
