//! Special functions used by the transform and spherical layers: Bessel J,
//! complex gamma, Kummer's confluent hypergeometric, and the Kolmogorov
//! distribution for the statistical harness.

use num_complex::Complex64;
use std::f64::consts::PI;

pub use statrs::function::gamma::{gamma, ln_gamma};

/// Lanczos coefficients (g = 7).
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function for complex argument (Lanczos approximation with
/// reflection for Re z < 1/2).
pub fn gamma_complex(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
        let s = (PI * z).sin();
        if s.norm() == 0.0 {
            return Complex64::new(f64::NAN, f64::NAN);
        }
        return PI / (s * gamma_complex(Complex64::new(1.0, 0.0) - z));
    }
    let z = z - 1.0;
    let mut acc = Complex64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + 7.5;
    (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * acc
}

/// J_0 by power series (small u) or Hankel's asymptotic expansion (large u).
pub fn bessel_j0(u: f64) -> f64 {
    bessel_jn(0, u)
}

pub fn bessel_j1(u: f64) -> f64 {
    bessel_jn(1, u)
}

/// Bessel function of the first kind, integer order n >= 0.
pub fn bessel_jn(n: u32, u: f64) -> f64 {
    debug_assert!(u >= 0.0);
    if u == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if u <= 18.0_f64.max(2.0 * n as f64) {
        jn_series(n, u)
    } else {
        jn_asymptotic(n as f64, u)
    }
}

/// Power series sum_k (-1)^k (u/2)^{n+2k} / (k! (n+k)!).
fn jn_series(n: u32, u: f64) -> f64 {
    let half = 0.5 * u;
    let mut term = half.powi(n as i32) / gamma(n as f64 + 1.0);
    let mut sum = term;
    let h2 = half * half;
    for k in 1..200 {
        term *= -h2 / (k as f64 * (k as f64 + n as f64));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Hankel's asymptotic expansion, adequate to ~1e-11 for u >= 12.
fn jn_asymptotic(nu: f64, u: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    // a_k(nu) = prod_{m=1..k} (mu - (2m-1)^2) / (k! 8^k u^k)
    for k in 1..=8 {
        let m = (2 * k - 1) as f64;
        term *= (mu - m * m) / (k as f64 * 8.0 * u);
        if k % 2 == 1 {
            q += if (k / 2) % 2 == 0 { term } else { -term };
        } else {
            p += if (k / 2) % 2 == 1 { -term } else { term };
        }
    }
    let chi = u - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * u)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// J_{-1/2}(u) = sqrt(2/(pi u)) cos u.
pub fn bessel_j_minus_half(u: f64) -> f64 {
    (2.0 / (PI * u)).sqrt() * u.cos()
}

/// J_{1/2}(u) = sqrt(2/(pi u)) sin u.
pub fn bessel_j_plus_half(u: f64) -> f64 {
    (2.0 / (PI * u)).sqrt() * u.sin()
}

/// J_nu for integer or half-integer nu >= -1/2; half-integer orders climb
/// by the recurrence J_{nu+1} = (2 nu / u) J_nu - J_{nu-1}, which is stable
/// for nu below u (the large-argument regime where it is used).
pub fn bessel_j_real_order(nu: f64, u: f64) -> f64 {
    let twice = (2.0 * nu).round() as i64;
    debug_assert!((2.0 * nu - twice as f64).abs() < 1e-12 && twice >= -1);
    if twice % 2 == 0 {
        bessel_jn((twice / 2) as u32, u)
    } else {
        let mut jm = bessel_j_minus_half(u);
        let mut jp = bessel_j_plus_half(u);
        let mut order = 0.5;
        while order < nu {
            let next = (2.0 * order / u) * jp - jm;
            jm = jp;
            jp = next;
            order += 1.0;
        }
        if nu < 0.0 {
            jm
        } else {
            jp
        }
    }
}

/// Kummer's confluent hypergeometric 1F1(a; b; z) for real parameters.
///
/// Negative arguments are routed through 1F1(a;b;z) = e^z 1F1(b-a;b;-z)
/// so the series is summed at non-negative argument.
pub fn kummer_1f1(a: f64, b: f64, z: f64) -> f64 {
    assert!(b > 0.0, "kummer_1f1 requires b > 0");
    if z < 0.0 {
        return z.exp() * kummer_series(b - a, b, -z);
    }
    kummer_series(a, b, z)
}

fn kummer_series(a: f64, b: f64, z: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for q in 0..1000 {
        let qf = q as f64;
        term *= (a + qf) / (b + qf) * z / (qf + 1.0);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            return sum;
        }
    }
    sum
}

/// Kolmogorov distribution survival function
/// Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sided KS p-value from a statistic D with effective sample size n_eff
/// (n for one-sample, n*m/(n+m) for two-sample).
pub fn ks_p_value(d: f64, n_eff: f64) -> f64 {
    kolmogorov_survival(n_eff.sqrt() * d)
}

/// Chi-square survival function with k degrees of freedom.
pub fn chi2_survival(x: f64, k: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    statrs::function::gamma::gamma_ur(0.5 * k, 0.5 * x)
}

/// prod_{j=0}^{n} j!
pub fn superfactorial(n: u32) -> f64 {
    let mut acc = 1.0f64;
    let mut fact = 1.0f64;
    for j in 2..=n as u64 {
        fact *= j as f64;
        acc *= fact;
    }
    acc
}
