//! Quadrature engine: adaptive Gauss-Kronrod (G7/K15) panels for real and
//! complex integrands, fixed Gauss-Legendre tensor rules for n <= 3, and an
//! averaging accelerator for alternating panel sums.

use num_complex::Complex64;

/// K15 abscissae on [0, 1] side (symmetric).
const XK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_17,
    0.207_784_955_007_898_47,
    0.0,
];
/// K15 weights matching `XK`.
const WK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
/// G7 weights, applied at the odd-indexed Kronrod nodes (0 included).
const WG: [f64; 4] = [
    0.129_484_966_168_869_93,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

/// One G7/K15 panel: returns (K15 value, |K15 - G7| error estimate).
fn kronrod_panel<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k15 = 0.0;
    let mut g7 = 0.0;
    for (i, (&x, &w)) in XK.iter().zip(WK.iter()).enumerate() {
        let s = if x == 0.0 {
            f(c)
        } else {
            f(c - h * x) + f(c + h * x)
        };
        k15 += w * s;
        if i % 2 == 1 {
            g7 += WG[i / 2] * s;
        }
    }
    (k15 * h, (k15 - g7).abs() * h)
}

/// Adaptive G7/K15 on [a, b] to absolute tolerance `tol`.
/// Returns (value, error estimate). A minimum of two subdivision levels
/// guards against narrow integrands slipping between the nodes of a single
/// wide panel.
pub fn adaptive<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    fn rec<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: f64, depth: u32) -> (f64, f64) {
        let (v, e) = kronrod_panel(f, a, b);
        if (depth >= 2 && e <= tol) || depth >= 40 || (b - a).abs() < 1e-300 {
            return (v, e);
        }
        let m = 0.5 * (a + b);
        let (v1, e1) = rec(f, a, m, 0.5 * tol, depth + 1);
        let (v2, e2) = rec(f, m, b, 0.5 * tol, depth + 1);
        (v1 + v2, e1 + e2)
    }
    rec(f, a, b, tol, 0)
}

/// Adaptive integration of a complex-valued integrand (real and imaginary
/// parts refined independently).
pub fn adaptive_complex<F: FnMut(f64) -> Complex64>(
    f: &mut F,
    a: f64,
    b: f64,
    tol: f64,
) -> (Complex64, f64) {
    let (re, er) = adaptive(&mut |x| f(x).re, a, b, tol);
    let (im, ei) = adaptive(&mut |x| f(x).im, a, b, tol);
    (Complex64::new(re, im), er + ei)
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Fixed Gauss-Legendre rule mapped to [a, b], as (node, weight) pairs.
pub fn gl_rule(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (xs, ws) = gauss_legendre(n);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    xs.iter()
        .zip(ws.iter())
        .map(|(&x, &w)| (c + h * x, w * h))
        .collect()
}

/// Tensor-product Gauss-Legendre integral over a box.
pub fn tensor_integral<F: FnMut(&[f64]) -> f64>(axes: &[(f64, f64, usize)], f: &mut F) -> f64 {
    let rules: Vec<Vec<(f64, f64)>> = axes.iter().map(|&(a, b, n)| gl_rule(n, a, b)).collect();
    let mut point = vec![0.0; axes.len()];
    fn rec<F: FnMut(&[f64]) -> f64>(
        rules: &[Vec<(f64, f64)>],
        level: usize,
        point: &mut Vec<f64>,
        f: &mut F,
    ) -> f64 {
        if level == rules.len() {
            return f(point);
        }
        let mut acc = 0.0;
        for k in 0..rules[level].len() {
            let (x, w) = rules[level][k];
            point[level] = x;
            acc += w * rec(rules, level + 1, point, f);
        }
        acc
    }
    rec(&rules, 0, &mut point, f)
}

/// Iterated-averaging (Euler-type) acceleration of a sequence of partial
/// sums of an eventually alternating series.
pub fn accelerate_alternating(partial_sums: &[f64]) -> f64 {
    if partial_sums.is_empty() {
        return 0.0;
    }
    let mut row = partial_sums.to_vec();
    while row.len() > 1 {
        for i in 0..row.len() - 1 {
            row[i] = 0.5 * (row[i] + row[i + 1]);
        }
        row.pop();
    }
    row[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn adaptive_polynomial_exact() {
        let (v, _) = adaptive(&mut |x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-12);
        // antiderivative x^4/4 - x^2 + x over [-1, 3]
        let want = (81.0 / 4.0 - 9.0 + 3.0) - (0.25 - 1.0 - 1.0);
        assert_relative_eq!(v, want, epsilon = 1e-10);
    }

    #[test]
    fn adaptive_gaussian_integral() {
        let (v, e) = adaptive(&mut |x| (-x * x / 2.0).exp(), -10.0, 10.0, 1e-12);
        assert_relative_eq!(v, (2.0 * PI).sqrt(), epsilon = 1e-10);
        assert!(e < 1e-8);
    }

    #[test]
    fn adaptive_complex_phase() {
        let (v, _) = adaptive_complex(&mut |x| Complex64::new(0.0, x).exp(), 0.0, PI, 1e-12);
        // int_0^pi e^{ix} dx = 2i
        assert!((v - Complex64::new(0.0, 2.0)).norm() < 1e-10);
    }

    #[test]
    fn gauss_legendre_degree_exactness() {
        // 20-point GL integrates x^38 exactly on [-1,1]
        let rule = gl_rule(20, -1.0, 1.0);
        let v: f64 = rule.iter().map(|&(x, w)| w * x.powi(38)).sum();
        assert_relative_eq!(v, 2.0 / 39.0, max_relative = 1e-12);
        let s: f64 = rule.iter().map(|&(_, w)| w).sum();
        assert_relative_eq!(s, 2.0, epsilon = 1e-13);
    }

    #[test]
    fn tensor_integral_separates() {
        let mut f = |p: &[f64]| (-p[0] * p[0] - p[1] * p[1]).exp();
        let v = tensor_integral(&[(-6.0, 6.0, 40), (-6.0, 6.0, 40)], &mut f);
        assert_relative_eq!(v, PI, max_relative = 1e-10);
    }

    #[test]
    fn alternating_acceleration_log2() {
        // 1 - 1/2 + 1/3 - ... = ln 2; 16 partial sums, accelerated
        let mut s = 0.0;
        let sums: Vec<f64> = (1..=16)
            .map(|k| {
                s += if k % 2 == 1 { 1.0 / k as f64 } else { -1.0 / k as f64 };
                s
            })
            .collect();
        let v = accelerate_alternating(&sums);
        assert!((v - 2.0f64.ln()).abs() < 1e-6, "got {v}");
    }
}
