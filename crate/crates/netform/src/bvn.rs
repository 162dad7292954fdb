//! Standard normal and bivariate normal kernels.
//!
//! Every link probability, score, and Hessian entry in the model is built
//! from the univariate normal CDF/PDF and the standard bivariate normal CDF
//! `H(a1, a2; rho)` together with its partial derivatives. The CDF follows
//! the Drezner–Wesolowsky approach as modified by Genz: Gauss–Legendre
//! quadrature over the correlation path for moderate `|rho|`, and a
//! region-splitting asymptotic expansion for `|rho| > 0.925`. Accuracy is
//! around 5e-16, comfortably below the 1e-10 contract.
//!
//! Partial derivatives are closed-form: `H_1 = phi(a1) * Phi((a2 - rho*a1)/s)`,
//! `H_rho` equals the bivariate density (Plackett's identity), and the second
//! partials used by the likelihood Hessian reduce to expressions in the first
//! partials and the density.

use statrs::function::erf::erfc_inv;
use std::f64::consts::{PI, SQRT_2};

const TWO_PI: f64 = 2.0 * PI;
const SQRT_TWO_PI: f64 = 2.506_628_274_631_000_5;

/// Arguments beyond this magnitude are treated as the exact marginal limit;
/// the neglected mass is below `Phi(-8) ~ 6.2e-16`.
const TAIL_CLAMP: f64 = 8.0;

/// Errors from the bivariate kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BvnError {
    /// `|rho| >= 1`: the joint distribution degenerates to a line and the
    /// caller must use the limiting univariate formulas instead.
    #[error("correlation must lie strictly inside (-1, 1), got {0}")]
    DegenerateCorrelation(f64),
    #[error("bivariate normal argument is NaN")]
    NanArgument,
}

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    if !x.is_finite() {
        return 0.0;
    }
    (-0.5 * x * x).exp() / SQRT_TWO_PI
}

/// Standard normal quantile function.
pub fn norm_inv_cdf(p: f64) -> f64 {
    assert!((0.0..=1.0).contains(&p), "probability out of range: {p}");
    -SQRT_2 * erfc_inv(2.0 * p)
}

/// CDF value and first partial derivatives of `H(a1, a2; rho)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BvnEval {
    /// `H(a1, a2; rho)`, a probability in `[0, 1]`.
    pub h: f64,
    /// `dH/da1 = phi(a1) * Phi((a2 - rho*a1)/sqrt(1-rho^2)) >= 0`.
    pub h1: f64,
    /// `dH/da2`, symmetric to `h1`.
    pub h2: f64,
    /// `dH/drho`, the bivariate density at `(a1, a2)`, `>= 0`.
    pub hrho: f64,
}

/// Second partial derivatives of `H`, used by the analytic Hessian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BvnSecond {
    pub h11: f64,
    pub h12: f64,
    pub h22: f64,
    pub h1rho: f64,
    pub h2rho: f64,
    pub hrhorho: f64,
}

fn validate(a1: f64, a2: f64, rho: f64) -> Result<(), BvnError> {
    if !(rho.abs() < 1.0) {
        return Err(BvnError::DegenerateCorrelation(rho));
    }
    if a1.is_nan() || a2.is_nan() {
        return Err(BvnError::NanArgument);
    }
    Ok(())
}

/// `Pr(X <= a1, Y <= a2)` for standard bivariate normal `(X, Y)` with
/// correlation `rho`. Accepts `+/-inf` sentinels.
pub fn bvn_cdf(a1: f64, a2: f64, rho: f64) -> Result<f64, BvnError> {
    validate(a1, a2, rho)?;
    Ok(cdf_unchecked(a1, a2, rho))
}

/// CDF plus first partials.
pub fn bvn_partials(a1: f64, a2: f64, rho: f64) -> Result<BvnEval, BvnError> {
    validate(a1, a2, rho)?;
    Ok(partials_unchecked(a1, a2, rho))
}

/// First and second partials in one pass.
pub fn bvn_derivs(a1: f64, a2: f64, rho: f64) -> Result<(BvnEval, BvnSecond), BvnError> {
    validate(a1, a2, rho)?;
    Ok(derivs_unchecked(a1, a2, rho))
}

pub(crate) fn cdf_unchecked(a1: f64, a2: f64, rho: f64) -> f64 {
    if a1 <= -TAIL_CLAMP || a2 <= -TAIL_CLAMP {
        return 0.0;
    }
    if a1 >= TAIL_CLAMP {
        return if a2 >= TAIL_CLAMP { 1.0 } else { norm_cdf(a2) };
    }
    if a2 >= TAIL_CLAMP {
        return norm_cdf(a1);
    }
    bvnu(-a1, -a2, rho).clamp(0.0, 1.0)
}

pub(crate) fn partials_unchecked(a1: f64, a2: f64, rho: f64) -> BvnEval {
    let s = (1.0 - rho * rho).sqrt();
    let h1 = if a1.is_finite() {
        norm_pdf(a1) * norm_cdf((a2 - rho * a1) / s)
    } else {
        0.0
    };
    let h2 = if a2.is_finite() {
        norm_pdf(a2) * norm_cdf((a1 - rho * a2) / s)
    } else {
        0.0
    };
    BvnEval {
        h: cdf_unchecked(a1, a2, rho),
        h1,
        h2,
        hrho: density(a1, a2, rho),
    }
}

pub(crate) fn derivs_unchecked(a1: f64, a2: f64, rho: f64) -> (BvnEval, BvnSecond) {
    let eval = partials_unchecked(a1, a2, rho);
    let omr2 = 1.0 - rho * rho;
    let d = eval.hrho;
    let second = if a1.is_finite() && a2.is_finite() {
        BvnSecond {
            h11: -a1 * eval.h1 - rho * d,
            h12: d,
            h22: -a2 * eval.h2 - rho * d,
            h1rho: -d * (a1 - rho * a2) / omr2,
            h2rho: -d * (a2 - rho * a1) / omr2,
            hrhorho: d * (rho / omr2 + (a1 - rho * a2) * (a2 - rho * a1) / (omr2 * omr2)),
        }
    } else {
        // In the tails every second partial vanishes with the density / pdf.
        BvnSecond {
            h11: if a1.is_finite() { -a1 * eval.h1 } else { 0.0 },
            h12: 0.0,
            h22: if a2.is_finite() { -a2 * eval.h2 } else { 0.0 },
            h1rho: 0.0,
            h2rho: 0.0,
            hrhorho: 0.0,
        }
    };
    (eval, second)
}

/// Bivariate normal density `phi2(a1, a2; rho)`; the quadratic form is
/// evaluated in the conditional factorization to stay stable as `|rho| -> 1`.
fn density(a1: f64, a2: f64, rho: f64) -> f64 {
    if !a1.is_finite() || !a2.is_finite() {
        return 0.0;
    }
    let omr2 = 1.0 - rho * rho;
    let s = omr2.sqrt();
    let z = a1 - rho * a2;
    let q = z * z / omr2 + a2 * a2;
    (-0.5 * q).exp() / (TWO_PI * s)
}

// Gauss-Legendre abscissae/weights on [-1, 1] (positive half), the rules used
// by Genz's BVND: 6 points for |rho| < 0.3, 12 for |rho| < 0.75, 20 otherwise.
const GL6: [(f64, f64); 3] = [
    (0.238_619_186_083_196_9, 0.467_913_934_572_691_0),
    (0.661_209_386_466_264_5, 0.360_761_573_048_138_6),
    (0.932_469_514_203_152_1, 0.171_324_492_379_170_4),
];
const GL12: [(f64, f64); 6] = [
    (0.125_233_408_511_468_9, 0.249_147_045_813_402_8),
    (0.367_831_498_998_180_2, 0.233_492_536_538_354_8),
    (0.587_317_954_286_617_5, 0.203_167_426_723_065_9),
    (0.769_902_674_194_304_7, 0.160_078_328_543_346_2),
    (0.904_117_256_370_474_9, 0.106_939_325_995_318_4),
    (0.981_560_634_246_719_2, 0.047_175_336_386_511_8),
];
const GL20: [(f64, f64); 10] = [
    (0.076_526_521_133_497_32, 0.152_753_387_130_725_8),
    (0.227_785_851_141_645_1, 0.149_172_986_472_603_7),
    (0.373_706_088_715_419_5, 0.142_096_109_318_382_0),
    (0.510_867_001_950_827_1, 0.131_688_638_449_176_6),
    (0.636_053_680_726_515_0, 0.118_194_531_961_518_4),
    (0.746_331_906_460_150_8, 0.101_930_119_817_240_4),
    (0.839_116_971_822_218_8, 0.083_276_741_576_704_75),
    (0.912_234_428_251_325_9, 0.062_672_048_334_109_06),
    (0.963_971_927_277_913_8, 0.040_601_429_800_386_94),
    (0.993_128_599_185_094_9, 0.017_614_007_139_152_12),
];

fn rule(rho_abs: f64) -> &'static [(f64, f64)] {
    if rho_abs < 0.3 {
        &GL6
    } else if rho_abs < 0.75 {
        &GL12
    } else {
        &GL20
    }
}

/// `Pr(X > h, Y > k)` with correlation `r`, Genz's BVND.
fn bvnu(h: f64, mut k: f64, r: f64) -> f64 {
    let quad = rule(r.abs());
    let mut hk = h * k;
    let mut bvn = 0.0;

    if r.abs() < 0.925 {
        if r.abs() > 0.0 {
            let hs = 0.5 * (h * h + k * k);
            let asr = 0.5 * r.asin();
            for &(x, w) in quad {
                for sgn in [-1.0, 1.0] {
                    let sn = (asr * (sgn * x + 1.0)).sin();
                    bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
                }
            }
            bvn *= asr / TWO_PI;
        }
        return bvn + norm_cdf(-h) * norm_cdf(-k);
    }

    // |r| >= 0.925: reduce r < 0 to r > 0 and expand around the singular ray.
    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    if r.abs() < 1.0 {
        let a_sq = (1.0 - r) * (1.0 + r);
        let mut a = a_sq.sqrt();
        let b_sq = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        let asr = -0.5 * (b_sq / a_sq + hk);
        if asr > -100.0 {
            bvn = a * asr.exp() * (1.0 - c * (b_sq - a_sq) * (1.0 - d * b_sq / 5.0) / 3.0
                + c * d * a_sq * a_sq / 5.0);
        }
        if -hk < 100.0 {
            let b = b_sq.sqrt();
            bvn -= (-0.5 * hk).exp()
                * SQRT_TWO_PI
                * norm_cdf(-b / a)
                * b
                * (1.0 - c * b_sq * (1.0 - d * b_sq / 5.0) / 3.0);
        }
        a *= 0.5;
        for &(x, w) in quad {
            for sgn in [-1.0, 1.0] {
                let xs = (a * (sgn * x + 1.0)).powi(2);
                let rs = (1.0 - xs).sqrt();
                let asr = -0.5 * (b_sq / xs + hk);
                if asr > -100.0 {
                    bvn += a
                        * w
                        * asr.exp()
                        * ((-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs
                            - (1.0 + c * xs * (1.0 + d * xs)));
                }
            }
        }
        bvn = -bvn / TWO_PI;
    }
    if r > 0.0 {
        bvn + norm_cdf(-h.max(k))
    } else {
        bvn = -bvn;
        if k > h {
            bvn += norm_cdf(k) - norm_cdf(h);
        }
        bvn
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values computed with mpmath at 30 digits via the integral
    // H(a,b,rho) = int_{-inf}^{a} phi(x) Phi((b - rho x)/sqrt(1-rho^2)) dx.
    // The expansion branch loses a couple of digits as |rho| -> 1, hence the
    // wider tolerance on the 0.9999 row; still far inside the 1e-10 contract.
    const REFERENCE: [(f64, f64, f64, f64, f64); 8] = [
        (0.5, -0.3, 0.4, 0.317126928286165104, 1e-14),
        (1.2, 0.8, -0.7, 0.673575714593870493, 1e-14),
        (2.0, 2.0, 0.95, 0.970524219807908117, 1e-14),
        (-1.0, -1.0, -0.95, 2.44919513849211666e-12, 1e-14),
        (0.3, -0.2, 0.9999, 0.420740290560962391, 5e-13),
        (0.7, -0.4, 0.6, 0.324574375682424065, 1e-14),
        (-8.0, 1.5, 0.5, 6.22096057381587295e-16, 1e-14),
        (8.0, 1.5, 0.5, 0.933192798731141933, 1e-14),
    ];

    #[test]
    fn cdf_matches_high_precision_reference() {
        for &(a1, a2, rho, expected, tol) in &REFERENCE {
            let got = bvn_cdf(a1, a2, rho).unwrap();
            assert!(
                (got - expected).abs() <= tol,
                "H({a1},{a2},{rho}) = {got}, expected {expected}"
            );
        }
    }

    #[test]
    fn cdf_independence_at_origin() {
        assert!((bvn_cdf(0.0, 0.0, 0.0).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn cdf_closed_form_at_origin() {
        // H(0,0,rho) = 1/4 + asin(rho)/(2 pi)
        for rho in [-0.99, -0.6, -0.1, 0.3, 0.6, 0.95] {
            let expected = 0.25 + (rho as f64).asin() / TWO_PI;
            let got = bvn_cdf(0.0, 0.0, rho).unwrap();
            assert!((got - expected).abs() < 1e-14, "rho={rho}: {got} vs {expected}");
        }
        assert!((bvn_cdf(0.0, 0.0, 0.6).unwrap() - 0.352416382349566726).abs() < 1e-15);
    }

    #[test]
    fn cdf_total_mass_and_sentinels() {
        assert_eq!(bvn_cdf(f64::INFINITY, f64::INFINITY, 0.3).unwrap(), 1.0);
        assert_eq!(bvn_cdf(f64::NEG_INFINITY, 1.0, 0.3).unwrap(), 0.0);
        let marginal = bvn_cdf(f64::INFINITY, 0.7, -0.2).unwrap();
        assert!((marginal - norm_cdf(0.7)).abs() < 1e-15);
    }

    #[test]
    fn cdf_rejects_degenerate_correlation() {
        assert_eq!(
            bvn_cdf(0.0, 0.0, 1.0),
            Err(BvnError::DegenerateCorrelation(1.0))
        );
        assert!(bvn_cdf(0.0, 0.0, -1.5).is_err());
        assert!(bvn_cdf(f64::NAN, 0.0, 0.0).is_err());
    }

    #[test]
    fn cdf_symmetric_in_arguments() {
        for &(a1, a2, rho, _, _) in &REFERENCE {
            let lhs = bvn_cdf(a1, a2, rho).unwrap();
            let rhs = bvn_cdf(a2, a1, rho).unwrap();
            assert!((lhs - rhs).abs() <= 1e-15);
        }
    }

    #[test]
    fn partials_closed_form_at_origin() {
        let e = bvn_partials(0.0, 0.0, 0.0).unwrap();
        // phi(0) * Phi(0)
        assert!((e.h1 - 0.199471140200716339).abs() < 1e-15);
        assert!((e.h2 - 0.199471140200716339).abs() < 1e-15);
        // bivariate density at the origin, rho = 0
        assert!((e.hrho - 0.159154943091895336).abs() < 1e-15);
    }

    #[test]
    fn partials_match_central_differences() {
        let step = 1e-5;
        let grid = [
            (0.7, -0.4, 0.6),
            (-1.3, 0.9, -0.8),
            (0.2, 0.1, 0.95),
            (1.1, 1.7, -0.3),
        ];
        for &(a1, a2, rho) in &grid {
            let e = bvn_partials(a1, a2, rho).unwrap();
            let fd1 = (cdf_unchecked(a1 + step, a2, rho) - cdf_unchecked(a1 - step, a2, rho))
                / (2.0 * step);
            let fd2 = (cdf_unchecked(a1, a2 + step, rho) - cdf_unchecked(a1, a2 - step, rho))
                / (2.0 * step);
            let fdr = (cdf_unchecked(a1, a2, rho + step) - cdf_unchecked(a1, a2, rho - step))
                / (2.0 * step);
            assert!((e.h1 - fd1).abs() / fd1.abs().max(1e-3) < 1e-6);
            assert!((e.h2 - fd2).abs() / fd2.abs().max(1e-3) < 1e-6);
            assert!((e.hrho - fdr).abs() / fdr.abs().max(1e-3) < 1e-6);
        }
    }

    #[test]
    fn second_partials_match_central_differences_of_first() {
        let step = 1e-5;
        for &(a1, a2, rho) in &[(0.4, -0.7, 0.5), (-0.9, 0.3, -0.6), (1.2, 0.6, 0.93)] {
            let (_, s) = bvn_derivs(a1, a2, rho).unwrap();
            let p = |x: f64, y: f64, r: f64| partials_unchecked(x, y, r);
            let fd11 = (p(a1 + step, a2, rho).h1 - p(a1 - step, a2, rho).h1) / (2.0 * step);
            let fd12 = (p(a1, a2 + step, rho).h1 - p(a1, a2 - step, rho).h1) / (2.0 * step);
            let fd22 = (p(a1, a2 + step, rho).h2 - p(a1, a2 - step, rho).h2) / (2.0 * step);
            let fd1r = (p(a1, a2, rho + step).h1 - p(a1, a2, rho - step).h1) / (2.0 * step);
            let fd2r = (p(a1, a2, rho + step).h2 - p(a1, a2, rho - step).h2) / (2.0 * step);
            let fdrr = (p(a1, a2, rho + step).hrho - p(a1, a2, rho - step).hrho) / (2.0 * step);
            for (got, want) in [
                (s.h11, fd11),
                (s.h12, fd12),
                (s.h22, fd22),
                (s.h1rho, fd1r),
                (s.h2rho, fd2r),
                (s.hrhorho, fdrr),
            ] {
                assert!(
                    (got - want).abs() / want.abs().max(1e-3) < 1e-5,
                    "({a1},{a2},{rho}): {got} vs fd {want}"
                );
            }
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for p in [1e-8, 0.01, 0.3, 0.5, 0.77, 0.999] {
            let x = norm_inv_cdf(p);
            assert!((norm_cdf(x) - p).abs() < 1e-12, "p={p}");
        }
    }
}
