//! Log-domain reductions shared by the soft demapper and the trellis decoders.

/// Magnitude at which LLRs are clamped before exponentiation.
pub const LLR_CLAMP: f64 = 50.0;

/// Exact Jacobian logarithm, `ln(e^a + e^b)`.
#[inline]
pub fn max_star(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    a.max(b) + (-(a - b).abs()).exp().ln_1p()
}

/// Max-log approximation of [`max_star`].
#[inline]
pub fn max_log(a: f64, b: f64) -> f64 {
    a.max(b)
}

/// `ln Σ e^{x_i}` over a slice, `-inf` when empty.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[inline]
pub fn clamp_llr(l: f64) -> f64 {
    l.clamp(-LLR_CLAMP, LLR_CLAMP)
}

/// P(b = 0) for an LLR in the `log P(0)/P(1)` convention.
#[inline]
pub fn prob_zero(llr: f64) -> f64 {
    1.0 / (1.0 + (-clamp_llr(llr)).exp())
}

/// Numerically stable `ln P(b = bit)` for an LLR.
#[inline]
pub fn log_prob_bit(llr: f64, bit: u8) -> f64 {
    let l = clamp_llr(llr);
    // ln σ(±l) = -ln(1 + e^{∓l})
    let s = if bit == 0 { l } else { -l };
    -softplus(-s)
}

#[inline]
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}
