use crate::field::{RealField, SpectralField};

/// `sum_xi f(|xi|^2) * |u_hat|^2 / L^n` — the building block of every
/// spectral norm here. The `L^-n` prefactor makes this Parseval-consistent
/// with the rectangle-rule L2 norm.
pub fn weighted_spectral_sum(u_hat: &SpectralField, f: impl Fn(f64) -> f64) -> f64 {
    let xi_sq = u_hat.grid().xi_sq();
    // Kahan summation: Fourier-splitting closure compares this against a
    // two-way partition of the same terms at 1e-12 relative, tighter than
    // naive accumulation over M^n modes achieves in 3-d.
    let mut acc = 0.0_f64;
    let mut comp = 0.0_f64;
    for (c, &x2) in u_hat.coeffs().iter().zip(xi_sq) {
        let y = f(x2) * c.norm_sqr() - comp;
        let s = acc + y;
        comp = (s - acc) - y;
        acc = s;
    }
    acc / u_hat.grid().box_volume()
}

/// ||D^l u||_L2 computed as ||Lambda^l u||: the multinomial identity makes
/// the |xi|^(2l) weight the exact sum over all order-l derivatives.
pub fn derivative_seminorm(u_hat: &SpectralField, l: u32) -> f64 {
    weighted_spectral_sum(u_hat, |x2| x2.powi(l as i32)).sqrt()
}

/// H^k norm: sqrt of the sum of squared seminorms of order 0..=k.
pub fn hk_norm(u_hat: &SpectralField, k: u32) -> f64 {
    weighted_spectral_sum(u_hat, |x2| {
        let mut w = 1.0;
        let mut pow = 1.0;
        for _ in 0..k {
            pow *= x2;
            w += pow;
        }
        w
    })
    .sqrt()
}

/// Homogeneous negative norm ||u||_{H^-s} with the zero mode excluded.
pub fn negative_norm(u_hat: &SpectralField, s: f64) -> f64 {
    assert!(s > 0.0, "negative_norm requires s > 0");
    weighted_spectral_sum(u_hat, |x2| if x2 == 0.0 { 0.0 } else { x2.powf(-s) }).sqrt()
}

/// Rectangle-rule Lp norm; `p = f64::INFINITY` gives the sup norm.
pub fn lp_norm(u: &RealField, p: f64) -> f64 {
    assert!(p >= 1.0, "lp_norm requires p >= 1");
    if p.is_infinite() {
        return u.values().iter().map(|v| v.abs()).fold(0.0, f64::max);
    }
    let w = u.grid().cell_volume();
    // Kahan summation: the naive sequential sum over M^n samples loses
    // ~N*eps relative accuracy, which breaks sup|u_hat| <= ||u||_L1 in
    // the equality case (positive data) on large 3-d grids.
    let mut sum = 0.0_f64;
    let mut c = 0.0_f64;
    for v in u.values() {
        let y = v.abs().powf(p) - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    (w * sum).powf(1.0 / p)
}

/// Max over the lattice of |u_hat|; bounded by ||u||_L1 by the transform
/// convention.
pub fn sup_spectrum(u_hat: &SpectralField) -> f64 {
    u_hat.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Ratio `||D^l g|| / (||D^{l+1} g||^(1-theta) * ||g||_{H^-s}^theta)` with
/// `theta = 1/(l+s+1)`. Discrete Hoelder gives ratio <= 1 for mean-free
/// fields. `None` when the denominator vanishes.
pub fn interpolation_gap(u_hat: &SpectralField, l: u32, s: f64) -> Option<f64> {
    let theta = 1.0 / (l as f64 + s + 1.0);
    let num = derivative_seminorm(u_hat, l);
    let d1 = derivative_seminorm(u_hat, l + 1);
    let d2 = negative_norm(u_hat, s);
    let den = d1.powf(1.0 - theta) * d2.powf(theta);
    if den == 0.0 {
        None
    } else {
        Some(num / den)
    }
}
