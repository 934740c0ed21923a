//! Stateless physical and semantic formulas: channels, rates, powers,
//! extraction workload, remote intensity and per-slot energy.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::config::SystemConfig;
use crate::error::{Error, Result};

/// Speed of light (m/s).
pub const SPEED_OF_LIGHT: f64 = 3e8;

/// Mean (path-loss) power gain `A (c / (4 pi f_c d))^ell`.
pub fn path_loss_gain(distance: f64, cfg: &SystemConfig) -> Result<f64> {
    if !(distance > 0.0) || !distance.is_finite() {
        return Err(Error::domain(format!("distance must be > 0, got {distance}")));
    }
    let ratio = SPEED_OF_LIGHT / (4.0 * std::f64::consts::PI * cfg.carrier_fc * distance);
    Ok(cfg.antenna_gain * ratio.powf(cfg.pathloss_exp))
}

/// Draws one Rician-faded power gain with mean `mean_gain`.
///
/// `h = mean_gain * |sqrt(gamma) + sqrt(1 - gamma) z|^2` with `z` standard
/// complex Gaussian, so the line-of-sight part carries `gamma * mean_gain`.
pub fn sample_channel<R: Rng + ?Sized>(mean_gain: f64, gamma: f64, rng: &mut R) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::domain(format!("rician gamma must lie in [0, 1], got {gamma}")));
    }
    if !(mean_gain > 0.0) {
        return Err(Error::domain(format!("mean gain must be > 0, got {mean_gain}")));
    }
    let scatter = (1.0 - gamma).sqrt() * std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    let x = gamma.sqrt() + scatter * re;
    let y = scatter * im;
    let h = mean_gain * (x * x + y * y);
    // an exact zero has probability zero but is representable; keep gains positive
    Ok(h.max(mean_gain * 1e-300))
}

/// Shannon rate `B log2(1 + h p / sigma^2)` (bits/s). Used for both links.
#[inline]
pub fn link_rate(h: f64, power: f64, cfg: &SystemConfig) -> f64 {
    cfg.bandwidth * (h * power / cfg.noise_power()).ln_1p() / std::f64::consts::LN_2
}

/// Transmit power needed for rate `rate` (W); the exact inverse of [`link_rate`].
#[inline]
pub fn link_power(h: f64, rate: f64, cfg: &SystemConfig) -> f64 {
    cfg.noise_power() / h * (rate * std::f64::consts::LN_2 / cfg.bandwidth).exp_m1()
}

#[inline]
pub fn uplink_rate(h: f64, power: f64, cfg: &SystemConfig) -> f64 {
    link_rate(h, power, cfg)
}

#[inline]
pub fn uplink_power(h: f64, rate: f64, cfg: &SystemConfig) -> f64 {
    link_power(h, rate, cfg)
}

#[inline]
pub fn downlink_rate(h: f64, power: f64, cfg: &SystemConfig) -> f64 {
    link_rate(h, power, cfg)
}

#[inline]
pub fn local_rate(freq: f64, intensity: f64) -> f64 {
    freq / intensity
}

#[inline]
pub fn local_power(freq: f64, kappa: f64) -> f64 {
    kappa * freq * freq * freq
}

/// Extraction workload `a tau_u r_u / beta^k` (bits).
pub fn extraction_cost(tau_u: f64, r_u: f64, beta: f64, cfg: &SystemConfig) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::domain(format!("extraction factor must be > 0, got {beta}")));
    }
    Ok(extraction_cost_unchecked(tau_u * r_u, beta, cfg.a, cfg.k))
}

#[inline]
pub(crate) fn extraction_cost_unchecked(semantic_bits: f64, beta: f64, a: f64, k: f64) -> f64 {
    a * semantic_bits / beta.powf(k)
}

fn check_chi(min_chi: f64) -> Result<()> {
    if min_chi > 0.0 && min_chi <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("min extraction factor must lie in (0, 1], got {min_chi}")))
    }
}

/// Remote-to-raw computation intensity ratio `1 / min_chi^p`.
pub fn intensity_ratio(min_chi: f64, p_exp: f64) -> Result<f64> {
    check_chi(min_chi)?;
    Ok(min_chi.powf(-p_exp))
}

/// Result-to-processed-data ratio `U / min_chi`.
pub fn result_ratio(min_chi: f64, u: f64) -> Result<f64> {
    check_chi(min_chi)?;
    Ok(u / min_chi)
}

/// Remote semantic processing rate `f_o / (G I)` (bits/s).
#[inline]
pub fn remote_rate(f_remote: f64, g: f64, intensity: f64) -> f64 {
    f_remote / (g * intensity)
}

/// One device's share of a slot decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TdDecision {
    /// Local CPU frequency (Hz).
    pub f_local: f64,
    /// Uplink rate (bits/s); `p_uplink` is its power image.
    pub r_uplink: f64,
    pub p_uplink: f64,
    pub p_downlink: f64,
    pub beta: f64,
    pub tau_u: f64,
    pub tau_d: f64,
    /// MEC CPU share (Hz).
    pub f_remote: f64,
}

impl Default for TdDecision {
    fn default() -> Self {
        TdDecision {
            f_local: 0.0,
            r_uplink: 0.0,
            p_uplink: 0.0,
            p_downlink: 0.0,
            beta: 1.0,
            tau_u: 0.0,
            tau_d: 0.0,
            f_remote: 0.0,
        }
    }
}

/// Per-device decisions for one slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotDecision {
    pub tds: Vec<TdDecision>,
}

impl SlotDecision {
    /// All-zero decision with `beta = 1`.
    pub fn idle(num_tds: usize) -> Self {
        SlotDecision {
            tds: vec![TdDecision::default(); num_tds],
        }
    }

    /// Checks box, capacity, time and rate/power constraints.
    pub fn check_feasible(&self, cfg: &SystemConfig, gains: &[f64]) -> Result<()> {
        const TOL: f64 = 1e-9;
        let fail = |msg: String| Err(Error::Infeasible(msg));
        if self.tds.len() != cfg.num_tds || gains.len() != cfg.num_tds {
            return fail(format!("expected {} devices", cfg.num_tds));
        }
        let tau = cfg.slot_tau;
        let mut sum_pd = 0.0;
        let mut sum_fo = 0.0;
        for (n, (d, &h)) in self.tds.iter().zip(gains).enumerate() {
            let fields = [d.f_local, d.r_uplink, d.p_uplink, d.p_downlink, d.beta, d.tau_u, d.tau_d, d.f_remote];
            if fields.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return fail(format!("td {n}: negative or non-finite field in {d:?}"));
            }
            let fmax = cfg.f_local_max.at(n);
            if d.f_local > fmax * (1.0 + TOL) {
                return fail(format!("td {n}: f_local {} > {fmax}", d.f_local));
            }
            let pmax = cfg.p_uplink_max.at(n);
            if d.p_uplink > pmax * (1.0 + TOL) {
                return fail(format!("td {n}: p_uplink {} > {pmax}", d.p_uplink));
            }
            if d.beta < cfg.beta_min * (1.0 - TOL) || d.beta > 1.0 + TOL {
                return fail(format!("td {n}: beta {} outside [{}, 1]", d.beta, cfg.beta_min));
            }
            if d.tau_u + d.tau_d > tau * (1.0 + TOL) {
                return fail(format!("td {n}: tau_u + tau_d = {} > {tau}", d.tau_u + d.tau_d));
            }
            let implied = uplink_power(h, d.r_uplink, cfg);
            if (implied - d.p_uplink).abs() > 1e-9 * implied.max(d.p_uplink) + 1e-300 {
                return fail(format!("td {n}: p_uplink {} does not match rate {}", d.p_uplink, d.r_uplink));
            }
            sum_pd += d.p_downlink;
            sum_fo += d.f_remote;
        }
        if sum_pd > cfg.p_mec * (1.0 + TOL) {
            return fail(format!("downlink power {sum_pd} > {}", cfg.p_mec));
        }
        if sum_fo > cfg.f_mec * (1.0 + TOL) {
            return fail(format!("remote cpu {sum_fo} > {}", cfg.f_mec));
        }
        Ok(())
    }
}

/// Energy split of one device over one slot (J).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub local: f64,
    pub uplink: f64,
    pub remote: f64,
    pub downlink: f64,
}

impl EnergyBreakdown {
    #[inline]
    pub fn total(&self) -> f64 {
        self.local + self.uplink + self.remote + self.downlink
    }
}

/// Energy of device `n` under `d`:
/// `tau kappa f_l^3 + tau_u p_u + tau kappa_M f_o^3 + tau_d p_d`.
pub fn td_energy(d: &TdDecision, n: usize, cfg: &SystemConfig) -> EnergyBreakdown {
    let tau = cfg.slot_tau;
    EnergyBreakdown {
        local: tau * local_power(d.f_local, cfg.kappa_local.at(n)),
        uplink: d.tau_u * d.p_uplink,
        remote: tau * local_power(d.f_remote, cfg.kappa_mec),
        downlink: d.tau_d * d.p_downlink,
    }
}

/// Per-device energy of a whole slot decision.
pub fn slot_energy(decision: &SlotDecision, cfg: &SystemConfig) -> Vec<EnergyBreakdown> {
    decision
        .tds
        .iter()
        .enumerate()
        .map(|(n, d)| td_energy(d, n, cfg))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> SystemConfig {
        SystemConfig::default()
    }

    #[test]
    fn zero_pathloss_exponent_collapses_to_antenna_gain() {
        let mut c = cfg();
        c.pathloss_exp = 0.0;
        assert_eq!(path_loss_gain(57.0, &c).unwrap(), 3.0);
    }

    #[test]
    fn pathloss_at_reference_distance() {
        // log-domain recomputation: ln A + ell (ln c - ln 4 pi - ln fc - ln d)
        let c = cfg();
        let ln = 3f64.ln()
            + 3.0 * (3e8f64.ln() - (4.0 * std::f64::consts::PI).ln() - 915e6f64.ln() - 120f64.ln());
        let g = path_loss_gain(120.0, &c).unwrap();
        assert!((g - ln.exp()).abs() / g < 1e-12);
        assert!((g - 3.08e-11).abs() < 0.01e-11, "{g}");
    }

    #[test]
    fn pathloss_is_monotone_and_rejects_bad_distance() {
        let c = cfg();
        let mut prev = f64::INFINITY;
        for d in (120..=255).step_by(5) {
            let g = path_loss_gain(d as f64, &c).unwrap();
            assert!(g.is_finite() && g > 0.0 && g < prev);
            prev = g;
        }
        assert!(path_loss_gain(0.0, &c).is_err());
        assert!(path_loss_gain(-3.0, &c).is_err());
    }

    #[test]
    fn pure_los_channel_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let h = sample_channel(2.5e-11, 1.0, &mut rng).unwrap();
            assert!((h - 2.5e-11).abs() < 1e-25);
        }
        assert!(sample_channel(1.0, 1.5, &mut rng).is_err());
        assert!(sample_channel(1.0, -0.1, &mut rng).is_err());
    }

    #[test]
    fn rician_sample_mean_matches_path_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let mean = (0..n)
            .map(|_| {
                let h = sample_channel(1.0, 0.3, &mut rng).unwrap();
                assert!(h > 0.0);
                h
            })
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn shannon_rate_edge_values() {
        let c = cfg();
        let h = 3e-11;
        assert_eq!(uplink_rate(h, 0.0, &c), 0.0);
        let p = c.noise_power() / h;
        assert!((uplink_rate(h, p, &c) - c.bandwidth).abs() < 1e-6);
        assert!((downlink_rate(h, p, &c) - c.bandwidth).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn rate_power_bijection(h in 1e-13f64..1e-9, p in 0.0f64..2.0) {
            let c = cfg();
            let back = uplink_power(h, uplink_rate(h, p, &c), &c);
            prop_assert!((back - p).abs() <= 1e-12 * p.max(1e-300) + 1e-300 || (back - p).abs() < 1e-15);
        }

        #[test]
        fn extraction_cost_decreases_in_beta(b1 in 0.3f64..1.0, db in 1e-6f64..0.5, bits in 1.0f64..1e8) {
            let c = cfg();
            let b2 = (b1 + db).min(1.0);
            prop_assume!(b2 > b1);
            let c1 = extraction_cost(1.0, bits, b1, &c).unwrap();
            let c2 = extraction_cost(1.0, bits, b2, &c).unwrap();
            prop_assert!(c1 > c2);
        }

        #[test]
        fn ratios_decrease_in_min_chi(x in 0.01f64..0.99, dx in 1e-6f64..0.5) {
            let y = (x + dx).min(1.0);
            prop_assume!(y > x);
            prop_assert!(intensity_ratio(x, 1.0).unwrap() > intensity_ratio(y, 1.0).unwrap());
            prop_assert!(result_ratio(x, 0.01).unwrap() > result_ratio(y, 0.01).unwrap());
        }

        #[test]
        fn energy_is_monotone_in_each_coordinate(
            f in 0.0f64..1e9, pu in 0.0f64..0.3, pd in 0.0f64..1.0, fo in 0.0f64..3e9,
            tu in 0.0f64..0.5, td in 0.0f64..0.5, which in 0usize..6, bump in 1e-3f64..1.0,
        ) {
            let c = cfg();
            let base = TdDecision { f_local: f, r_uplink: 0.0, p_uplink: pu, p_downlink: pd, beta: 1.0, tau_u: tu, tau_d: td, f_remote: fo };
            let mut more = base;
            match which {
                0 => more.f_local += bump * 1e8,
                1 => { more.p_uplink += bump * 0.1; prop_assume!(tu > 0.0); }
                2 => { more.p_downlink += bump; prop_assume!(td > 0.0); }
                3 => more.f_remote += bump * 1e8,
                4 => { more.tau_u += bump * 0.1; prop_assume!(pu > 0.0); }
                _ => { more.tau_d += bump * 0.1; prop_assume!(pd > 0.0); }
            }
            let e0 = td_energy(&base, 0, &c).total();
            let e1 = td_energy(&more, 0, &c).total();
            prop_assert!(e0 >= 0.0);
            prop_assert!(e1 > e0);
        }
    }

    #[test]
    fn local_rate_and_power() {
        assert_eq!(local_rate(0.0, 70.0), 0.0);
        assert_eq!(local_power(0.0, 1e-26), 0.0);
        assert!((local_rate(7e8, 70.0) - 1e7).abs() < 1e-6);
        let p1 = local_power(3e8, 1e-26);
        assert!((local_power(6e8, 1e-26) - 8.0 * p1).abs() < 1e-12 * p1);
    }

    #[test]
    fn extraction_cost_values() {
        let c = cfg();
        assert!((extraction_cost(1.0, 1e6, 1.0, &c).unwrap() - 1e3).abs() < 1e-9);
        assert_eq!(extraction_cost(0.0, 1e6, 0.5, &c).unwrap(), 0.0);
        // 1e-3 * 1e6 / 0.5^4 = 1e3 / 0.0625
        assert!((extraction_cost(1.0, 1e6, 0.5, &c).unwrap() - 1.6e4).abs() < 1e-8);
        assert!(extraction_cost(1.0, 1e6, 0.0, &c).is_err());
    }

    #[test]
    fn semantic_ratios() {
        assert_eq!(intensity_ratio(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(result_ratio(1.0, 0.01).unwrap(), 0.01);
        assert!((intensity_ratio(0.5, 1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((result_ratio(0.5, 0.01).unwrap() - 0.02).abs() < 1e-15);
        assert!(intensity_ratio(0.0, 1.0).is_err());
        assert!(result_ratio(1.2, 0.01).is_err());
    }

    #[test]
    fn remote_rate_values() {
        assert_eq!(remote_rate(0.0, 2.0, 70.0), 0.0);
        assert_eq!(remote_rate(7e8, 1.0, 70.0), local_rate(7e8, 70.0));
        assert!((remote_rate(1.4e9, 2.0, 70.0) - 1e7).abs() < 1e-6);
    }

    #[test]
    fn slot_energy_values_and_additivity() {
        let c = cfg();
        let idle = SlotDecision::idle(c.num_tds);
        assert!(slot_energy(&idle, &c).iter().all(|e| e.total() == 0.0));

        // 1e-26 * (1e9)^3 = 10 J; 0.01 J corresponds to 1e8 Hz
        let only_local = TdDecision { f_local: 1e9, ..Default::default() };
        assert!((td_energy(&only_local, 0, &c).total() - 10.0).abs() < 1e-12);
        let slower = TdDecision { f_local: 1e8, ..Default::default() };
        assert!((td_energy(&slower, 0, &c).total() - 0.01).abs() < 1e-15);

        let d = TdDecision {
            f_local: 4e8,
            r_uplink: 0.0,
            p_uplink: 0.1,
            p_downlink: 0.4,
            beta: 0.5,
            tau_u: 0.3,
            tau_d: 0.6,
            f_remote: 2e9,
        };
        let parts = [
            TdDecision { f_local: d.f_local, ..Default::default() },
            TdDecision { p_uplink: d.p_uplink, tau_u: d.tau_u, ..Default::default() },
            TdDecision { f_remote: d.f_remote, ..Default::default() },
            TdDecision { p_downlink: d.p_downlink, tau_d: d.tau_d, ..Default::default() },
        ];
        let sum: f64 = parts.iter().map(|p| td_energy(p, 0, &c).total()).sum();
        assert!((td_energy(&d, 0, &c).total() - sum).abs() < 1e-15);
    }
}
