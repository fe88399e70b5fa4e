//! Radio propagation and signal quality: UMa-NLOS path loss, received power
//! and SINR.
//!
//! All power arithmetic happens in the linear domain (milliwatts) with `f64`;
//! the dBm/mW conversions below are the only place the two domains meet.

use crate::error::{Error, Result};

/// Lower bound on the 3D distance fed to the path-loss formula, in meters.
pub const MIN_D3D_M: f64 = 10.0;

/// Default macro-cell transmit power in dBm.
pub const DEFAULT_TX_POWER_DBM: f64 = 46.0;

/// Geometry of one UE-BS link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    /// Horizontal UE-BS distance in meters.
    pub d2d: f64,
    /// BS antenna height in meters.
    pub h_bs: f64,
    /// UE antenna height in meters.
    pub h_ut: f64,
    /// Carrier frequency in GHz.
    pub fc_ghz: f64,
}

impl LinkGeometry {
    pub fn new(d2d: f64, h_bs: f64, h_ut: f64, fc_ghz: f64) -> Result<Self> {
        let geom = Self {
            d2d,
            h_bs,
            h_ut,
            fc_ghz,
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.d2d, self.h_bs, self.h_ut, self.fc_ghz];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite link geometry {self:?}")));
        }
        if self.d2d < 0.0 {
            return Err(Error::InvalidInput(format!("negative distance {}", self.d2d)));
        }
        if !(self.h_ut > 0.0 && self.h_bs > self.h_ut) {
            return Err(Error::InvalidInput(format!(
                "antenna heights must satisfy h_bs > h_ut > 0, got h_bs={} h_ut={}",
                self.h_bs, self.h_ut
            )));
        }
        if self.fc_ghz <= 0.0 {
            return Err(Error::InvalidInput(format!("carrier frequency {} GHz", self.fc_ghz)));
        }
        Ok(())
    }

    /// Straight-line antenna-to-antenna distance (unclamped).
    pub fn d3d(&self) -> f64 {
        self.d2d.hypot(self.h_bs - self.h_ut)
    }
}

/// UMa-LOS loss below the breakpoint distance.
fn path_loss_uma_los_near(d3d: f64, fc_ghz: f64) -> f64 {
    28.0 + 22.0 * d3d.log10() + 20.0 * fc_ghz.log10()
}

/// UMa-NLOS path loss in dB (3GPP TR 38.901, Table 7.4.1-1).
///
/// Returns `max(PL_LOS, PL'_NLOS)` with the 3D distance floored at
/// [`MIN_D3D_M`]. Only the sub-breakpoint LOS branch is used; see
/// [`nlos_dominates`] for the check that makes that safe.
pub fn path_loss_uma_nlos(geom: &LinkGeometry) -> Result<f64> {
    geom.validate()?;
    let d3d = geom.d3d().max(MIN_D3D_M);
    let nlos = 13.54 + 39.08 * d3d.log10() + 20.0 * geom.fc_ghz.log10() - 0.6 * (geom.h_ut - 1.5);
    Ok(nlos.max(path_loss_uma_los_near(d3d, geom.fc_ghz)))
}

/// True when the NLOS term exceeds the near LOS term for every distance at
/// or above `MIN_D3D_M`, so the breakpoint branch of UMa-LOS can never win
/// the `max`.
///
/// The NLOS slope (39.08) exceeds the LOS slope (22), so the gap only grows
/// with distance and checking the floor suffices.
pub fn nlos_dominates(h_ut: f64, fc_ghz: f64) -> bool {
    let d = MIN_D3D_M;
    let nlos = 13.54 + 39.08 * d.log10() + 20.0 * fc_ghz.log10() - 0.6 * (h_ut - 1.5);
    nlos >= path_loss_uma_los_near(d, fc_ghz)
}

/// Received power in dBm given transmit power and path loss.
pub fn rx_power(tx_power_dbm: f64, path_loss_db: f64) -> Result<f64> {
    if !tx_power_dbm.is_finite() || !path_loss_db.is_finite() {
        return Err(Error::InvalidInput(format!(
            "non-finite power budget tx={tx_power_dbm} pl={path_loss_db}"
        )));
    }
    Ok(tx_power_dbm - path_loss_db)
}

#[inline]
pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

#[inline]
pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Linear SINR of the link to `serving`.
///
/// With `interference` on, every other entry of `rxp_dbm` counts as
/// interference; with it off the result is the plain SNR and the other
/// entries are never read.
pub fn sinr(rxp_dbm: &[f64], serving: usize, noise_dbm: f64, interference: bool) -> Result<f64> {
    if rxp_dbm.is_empty() {
        return Err(Error::InvalidInput("empty received-power vector".into()));
    }
    if serving >= rxp_dbm.len() {
        return Err(Error::IndexOutOfRange {
            index: serving,
            len: rxp_dbm.len(),
        });
    }
    if !noise_dbm.is_finite() || !rxp_dbm[serving].is_finite() {
        return Err(Error::InvalidInput("non-finite power in SINR".into()));
    }
    let signal = dbm_to_mw(rxp_dbm[serving]);
    let mut denom = dbm_to_mw(noise_dbm);
    if interference {
        for (x, &p) in rxp_dbm.iter().enumerate() {
            if x == serving {
                continue;
            }
            if !p.is_finite() {
                return Err(Error::InvalidInput("non-finite interferer power".into()));
            }
            denom += dbm_to_mw(p);
        }
    }
    Ok(signal / denom)
}

/// Linear SINR towards every candidate BS.
pub fn sinr_all(rxp_dbm: &[f64], noise_dbm: f64, interference: bool) -> Result<Vec<f64>> {
    (0..rxp_dbm.len())
        .map(|j| sinr(rxp_dbm, j, noise_dbm, interference))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn geom(d2d: f64) -> LinkGeometry {
        LinkGeometry::new(d2d, 25.0, 1.5, 3.5).unwrap()
    }

    #[test]
    fn path_loss_reference_points() {
        // Frozen from a 40-digit mpmath evaluation of the TR 38.901 formula.
        let pl100 = path_loss_uma_nlos(&geom(100.0)).unwrap();
        assert!((pl100 - 103.037_523_590_060_77).abs() < 1e-9, "{pl100}");
        let pl1000 = path_loss_uma_nlos(&geom(1000.0)).unwrap();
        assert!((pl1000 - 141.666_046_049_987_84).abs() < 1e-9, "{pl1000}");
        assert!((geom(100.0).d3d() - 102.724_145_165_584_12).abs() < 1e-9);
    }

    #[test]
    fn ue_height_correction_vanishes_at_reference_height() {
        let base = path_loss_uma_nlos(&geom(300.0)).unwrap();
        let d3d = geom(300.0).d3d();
        let bare = 13.54 + 39.08 * d3d.log10() + 20.0 * 3.5f64.log10();
        assert_eq!(base, bare);
    }

    #[test]
    fn short_links_are_clamped() {
        let a = LinkGeometry::new(0.0, 5.0, 1.0, 3.5).unwrap();
        let b = LinkGeometry::new(3.0, 8.0, 1.0, 3.5).unwrap();
        assert!(a.d3d() < MIN_D3D_M && b.d3d() < MIN_D3D_M);
        assert_eq!(path_loss_uma_nlos(&a).unwrap(), path_loss_uma_nlos(&b).unwrap());
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(LinkGeometry::new(-1.0, 25.0, 1.5, 3.5).is_err());
        assert!(LinkGeometry::new(f64::NAN, 25.0, 1.5, 3.5).is_err());
        assert!(LinkGeometry::new(10.0, 1.0, 1.5, 3.5).is_err());
        assert!(LinkGeometry::new(10.0, 25.0, 1.5, 0.0).is_err());
    }

    #[test]
    fn nlos_wins_at_default_geometry() {
        assert!(nlos_dominates(1.5, 3.5));
    }

    #[test]
    fn rx_power_examples() {
        assert!((rx_power(46.0, 103.05).unwrap() - -57.05).abs() < 1e-12);
        assert_eq!(rx_power(46.0, 0.0).unwrap(), 46.0);
        assert_eq!(rx_power(0.0, 50.0).unwrap(), -50.0);
        assert!(rx_power(f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn sinr_examples() {
        let single = sinr(&[-60.0], 0, -95.0, false).unwrap();
        assert!((single - 3162.277_660_168_379_3).abs() < 1e-9);

        let both = sinr(&[-60.0, -60.0], 0, -95.0, true).unwrap();
        assert!((both - 0.999_683_872_202_370_4).abs() < 1e-12);

        let a = sinr(&[-60.0, -70.0], 0, -95.0, false).unwrap();
        let b = sinr(&[-60.0, -200.0], 0, -95.0, false).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sinr_errors() {
        assert!(matches!(sinr(&[], 0, -95.0, false), Err(Error::InvalidInput(_))));
        assert!(matches!(
            sinr(&[-60.0], 1, -95.0, false),
            Err(Error::IndexOutOfRange { index: 1, len: 1 })
        ));
    }

    proptest! {
        #[test]
        fn path_loss_monotone(a in 0.0f64..3000.0, b in 0.0f64..3000.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(path_loss_uma_nlos(&geom(lo)).unwrap() <= path_loss_uma_nlos(&geom(hi)).unwrap());
        }

        #[test]
        fn db_round_trip(exp in -15.0f64..3.0) {
            let x = 10f64.powf(exp);
            let back = db_to_linear(linear_to_db(x));
            prop_assert!(((back - x) / x).abs() < 1e-12);
        }

        #[test]
        fn interference_off_ignores_other_cells(
            serving in -120.0f64..-40.0,
            others in proptest::collection::vec(-200.0f64..0.0, 1..6),
            perturb in proptest::collection::vec(-200.0f64..0.0, 6),
        ) {
            let mut rxp = vec![serving];
            rxp.extend(&others);
            let base = sinr(&rxp, 0, -95.0, false).unwrap();
            for (k, p) in rxp.iter_mut().skip(1).enumerate() {
                *p = perturb[k];
            }
            prop_assert_eq!(base.to_bits(), sinr(&rxp, 0, -95.0, false).unwrap().to_bits());
        }

        #[test]
        fn interference_on_decreases_with_interferer(
            serving in -100.0f64..-50.0,
            other in -120.0f64..-50.0,
            bump in 0.5f64..20.0,
        ) {
            let before = sinr(&[serving, other], 0, -95.0, true).unwrap();
            let after = sinr(&[serving, other + bump], 0, -95.0, true).unwrap();
            prop_assert!(after < before);
        }
    }
}
