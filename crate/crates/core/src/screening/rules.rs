//! Optimum-region bounds and the four screening rules.

use serde::{Deserialize, Serialize};

use crate::solver::Snapshot;
use crate::submodular::GreedyPass;
use crate::{ElementSet, Error, Oracle, Result};

/// Strict margin every rule must clear.
pub const RULE_MARGIN: f64 = 1e-10;

/// A primal-dual pair with its duality gap and the quantities that bound
/// the optimum `w*` of the reduced problem:
/// the ball `|w - w_hat| <= sqrt(2 gap)`, the plane `sum(w) = -F(V)` and
/// the band `F(V) - 2 F(C) <= |w|_1 <= |s_hat|_1`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GapCertificate {
    pub w_hat: Vec<f64>,
    pub s_hat: Vec<f64>,
    pub gap: f64,
    pub f_ground: f64,
    pub best_superlevel_value: f64,
    pub s_l1: f64,
}

impl GapCertificate {
    pub fn from_snapshot(snap: &Snapshot) -> Self {
        let (_, best) = snap.best_superlevel();
        Self {
            w_hat: snap.w.clone(),
            s_hat: snap.s.clone(),
            gap: snap.gap,
            f_ground: snap.ground_value(),
            best_superlevel_value: best,
            s_l1: snap.s.iter().map(|x| x.abs()).sum(),
        }
    }

    /// Builds a certificate for an arbitrary pair, spending one greedy pass
    /// on `f(w_hat)` and one on the super-level sets of `w_hat`.
    pub fn for_pair(oracle: &Oracle, w_hat: Vec<f64>, s_hat: Vec<f64>) -> Result<Self> {
        let gap = crate::solver::duality_gap(oracle, &w_hat, &s_hat)?;
        let (_, best) = best_superlevel_set(oracle, &w_hat);
        let s_l1 = s_hat.iter().map(|x| x.abs()).sum();
        Ok(Self {
            w_hat,
            s_hat,
            gap,
            f_ground: oracle.ground_value(),
            best_superlevel_value: best,
            s_l1,
        })
    }

    pub fn p(&self) -> usize {
        self.w_hat.len()
    }

    /// Ball radius `sqrt(2 gap)`; a negative gap is treated as zero.
    pub fn radius(&self) -> f64 {
        (2.0 * self.gap.max(0.0)).sqrt()
    }

    /// Lower end of the `l1` band.
    pub fn l1_floor(&self) -> f64 {
        self.f_ground - 2.0 * self.best_superlevel_value
    }

    /// Whether `w` lies in the ball, the plane and the `l1` band, each to `tol`.
    pub fn region_contains(&self, w: &[f64], tol: f64) -> bool {
        let d2: f64 = w.iter().zip(&self.w_hat).map(|(a, b)| (a - b).powi(2)).sum();
        let l1: f64 = w.iter().map(|x| x.abs()).sum();
        let sum: f64 = w.iter().sum();
        d2.sqrt() <= self.radius() + tol
            && (sum + self.f_ground).abs() <= tol
            && l1 >= self.l1_floor() - tol
            && l1 <= self.s_l1 + tol
    }
}

/// Best super-level set of `w_hat` as `(C, F(C))`, ties by smallest cardinality.
pub fn best_superlevel_set(oracle: &Oracle, w_hat: &[f64]) -> (ElementSet, f64) {
    let pass = GreedyPass::along(oracle, crate::submodular::decreasing_order(w_hat));
    let (k, value) = pass.best_prefix();
    (pass.prefix_set(k), value)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordinateBounds {
    pub j: usize,
    pub w_min: f64,
    pub w_max: f64,
}

/// Range of `w_j` over the intersection of the gap ball and the plane.
///
/// With `delta = sum(w_hat) + F(V)` the intersection is a ball of radius
/// `sqrt(r^2 - delta^2 / p)` centred at `w_hat - delta / p`, which gives
/// `w_hat_j - delta / p +- sqrt((p - 1)(p r^2 - delta^2)) / p`.
pub fn coordinate_bounds_bp(cert: &GapCertificate, j: usize) -> Result<CoordinateBounds> {
    let p = cert.p();
    if p == 0 {
        return Err(Error::DegenerateGroundSet);
    }
    if p == 1 {
        let pinned = -cert.f_ground;
        return Ok(CoordinateBounds {
            j,
            w_min: pinned,
            w_max: pinned,
        });
    }
    let pf = p as f64;
    let delta: f64 = cert.w_hat.iter().sum::<f64>() + cert.f_ground;
    let disc = ((pf - 1.0) * (2.0 * pf * cert.gap.max(0.0) - delta * delta)).max(0.0);
    let centre = cert.w_hat[j] - delta / pf;
    let half = disc.sqrt() / pf;
    Ok(CoordinateBounds {
        j,
        w_min: centre - half,
        w_max: centre + half,
    })
}

/// The discriminant-form quantities `(b_j, c_j)` whose quadratic
/// `p t^2 + b_j t + c_j = 0` has the bounds of [`coordinate_bounds_bp`] as roots.
pub fn bound_coefficients(cert: &GapCertificate, j: usize) -> (f64, f64) {
    let p = cert.p() as f64;
    let wj = cert.w_hat[j];
    let rest = cert.w_hat.iter().sum::<f64>() - wj + cert.f_ground;
    let b = 2.0 * (rest - (p - 1.0) * wj);
    let c = rest * rest - (p - 1.0) * (2.0 * cert.gap.max(0.0) - wj * wj);
    (b, c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConstraint {
    Nonpositive,
    Nonnegative,
}

/// `max |w|_1` over the gap ball intersected with a sign constraint on `w_j`
/// opposite to the sign of `w_hat_j`.
pub fn l1_max_under_sign(cert: &GapCertificate, j: usize, sign: SignConstraint) -> Result<f64> {
    let r = cert.radius();
    let wj = cert.w_hat[j];
    // fold the nonnegative case onto the nonpositive one by reflection
    let x = match sign {
        SignConstraint::Nonpositive => wj,
        SignConstraint::Nonnegative => -wj,
    };
    if !(x > 0.0 && x <= r) {
        return Err(Error::PreconditionViolated(format!(
            "coordinate {j} with value {wj:e} is outside the {sign:?} case for radius {r:e}"
        )));
    }
    let pf = cert.p() as f64;
    let l1: f64 = cert.w_hat.iter().map(|v| v.abs()).sum();
    Ok(if x < r / pf.sqrt() {
        l1 - 2.0 * x + r * pf.sqrt()
    } else {
        l1 - x + (pf - 1.0).sqrt() * (r * r - x * x).max(0.0).sqrt()
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScreeningVariant {
    None,
    /// Active-element rules only.
    Aes,
    /// Inactive-element rules only.
    Ies,
    #[default]
    Iaes,
}

impl ScreeningVariant {
    pub const ALL: [ScreeningVariant; 4] = [Self::None, Self::Aes, Self::Ies, Self::Iaes];

    pub fn screens_active(self) -> bool {
        matches!(self, Self::Aes | Self::Iaes)
    }

    pub fn screens_inactive(self) -> bool {
        matches!(self, Self::Ies | Self::Iaes)
    }
}

impl std::fmt::Display for ScreeningVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::None => "none",
            Self::Aes => "aes",
            Self::Ies => "ies",
            Self::Iaes => "iaes",
        })
    }
}

impl std::str::FromStr for ScreeningVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Self::None),
            "aes" => Ok(Self::Aes),
            "ies" => Ok(Self::Ies),
            "iaes" => Ok(Self::Iaes),
            other => Err(format!("unknown screening variant '{other}'")),
        }
    }
}

/// Verdict for reduced coordinate `j`: `Some(true)` active, `Some(false)`
/// inactive, `None` undecided.
pub fn classify(cert: &GapCertificate, j: usize, variant: ScreeningVariant) -> Result<Option<bool>> {
    let wj = cert.w_hat[j];
    if wj == 0.0 || variant == ScreeningVariant::None {
        return Ok(None);
    }
    let r = cert.radius();
    let bounds = coordinate_bounds_bp(cert, j)?;
    let mut active = bounds.w_min > RULE_MARGIN;
    let mut inactive = bounds.w_max < -RULE_MARGIN;
    let floor = cert.l1_floor() - RULE_MARGIN;
    if wj > 0.0 && wj <= r {
        active |= l1_max_under_sign(cert, j, SignConstraint::Nonpositive)? < floor;
    } else if wj < 0.0 && -wj <= r {
        inactive |= l1_max_under_sign(cert, j, SignConstraint::Nonnegative)? < floor;
    }
    active &= variant.screens_active();
    inactive &= variant.screens_inactive();
    match (active, inactive) {
        (true, true) => Err(Error::ConflictingVerdict(j)),
        (true, false) => Ok(Some(true)),
        (false, true) => Ok(Some(false)),
        (false, false) => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::Modular;

    fn cert(w: &[f64], gap: f64, f_ground: f64) -> GapCertificate {
        GapCertificate {
            w_hat: w.to_vec(),
            s_hat: w.iter().map(|x| -x).collect(),
            gap,
            f_ground,
            best_superlevel_value: 0.0,
            s_l1: w.iter().map(|x| x.abs()).sum(),
        }
    }

    #[test]
    fn superlevel_examples() {
        let f = Oracle::new(Modular::new(vec![-1.0, 2.0]));
        let (c, v) = best_superlevel_set(&f, &[1.0, -2.0]);
        assert_eq!(c, ElementSet::from_indices(2, [0]));
        assert_eq!(v, -1.0);
        let zero = Oracle::new(Modular::new(vec![0.0; 3]));
        let (c, v) = best_superlevel_set(&zero, &[0.3, 0.1, 0.2]);
        assert!(c.is_empty());
        assert_eq!(v, 0.0);
    }

    #[test]
    fn zero_gap_bounds_collapse() {
        let w = [0.5, -1.5, 2.0];
        let c = cert(&w, 0.0, -1.0);
        for (j, &wj) in w.iter().enumerate() {
            let b = coordinate_bounds_bp(&c, j).unwrap();
            assert!((b.w_min - wj).abs() < 1e-15 && (b.w_max - wj).abs() < 1e-15);
            let (bj, cj) = bound_coefficients(&c, j);
            assert!((bj + 2.0 * 3.0 * wj).abs() < 1e-12);
            assert!((cj - 3.0 * wj * wj).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_disk_bounds() {
        let c = cert(&[0.0, 0.0], 0.5, 0.0);
        let b = coordinate_bounds_bp(&c, 0).unwrap();
        let h = 2f64.sqrt() / 2.0;
        assert!((b.w_min + h).abs() < 1e-15 && (b.w_max - h).abs() < 1e-15);
    }

    #[test]
    fn stable_form_matches_quadratic_roots() {
        let c = cert(&[0.3, -0.7, 1.1, 0.2], 0.8, -0.5);
        for j in 0..4 {
            let (b, cc) = bound_coefficients(&c, j);
            let p = 4.0;
            let disc = (b * b - 4.0 * p * cc).max(0.0).sqrt();
            let bounds = coordinate_bounds_bp(&c, j).unwrap();
            assert!((bounds.w_min - (-b - disc) / (2.0 * p)).abs() < 1e-12);
            assert!((bounds.w_max - (-b + disc) / (2.0 * p)).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_sizes() {
        let c = cert(&[0.3], 1.0, -2.0);
        let b = coordinate_bounds_bp(&c, 0).unwrap();
        assert_eq!((b.w_min, b.w_max), (2.0, 2.0));
        assert!(matches!(
            coordinate_bounds_bp(&cert(&[], 1.0, 0.0), 0),
            Err(Error::DegenerateGroundSet)
        ));
    }

    #[test]
    fn l1_examples() {
        let c = cert(&[0.1, 0.0], 0.02, 0.0);
        let v = l1_max_under_sign(&c, 0, SignConstraint::Nonpositive).unwrap();
        assert!((v - (0.1 - 0.2 + 0.08f64.sqrt())).abs() < 1e-15);
        assert!((v - 0.1828).abs() < 1e-4);
        let m = cert(&[-0.1, 0.0], 0.02, 0.0);
        assert_eq!(l1_max_under_sign(&m, 0, SignConstraint::Nonnegative).unwrap(), v);
        assert!(l1_max_under_sign(&c, 0, SignConstraint::Nonnegative).is_err());
        assert!(l1_max_under_sign(&cert(&[0.5, 0.0], 0.02, 0.0), 0, SignConstraint::Nonpositive).is_err());
    }

    #[test]
    fn l1_second_branch() {
        // w_j above r / sqrt(p): the constraint w_j <= 0 binds
        let c = cert(&[0.18, 0.05, -0.02], 0.02, 0.0);
        let r = 0.2f64;
        let v = l1_max_under_sign(&c, 0, SignConstraint::Nonpositive).unwrap();
        let expect = 0.25 - 0.18 + 2f64.sqrt() * (r * r - 0.18 * 0.18).sqrt();
        assert!((v - expect).abs() < 1e-15);
    }

    #[test]
    fn variant_parsing() {
        for v in ScreeningVariant::ALL {
            assert_eq!(v.to_string().parse::<ScreeningVariant>().unwrap(), v);
        }
        assert!("bogus".parse::<ScreeningVariant>().is_err());
    }
}
