//! Model layer: imprecise (interval-valued) parameters, their crisp
//! realization at a precision level `p`, the finite atomic jump measure, and
//! the threshold coefficients `b1`, `b2`, `b3`.
//!
//! The dynamics are a one-predator (`y`) two-prey (`x1`, `x2`) system with a
//! saturating (Holling II) functional response, driven by one Brownian motion
//! per species and a common compound-Poisson jump source: a jump of mark `k`
//! multiplies species `i` by `1 + c_i[k]`.
//!
//! The threshold coefficients are
//!
//! ```text
//! b_i = r_i(p) - sigma_i(p)^2 / 2 + sum_k w_k ln(1 + c_i[k])   (prey, i = 1,2)
//! b_3 = -r_3(p) - sigma_3(p)^2 / 2 + sum_k w_k ln(1 + c_3[k])  (predator)
//! ```
//!
//! and their signs drive the extinction/persistence classification in
//! [`crate::asymptotics`]. They are computed once per [`CrispModel`] and
//! cached, since every log-drift evaluation uses them.

use crate::interval::{Interval, IntervalError, PositiveInterval};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("coefficient {name}: {source}")]
    Coefficient {
        name: &'static str,
        source: IntervalError,
    },
    #[error("precision level p must lie in [0, 1], got {0}")]
    PrecisionOutOfRange(f64),
    #[error("jump atom {index}: weight must be positive and finite, got {weight}")]
    InvalidJumpWeight { index: usize, weight: f64 },
    #[error("jump atom {index}: size {species} must be finite and > -1, got {value}")]
    InvalidJumpSize {
        index: usize,
        species: &'static str,
        value: f64,
    },
    #[error("state component {component} must be strictly positive and finite, got {value}")]
    NonPositiveState { component: &'static str, value: f64 },
    #[error("crisp coefficient {name} must be {requirement}, got {value}")]
    InvalidCrispCoefficient {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
}

/// The three species of the system, in state order `(x1, x2, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Species {
    Prey1,
    Prey2,
    Predator,
}

impl Species {
    pub const ALL: [Species; 3] = [Species::Prey1, Species::Prey2, Species::Predator];

    pub fn index(self) -> usize {
        match self {
            Species::Prey1 => 0,
            Species::Prey2 => 1,
            Species::Predator => 2,
        }
    }

    /// Column label used in CSV output and report check names.
    pub fn label(self) -> &'static str {
        match self {
            Species::Prey1 => "x1",
            Species::Prey2 => "x2",
            Species::Predator => "y",
        }
    }

    /// 1-based species number used in the jump-events CSV.
    pub fn number(self) -> u8 {
        self.index() as u8 + 1
    }
}

/// One atom of the jump mark measure: `weight` is its intensity contribution,
/// `c1`/`c2`/`c3` the per-species relative jump sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpAtom {
    pub weight: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl JumpAtom {
    pub fn size(&self, species: Species) -> f64 {
        match species {
            Species::Prey1 => self.c1,
            Species::Prey2 => self.c2,
            Species::Predator => self.c3,
        }
    }

    pub fn sizes(&self) -> [f64; 3] {
        [self.c1, self.c2, self.c3]
    }
}

/// Finite atomic characteristic measure of the jump source.
///
/// Every jump size must exceed `-1` so `ln(1 + c)` is defined and jumps keep
/// states strictly positive. With finitely many atoms the usual
/// integrability assumptions on `|c|`, `c^2`, `|ln(1+c)|`, `ln(1+c)^2` hold
/// automatically; [`JumpMeasure::integrability_holds`] exists as a sanity
/// check, not a runtime condition.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct JumpMeasure {
    atoms: Vec<JumpAtom>,
}

impl JumpMeasure {
    pub fn new(atoms: Vec<JumpAtom>) -> Result<Self, ModelError> {
        for (index, atom) in atoms.iter().enumerate() {
            if !(atom.weight > 0.0) || !atom.weight.is_finite() {
                return Err(ModelError::InvalidJumpWeight {
                    index,
                    weight: atom.weight,
                });
            }
            for species in Species::ALL {
                let value = atom.size(species);
                if !(value > -1.0) || !value.is_finite() {
                    return Err(ModelError::InvalidJumpSize {
                        index,
                        species: species.label(),
                        value,
                    });
                }
            }
        }
        let measure = Self { atoms };
        debug_assert!(measure.integrability_holds());
        Ok(measure)
    }

    /// Measure with no atoms (pure diffusion).
    pub fn none() -> Self {
        Self::default()
    }

    pub fn atoms(&self) -> &[JumpAtom] {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Total jump intensity `Lambda = sum_k w_k`.
    pub fn total_rate(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// The exact jump integral `sum_k w_k ln(1 + c_i[k])` for species `i`.
    pub fn log_jump_integral(&self, species: Species) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.weight * a.size(species).ln_1p())
            .sum()
    }

    pub fn integrability_holds(&self) -> bool {
        Species::ALL.iter().all(|&sp| {
            let (m1, m2): (f64, f64) = self
                .atoms
                .iter()
                .map(|a| {
                    let c = a.size(sp).abs();
                    let l = a.size(sp).ln_1p().abs();
                    (a.weight * c.max(c * c), a.weight * l.max(l * l))
                })
                .fold((0.0, 0.0), |(s1, s2), (v1, v2)| (s1 + v1, s2 + v2));
            m1.is_finite() && m2.is_finite()
        })
    }
}

const R_NAMES: [&str; 3] = ["r1", "r2", "r3"];
const A_NAMES: [[&str; 3]; 3] = [
    ["a11", "a12", "a13"],
    ["a21", "a22", "a23"],
    ["a31", "a32", "a33"],
];
const SIGMA_NAMES: [&str; 3] = ["sigma1", "sigma2", "sigma3"];

/// The system with all rates, interaction coefficients and noise intensities
/// known only as intervals.
///
/// Growth/death rates and interaction intervals must have strictly positive
/// endpoints. Noise intervals may additionally be the degenerate `[0, 0]`
/// (noise-free runs are essential sanity checks and sigma never enters a
/// logarithm).
#[derive(Debug, Clone, PartialEq)]
pub struct ImpreciseModel {
    r: [PositiveInterval; 3],
    a: [[PositiveInterval; 3]; 3],
    sigma: [Interval; 3],
    jumps: JumpMeasure,
}

impl ImpreciseModel {
    pub fn new(
        r: [Interval; 3],
        a: [[Interval; 3]; 3],
        sigma: [Interval; 3],
        jumps: JumpMeasure,
    ) -> Result<Self, ModelError> {
        let positive = |iv: Interval, name: &'static str| {
            PositiveInterval::new(iv).map_err(|source| ModelError::Coefficient { name, source })
        };
        let r = [
            positive(r[0], R_NAMES[0])?,
            positive(r[1], R_NAMES[1])?,
            positive(r[2], R_NAMES[2])?,
        ];
        let mut a_pos: [[Option<PositiveInterval>; 3]; 3] = Default::default();
        for i in 0..3 {
            for j in 0..3 {
                a_pos[i][j] = Some(positive(a[i][j], A_NAMES[i][j])?);
            }
        }
        let a = a_pos.map(|row| row.map(|iv| iv.unwrap()));
        for (k, iv) in sigma.iter().enumerate() {
            let zero = iv.lo() == 0.0 && iv.hi() == 0.0;
            if !zero && iv.lo() <= 0.0 {
                return Err(ModelError::Coefficient {
                    name: SIGMA_NAMES[k],
                    source: IntervalError::NonPositiveInterval {
                        lo: iv.lo(),
                        hi: iv.hi(),
                    },
                });
            }
        }
        Ok(Self { r, a, sigma, jumps })
    }

    pub fn r_hat(&self, species: Species) -> &PositiveInterval {
        &self.r[species.index()]
    }

    pub fn a_hat(&self, i: Species, j: Species) -> &PositiveInterval {
        &self.a[i.index()][j.index()]
    }

    pub fn sigma_hat(&self, species: Species) -> &Interval {
        &self.sigma[species.index()]
    }

    pub fn jumps(&self) -> &JumpMeasure {
        &self.jumps
    }

    /// Realize every interval coefficient at precision level `p` via
    /// `f(p) = lo^(1-p) * hi^p`; the jump measure passes through unchanged.
    pub fn realize(&self, p: f64) -> Result<CrispModel, ModelError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(ModelError::PrecisionOutOfRange(p));
        }
        let lift = |res: Result<f64, IntervalError>, name: &'static str| {
            res.map_err(|source| ModelError::Coefficient { name, source })
        };
        let mut r = [0.0; 3];
        let mut sigma = [0.0; 3];
        let mut a = [[0.0; 3]; 3];
        for i in 0..3 {
            r[i] = lift(self.r[i].realize(p), R_NAMES[i])?;
            let s = &self.sigma[i];
            sigma[i] = if s.lo() == 0.0 && s.hi() == 0.0 {
                0.0
            } else {
                lift(PositiveInterval::new(*s).and_then(|g| g.realize(p)), SIGMA_NAMES[i])?
            };
            for j in 0..3 {
                a[i][j] = lift(self.a[i][j].realize(p), A_NAMES[i][j])?;
            }
        }
        CrispModel::new(p, r, a, sigma, self.jumps.clone())
    }
}

/// Threshold coefficients; see the module docs for the formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BCoefficients {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
}

impl BCoefficients {
    fn compute(r: &[f64; 3], sigma: &[f64; 3], jumps: &JumpMeasure) -> Self {
        let ito = |i: usize| sigma[i] * sigma[i] / 2.0;
        Self {
            b1: r[0] - ito(0) + jumps.log_jump_integral(Species::Prey1),
            b2: r[1] - ito(1) + jumps.log_jump_integral(Species::Prey2),
            b3: -r[2] - ito(2) + jumps.log_jump_integral(Species::Predator),
        }
    }

    pub fn get(&self, species: Species) -> f64 {
        match species {
            Species::Prey1 => self.b1,
            Species::Prey2 => self.b2,
            Species::Predator => self.b3,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.b1, self.b2, self.b3]
    }
}

/// Point-parameter model obtained by realizing an [`ImpreciseModel`] at a
/// precision level `p` (or built directly for reduced test systems).
///
/// Interaction coefficients may be zero here (realized models always have
/// positive ones, but decoupled subsystems are useful fixtures); growth/death
/// rates stay strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct CrispModel {
    p: f64,
    r: [f64; 3],
    a: [[f64; 3]; 3],
    sigma: [f64; 3],
    jumps: JumpMeasure,
    b: BCoefficients,
}

impl CrispModel {
    pub fn new(
        p: f64,
        r: [f64; 3],
        a: [[f64; 3]; 3],
        sigma: [f64; 3],
        jumps: JumpMeasure,
    ) -> Result<Self, ModelError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(ModelError::PrecisionOutOfRange(p));
        }
        for i in 0..3 {
            if !(r[i] > 0.0) || !r[i].is_finite() {
                return Err(ModelError::InvalidCrispCoefficient {
                    name: R_NAMES[i],
                    requirement: "strictly positive and finite",
                    value: r[i],
                });
            }
            if !(sigma[i] >= 0.0) || !sigma[i].is_finite() {
                return Err(ModelError::InvalidCrispCoefficient {
                    name: SIGMA_NAMES[i],
                    requirement: "nonnegative and finite",
                    value: sigma[i],
                });
            }
            for j in 0..3 {
                if !(a[i][j] >= 0.0) || !a[i][j].is_finite() {
                    return Err(ModelError::InvalidCrispCoefficient {
                        name: A_NAMES[i][j],
                        requirement: "nonnegative and finite",
                        value: a[i][j],
                    });
                }
            }
        }
        let b = BCoefficients::compute(&r, &sigma, &jumps);
        Ok(Self {
            p,
            r,
            a,
            sigma,
            jumps,
            b,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn r(&self, species: Species) -> f64 {
        self.r[species.index()]
    }

    pub fn a(&self, i: Species, j: Species) -> f64 {
        self.a[i.index()][j.index()]
    }

    pub fn sigma(&self, species: Species) -> f64 {
        self.sigma[species.index()]
    }

    pub fn jumps(&self) -> &JumpMeasure {
        &self.jumps
    }

    /// Cached threshold coefficients.
    pub fn b(&self) -> &BCoefficients {
        &self.b
    }

    /// State-space drift of `(x1, x2, y)`: each bracketed per-capita rate
    /// multiplied by its state.
    pub fn drift(&self, s: &StateVector) -> [f64; 3] {
        let (x1, x2, y) = (s.x1(), s.x2(), s.y());
        let a = &self.a;
        [
            x1 * (self.r[0] - a[0][0] * x1 - a[0][1] * x2 - a[0][2] * y / (1.0 + x1)),
            x2 * (self.r[1] - a[1][0] * x1 - a[1][1] * x2 - a[1][2] * y / (1.0 + x2)),
            y * (-self.r[2] - a[2][2] * y + a[2][0] * x1 / (1.0 + x1) + a[2][1] * x2 / (1.0 + x2)),
        ]
    }

    /// Drift of the log state `(ln x1, ln x2, ln y)` against the compensated
    /// jump measure; the `b_i` absorb both the Ito correction and the jump
    /// compensator.
    pub fn log_drift(&self, s: &StateVector) -> [f64; 3] {
        let (x1, x2, y) = (s.x1(), s.x2(), s.y());
        let a = &self.a;
        [
            self.b.b1 - a[0][0] * x1 - a[0][1] * x2 - a[0][2] * y / (1.0 + x1),
            self.b.b2 - a[1][0] * x1 - a[1][1] * x2 - a[1][2] * y / (1.0 + x2),
            self.b.b3 - a[2][2] * y + a[2][0] * x1 / (1.0 + x1) + a[2][1] * x2 / (1.0 + x2),
        ]
    }
}

/// Strictly positive population state `(x1, x2, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    x1: f64,
    x2: f64,
    y: f64,
}

impl StateVector {
    pub fn new(x1: f64, x2: f64, y: f64) -> Result<Self, ModelError> {
        for (component, value) in [("x1", x1), ("x2", x2), ("y", y)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(ModelError::NonPositiveState { component, value });
            }
        }
        Ok(Self { x1, x2, y })
    }

    pub fn from_log(u: [f64; 3]) -> Result<Self, ModelError> {
        Self::new(u[0].exp(), u[1].exp(), u[2].exp())
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }

    pub fn x2(&self) -> f64 {
        self.x2
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn get(&self, species: Species) -> f64 {
        match species {
            Species::Prey1 => self.x1,
            Species::Prey2 => self.x2,
            Species::Predator => self.y,
        }
    }

    pub fn to_log(&self) -> [f64; 3] {
        [self.x1.ln(), self.x2.ln(), self.y.ln()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn pt(c: f64) -> Interval {
        Interval::point(c).unwrap()
    }

    fn degenerate_model(r: [f64; 3], a: [[f64; 3]; 3], sigma: [f64; 3]) -> ImpreciseModel {
        ImpreciseModel::new(
            [pt(r[0]), pt(r[1]), pt(r[2])],
            a.map(|row| row.map(pt)),
            sigma.map(pt),
            JumpMeasure::none(),
        )
        .unwrap()
    }

    #[test]
    fn realize_degenerate_reproduces_constants() {
        let r = [0.7, 0.3, 0.4];
        let a = [[0.5, 0.1, 0.2], [0.1, 0.6, 0.3], [0.2, 0.3, 0.4]];
        let sigma = [0.1, 0.2, 0.3];
        let m = degenerate_model(r, a, sigma);
        for p in [0.0, 0.25, 0.5, 1.0] {
            let crisp = m.realize(p).unwrap();
            for i in Species::ALL {
                assert_relative_eq!(crisp.r(i), r[i.index()], max_relative = 1e-15);
                assert_relative_eq!(crisp.sigma(i), sigma[i.index()], max_relative = 1e-15);
                for j in Species::ALL {
                    assert_relative_eq!(crisp.a(i, j), a[i.index()][j.index()], max_relative = 1e-15);
                }
            }
        }
    }

    #[test]
    fn realize_at_zero_gives_lower_endpoints() {
        let m = ImpreciseModel::new(
            [iv(1.0, 2.0), iv(0.5, 0.9), iv(0.3, 0.4)],
            [[iv(0.5, 0.7); 3]; 3],
            [iv(0.1, 0.2), iv(0.1, 0.3), iv(0.2, 0.4)],
            JumpMeasure::none(),
        )
        .unwrap();
        let crisp = m.realize(0.0).unwrap();
        assert_eq!(crisp.r(Species::Prey1), 1.0);
        assert_eq!(crisp.r(Species::Prey2), 0.5);
        assert_eq!(crisp.sigma(Species::Predator), 0.2);
        assert_eq!(crisp.a(Species::Prey1, Species::Predator), 0.5);
    }

    #[test]
    fn realize_geometric_midpoint() {
        let m = ImpreciseModel::new(
            [iv(1.0, 2.0), pt(1.0), pt(1.0)],
            [[pt(0.5); 3]; 3],
            [pt(0.1); 3],
            JumpMeasure::none(),
        )
        .unwrap();
        let crisp = m.realize(0.5).unwrap();
        // geometric mean of [1, 2]
        assert_relative_eq!(crisp.r(Species::Prey1), 1.4142135623730951, epsilon = 1e-15);
    }

    #[test]
    fn realize_rejects_out_of_range_p() {
        let m = degenerate_model([1.0; 3], [[0.5; 3]; 3], [0.1; 3]);
        assert!(matches!(m.realize(-0.01), Err(ModelError::PrecisionOutOfRange(_))));
        assert!(matches!(m.realize(1.01), Err(ModelError::PrecisionOutOfRange(_))));
    }

    #[test]
    fn realize_monotone_in_p() {
        let m = ImpreciseModel::new(
            [iv(0.5, 1.5), iv(0.2, 0.9), iv(0.1, 0.7)],
            [[iv(0.1, 0.9); 3]; 3],
            [iv(0.05, 0.5), iv(0.0, 0.0), iv(0.2, 0.2)],
            JumpMeasure::none(),
        )
        .unwrap();
        let grid: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
        for w in grid.windows(2) {
            let lo = m.realize(w[0]).unwrap();
            let hi = m.realize(w[1]).unwrap();
            for i in Species::ALL {
                assert!(lo.r(i) <= hi.r(i) * (1.0 + 1e-14));
                assert!(lo.sigma(i) <= hi.sigma(i) * (1.0 + 1e-14) + 1e-300);
                for j in Species::ALL {
                    assert!(lo.a(i, j) <= hi.a(i, j) * (1.0 + 1e-14));
                }
            }
        }
    }

    #[test]
    fn sigma_zero_interval_is_allowed_but_mixed_zero_is_not() {
        let ok = ImpreciseModel::new(
            [pt(1.0); 3],
            [[pt(0.5); 3]; 3],
            [iv(0.0, 0.0), pt(0.1), pt(0.1)],
            JumpMeasure::none(),
        );
        assert!(ok.is_ok());
        let bad = ImpreciseModel::new(
            [pt(1.0); 3],
            [[pt(0.5); 3]; 3],
            [iv(0.0, 0.5), pt(0.1), pt(0.1)],
            JumpMeasure::none(),
        );
        assert!(matches!(bad, Err(ModelError::Coefficient { name: "sigma1", .. })));
    }

    #[test]
    fn b_rate_only() {
        let m = CrispModel::new(0.5, [1.0, 1.0, 1.0], [[0.0; 3]; 3], [0.0; 3], JumpMeasure::none())
            .unwrap();
        assert_eq!(m.b().b1, 1.0);
    }

    #[test]
    fn b_predator_sign() {
        // b3 = -0.4 - 0.2^2/2 = -0.42
        let m = CrispModel::new(
            0.5,
            [1.0, 1.0, 0.4],
            [[0.0; 3]; 3],
            [0.0, 0.0, 0.2],
            JumpMeasure::none(),
        )
        .unwrap();
        assert_relative_eq!(m.b().b3, -0.42, epsilon = 1e-15);
    }

    #[test]
    fn b_with_jump_integral() {
        // b1 = sqrt(2) - 0.01 + ln(1.1); frozen from high-precision evaluation.
        let jumps = JumpMeasure::new(vec![JumpAtom {
            weight: 1.0,
            c1: 0.1,
            c2: 0.0,
            c3: 0.0,
        }])
        .unwrap();
        let m = CrispModel::new(
            0.5,
            [2.0f64.sqrt(), 1.0, 1.0],
            [[0.0; 3]; 3],
            [0.02f64.sqrt(), 0.0, 0.0],
            jumps,
        )
        .unwrap();
        assert_relative_eq!(m.b().b1, 1.4995237421774199, epsilon = 1e-12);
    }

    #[test]
    fn b_continuous_in_p_matches_analytic_derivative() {
        let m = ImpreciseModel::new(
            [iv(0.5, 1.5), iv(0.2, 0.9), iv(0.1, 0.7)],
            [[iv(0.1, 0.9); 3]; 3],
            [iv(0.05, 0.5), iv(0.1, 0.4), iv(0.2, 0.3)],
            JumpMeasure::none(),
        )
        .unwrap();
        // Analytic oracle: d/dp f(p) = f(p) ln(hi/lo), so
        // db1/dp = r1(p) ln(r1u/r1l) - sigma1(p)^2 ln(s1u/s1l).
        for p in [0.2, 0.5, 0.8] {
            let h = 1e-6;
            let b_plus = m.realize(p + h).unwrap().b().b1;
            let b_minus = m.realize(p - h).unwrap().b().b1;
            let fd = (b_plus - b_minus) / (2.0 * h);
            let crisp = m.realize(p).unwrap();
            let r1 = crisp.r(Species::Prey1);
            let s1 = crisp.sigma(Species::Prey1);
            let analytic = r1 * (1.5f64 / 0.5).ln() - s1 * s1 * (0.5f64 / 0.05).ln();
            assert_relative_eq!(fd, analytic, max_relative = 1e-6);
        }
    }

    #[test]
    fn drift_logistic_fixed_point() {
        let m = CrispModel::new(
            0.5,
            [1.0, 1.0, 1.0],
            [[2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            [0.0; 3],
            JumpMeasure::none(),
        )
        .unwrap();
        let s = StateVector::new(0.5, 1.0, 1.0).unwrap(); // x1 = r1/a11
        assert_relative_eq!(m.drift(&s)[0], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn drift_decoupled_exponential() {
        let m = CrispModel::new(
            0.5,
            [0.7, 0.3, 0.4],
            [[0.0; 3]; 3],
            [0.0; 3],
            JumpMeasure::none(),
        )
        .unwrap();
        let s = StateVector::new(2.0, 3.0, 5.0).unwrap();
        let d = m.drift(&s);
        assert_relative_eq!(d[0], 0.7 * 2.0, epsilon = 1e-15);
        assert_relative_eq!(d[1], 0.3 * 3.0, epsilon = 1e-15);
        assert_relative_eq!(d[2], -0.4 * 5.0, epsilon = 1e-15);
    }

    #[test]
    fn drift_hand_evaluated() {
        // r = (1,1,1), diagonal a = 1, off-diagonal a = 0.5, s = (1,1,1):
        // d1 = 1*(1 - 1 - 0.5 - 0.5/2) = -0.75, d3 = 1*(-1 - 1 + 0.25 + 0.25) = -1.5.
        let m = CrispModel::new(
            0.5,
            [1.0, 1.0, 1.0],
            [[1.0, 0.5, 0.5], [0.5, 1.0, 0.5], [0.5, 0.5, 1.0]],
            [0.0; 3],
            JumpMeasure::none(),
        )
        .unwrap();
        let s = StateVector::new(1.0, 1.0, 1.0).unwrap();
        let d = m.drift(&s);
        assert_relative_eq!(d[0], -0.75, epsilon = 1e-15);
        assert_relative_eq!(d[1], -0.75, epsilon = 1e-15);
        assert_relative_eq!(d[2], -1.5, epsilon = 1e-15);
    }

    #[test]
    fn log_drift_equals_per_capita_drift_without_noise_or_jumps() {
        let m = CrispModel::new(
            0.5,
            [1.0, 0.8, 0.6],
            [[0.4, 0.1, 0.2], [0.1, 0.5, 0.3], [0.2, 0.3, 0.6]],
            [0.0; 3],
            JumpMeasure::none(),
        )
        .unwrap();
        let s = StateVector::new(0.7, 1.3, 2.1).unwrap();
        let ld = m.log_drift(&s);
        let d = m.drift(&s);
        for i in 0..3 {
            assert_relative_eq!(ld[i], d[i] / s.get(Species::ALL[i]), epsilon = 1e-14);
        }
    }

    #[test]
    fn log_drift_frozen_oracle() {
        // Cross-checked against an independent high-precision evaluation:
        // r = (1,1,1), sigma = (0.2, 0.3, 0.4), one atom w = 0.5,
        // c = (0.1, -0.2, 0.3), dense a, state (1, 2, 3).
        let jumps = JumpMeasure::new(vec![JumpAtom {
            weight: 0.5,
            c1: 0.1,
            c2: -0.2,
            c3: 0.3,
        }])
        .unwrap();
        let m = CrispModel::new(
            0.5,
            [1.0, 1.0, 1.0],
            [[1.0, 0.5, 0.5], [0.5, 1.0, 0.5], [0.5, 0.5, 1.0]],
            [0.2, 0.3, 0.4],
            jumps,
        )
        .unwrap();
        let s = StateVector::new(1.0, 2.0, 3.0).unwrap();
        let ld = m.log_drift(&s);
        assert_relative_eq!(ld[0], -1.7223449100978376, epsilon = 1e-12);
        assert_relative_eq!(ld[1], -2.1565717756571049, epsilon = 1e-12);
        assert_relative_eq!(ld[2], -3.3654845344329211, epsilon = 1e-12);
    }

    #[test]
    fn log_drift_vs_drift_identity_randomized() {
        // log_drift_i - drift_i / s_i = -sigma_i^2/2 + sum w ln(1+c_i),
        // checked at 10^4 random states to 1e-12 relative.
        let jumps = JumpMeasure::new(vec![
            JumpAtom {
                weight: 0.5,
                c1: 0.1,
                c2: -0.2,
                c3: 0.3,
            },
            JumpAtom {
                weight: 1.5,
                c1: -0.05,
                c2: 0.4,
                c3: -0.5,
            },
        ])
        .unwrap();
        let m = CrispModel::new(
            0.5,
            [1.0, 0.8, 0.6],
            [[0.4, 0.1, 0.2], [0.1, 0.5, 0.3], [0.2, 0.3, 0.6]],
            [0.2, 0.3, 0.4],
            jumps,
        )
        .unwrap();
        let expected: Vec<f64> = Species::ALL
            .iter()
            .map(|&sp| {
                -m.sigma(sp) * m.sigma(sp) / 2.0 + m.jumps().log_jump_integral(sp)
            })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let s = StateVector::new(
                rng.random_range(1e-3..50.0),
                rng.random_range(1e-3..50.0),
                rng.random_range(1e-3..50.0),
            )
            .unwrap();
            let ld = m.log_drift(&s);
            let d = m.drift(&s);
            for (i, &sp) in Species::ALL.iter().enumerate() {
                let gap = ld[i] - d[i] / s.get(sp);
                let scale = expected[i].abs().max(ld[i].abs()).max(1.0);
                assert!(
                    (gap - expected[i]).abs() <= 1e-12 * scale,
                    "identity violated at {s:?}: {gap} vs {}",
                    expected[i]
                );
            }
        }
    }

    #[test]
    fn jump_measure_validation() {
        assert!(JumpMeasure::new(vec![JumpAtom {
            weight: 0.0,
            c1: 0.1,
            c2: 0.1,
            c3: 0.1,
        }])
        .is_err());
        let err = JumpMeasure::new(vec![JumpAtom {
            weight: 1.0,
            c1: 0.1,
            c2: -1.0,
            c3: 0.1,
        }])
        .unwrap_err();
        assert!(matches!(err, ModelError::InvalidJumpSize { species: "x2", .. }));
        let m = JumpMeasure::new(vec![
            JumpAtom {
                weight: 0.5,
                c1: 0.1,
                c2: -0.2,
                c3: 0.0,
            },
            JumpAtom {
                weight: 1.5,
                c1: 0.0,
                c2: 0.3,
                c3: -0.9,
            },
        ])
        .unwrap();
        assert_relative_eq!(m.total_rate(), 2.0);
        assert_relative_eq!(
            m.log_jump_integral(Species::Prey2),
            0.5 * (0.8f64).ln() + 1.5 * (1.3f64).ln(),
            epsilon = 1e-15
        );
        assert!(m.integrability_holds());
    }

    #[test]
    fn state_vector_requires_positivity() {
        assert!(StateVector::new(1.0, 1.0, 0.0).is_err());
        assert!(StateVector::new(-1.0, 1.0, 1.0).is_err());
        assert!(StateVector::new(1.0, f64::NAN, 1.0).is_err());
        let s = StateVector::new(0.5, 1.0, 2.0).unwrap();
        let back = StateVector::from_log(s.to_log()).unwrap();
        assert_relative_eq!(back.x1(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(back.y(), 2.0, epsilon = 1e-15);
    }
}
