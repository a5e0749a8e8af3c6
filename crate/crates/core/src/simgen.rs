//! Synthetic functional samples: Wiener paths (optionally with a mean
//! function), random series in the trigonometric basis, the disjoint sine and
//! cosine families, and contiguous mixtures of any two of these.
//!
//! Wiener-type curves are grid sampled. Basis curves are emitted as
//! coefficients in an orthonormal frame so their inner products are exact.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::curves::{Curve, GridSpec, ReprKind};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, StreamRng};

/// Equispacing tolerance (relative to the mean spacing) for Wiener grids.
const EQUISPACED_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanShift {
    /// `r t`
    Linear,
    /// `r t^2`
    Quadratic,
    /// `r e^t`
    Exponential,
}

impl MeanShift {
    pub fn eval(self, r: f64, t: f64) -> f64 {
        match self {
            MeanShift::Linear => r * t,
            MeanShift::Quadratic => r * t * t,
            MeanShift::Exponential => r * t.exp(),
        }
    }
}

impl FromStr for MeanShift {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t" | "linear" => Ok(MeanShift::Linear),
            "t2" | "quadratic" => Ok(MeanShift::Quadratic),
            "exp" | "exponential" => Ok(MeanShift::Exponential),
            other => Err(Error::invalid(format!("unknown mean function `{other}`"))),
        }
    }
}

/// Law of the random coefficients of a basis expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoeffDist {
    Normal { mean: f64, sd: f64 },
    /// Centred Cauchy, sampled by inverse CDF.
    Cauchy { scale: f64 },
    /// Standard Student t, sampled as `Z / sqrt(chi2_dof / dof)`.
    StudentT { dof: u32 },
    /// Point mass.
    Fixed(f64),
}

impl CoeffDist {
    pub fn standard_normal() -> Self {
        CoeffDist::Normal { mean: 0.0, sd: 1.0 }
    }

    /// Normal with the given variance.
    pub fn normal_var(mean: f64, var: f64) -> Self {
        CoeffDist::Normal {
            mean,
            sd: var.sqrt(),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            CoeffDist::Normal { mean, sd } => mean.is_finite() && sd.is_finite() && sd >= 0.0,
            CoeffDist::Cauchy { scale } => scale.is_finite() && scale > 0.0,
            CoeffDist::StudentT { dof } => dof >= 1,
            CoeffDist::Fixed(v) => v.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid coefficient law {self:?}")))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            CoeffDist::Normal { mean, sd } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + sd * z
            }
            CoeffDist::Cauchy { scale } => {
                let u: f64 = rng.random();
                scale * (PI * (u - 0.5)).tan()
            }
            CoeffDist::StudentT { dof } => {
                let z: f64 = StandardNormal.sample(rng);
                let chi2: f64 = (0..dof)
                    .map(|_| {
                        let g: f64 = StandardNormal.sample(rng);
                        g * g
                    })
                    .sum();
                z / (chi2 / dof as f64).sqrt()
            }
            CoeffDist::Fixed(v) => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `sqrt(2) sin(2 pi i t)`, coordinates `0..d`
    Sin,
    /// `cos(2 pi i t)`, coordinates `d..2d`
    Cos,
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sin" => Ok(Side::Sin),
            "cos" => Ok(Side::Cos),
            other => Err(Error::invalid(format!("unknown side `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSpec {
    /// Standard Wiener process on the grid.
    Wiener,
    /// `mu + W`.
    ShiftedWiener { mean: MeanShift, r: f64 },
    /// `sum_i weights[i] * xi_i * psi_{i+1}` in the trigonometric basis.
    Basis { weights: Vec<f64>, coeffs: CoeffDist },
    /// `sum_{i<=d} d^{-1/2} xi_i * b_i` with `b_i` the sine or the cosine
    /// family. The cosine family is taken literally (norm `1/sqrt 2`) unless
    /// `normalized_cos` is set.
    SinCos {
        d: usize,
        side: Side,
        coeffs: CoeffDist,
        normalized_cos: bool,
    },
    /// Each curve comes from `contaminant` with probability
    /// `delta / sqrt(count)`, otherwise from `base`.
    Mixture {
        base: Box<GeneratorSpec>,
        contaminant: Box<GeneratorSpec>,
        delta: f64,
    },
}

impl GeneratorSpec {
    /// Weights `i^{-2.5}`, `i = 1..=9`, with standard normal coefficients.
    pub fn decaying_basis(coeffs: CoeffDist) -> Self {
        GeneratorSpec::Basis {
            weights: decaying_weights(9, 2.5),
            coeffs,
        }
    }

    pub fn repr_kind(&self) -> ReprKind {
        match self {
            GeneratorSpec::Wiener | GeneratorSpec::ShiftedWiener { .. } => ReprKind::Grid,
            GeneratorSpec::Basis { .. } | GeneratorSpec::SinCos { .. } => ReprKind::Coeff,
            GeneratorSpec::Mixture { base, .. } => base.repr_kind(),
        }
    }

    /// Number of values per generated curve.
    pub fn dim(&self, grid: Option<&GridSpec>) -> Option<usize> {
        match self {
            GeneratorSpec::Wiener | GeneratorSpec::ShiftedWiener { .. } => grid.map(GridSpec::len),
            GeneratorSpec::Basis { weights, .. } => Some(weights.len()),
            GeneratorSpec::SinCos { d, .. } => Some(2 * d),
            GeneratorSpec::Mixture { base, .. } => base.dim(grid),
        }
    }

    pub fn validate(&self, grid: Option<&GridSpec>) -> Result<()> {
        match self {
            GeneratorSpec::Wiener => check_wiener_grid(grid).map(|_| ()),
            GeneratorSpec::ShiftedWiener { r, .. } => {
                if !r.is_finite() {
                    return Err(Error::invalid("mean shift r must be finite"));
                }
                check_wiener_grid(grid).map(|_| ())
            }
            GeneratorSpec::Basis { weights, coeffs } => {
                if weights.is_empty() {
                    return Err(Error::invalid("basis generator needs at least one weight"));
                }
                if weights.iter().any(|w| !w.is_finite()) {
                    return Err(Error::invalid("basis weights must be finite"));
                }
                coeffs.validate()
            }
            GeneratorSpec::SinCos { d, coeffs, .. } => {
                if *d == 0 {
                    return Err(Error::invalid("number of frequencies d must be at least 1"));
                }
                coeffs.validate()
            }
            GeneratorSpec::Mixture {
                base,
                contaminant,
                delta,
            } => {
                if matches!(**base, GeneratorSpec::Mixture { .. })
                    || matches!(**contaminant, GeneratorSpec::Mixture { .. })
                {
                    return Err(Error::invalid("mixtures cannot be nested"));
                }
                if !(delta.is_finite() && *delta >= 0.0) {
                    return Err(Error::invalid(format!("delta must be >= 0, got {delta}")));
                }
                base.validate(grid)?;
                contaminant.validate(grid)?;
                if base.repr_kind() != contaminant.repr_kind()
                    || base.dim(grid) != contaminant.dim(grid)
                {
                    return Err(Error::invalid(
                        "mixture components must share representation and dimension",
                    ));
                }
                Ok(())
            }
        }
    }

    /// `count` independent curves drawn from `rng`.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        count: usize,
        grid: Option<&GridSpec>,
        rng: &mut R,
    ) -> Result<Vec<Curve>> {
        self.validate(grid)?;
        if let GeneratorSpec::Mixture {
            base,
            contaminant,
            delta,
        } = self
        {
            let rate = mixture_rate(*delta, count)?;
            return (0..count)
                .map(|_| {
                    let u: f64 = rng.random();
                    let from = if u < rate { contaminant } else { base };
                    from.draw_one(grid, rng)
                })
                .collect();
        }
        (0..count).map(|_| self.draw_one(grid, rng)).collect()
    }

    fn draw_one<R: Rng + ?Sized>(&self, grid: Option<&GridSpec>, rng: &mut R) -> Result<Curve> {
        match self {
            GeneratorSpec::Wiener => Ok(Curve::Grid(wiener_path(check_wiener_grid(grid)?, rng))),
            GeneratorSpec::ShiftedWiener { mean, r } => {
                let g = check_wiener_grid(grid)?;
                let mut path = wiener_path(g, rng);
                for (v, &t) in path.iter_mut().zip(g.points()) {
                    *v += mean.eval(*r, t);
                }
                Ok(Curve::Grid(path))
            }
            GeneratorSpec::Basis { weights, coeffs } => Ok(Curve::Coeff(
                weights.iter().map(|w| w * coeffs.sample(rng)).collect(),
            )),
            GeneratorSpec::SinCos {
                d,
                side,
                coeffs,
                normalized_cos,
            } => {
                let mut c = vec![0.0; 2 * d];
                let scale = 1.0 / (*d as f64).sqrt();
                let (offset, factor) = match side {
                    Side::Sin => (0, scale),
                    Side::Cos if *normalized_cos => (*d, scale),
                    Side::Cos => (*d, scale / SQRT_2),
                };
                for slot in &mut c[offset..offset + d] {
                    *slot = factor * coeffs.sample(rng);
                }
                Ok(Curve::Coeff(c))
            }
            GeneratorSpec::Mixture { .. } => Err(Error::invalid("mixtures cannot be nested")),
        }
    }
}

fn check_wiener_grid(grid: Option<&GridSpec>) -> Result<&GridSpec> {
    let g = grid.ok_or(Error::MissingGrid)?;
    if g.points()[0] != 0.0 {
        return Err(Error::InvalidGrid(format!(
            "Wiener paths start at t = 0, grid starts at {}",
            g.points()[0]
        )));
    }
    if !g.is_equispaced(EQUISPACED_RTOL) {
        return Err(Error::InvalidGrid(
            "Wiener generator needs an equispaced grid".into(),
        ));
    }
    Ok(g)
}

fn wiener_path<R: Rng + ?Sized>(grid: &GridSpec, rng: &mut R) -> Vec<f64> {
    let pts = grid.points();
    let mut path = Vec::with_capacity(pts.len());
    let mut w = 0.0;
    path.push(w);
    for step in pts.windows(2) {
        let z: f64 = StandardNormal.sample(rng);
        w += (step[1] - step[0]).sqrt() * z;
        path.push(w);
    }
    path
}

/// Contamination probability `delta / sqrt(count)`, which must lie in [0, 1].
pub fn mixture_rate(delta: f64, count: usize) -> Result<f64> {
    let rate = if count == 0 {
        0.0
    } else {
        delta / (count as f64).sqrt()
    };
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::invalid(format!(
            "mixing rate delta/sqrt(count) = {rate} is outside [0, 1]"
        )));
    }
    Ok(rate)
}

/// `i^{-power}` for `i = 1..=len`.
pub fn decaying_weights(len: usize, power: f64) -> Vec<f64> {
    (1..=len).map(|i| (i as f64).powf(-power)).collect()
}

/// Trigonometric basis on [0, 1], 1-based: `psi_1 = 1`,
/// `psi_{2k} = sqrt2 cos(2 pi k t)`, `psi_{2k+1} = sqrt2 sin(2 pi k t)`.
pub fn trig_basis(index: usize, t: f64) -> f64 {
    assert!(index >= 1, "trigonometric basis is 1-based");
    if index == 1 {
        return 1.0;
    }
    let k = (index / 2) as f64;
    if index.is_multiple_of(2) {
        SQRT_2 * (2.0 * PI * k * t).cos()
    } else {
        SQRT_2 * (2.0 * PI * k * t).sin()
    }
}

/// Orthonormal frame a coefficient curve is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    /// [`trig_basis`] indices 1, 2, ...
    Trig,
    /// `sqrt2 sin(2 pi i t)` for coordinates `i = 1..=d`, then
    /// `sqrt2 cos(2 pi i t)` for the next `d`.
    SinCos { d: usize },
}

/// Evaluates a coefficient curve at the points of `grid`.
pub fn render(coeffs: &[f64], frame: Frame, grid: &GridSpec) -> Vec<f64> {
    grid.points()
        .iter()
        .map(|&t| {
            coeffs
                .iter()
                .enumerate()
                .map(|(j, c)| {
                    let b = match frame {
                        Frame::Trig => trig_basis(j + 1, t),
                        Frame::SinCos { d } if j < d => {
                            SQRT_2 * (2.0 * PI * (j + 1) as f64 * t).sin()
                        }
                        Frame::SinCos { d } => SQRT_2 * (2.0 * PI * (j + 1 - d) as f64 * t).cos(),
                    };
                    c * b
                })
                .sum()
        })
        .collect()
}

pub fn gen_wiener(count: usize, grid: &GridSpec, seed: u64) -> Result<Vec<Curve>> {
    GeneratorSpec::Wiener.sample(count, Some(grid), &mut seeded(seed))
}

pub fn gen_shifted_wiener(
    count: usize,
    mean: MeanShift,
    r: f64,
    grid: &GridSpec,
    seed: u64,
) -> Result<Vec<Curve>> {
    GeneratorSpec::ShiftedWiener { mean, r }.sample(count, Some(grid), &mut seeded(seed))
}

pub fn gen_basis(count: usize, weights: &[f64], coeffs: CoeffDist, seed: u64) -> Result<Vec<Curve>> {
    GeneratorSpec::Basis {
        weights: weights.to_vec(),
        coeffs,
    }
    .sample(count, None, &mut seeded(seed))
}

pub fn gen_sincos(
    count: usize,
    d: usize,
    side: Side,
    coeffs: CoeffDist,
    normalized_cos: bool,
    seed: u64,
) -> Result<Vec<Curve>> {
    GeneratorSpec::SinCos {
        d,
        side,
        coeffs,
        normalized_cos,
    }
    .sample(count, None, &mut seeded(seed))
}

pub fn gen_mixture(
    count: usize,
    base: GeneratorSpec,
    contaminant: GeneratorSpec,
    delta: f64,
    grid: Option<&GridSpec>,
    seed: u64,
) -> Result<Vec<Curve>> {
    GeneratorSpec::Mixture {
        base: Box::new(base),
        contaminant: Box::new(contaminant),
        delta,
    }
    .sample(count, grid, &mut seeded(seed))
}

fn seeded(seed: u64) -> StreamRng {
    stream_rng(seed, 0)
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Sin => "sin",
            Side::Cos => "cos",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::inner_product;

    #[test]
    fn wiener_starts_at_zero() {
        let g = GridSpec::unit_interval(101).unwrap();
        for c in gen_wiener(20, &g, 1).unwrap() {
            assert_eq!(c.values()[0], 0.0);
            assert_eq!(c.dim(), 101);
        }
    }

    #[test]
    fn wiener_rejects_uneven_grid() {
        let g = GridSpec::new(vec![0.0, 0.1, 0.5, 1.0], Default::default()).unwrap();
        assert!(matches!(gen_wiener(3, &g, 1), Err(Error::InvalidGrid(_))));
        let shifted = GridSpec::new(vec![0.5, 0.75, 1.0], Default::default()).unwrap();
        assert!(gen_wiener(3, &shifted, 1).is_err());
    }

    #[test]
    fn zero_shift_reproduces_plain_paths() {
        let g = GridSpec::unit_interval(51).unwrap();
        let plain = gen_wiener(5, &g, 9).unwrap();
        let shifted = gen_shifted_wiener(5, MeanShift::Quadratic, 0.0, &g, 9).unwrap();
        assert_eq!(plain, shifted);
    }

    #[test]
    fn sin_and_cos_curves_are_orthogonal() {
        let xs = gen_sincos(5, 9, Side::Sin, CoeffDist::normal_var(0.0, 2.0), false, 1).unwrap();
        let ys = gen_sincos(5, 9, Side::Cos, CoeffDist::normal_var(0.0, 2.0), false, 2).unwrap();
        for x in &xs {
            for y in &ys {
                assert_eq!(inner_product(x, y, None).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn sin_inner_product_identity() {
        // <X1, X2> = sum_i xi_1i xi_2i / d for the sine family
        let d = 4;
        let xi1 = [1.0, -2.0, 0.5, 3.0];
        let xi2 = [0.5, 1.0, 2.0, -1.0];
        let curve = |xi: &[f64]| {
            let mut c = vec![0.0; 2 * d];
            for (slot, x) in c.iter_mut().zip(xi) {
                *slot = x / (d as f64).sqrt();
            }
            Curve::Coeff(c)
        };
        let want: f64 = xi1.iter().zip(&xi2).map(|(a, b)| a * b).sum::<f64>() / d as f64;
        let got = inner_product(&curve(&xi1), &curve(&xi2), None).unwrap();
        assert!((got - want).abs() < 1e-15);
    }

    #[test]
    fn unit_sine_curve_has_unit_norm() {
        let c = gen_sincos(1, 1, Side::Sin, CoeffDist::Fixed(1.0), false, 0).unwrap();
        assert_eq!(inner_product(&c[0], &c[0], None).unwrap(), 1.0);
        let literal = gen_sincos(1, 1, Side::Cos, CoeffDist::Fixed(1.0), false, 0).unwrap();
        assert!((inner_product(&literal[0], &literal[0], None).unwrap() - 0.5).abs() < 1e-15);
        let normal = gen_sincos(1, 1, Side::Cos, CoeffDist::Fixed(1.0), true, 0).unwrap();
        assert!((inner_product(&normal[0], &normal[0], None).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mixture_extremes() {
        let base = GeneratorSpec::SinCos {
            d: 3,
            side: Side::Sin,
            coeffs: CoeffDist::Fixed(1.0),
            normalized_cos: false,
        };
        let cont = GeneratorSpec::SinCos {
            d: 3,
            side: Side::Cos,
            coeffs: CoeffDist::Fixed(1.0),
            normalized_cos: false,
        };
        let all_base = gen_mixture(16, base.clone(), cont.clone(), 0.0, None, 3).unwrap();
        assert!(all_base.iter().all(|c| c.values()[3..].iter().all(|&v| v == 0.0)));
        let all_cont = gen_mixture(16, base.clone(), cont.clone(), 4.0, None, 3).unwrap();
        assert!(all_cont.iter().all(|c| c.values()[..3].iter().all(|&v| v == 0.0)));
        assert!(gen_mixture(16, base, cont, 4.5, None, 3).is_err());
    }

    #[test]
    fn mixture_needs_matching_components() {
        let g = GridSpec::unit_interval(11).unwrap();
        let r = gen_mixture(
            4,
            GeneratorSpec::Wiener,
            GeneratorSpec::decaying_basis(CoeffDist::standard_normal()),
            1.0,
            Some(&g),
            0,
        );
        assert!(r.is_err());
    }

    #[test]
    fn empty_weights_and_zero_d_rejected() {
        assert!(gen_basis(3, &[], CoeffDist::standard_normal(), 0).is_err());
        assert!(gen_sincos(3, 0, Side::Sin, CoeffDist::standard_normal(), false, 0).is_err());
    }

    #[test]
    fn trig_basis_indexing() {
        assert_eq!(trig_basis(1, 0.3), 1.0);
        assert!((trig_basis(2, 0.0) - SQRT_2).abs() < 1e-15);
        assert!(trig_basis(3, 0.0).abs() < 1e-15);
        assert!((trig_basis(3, 0.25) - SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn student_t_and_cauchy_are_finite() {
        let mut rng = seeded(5);
        for _ in 0..1000 {
            assert!(CoeffDist::StudentT { dof: 4 }.sample(&mut rng).is_finite());
            assert!(CoeffDist::Cauchy { scale: 2.0 }.sample(&mut rng).is_finite());
        }
    }

    #[test]
    fn parse_names() {
        assert_eq!("t2".parse::<MeanShift>().unwrap(), MeanShift::Quadratic);
        assert_eq!("cos".parse::<Side>().unwrap(), Side::Cos);
        assert!("tan".parse::<Side>().is_err());
        assert!("cubic".parse::<MeanShift>().is_err());
    }
}
