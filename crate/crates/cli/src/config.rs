//! Experiment configuration: JSON schema, validation and operator assembly.

use serde::{Deserialize, Serialize};
use spectral_eta::eta_zeta::{EtaConfig, FitConfig, FitMode, TailMode, Window};
use spectral_eta::flow_shift::{chebyshev_grid, FlowConfig};
use spectral_eta::lattice::{
    build_dirac_1d, build_dirac_2d, make_pair, DerivativeScheme, DiracOperator, Grid, OperatorPair, Potential,
    Topology,
};
use spectral_eta::random::{random_operator_pair, seeded};
use spectral_eta::verification::theta_grid;
use spectral_eta::Matrix;

use crate::error::CliError;

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub pipeline: Pipeline,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub checks: Checks,
    #[serde(default)]
    pub seed: u64,
    /// Output directory when `--out` is not given.
    #[serde(default)]
    pub output: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    Releta,
    Relzeta,
    Sf,
    Ssf,
    Variation,
    Glue,
    ThetaScan,
    ExampleR2,
    Mod2z,
}

impl Pipeline {
    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Releta => "releta",
            Pipeline::Relzeta => "relzeta",
            Pipeline::Sf => "sf",
            Pipeline::Ssf => "ssf",
            Pipeline::Variation => "variation",
            Pipeline::Glue => "glue",
            Pipeline::ThetaScan => "theta-scan",
            Pipeline::ExampleR2 => "example-r2",
            Pipeline::Mod2z => "mod2z",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[default]
    CentralDifference,
    Spectral,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Component {
    /// `diag(v, −v)`.
    Sigma3,
    /// `v·I`.
    #[default]
    Scalar,
}

/// A real profile sampled on the grid. Distances are Euclidean from
/// `center` (the origin by default).
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "form", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// `scale·|x|`.
    Radial {
        #[serde(default = "one")]
        scale: f64,
    },
    /// `mass + slope·max(|x| − flat, 0)`: constant near the origin, linear growth outside.
    Callias {
        mass: f64,
        slope: f64,
        #[serde(default)]
        flat: f64,
    },
    /// `amplitude·exp(1 − 1/(1 − (|x − c|/radius)²))`, zero outside the radius.
    Bump {
        amplitude: f64,
        radius: f64,
        #[serde(default)]
        center: Vec<f64>,
    },
    /// `amplitude·exp(−|x − c|²/width²)` cut off at `radius`.
    Gaussian {
        amplitude: f64,
        width: f64,
        radius: f64,
        #[serde(default)]
        center: Vec<f64>,
    },
    /// One value per node.
    Samples {
        values: Vec<f64>,
    },
}

fn one() -> f64 {
    1.0
}

impl Profile {
    fn distance(x: &[f64], center: &[f64]) -> f64 {
        x.iter()
            .enumerate()
            .map(|(i, &xi)| xi - center.get(i).copied().unwrap_or(0.0))
            .map(|d| d * d)
            .sum::<f64>()
            .sqrt()
    }

    pub fn sample(&self, grid: &Grid<f64>) -> Result<Vec<f64>, CliError> {
        let values = match self {
            Profile::Samples { values } => {
                if values.len() != grid.num_nodes() {
                    return Err(CliError::Config(format!(
                        "samples profile has {} values for {} nodes",
                        values.len(),
                        grid.num_nodes()
                    )));
                }
                values.clone()
            }
            Profile::Constant { value } => vec![*value; grid.num_nodes()],
            Profile::Radial { scale } => grid.sample(|x: &[f64]| scale * Self::distance(x, &[])),
            Profile::Callias { mass, slope, flat } => {
                grid.sample(|x: &[f64]| mass + slope * (Self::distance(x, &[]) - flat).max(0.0))
            }
            Profile::Bump {
                amplitude,
                radius,
                center,
            } => {
                positive("bump radius", *radius)?;
                grid.sample(|x: &[f64]| {
                    let y = Self::distance(x, center) / radius;
                    if y < 1.0 {
                        amplitude * (1.0 - 1.0 / (1.0 - y * y)).exp()
                    } else {
                        0.0
                    }
                })
            }
            Profile::Gaussian {
                amplitude,
                width,
                radius,
                center,
            } => {
                positive("gaussian width", *width)?;
                positive("gaussian radius", *radius)?;
                grid.sample(|x: &[f64]| {
                    let d = Self::distance(x, center);
                    if d < *radius {
                        amplitude * (-(d / width).powi(2)).exp()
                    } else {
                        0.0
                    }
                })
            }
        };
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Config("profile produced a non-finite value".into()));
        }
        Ok(values)
    }
}

fn positive(what: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{what} must be positive, got {v}")))
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSpec {
    pub dim: usize,
    #[serde(default = "default_block")]
    pub block: usize,
    #[serde(default = "one")]
    pub patch_scale: f64,
}

fn default_block() -> usize {
    8
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    /// `−iσ₁∂ + W` on a line, `W = diag(v, −v)` from `potential`.
    Dirac1d {
        nodes: usize,
        #[serde(default)]
        spacing: Option<f64>,
        #[serde(default)]
        length: Option<f64>,
        #[serde(default)]
        periodic: bool,
        #[serde(default)]
        scheme: Scheme,
        potential: Profile,
        patch: Profile,
        #[serde(default)]
        patch_component: Component,
    },
    /// `−iσ₁∂₁ − iσ₂∂₂ + diag(f₀, −f₀)` with a `diag(f, −f)` patch.
    Dirac2d {
        nodes: usize,
        spacing: f64,
        #[serde(default)]
        periodic: bool,
        #[serde(default)]
        scheme: Scheme,
        f0: Profile,
        patch: Profile,
    },
    /// Explicit real symmetric matrices, or a seeded random pair.
    RawMatrix {
        #[serde(default)]
        a0: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        a1: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        random: Option<RandomSpec>,
        #[serde(default = "one_usize")]
        block: usize,
        #[serde(default = "one_usize")]
        manifold_dim: usize,
    },
}

fn one_usize() -> usize {
    1
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitModeSpec {
    #[default]
    ExactTaylor,
    LeastSquares,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailSpec {
    #[default]
    ClosedForm,
    Quadrature,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    /// Upper end of the short-time fit window; automatic when absent.
    #[serde(default)]
    pub t_cut: Option<f64>,
    /// Highest expansion index `K`.
    #[serde(default)]
    pub k_max: Option<usize>,
    #[serde(default)]
    pub fit: FitModeSpec,
    #[serde(default)]
    pub tail: TailSpec,
    #[serde(default)]
    pub kernel_tol: Option<f64>,
    /// Angles for `theta-scan`.
    #[serde(default = "theta_grid")]
    pub theta: Vec<f64>,
    /// Path parameters for `variation` and `example-r2`.
    #[serde(default)]
    pub r_grid: Option<Vec<f64>>,
    /// Initial uniform samples of a flow computation.
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Cut node for `glue` and `theta-scan`; the middle node by default.
    #[serde(default)]
    pub cut: Option<usize>,
    /// Extra evaluation points `[re, im]` for `releta` and `relzeta`.
    #[serde(default)]
    pub s_values: Vec<[f64; 2]>,
    /// Points of sampled trace curves.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Half-width of the variation stencil.
    #[serde(default = "default_stencil")]
    pub stencil: f64,
}

fn default_steps() -> usize {
    16
}

fn default_samples() -> usize {
    60
}

fn default_stencil() -> f64 {
    1e-3
}

impl Default for Numerics {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

/// Optional checks that are reported as INFO unless enabled.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Checks {
    /// Require fitted even-index variation coefficients below 1e-2 of the
    /// leading odd one in `example-r2`.
    #[serde(default)]
    pub even_coefficients: bool,
}

impl Numerics {
    pub fn fit_config(&self) -> FitConfig<f64> {
        let mut cfg = match self.fit {
            FitModeSpec::ExactTaylor => FitConfig::default(),
            FitModeSpec::LeastSquares => FitConfig::least_squares(),
        };
        if let Some(tc) = self.t_cut {
            cfg.window = Window::Fixed { lo: tc * 1e-4, hi: tc };
        }
        cfg.k_max = self.k_max;
        cfg.samples = self.samples.max(2);
        cfg
    }

    pub fn eta_config(&self) -> EtaConfig<f64> {
        let mut cfg = EtaConfig::default().with_tail(match self.tail {
            TailSpec::ClosedForm => TailMode::ClosedForm,
            TailSpec::Quadrature => TailMode::Quadrature,
        });
        cfg.fit = self.fit_config();
        cfg
    }

    pub fn flow_config(&self) -> FlowConfig<f64> {
        let mut cfg = FlowConfig {
            initial_steps: self.steps.max(1),
            ..FlowConfig::default()
        };
        if let Some(k) = self.kernel_tol {
            cfg.kernel_tol = k;
        }
        cfg
    }

    pub fn fit_mode(&self) -> FitMode {
        self.fit_config().mode
    }

    pub fn r_grid(&self, default_points: usize) -> Vec<f64> {
        self.r_grid.clone().unwrap_or_else(|| chebyshev_grid(default_points))
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let n = &self.numerics;
        if let Some(tc) = n.t_cut {
            positive("t_cut", tc)?;
        }
        if let Some(k) = n.kernel_tol {
            positive("kernel_tol", k)?;
        }
        positive("stencil", n.stencil)?;
        if n.theta.is_empty() {
            return Err(CliError::Config("theta grid is empty".into()));
        }
        if let Some(r) = &n.r_grid {
            if r.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(CliError::Config("r_grid values must lie in [0, 1]".into()));
            }
        }
        match &self.model {
            ModelSpec::Dirac1d {
                nodes, spacing, length, ..
            } => {
                if *nodes < 4 {
                    return Err(CliError::Config("dirac1d needs at least 4 nodes".into()));
                }
                match (spacing, length) {
                    (Some(h), None) => positive("spacing", *h)?,
                    (None, Some(l)) => positive("length", *l)?,
                    _ => return Err(CliError::Config("dirac1d needs exactly one of spacing and length".into())),
                }
            }
            ModelSpec::Dirac2d { nodes, spacing, .. } => {
                if *nodes < 2 {
                    return Err(CliError::Config("dirac2d needs at least 2 nodes per axis".into()));
                }
                positive("spacing", *spacing)?;
            }
            ModelSpec::RawMatrix { a0, a1, random, block, .. } => {
                if *block == 0 {
                    return Err(CliError::Config("block must be positive".into()));
                }
                match (a0, a1, random) {
                    (Some(_), Some(_), None) | (None, None, Some(_)) => {}
                    _ => {
                        return Err(CliError::Config(
                            "raw-matrix needs either both a0 and a1 or a random spec".into(),
                        ))
                    }
                }
            }
        }
        Ok(())
    }

    /// The pair `(A₀, A₁)` described by the model.
    pub fn build_pair(&self) -> Result<OperatorPair<f64>, CliError> {
        match &self.model {
            ModelSpec::Dirac1d {
                nodes,
                spacing,
                length,
                periodic,
                scheme,
                potential,
                patch,
                patch_component,
            } => {
                let topo = topology(*periodic);
                let grid = match (spacing, length) {
                    (Some(h), _) => Grid::centered(1, *nodes, *h, topo)?,
                    (None, Some(l)) => Grid::centered_on_length(1, *nodes, *l, topo)?,
                    (None, None) => unreachable!("validated"),
                };
                let a0 = build_dirac_1d(&grid, &Potential::sigma3(&potential.sample(&grid)?)?, scheme_of(*scheme))?;
                let p = patch.sample(&grid)?;
                let patch = match patch_component {
                    Component::Sigma3 => Potential::sigma3(&p)?,
                    Component::Scalar => Potential::scalar(&p, 2)?,
                };
                Ok(make_pair(&a0, &patch)?)
            }
            ModelSpec::Dirac2d {
                nodes,
                spacing,
                periodic,
                scheme,
                f0,
                patch,
            } => {
                let grid = Grid::centered(2, *nodes, *spacing, topology(*periodic))?;
                let a0 = build_dirac_2d(&grid, &f0.sample(&grid)?, scheme_of(*scheme))?;
                Ok(make_pair(&a0, &Potential::sigma3(&patch.sample(&grid)?)?)?)
            }
            ModelSpec::RawMatrix {
                a0,
                a1,
                random,
                block,
                manifold_dim,
            } => {
                if let Some(r) = random {
                    return Ok(random_operator_pair(&mut seeded(self.seed), r.dim, r.block, r.patch_scale)?);
                }
                let (a0, a1) = (a0.as_ref().expect("validated"), a1.as_ref().expect("validated"));
                let op = |rows: &[Vec<f64>]| -> Result<DiracOperator<f64>, CliError> {
                    if rows.iter().any(|r| r.len() != rows.len()) {
                        return Err(CliError::Config("matrices must be square".into()));
                    }
                    Ok(DiracOperator::from_matrix(Matrix::from_real_rows(rows), *block, *manifold_dim)?)
                };
                Ok(OperatorPair::new(op(a0)?, op(a1)?)?)
            }
        }
    }
}

fn topology(periodic: bool) -> Topology {
    if periodic {
        Topology::Periodic
    } else {
        Topology::TruncatedLine
    }
}

fn scheme_of(s: Scheme) -> DerivativeScheme {
    match s {
        Scheme::CentralDifference => DerivativeScheme::CentralDifference,
        Scheme::Spectral => DerivativeScheme::Spectral,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = ExperimentConfig::parse(
            r#"{"model": {"kind": "raw-matrix", "a0": [[1.0]], "a1": [[-1.0]]}, "pipeline": "releta"}"#,
        )
        .unwrap();
        assert_eq!(cfg.numerics.steps, 16);
        assert_eq!(cfg.numerics.theta.len(), 9);
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.build_pair().unwrap().a0.dim(), 1);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = ExperimentConfig::parse(
            r#"{"model": {"kind": "raw-matrix", "a0": [[1.0]], "a1": [[1.0]]}, "pipeline": "releta", "sed": 1}"#,
        )
        .unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
    }

    #[test]
    fn dirac1d_needs_one_scale() {
        let text = r#"{"model": {"kind": "dirac1d", "nodes": 16, "spacing": 0.5, "length": 8,
            "potential": {"form": "constant", "value": 1}, "patch": {"form": "constant", "value": 0}},
            "pipeline": "sf"}"#;
        assert!(matches!(ExperimentConfig::parse(text), Err(CliError::Config(_))));
    }

    #[test]
    fn profiles_sample_as_documented() {
        let g = Grid::centered(1, 5, 1.0, Topology::TruncatedLine).unwrap();
        let c = Profile::Callias {
            mass: 1.0,
            slope: 2.0,
            flat: 1.0,
        }
        .sample(&g)
        .unwrap();
        assert_eq!(c, vec![3.0, 1.0, 1.0, 1.0, 3.0]);
        let b = Profile::Bump {
            amplitude: 2.0,
            radius: 1.5,
            center: vec![],
        }
        .sample(&g)
        .unwrap();
        assert_eq!(b[2], 2.0);
        assert_eq!(b[0], 0.0);
        let s = Profile::Samples { values: vec![1.0; 4] }.sample(&g);
        assert!(matches!(s, Err(CliError::Config(_))));
    }

    #[test]
    fn shipped_configs_parse() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        let mut seen = 0;
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_some_and(|e| e == "json") {
                let cfg = ExperimentConfig::parse(&std::fs::read_to_string(&path).unwrap())
                    .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
                cfg.build_pair().unwrap();
                seen += 1;
            }
        }
        assert_eq!(seen, 9);
    }
}
