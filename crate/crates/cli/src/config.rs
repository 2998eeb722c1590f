use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use cliffan::bvp::{Shape, StokesOptions};
use cliffan::moebius::NormBound;
use cliffan::series::OrbitOptions;

/// Where a command evaluates.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PointSet {
    List { points: Vec<Vec<f64>> },
    /// Tensor grid with `counts[i]` equispaced samples on `[lo[i], hi[i]]`.
    Grid { lo: Vec<f64>, hi: Vec<f64>, counts: Vec<usize> },
    /// Uniform samples in the box, drawn from the run seed.
    Random { lo: Vec<f64>, hi: Vec<f64>, count: usize },
}

impl PointSet {
    pub fn resolve(&self, dim: usize, seed: u64) -> Result<Vec<Vec<f64>>, String> {
        let check = |v: &[f64], what: &str| {
            if v.len() == dim {
                Ok(())
            } else {
                Err(format!("{what} has {} coordinates, expected {dim}", v.len()))
            }
        };
        match self {
            PointSet::List { points } => {
                for p in points {
                    check(p, "point")?;
                }
                Ok(points.clone())
            }
            PointSet::Grid { lo, hi, counts } => {
                check(lo, "lo")?;
                check(hi, "hi")?;
                if counts.len() != dim || counts.contains(&0) {
                    return Err(format!("grid needs {dim} positive counts"));
                }
                let mut out = vec![vec![]];
                for axis in 0..dim {
                    let k = counts[axis];
                    out = out
                        .into_iter()
                        .flat_map(|p: Vec<f64>| {
                            (0..k).map(move |i| {
                                let t = if k == 1 { 0.5 } else { i as f64 / (k - 1) as f64 };
                                let mut q = p.clone();
                                q.push(lo[axis] + t * (hi[axis] - lo[axis]));
                                q
                            })
                        })
                        .collect();
                }
                Ok(out)
            }
            PointSet::Random { lo, hi, count } => {
                check(lo, "lo")?;
                check(hi, "hi")?;
                if lo.iter().zip(hi).any(|(l, h)| !(l < h)) {
                    return Err("random box needs lo < hi on every axis".into());
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Ok((0..*count)
                    .map(|_| lo.iter().zip(hi).map(|(l, h)| rng.gen_range(*l..*h)).collect())
                    .collect())
            }
        }
    }
}

/// One Hecke exponent, or a schedule extrapolated to zero.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Sigma {
    Single(f64),
    Schedule(Vec<f64>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SeriesFamily {
    Epsilon {
        dim: usize,
        multi_index: Vec<u32>,
        generators: Vec<Vec<f64>>,
        radius: f64,
    },
    Twisted {
        dim: usize,
        multi_index: Vec<u32>,
        generators: Vec<Vec<f64>>,
        /// Generator indices along which sections change sign.
        twisted: Vec<usize>,
        radius: f64,
    },
    TorusKernel {
        dim: usize,
        generators: Vec<Vec<f64>>,
        y: Vec<f64>,
        radius: f64,
    },
    HyperbolicEisenstein {
        n: usize,
        orbit: OrbitOptions,
        sigma: Sigma,
    },
    Poincare {
        n: usize,
        orbit: OrbitOptions,
        w: Vec<f64>,
        sigma: Sigma,
    },
    HyperbolicKernel {
        n: usize,
        orbit: OrbitOptions,
        y: Vec<f64>,
    },
}

impl SeriesFamily {
    /// Coordinates per evaluation point.
    pub fn point_dim(&self) -> usize {
        match self {
            SeriesFamily::Epsilon { dim, .. }
            | SeriesFamily::Twisted { dim, .. }
            | SeriesFamily::TorusKernel { dim, .. } => *dim,
            SeriesFamily::HyperbolicEisenstein { n, .. }
            | SeriesFamily::Poincare { n, .. }
            | SeriesFamily::HyperbolicKernel { n, .. } => n + 1,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesConfig {
    pub family: SeriesFamily,
    pub points: PointSet,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_series_output")]
    pub output: String,
}

fn default_series_output() -> String {
    "series.csv".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Forcing {
    Zero,
    Constant { value: Vec<f64> },
    /// Body force of the polynomial test flow on a planar box.
    Manufactured,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelChoice {
    #[default]
    Flat,
    Torus { generators: Vec<Vec<f64>>, radius: f64 },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub momentum: Option<f64>,
    pub divergence: Option<f64>,
    pub boundary: Option<f64>,
    /// Fail unless the momentum, divergence and boundary residuals all decrease.
    #[serde(default)]
    pub require_decrease: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StokesConfig {
    pub shape: Shape,
    pub resolutions: Vec<usize>,
    pub eta: f64,
    pub forcing: Forcing,
    #[serde(default)]
    pub kernel: KernelChoice,
    #[serde(default)]
    pub options: StokesOptions,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "yes")]
    pub write_fields: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    pub n: usize,
    pub p: usize,
    #[serde(default = "level_one")]
    pub level: u32,
    pub norm_bound: f64,
    pub max_word_length: usize,
    #[serde(default)]
    pub bound: NormBound,
    /// Identify `M` with `-M`; defaults to on exactly for level 1.
    #[serde(default)]
    pub pm_quotient: Option<bool>,
    #[serde(default)]
    pub list_elements: bool,
}

fn level_one() -> u32 {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    /// Number of coordinates `x_0, ..., x_(dim-1)`.
    pub dim: usize,
    pub multi_index: Vec<u32>,
    #[serde(default)]
    pub points: Vec<Vec<f64>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = r#"{"n": 1, "p": 0, "norm_bound": 5, "max_word_length": 3, "colour": 1}"#;
        assert!(serde_json::from_str::<GroupConfig>(bad).is_err());
        let bad = r#"{"family": {"kind": "epsilon", "dim": 3, "multi_index": [0,0,0],
            "generators": [], "radius": 2, "extra": 0}, "points": {"kind": "list", "points": []}}"#;
        assert!(serde_json::from_str::<SeriesConfig>(bad).is_err());
    }

    #[test]
    fn grid_is_tensor_ordered() {
        let g = PointSet::Grid {
            lo: vec![0.0, 0.0],
            hi: vec![1.0, 2.0],
            counts: vec![2, 3],
        };
        let pts = g.resolve(2, 0).unwrap();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[1], vec![0.0, 1.0]);
        assert_eq!(pts[5], vec![1.0, 2.0]);
    }

    #[test]
    fn random_points_follow_the_seed() {
        let r = PointSet::Random {
            lo: vec![0.0; 3],
            hi: vec![1.0; 3],
            count: 4,
        };
        assert_eq!(r.resolve(3, 9).unwrap(), r.resolve(3, 9).unwrap());
        assert_ne!(r.resolve(3, 9).unwrap(), r.resolve(3, 10).unwrap());
    }
}
