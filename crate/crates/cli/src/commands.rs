use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use cliffan::bvp::{
    stokes_solve, CauchyKernel, Field, FlatKernel, ManufacturedStokes, Shape, StokesDiagnostics, TorusKernel,
    VoxelDomain,
};
use cliffan::clifford::{DiracVariant, Multivector, Paravector};
use cliffan::kernels::{dirac_apply_symbolic, q_m, FunctionDocument, MultiIndex};
use cliffan::moebius::{enumerate_group, gamma_p_generators, in_congruence_subgroup, EnumerationOptions};
use cliffan::series::{
    eisenstein_epsilon, eisenstein_twisted, hecke_extrapolate, hyperbolic_cauchy_kernel, hyperbolic_eisenstein,
    poincare_series, torus_cauchy_kernel, write_series_csv, BundleCharacter, Lattice, SeriesResult, SeriesRow,
};
use cliffan::verify::{run_suite, Suite, DEFAULT_SEED};
use cliffan::Error;

use crate::config::{
    Forcing, GroupConfig, KernelChoice, KernelConfig, SeriesConfig, SeriesFamily, Sigma, StokesConfig,
};

/// Why a command did not succeed; maps onto the process exit code.
#[derive(Debug)]
pub enum Failure {
    /// An invariant or tolerance was violated, or the computation broke down.
    Invariant(String),
    /// The input could not be used.
    Config(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Invariant(_) => 1,
            Failure::Config(_) => 2,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Pole(_) | Error::Conditioning { .. } => Failure::Invariant(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

pub struct Context {
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub deterministic: bool,
}

impl Context {
    fn seed(&self, config: Option<u64>) -> u64 {
        self.seed.or(config).unwrap_or(DEFAULT_SEED)
    }

    fn path(&self, name: &str) -> Result<PathBuf, Failure> {
        fs::create_dir_all(&self.out)
            .map_err(|e| Failure::Config(format!("cannot create {}: {e}", self.out.display())))?;
        Ok(self.out.join(name))
    }

    fn create(&self, name: &str) -> Result<fs::File, Failure> {
        let path = self.path(name)?;
        fs::File::create(&path).map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))
    }

    fn write_json<T: Serialize>(&self, name: &str, doc: &T, started: Instant) -> Result<(), Failure> {
        let mut value = serde_json::to_value(doc).map_err(|e| Failure::Config(e.to_string()))?;
        if !self.deterministic {
            if let Value::Object(map) = &mut value {
                map.insert("elapsed_seconds".into(), json!(started.elapsed().as_secs_f64()));
            }
        }
        let mut f = self.create(name)?;
        let text = serde_json::to_string_pretty(&value).map_err(|e| Failure::Config(e.to_string()))?;
        writeln!(f, "{text}").map_err(|e| Failure::Config(e.to_string()))
    }
}

pub fn read_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn sci(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |v| format!("{v:.6e}"))
}

// ---------------------------------------------------------------- verify

pub fn verify(ctx: &Context, suite: Suite) -> Result<(), Failure> {
    let started = Instant::now();
    let report = run_suite(suite, ctx.seed(None));
    for c in &report.checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        let rel = serde_json::to_value(c.relation).map_err(|e| Failure::Config(e.to_string()))?;
        let rel = rel.as_str().unwrap_or("?");
        println!("{status} {}/{} measured={} {rel} {:e}", c.suite, c.name, sci(c.measured), c.threshold);
        if let Some(e) = &c.error {
            println!("     error: {e}");
        }
    }
    ctx.write_json(&format!("verify_{suite}.json"), &report, started)?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Invariant(format!("{} of {} checks failed", report.failures().count(), report.checks.len())))
    }
}

// ---------------------------------------------------------------- series

fn lattice(dim: usize, generators: &[Vec<f64>]) -> Result<Lattice, Failure> {
    Ok(Lattice::new(dim, generators.to_vec())?)
}

fn paravector(coords: &[f64], n: usize, what: &str) -> Result<Paravector, Failure> {
    if coords.len() != n + 1 {
        return Err(Failure::Config(format!("{what} needs {} coordinates, got {}", n + 1, coords.len())));
    }
    Ok(Paravector::new(coords.to_vec()))
}

/// A single exponent, or the line through a schedule evaluated at zero.
fn with_sigma<F>(sigma: &Sigma, eval: F) -> cliffan::Result<SeriesResult>
where
    F: Fn(f64) -> cliffan::Result<SeriesResult>,
{
    match sigma {
        Sigma::Single(s) => eval(*s),
        Sigma::Schedule(s) => {
            let h = hecke_extrapolate(s, eval)?;
            Ok(SeriesResult {
                value: h.extrapolated,
                truncation_radius: h.values.iter().map(|v| v.truncation_radius).fold(0.0, f64::max),
                tail_bound: h.values.iter().map(|v| v.tail_bound).fold(0.0, f64::max),
                terms_summed: h.values.iter().map(|v| v.terms_summed).sum(),
                certified: false,
            })
        }
    }
}

fn evaluate_series(family: &SeriesFamily, x: &[f64]) -> Result<SeriesResult, Failure> {
    let r = match family {
        SeriesFamily::Epsilon {
            dim,
            multi_index,
            generators,
            radius,
        } => eisenstein_epsilon(&MultiIndex::new(multi_index.clone()), &lattice(*dim, generators)?, x, *radius),
        SeriesFamily::Twisted {
            dim,
            multi_index,
            generators,
            twisted,
            radius,
        } => {
            let mut mask = 0u64;
            for &i in twisted {
                if i >= generators.len() {
                    return Err(Failure::Config(format!("twisted index {i} exceeds the lattice rank")));
                }
                mask |= 1 << i;
            }
            eisenstein_twisted(
                &MultiIndex::new(multi_index.clone()),
                &lattice(*dim, generators)?,
                BundleCharacter::from_mask(mask),
                x,
                *radius,
            )
        }
        SeriesFamily::TorusKernel {
            dim,
            generators,
            y,
            radius,
        } => torus_cauchy_kernel(&lattice(*dim, generators)?, x, y, *radius),
        SeriesFamily::HyperbolicEisenstein { n, orbit, sigma } => {
            let x = paravector(x, *n, "point")?;
            with_sigma(sigma, |s| hyperbolic_eisenstein(&x, s, orbit))
        }
        SeriesFamily::Poincare { n, orbit, w, sigma } => {
            let x = paravector(x, *n, "point")?;
            let w = paravector(w, *n, "w")?;
            with_sigma(sigma, |s| poincare_series(&x, &w, s, orbit))
        }
        SeriesFamily::HyperbolicKernel { n, orbit, y } => {
            let x = paravector(x, *n, "point")?;
            hyperbolic_cauchy_kernel(&x, &paravector(y, *n, "y")?, orbit)
        }
    };
    Ok(r?)
}

pub fn series(ctx: &Context, cfg: &SeriesConfig) -> Result<(), Failure> {
    let points = cfg
        .points
        .resolve(cfg.family.point_dim(), ctx.seed(cfg.seed))
        .map_err(Failure::Config)?;
    let rows = points
        .into_iter()
        .map(|x| Ok(SeriesRow { result: evaluate_series(&cfg.family, &x)?, point: x }))
        .collect::<Result<Vec<_>, Failure>>()?;
    write_series_csv(ctx.create(&cfg.output)?, &rows)?;
    let worst = rows.iter().map(|r| r.result.tail_bound).fold(0.0, f64::max);
    println!("{} points written to {}; largest tail bound {worst:.6e}", rows.len(), cfg.output);
    Ok(())
}

// ---------------------------------------------------------------- stokes

#[derive(Serialize)]
struct StokesLevel {
    resolution: usize,
    #[serde(flatten)]
    diagnostics: StokesDiagnostics,
}

fn decreasing(levels: &[StokesLevel], pick: fn(&StokesDiagnostics) -> f64) -> bool {
    levels.windows(2).all(|w| pick(&w[1].diagnostics) < pick(&w[0].diagnostics))
}

fn within(measured: f64, tol: Option<f64>) -> bool {
    tol.is_none_or(|t| measured <= t)
}

pub fn stokes(ctx: &Context, cfg: &StokesConfig) -> Result<(), Failure> {
    let started = Instant::now();
    let dim = cfg.shape.dim();
    if cfg.resolutions.is_empty() {
        return Err(Failure::Config("at least one resolution is required".into()));
    }
    let kernel: Box<dyn CauchyKernel> = match &cfg.kernel {
        KernelChoice::Flat => Box::new(FlatKernel::new(dim)?),
        KernelChoice::Torus { generators, radius } => {
            Box::new(TorusKernel::new(lattice(dim, generators)?, *radius)?)
        }
    };
    let manufactured = match (&cfg.forcing, &cfg.shape) {
        (Forcing::Manufactured, Shape::Box { lo, hi }) if dim == 2 => {
            Some(ManufacturedStokes::new([lo[0], lo[1]], [hi[0], hi[1]]))
        }
        (Forcing::Manufactured, _) => {
            return Err(Failure::Config("the manufactured forcing needs a two-dimensional box".into()))
        }
        _ => None,
    };
    let constant = match &cfg.forcing {
        Forcing::Constant { value } => Some(Multivector::vector(dim, value)?),
        _ => None,
    };

    let mut levels = Vec::new();
    for &n in &cfg.resolutions {
        let domain = VoxelDomain::from_shape(&cfg.shape, n)?;
        let forcing = match (&manufactured, &constant) {
            (Some(ms), _) => Field::from_fn(&domain, |x| ms.forcing(x, cfg.eta)),
            (_, Some(v)) => Field::from_fn(&domain, |_| v.clone()),
            _ => Field::zero(&domain),
        };
        let mut sol = stokes_solve(&domain, &forcing, cfg.eta, kernel.as_ref(), &cfg.options)?;
        if let Some(ms) = &manufactured {
            ms.score(&domain, &mut sol, cfg.options.interior_margin);
        }
        if cfg.write_fields {
            sol.u.write_csv(&domain, ctx.create(&format!("stokes_u_{n}.csv"))?)?;
            sol.p.write_csv(&domain, ctx.create(&format!("stokes_p_{n}.csv"))?)?;
        }
        let d = &sol.diagnostics;
        println!(
            "n={n} h={:.4e} momentum={:.6e} divergence={:.6e} boundary={:.6e} velocity_error={} pressure_error={}",
            d.h,
            d.momentum,
            d.divergence,
            d.boundary,
            sci(d.velocity_error),
            sci(d.pressure_error)
        );
        levels.push(StokesLevel {
            resolution: n,
            diagnostics: sol.diagnostics,
        });
    }

    let trend = BTreeMap::from([
        ("momentum", decreasing(&levels, |d| d.momentum)),
        ("divergence", decreasing(&levels, |d| d.divergence)),
        ("boundary", decreasing(&levels, |d| d.boundary)),
    ]);
    let tol = &cfg.tolerances;
    let finest = &levels.last().expect("non-empty").diagnostics;
    let mut failures = Vec::new();
    for (name, value, limit) in [
        ("momentum", finest.momentum, tol.momentum),
        ("divergence", finest.divergence, tol.divergence),
        ("boundary", finest.boundary, tol.boundary),
    ] {
        if !within(value, limit) {
            failures.push(format!("{name} residual {value:.6e} exceeds {:.6e}", limit.unwrap_or(0.0)));
        }
    }
    if tol.require_decrease {
        for (name, ok) in &trend {
            if !ok {
                failures.push(format!("{name} residual does not decrease under refinement"));
            }
        }
    }
    let doc = json!({
        "eta": cfg.eta,
        "levels": levels,
        "decreasing": trend,
        "failures": failures,
        "passed": failures.is_empty(),
    });
    ctx.write_json("stokes_diagnostics.json", &doc, started)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Invariant(failures.join("; ")))
    }
}

// ---------------------------------------------------------------- group

#[derive(Serialize)]
struct ElementRecord {
    word: Vec<usize>,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    d: Vec<f64>,
    in_subgroup: bool,
}

pub fn group(ctx: &Context, cfg: &GroupConfig) -> Result<(), Failure> {
    let started = Instant::now();
    if cfg.level == 0 {
        return Err(Failure::Config("level must be positive".into()));
    }
    let gens = gamma_p_generators(cfg.n, cfg.p)?;
    let opts = EnumerationOptions {
        max_word_length: cfg.max_word_length,
        norm_bound: cfg.norm_bound,
        pm_quotient: cfg.pm_quotient.unwrap_or(cfg.level == 1),
        bound: cfg.bound,
    };
    let words = enumerate_group(&gens, &opts);
    let mut by_length = vec![0usize; words.iter().map(|w| w.word.len()).max().unwrap_or(0) + 1];
    let mut sub_by_length = by_length.clone();
    let mut max_defect = 0.0f64;
    let mut elements = Vec::new();
    for w in &words {
        let member = in_congruence_subgroup(&w.matrix, cfg.level, cfg.p)?;
        by_length[w.word.len()] += 1;
        sub_by_length[w.word.len()] += usize::from(member);
        max_defect = max_defect.max(w.matrix.vahlen_defect());
        if cfg.list_elements {
            let [a, b, c, d] = w.matrix.entries().map(|e| e.coeffs().to_vec());
            elements.push(ElementRecord {
                word: w.word.clone(),
                a,
                b,
                c,
                d,
                in_subgroup: member,
            });
        }
    }
    let all_vahlen = words.iter().all(|w| w.matrix.is_vahlen());
    let subgroup: usize = sub_by_length.iter().sum();
    let mut doc = json!({
        "n": cfg.n,
        "p": cfg.p,
        "level": cfg.level,
        "norm_bound": cfg.norm_bound,
        "max_word_length": cfg.max_word_length,
        "pm_quotient": opts.pm_quotient,
        "enumerated": words.len(),
        "counts_by_word_length": by_length,
        "subgroup_elements": subgroup,
        "subgroup_counts_by_word_length": sub_by_length,
        "all_vahlen": all_vahlen,
        "max_vahlen_defect": max_defect,
    });
    if cfg.list_elements {
        doc["elements"] = serde_json::to_value(&elements).map_err(|e| Failure::Config(e.to_string()))?;
    }
    ctx.write_json("group.json", &doc, started)?;
    println!(
        "{} elements enumerated, {subgroup} in the level-{} subgroup, all Vahlen: {all_vahlen}",
        words.len(),
        cfg.level
    );
    if all_vahlen {
        Ok(())
    } else {
        Err(Failure::Invariant(format!("enumerated matrix fails the Vahlen conditions (defect {max_defect:e})")))
    }
}

// ---------------------------------------------------------------- kernel

#[derive(Serialize)]
struct KernelValue {
    point: Vec<f64>,
    coeffs: Vec<f64>,
}

#[derive(Serialize)]
struct KernelReport {
    dim: usize,
    multi_index: Vec<u32>,
    homogeneity_degree: Option<i64>,
    dirac_is_zero: bool,
    function: FunctionDocument,
    values: Vec<KernelValue>,
}

pub fn kernel(ctx: &Context, cfg: &KernelConfig) -> Result<(), Failure> {
    let started = Instant::now();
    if cfg.multi_index.len() != cfg.dim {
        return Err(Failure::Config(format!(
            "multi_index has {} entries, expected {}",
            cfg.multi_index.len(),
            cfg.dim
        )));
    }
    let q = q_m(&MultiIndex::new(cfg.multi_index.clone()), cfg.dim)?;
    let dirac_is_zero = dirac_apply_symbolic(&q, DiracVariant::CauchyRiemann)?.is_zero();
    let compiled = q.compile();
    let values = cfg
        .points
        .iter()
        .map(|x| {
            Ok(KernelValue {
                point: x.clone(),
                coeffs: compiled.evaluate(x)?.coeffs().to_vec(),
            })
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let report = KernelReport {
        dim: cfg.dim,
        multi_index: cfg.multi_index.clone(),
        homogeneity_degree: q.homogeneity_degree(),
        dirac_is_zero,
        function: q.to_document(),
        values,
    };
    ctx.write_json("kernel.json", &report, started)?;
    println!(
        "q_m for m = {:?}: degree {:?}, D q_m = 0: {dirac_is_zero}",
        cfg.multi_index, report.homogeneity_degree
    );
    if dirac_is_zero {
        Ok(())
    } else {
        Err(Failure::Invariant("the kernel derivative is not monogenic".into()))
    }
}
