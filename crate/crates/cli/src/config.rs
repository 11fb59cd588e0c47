//! Run configuration: command-line flags layered over an optional `key=value` file.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Parser;
use multirate_core::analysis::ErrorReference;
use multirate_core::experiments::{Experiment, RunSpec, MANDEL_CELLS};
use multirate_core::temporal_mesh::DgOrder;

#[derive(Debug, Parser, Default)]
#[command(name = "multirate", version, about = "Multirate space-time Galerkin experiments")]
pub struct Args {
    /// heatwave1d | heatwave2d_fluid | heatwave2d_solid | mandel | appendix_b_check
    pub experiment: Option<String>,
    /// Temporal dG order (0 or 1)
    #[arg(long)]
    pub dg: Option<usize>,
    /// Coarse temporal elements of the first row
    #[arg(long)]
    pub coarse: Option<usize>,
    /// Temporal refinement field1:field2, e.g. 1:4
    #[arg(long)]
    pub ratio: Option<String>,
    /// Extra rows, each halving the coarse step
    #[arg(long)]
    pub refinements: Option<usize>,
    /// Spatial cells: per subdomain (1D), y-cells per subdomain (2D), per axis (Mandel)
    #[arg(long)]
    pub space_cells: Option<usize>,
    /// Reference value of the goal functional
    #[arg(long)]
    pub reference: Option<f64>,
    /// exact | interpolant (heatwave1d only)
    #[arg(long)]
    pub error_reference: Option<String>,
    /// CSV destination; stdout when omitted
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// File of `key=value` lines with the same keys as the flags
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub const KEYS: [&str; 9] =
    ["experiment", "dg", "coarse", "ratio", "refinements", "space_cells", "reference", "error_reference", "output"];

/// A fully resolved invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spec: RunSpec,
    pub refinements: usize,
    pub output: Option<PathBuf>,
}

pub fn parse_file(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("config line {}: expected key=value", n + 1))?;
        let k = k.trim().replace('-', "_");
        if !KEYS.contains(&k.as_str()) {
            return Err(format!("config line {}: unknown key `{k}`", n + 1));
        }
        out.insert(k, v.trim().to_string());
    }
    Ok(out)
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("invalid value `{v}` for {key}"))
}

pub fn parse_ratio(v: &str) -> Result<(usize, usize), String> {
    let bad = || format!("invalid ratio `{v}`; expected a:b with positive integers");
    let (a, b) = v.split_once(':').ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a == 0 || b == 0 {
        return Err(bad());
    }
    Ok((a, b))
}

impl Args {
    /// Flags win over the file; unspecified values take per-experiment defaults.
    pub fn resolve(&self, file: &BTreeMap<String, String>) -> Result<RunConfig, String> {
        let get = |key: &str, flag: Option<String>| flag.or_else(|| file.get(key).cloned());
        let id = get("experiment", self.experiment.clone()).ok_or("missing experiment")?;
        let experiment = Experiment::from_id(&id).ok_or_else(|| {
            let ids: Vec<_> = Experiment::ALL.iter().map(|e| e.id()).collect();
            format!("unknown experiment `{id}`; expected one of {}", ids.join(", "))
        })?;

        let dg = match get("dg", self.dg.map(|d| d.to_string())) {
            Some(v) => parse_num::<usize>("dg", &v)?,
            None => match experiment {
                Experiment::HeatWave2dFluid | Experiment::HeatWave2dSolid => 1,
                _ => 0,
            },
        };
        let order = DgOrder::try_from(dg).map_err(|e| e.to_string())?;
        let coarse = match get("coarse", self.coarse.map(|c| c.to_string())) {
            Some(v) => parse_num("coarse", &v)?,
            None => match (experiment, order) {
                (Experiment::HeatWave1d, DgOrder::Dg0) => 25,
                (Experiment::HeatWave1d, DgOrder::Dg1) => 4,
                (Experiment::HeatWave2dFluid | Experiment::HeatWave2dSolid, _) => 50,
                (Experiment::Mandel, _) => 1250,
                (Experiment::MandelSlabCheck, _) => 1,
            },
        };
        let ratio = match get("ratio", self.ratio.clone()) {
            Some(v) => parse_ratio(&v)?,
            None => (1, 1),
        };
        let refinements = match get("refinements", self.refinements.map(|r| r.to_string())) {
            Some(v) => parse_num("refinements", &v)?,
            None => 0,
        };
        let mut spec = RunSpec::new(experiment, order, coarse, ratio);
        if let Some(v) = get("space_cells", self.space_cells.map(|c| c.to_string())) {
            spec.space_cells = Some(parse_num("space_cells", &v)?);
        }
        if let Some(v) = get("reference", self.reference.map(|r| r.to_string())) {
            spec.reference = Some(parse_num("reference", &v)?);
        }
        if let Some(v) = get("error_reference", self.error_reference.clone()) {
            spec.error_reference = match v.as_str() {
                "exact" => ErrorReference::Exact,
                "interpolant" => ErrorReference::SpatialInterpolant,
                _ => return Err(format!("invalid error_reference `{v}`; expected exact or interpolant")),
            };
        }
        if experiment != Experiment::MandelSlabCheck {
            spec.validate().map_err(|e| e.to_string())?;
        } else if order != DgOrder::Dg0 {
            return Err("appendix_b_check requires dG(0)".into());
        }
        let output = self.output.clone().or_else(|| file.get("output").map(PathBuf::from));
        Ok(RunConfig { spec, refinements, output })
    }
}

/// Default mesh size used by the hand-derived slab self-test.
pub fn slab_check_cells(spec: &RunSpec) -> usize {
    spec.space_cells.unwrap_or(MANDEL_CELLS)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(exp: &str) -> Args {
        Args { experiment: Some(exp.into()), ..Default::default() }
    }

    #[test]
    fn defaults_per_experiment() {
        let c = args("heatwave2d_solid").resolve(&BTreeMap::new()).unwrap();
        assert_eq!(c.spec.order, DgOrder::Dg1);
        assert_eq!(c.spec.coarse, 50);
        let c = args("mandel").resolve(&BTreeMap::new()).unwrap();
        assert_eq!((c.spec.order, c.spec.coarse, c.spec.ratio), (DgOrder::Dg0, 1250, (1, 1)));
    }

    #[test]
    fn flags_override_file() {
        let file = parse_file("experiment = mandel\ncoarse=10 # comment\nratio=1:4\n").unwrap();
        let a = Args { coarse: Some(20), ..Default::default() };
        let c = a.resolve(&file).unwrap();
        assert_eq!(c.spec.experiment, Experiment::Mandel);
        assert_eq!(c.spec.coarse, 20);
        assert_eq!(c.spec.ratio, (1, 4));
    }

    #[test]
    fn invalid_combinations() {
        let mut a = args("mandel");
        a.dg = Some(1);
        assert!(a.resolve(&BTreeMap::new()).unwrap_err().contains("dG(0)"));
        let mut a = args("heatwave2d_fluid");
        a.dg = Some(0);
        assert!(a.resolve(&BTreeMap::new()).is_err());
        let mut a = args("heatwave1d");
        a.ratio = Some("1:3".into());
        assert!(a.resolve(&BTreeMap::new()).unwrap_err().contains("power of two"));
        assert!(args("heat").resolve(&BTreeMap::new()).unwrap_err().contains("unknown experiment"));
        assert!(parse_file("colour=red").is_err());
        assert!(parse_ratio("2").is_err());
    }
}
