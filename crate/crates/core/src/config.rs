//! Flat `key = value` run configuration.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimates::{SweepConfig, Tolerances};
use crate::grid::Domain1D;
use crate::models::{data_by_name, flux_by_name, viscosity_by_name, FluxModel, Hypothesis, InitialData, ViscosityModel};
use crate::oracle::DEFAULT_REFINE;
use crate::solver::{Scheme, SolverConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub flux: String,
    pub flux_speed: f64,
    pub viscosity: String,
    pub data: String,
    pub hypothesis: Option<Hypothesis>,
    pub domain: Domain1D,
    pub eps: f64,
    pub eps_list: Vec<f64>,
    pub n_cells: usize,
    pub t_final: f64,
    pub cfl_safety: f64,
    pub store_every: usize,
    pub scheme: Scheme,
    pub oracle_refine: usize,
    pub tol: Tolerances,
    pub out: PathBuf,
    /// Viscosity of the slices stored next to this config; 0 for the
    /// inviscid reference. Written by the driver, read by `verify`.
    pub slices_eps: Option<f64>,
    /// Directory relative `csv:` data paths are resolved against.
    pub base_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            flux: "burgers".into(),
            flux_speed: 1.0,
            viscosity: "rational".into(),
            data: "step".into(),
            hypothesis: None,
            domain: Domain1D::unit(),
            eps: 0.01,
            eps_list: vec![0.04, 0.02, 0.01, 0.005],
            n_cells: 1024,
            t_final: 0.5,
            cfl_safety: 0.9,
            store_every: 0,
            scheme: Scheme::EngquistOsher,
            oracle_refine: DEFAULT_REFINE,
            tol: Tolerances::default(),
            out: PathBuf::from("out"),
            slices_eps: None,
            base_dir: PathBuf::from("."),
        }
    }
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{v}'")))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let (mut a, mut b) = (cfg.domain.a(), cfg.domain.b());
        let mut seen = BTreeSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!("line {}: expected 'key = value'", lineno + 1)));
            };
            let (key, v) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!("line {}: duplicate key '{key}'", lineno + 1)));
            }
            match key {
                "flux" => cfg.flux = v.into(),
                "flux_speed" => cfg.flux_speed = num(key, v)?,
                "viscosity" => cfg.viscosity = v.into(),
                "data" => cfg.data = v.into(),
                "hypothesis" => cfg.hypothesis = Some(v.parse()?),
                "domain_a" => a = num(key, v)?,
                "domain_b" => b = num(key, v)?,
                "eps" => cfg.eps = num(key, v)?,
                "eps_list" => {
                    cfg.eps_list = v
                        .split(|c: char| c == ',' || c.is_whitespace())
                        .filter(|s| !s.is_empty())
                        .map(|s| num(key, s))
                        .collect::<Result<_>>()?
                }
                "n_cells" => cfg.n_cells = num(key, v)?,
                "T" => cfg.t_final = num(key, v)?,
                "cfl_safety" => cfg.cfl_safety = num(key, v)?,
                "store_every" => cfg.store_every = num(key, v)?,
                "scheme" => cfg.scheme = v.parse()?,
                "oracle_refine" => cfg.oracle_refine = num(key, v)?,
                "tol_maxp" => cfg.tol.maxp = num(key, v)?,
                "tol_energy" => cfg.tol.energy = num(key, v)?,
                "tol_bv" => cfg.tol.bv = num(key, v)?,
                "tol_time" => cfg.tol.time = num(key, v)?,
                "tol_mollifier" => cfg.tol.mollifier = num(key, v)?,
                "tol_laplacian" => cfg.tol.laplacian = num(key, v)?,
                "tol_const_variation" => cfg.tol.const_variation = num(key, v)?,
                "c_tol" => cfg.tol.c_tol = num(key, v)?,
                "out" => cfg.out = PathBuf::from(v),
                "slices_eps" => cfg.slices_eps = Some(num(key, v)?),
                other => return Err(Error::Config(format!("line {}: unknown key '{other}'", lineno + 1))),
            }
        }
        cfg.domain = Domain1D::new(a, b)?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    /// Canonical text form; parsing it gives back the same values.
    pub fn to_text(&self) -> String {
        let t = &self.tol;
        let list = self.eps_list.iter().map(|e| format!("{e:?}")).collect::<Vec<_>>().join(", ");
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("flux", self.flux.clone());
        kv("flux_speed", format!("{:?}", self.flux_speed));
        kv("viscosity", self.viscosity.clone());
        kv("data", self.resolved_data_name());
        if let Some(h) = self.hypothesis {
            kv("hypothesis", h.label().into());
        }
        kv("domain_a", format!("{:?}", self.domain.a()));
        kv("domain_b", format!("{:?}", self.domain.b()));
        kv("eps", format!("{:?}", self.eps));
        kv("eps_list", list);
        kv("n_cells", self.n_cells.to_string());
        kv("T", format!("{:?}", self.t_final));
        kv("cfl_safety", format!("{:?}", self.cfl_safety));
        kv("store_every", self.store_every.to_string());
        kv("scheme", self.scheme.as_str().into());
        kv("oracle_refine", self.oracle_refine.to_string());
        kv("tol_maxp", format!("{:?}", t.maxp));
        kv("tol_energy", format!("{:?}", t.energy));
        kv("tol_bv", format!("{:?}", t.bv));
        kv("tol_time", format!("{:?}", t.time));
        kv("tol_mollifier", format!("{:?}", t.mollifier));
        kv("tol_laplacian", format!("{:?}", t.laplacian));
        kv("tol_const_variation", format!("{:?}", t.const_variation));
        kv("c_tol", format!("{:?}", t.c_tol));
        kv("out", self.out.display().to_string());
        if let Some(e) = self.slices_eps {
            kv("slices_eps", format!("{e:?}"));
        }
        s
    }

    fn resolved_data_name(&self) -> String {
        match self.data.strip_prefix("csv:") {
            Some(p) if Path::new(p).is_relative() => format!("csv:{}", self.base_dir.join(p).display()),
            _ => self.data.clone(),
        }
    }

    pub fn initial_data(&self) -> Result<InitialData> {
        Ok(data_by_name(&self.resolved_data_name(), self.hypothesis)?.with_domain(self.domain))
    }

    /// The flux clamped to the interval the data lives in.
    pub fn flux_model(&self, data: &InitialData) -> Result<FluxModel> {
        let m = data.interval_half_width();
        flux_by_name(&self.flux, self.flux_speed, if m > 0.0 { m } else { 1.0 })
    }

    pub fn viscosity_model(&self) -> Result<ViscosityModel> {
        viscosity_by_name(&self.viscosity)
    }

    pub fn solver_config(&self, eps: f64) -> SolverConfig {
        SolverConfig {
            epsilon: eps,
            n_cells: self.n_cells,
            t_final: self.t_final,
            cfl_safety: self.cfl_safety,
            store_every: self.store_every,
            scheme: self.scheme,
            domain: self.domain,
            anti_diffusion: 0.0,
        }
    }

    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            eps_list: self.eps_list.clone(),
            n_cells: self.n_cells,
            t_final: self.t_final,
            cfl_safety: self.cfl_safety,
            store_every: self.store_every,
            scheme: self.scheme,
            domain: self.domain,
            oracle_refine: self.oracle_refine,
            tol: self.tol,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_and_comments() {
        let cfg = RunConfig::parse(
            "# burgers run\nflux = linear  # transport\nflux_speed = -0.5\neps_list = 0.1, 0.05,0.025\nT = 0.25\nscheme = godunov_flux\nc_tol = 0.5\n",
        )
        .unwrap();
        assert_eq!(cfg.flux, "linear");
        assert_eq!(cfg.flux_speed, -0.5);
        assert_eq!(cfg.eps_list, vec![0.1, 0.05, 0.025]);
        assert_eq!(cfg.t_final, 0.25);
        assert_eq!(cfg.scheme, Scheme::Godunov);
        assert_eq!(cfg.tol.c_tol, 0.5);
        assert_eq!(cfg.viscosity, "rational");
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(RunConfig::parse("flux burgers").is_err());
        assert!(RunConfig::parse("colour = red").is_err());
        assert!(RunConfig::parse("n_cells = many").is_err());
        assert!(RunConfig::parse("eps = 1\neps = 2").is_err());
        assert!(RunConfig::parse("domain_a = 1\ndomain_b = 0").is_err());
        assert!(RunConfig::parse("scheme = upwind").is_err());
        assert!(RunConfig::parse("hypothesis = G").is_err());
    }

    #[test]
    fn text_round_trip() {
        let mut cfg = RunConfig::parse("hypothesis = F\ndata = tent\neps = 0.03\nslices_eps = 0.0").unwrap();
        cfg.tol.time = 0.125;
        let back = RunConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn builds_models() {
        let cfg = RunConfig::default();
        let data = cfg.initial_data().unwrap();
        assert_eq!(data.hypothesis(), Hypothesis::E);
        let f = cfg.flux_model(&data).unwrap();
        assert_eq!(f.lipschitz_bound(), 1.0);
        assert!(RunConfig::parse("flux = cubic").unwrap().flux_model(&data).is_err());
        assert!(RunConfig::parse("data = missing").unwrap().initial_data().is_err());
    }
}
