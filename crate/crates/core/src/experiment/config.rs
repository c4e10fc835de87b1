use std::fmt;
use std::path::{Path, PathBuf};

use crate::elliptic::{Mesh1D, PenaltyConfig, PenaltyVariant};
use crate::error::{Error, Result};
use crate::saddle::{DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::transport::{
    check_stability, BoundaryMode, Scheme, StructureRegion, TransportKind, TransportParams,
};

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "PENDUO_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    Elliptic,
    AdvDiff,
    Burgers,
    Rates,
    UzawaDemo,
}

impl Case {
    pub const ALL: [Case; 5] = [Case::Elliptic, Case::AdvDiff, Case::Burgers, Case::Rates, Case::UzawaDemo];

    pub fn name(self) -> &'static str {
        match self {
            Case::Elliptic => "elliptic",
            Case::AdvDiff => "advdiff",
            Case::Burgers => "burgers",
            Case::Rates => "rates",
            Case::UzawaDemo => "uzawa-demo",
        }
    }

    pub fn parse(s: &str) -> Option<Case> {
        Case::ALL.into_iter().find(|c| c.name() == s)
    }

    pub fn transport_kind(self) -> Option<TransportKind> {
        match self {
            Case::AdvDiff => Some(TransportKind::AdvDiff),
            Case::Burgers => Some(TransportKind::Burgers),
            _ => None,
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which `(α, β, γ)` the static cases use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariantChoice {
    /// All four standard variants.
    All,
    One(PenaltyVariant),
    /// The `alpha`, `beta`, `gamma` fields as given.
    Custom,
}

impl VariantChoice {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "all" => Some(Self::All),
            "custom" => Some(Self::Custom),
            other => PenaltyVariant::parse(other).map(Self::One),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Self::All => "all",
            Self::Custom => "custom",
            Self::One(v) => v.name(),
        }
    }
}

/// Named scenarios: `(name, description, settings)`.
pub const PRESETS: &[(&str, &str, &[(&str, &str)])] = &[
    ("fig1", "elliptic, all four penalty variants, eps = 0.1", &[("case", "elliptic"), ("eps_sweep", "0.1")]),
    ("fig2", "elliptic, all four penalty variants, eps = 0.01", &[("case", "elliptic"), ("eps_sweep", "0.01")]),
    ("fig4", "penalty-duality on the static model, eps = 0.1", &[("case", "uzawa-demo"), ("eps", "0.1"), ("variant", "alpha")]),
    ("fig10", "advection-diffusion, interface penalty only", &[("case", "advdiff"), ("duality", "off"), ("interior_penalty", "off")]),
    ("fig12", "advection-diffusion, interface duality", &[("case", "advdiff"), ("duality", "on"), ("interior_penalty", "off")]),
    ("fig13bis", "advection-diffusion, interface + interior penalty", &[("case", "advdiff"), ("duality", "off"), ("interior_penalty", "on")]),
    ("fig15", "advection-diffusion, interior penalty + duality", &[("case", "advdiff"), ("duality", "on"), ("interior_penalty", "on")]),
    ("fig201", "Burgers, moderate interface penalty (r = 0.1)", &[("case", "burgers"), ("duality", "off"), ("interior_penalty", "off")]),
    ("fig204", "Burgers, interface duality", &[("case", "burgers"), ("duality", "on"), ("interior_penalty", "off")]),
    ("fig208", "Burgers, interface + interior penalty", &[("case", "burgers"), ("duality", "off"), ("interior_penalty", "on")]),
    ("fig211", "Burgers, interior penalty + duality", &[("case", "burgers"), ("duality", "on"), ("interior_penalty", "on")]),
    (
        "fig215",
        "Burgers reference: eps = 1e-8, 1000 cells, 4000 steps",
        &[
            ("case", "burgers"),
            ("duality", "off"),
            ("interior_penalty", "on"),
            ("eps", "1e-8"),
            ("nodes", "1001"),
            ("steps", "4000"),
            ("stride", "40"),
        ],
    ),
];

pub fn preset(name: &str) -> Option<&'static [(&'static str, &'static str)]> {
    PRESETS.iter().find(|p| p.0 == name).map(|p| p.2)
}

/// Fully described experiment. Optional fields resolve per case.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub case: Case,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub eps: f64,
    pub r: Option<f64>,
    pub nodes: Option<usize>,
    pub steps: usize,
    pub t_final: f64,
    pub nu: f64,
    pub c: f64,
    pub duality: bool,
    pub interior_penalty: bool,
    pub bc: BoundaryMode,
    pub warm_start: bool,
    pub xa: f64,
    pub xb: f64,
    pub length: f64,
    pub u0: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub out: Option<PathBuf>,
    pub stride: usize,
    pub eps_sweep: Option<Vec<f64>>,
    pub variant: Option<VariantChoice>,
}

impl ExperimentConfig {
    /// Defaults: the advection-diffusion data set of the transport tests.
    pub fn defaults(case: Case) -> Self {
        Self {
            case,
            alpha: 1.0,
            beta: 0.0,
            gamma: 1.0,
            eps: 1e-3,
            r: None,
            nodes: None,
            steps: 1000,
            t_final: 2.0,
            nu: 0.001,
            c: 1.0,
            duality: false,
            interior_penalty: false,
            bc: BoundaryMode::ExactPeriodic,
            warm_start: false,
            xa: 0.45,
            xb: 0.55,
            length: 1.0,
            u0: 1.0,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            out: None,
            stride: 10,
            eps_sweep: None,
            variant: None,
        }
    }

    /// Sets one `key = value` pair; keys accept `-` or `_`.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let num = |v: &str| v.parse::<f64>().map_err(|_| format!("expected a number, got '{v}'"));
        let int = |v: &str| v.parse::<usize>().map_err(|_| format!("expected a non-negative integer, got '{v}'"));
        let flag = |v: &str| match v {
            "on" | "true" | "1" | "yes" => Ok(true),
            "off" | "false" | "0" | "no" => Ok(false),
            _ => Err(format!("expected on|off, got '{v}'")),
        };
        match key.as_str() {
            "case" => self.case = Case::parse(value).ok_or_else(|| format!("unknown case '{value}'"))?,
            "alpha" => self.alpha = num(value)?,
            "beta" => self.beta = num(value)?,
            "gamma" => self.gamma = num(value)?,
            "eps" => self.eps = num(value)?,
            "r" => self.r = Some(num(value)?),
            "nodes" => self.nodes = Some(int(value)?),
            "steps" => self.steps = int(value)?,
            "t_final" => self.t_final = num(value)?,
            "nu" => self.nu = num(value)?,
            "c" => self.c = num(value)?,
            "duality" => self.duality = flag(value)?,
            "interior_penalty" => self.interior_penalty = flag(value)?,
            "warm_start" => self.warm_start = flag(value)?,
            "bc" => {
                self.bc = match value {
                    "wrap" => BoundaryMode::ExactPeriodic,
                    "penalized" => BoundaryMode::PenalizedPeriodic,
                    _ => return Err(format!("expected wrap|penalized, got '{value}'")),
                }
            }
            "xa" => self.xa = num(value)?,
            "xb" => self.xb = num(value)?,
            "length" => self.length = num(value)?,
            "u0" => self.u0 = num(value)?,
            "tol" => self.tol = num(value)?,
            "max_iter" => self.max_iter = int(value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "stride" => self.stride = int(value)?,
            "eps_sweep" => {
                let list = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| num(s.trim()))
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                if list.is_empty() {
                    return Err("empty eps sweep".into());
                }
                self.eps_sweep = Some(list);
            }
            "variant" => {
                self.variant = Some(VariantChoice::parse(value).ok_or_else(|| format!("unknown variant '{value}'"))?)
            }
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    /// Applies a `key=value` file; `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        self.apply_text(&text, &path.display().to_string())
    }

    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let location = format!("{origin}:{}", lineno + 1);
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                location: location.clone(),
                message: format!("expected key=value, got '{line}'"),
            })?;
            self.set(key, value)
                .map_err(|message| Error::Parse { location, message })?;
        }
        Ok(())
    }

    /// Builds a config with precedence defaults < preset < file < flags.
    pub fn load(
        case_or_preset: &str,
        file: Option<&Path>,
        flags: &[(String, String)],
    ) -> Result<Self> {
        let mut cfg;
        if let Some(case) = Case::parse(case_or_preset) {
            cfg = Self::defaults(case);
        } else if let Some(entries) = preset(case_or_preset) {
            cfg = Self::defaults(Case::Elliptic);
            for (k, v) in entries {
                cfg.set(k, v).map_err(|message| Error::Parse {
                    location: format!("preset {case_or_preset}"),
                    message,
                })?;
            }
        } else {
            return Err(Error::Parse {
                location: "case".into(),
                message: format!("unknown case or preset '{case_or_preset}'"),
            });
        }
        let case = cfg.case;
        if let Some(path) = file {
            cfg.apply_file(path)?;
        }
        // the command line picks the case; a file cannot change it
        cfg.case = case;
        for (k, v) in flags {
            cfg.set(k, v).map_err(|message| Error::Parse {
                location: format!("--{}", k.replace('_', "-")),
                message,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolved_r(&self) -> f64 {
        self.r.unwrap_or(if self.case == Case::Burgers && !self.duality { 0.1 } else { 10.0 })
    }

    pub fn resolved_nodes(&self) -> usize {
        self.nodes.unwrap_or(match self.case {
            Case::AdvDiff | Case::Burgers => 501,
            _ => 1001,
        })
    }

    pub fn resolved_variant(&self) -> VariantChoice {
        self.variant.unwrap_or(match self.case {
            Case::Elliptic => VariantChoice::All,
            Case::UzawaDemo => VariantChoice::One(PenaltyVariant::Alpha),
            _ => VariantChoice::Custom,
        })
    }

    pub fn resolved_eps_sweep(&self) -> Vec<f64> {
        match (&self.eps_sweep, self.case) {
            (Some(list), _) => list.clone(),
            (None, Case::Rates) => crate::diagnostics::DEFAULT_EPS_SWEEP.to_vec(),
            (None, _) => vec![self.eps],
        }
    }

    /// `--out`, else `$PENDUO_OUT/<case>`, else `penduo_out/<case>`.
    pub fn output_dir(&self) -> PathBuf {
        match &self.out {
            Some(p) => p.clone(),
            None => {
                let root = std::env::var_os(OUT_ENV)
                    .map(PathBuf::from)
                    .unwrap_or_else(|| PathBuf::from("penduo_out"));
                root.join(self.case.name())
            }
        }
    }

    pub fn mesh(&self) -> Result<Mesh1D> {
        Mesh1D::new(self.length, self.resolved_nodes())
    }

    pub fn penalty(&self) -> Result<PenaltyConfig> {
        PenaltyConfig::new(self.alpha, self.beta, self.gamma, self.eps, self.resolved_r())
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.steps as f64
    }

    pub fn transport_params(&self) -> TransportParams {
        TransportParams {
            nu: self.nu,
            c: self.c,
            dt: self.dt(),
            n_steps: self.steps,
            bc_mode: self.bc,
            scheme: if self.duality { Scheme::Duality } else { Scheme::PenaltyOnly },
            interior_gamma_on: self.interior_penalty,
            warm_start: self.warm_start,
            tol: self.tol,
            max_iter: self.max_iter,
            snapshot_stride: self.stride,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(m));
        self.penalty().map_err(|e| Error::Validation(e.to_string()))?;
        let mesh = self.mesh().map_err(|e| Error::Validation(e.to_string()))?;
        if !(self.xa < self.xb) {
            return bad(format!("x_a = {} must be below x_b = {}", self.xa, self.xb));
        }
        if self.stride == 0 {
            return bad("stride must be >= 1".into());
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return bad("need tol > 0 and max_iter >= 1".into());
        }
        if self.eps_sweep.as_ref().is_some_and(|l| l.iter().any(|e| !(*e > 0.0))) {
            return bad("every eps in the sweep must be > 0".into());
        }
        match self.case {
            Case::Elliptic | Case::Rates | Case::UzawaDemo => {
                mesh.midpoint_node().map_err(|e| Error::Validation(e.to_string()))?;
                if self.case == Case::Rates && self.resolved_eps_sweep().len() < 3 {
                    return bad("rate fits need at least 3 eps values".into());
                }
            }
            Case::AdvDiff | Case::Burgers => {
                StructureRegion::new(&mesh, self.xa, self.xb).map_err(|e| Error::Validation(e.to_string()))?;
                if self.steps == 0 && self.t_final != 0.0 || !(self.t_final >= 0.0) {
                    return bad("need steps >= 1 and t_final >= 0".into());
                }
                if !(self.nu >= 0.0) {
                    return bad(format!("nu must be >= 0, got {}", self.nu));
                }
                if self.steps > 0 && self.case == Case::AdvDiff {
                    check_stability(self.c, self.nu, self.dt(), mesh.dx())
                        .map_err(|e| Error::Validation(e.to_string()))?;
                }
                if self.duality && !(self.resolved_r() > 0.0) {
                    return bad("duality needs r > 0".into());
                }
            }
        }
        Ok(())
    }

    /// Every field, resolved, as `key=value` lines that [`Self::apply_text`] reads back.
    pub fn to_key_values(&self) -> String {
        let onoff = |b: bool| if b { "on" } else { "off" };
        let mut lines = vec![
            format!("case={}", self.case),
            format!("alpha={:e}", self.alpha),
            format!("beta={:e}", self.beta),
            format!("gamma={:e}", self.gamma),
            format!("eps={:e}", self.eps),
            format!("r={:e}", self.resolved_r()),
            format!("nodes={}", self.resolved_nodes()),
            format!("steps={}", self.steps),
            format!("t_final={:e}", self.t_final),
            format!("nu={:e}", self.nu),
            format!("c={:e}", self.c),
            format!("duality={}", onoff(self.duality)),
            format!("interior_penalty={}", onoff(self.interior_penalty)),
            format!(
                "bc={}",
                match self.bc {
                    BoundaryMode::ExactPeriodic => "wrap",
                    BoundaryMode::PenalizedPeriodic => "penalized",
                }
            ),
            format!("warm_start={}", onoff(self.warm_start)),
            format!("xa={:e}", self.xa),
            format!("xb={:e}", self.xb),
            format!("length={:e}", self.length),
            format!("u0={:e}", self.u0),
            format!("tol={:e}", self.tol),
            format!("max_iter={}", self.max_iter),
            format!("stride={}", self.stride),
            format!(
                "eps_sweep={}",
                self.resolved_eps_sweep().iter().map(|e| format!("{e:e}")).collect::<Vec<_>>().join(",")
            ),
            format!("variant={}", self.resolved_variant().name()),
        ];
        lines.push(format!("out={}", self.output_dir().display()));
        lines.join("\n") + "\n"
    }
}
