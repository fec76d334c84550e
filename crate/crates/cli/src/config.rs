//! Layered configuration: defaults, then the JSON config file, then flags.

use clap::Args;
use mixstab_core::droplet::{DropletConfig, DropletForm, LhyCoefficient};
use mixstab_core::fluctuations::{branch_closure, closed_form_intraspecies};
use mixstab_core::{
    gamma_1d, reduce_symmetric, BranchLabel, Error, FluctuationSet, MixtureParams, ParamsPatch, Result,
};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluctuationPatch {
    pub nt11: Option<f64>,
    pub nt22: Option<f64>,
    pub nt12: Option<f64>,
    pub mt11: Option<f64>,
    pub mt22: Option<f64>,
    pub mt12: Option<f64>,
    /// Closed forms with the branch closure, from the balanced parameters.
    pub branch: Option<BranchLabel>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DropletPatch {
    pub m: Option<f64>,
    pub hbar: Option<f64>,
    pub g: Option<f64>,
    pub dg: Option<f64>,
    pub branch: Option<BranchLabel>,
    pub form: Option<DropletForm>,
    pub lhy_coeff_mode: Option<LhyCoefficient>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub params: ParamsPatch,
    #[serde(default)]
    pub fluctuations: FluctuationPatch,
    #[serde(default)]
    pub droplet: DropletPatch,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Mixture parameters; per-species keys win over the balanced shorthand.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    #[arg(long)]
    pub m1: Option<f64>,
    #[arg(long)]
    pub m2: Option<f64>,
    #[arg(long)]
    pub g11: Option<f64>,
    #[arg(long)]
    pub g22: Option<f64>,
    #[arg(long)]
    pub g12: Option<f64>,
    #[arg(long)]
    pub n1: Option<f64>,
    #[arg(long)]
    pub n2: Option<f64>,
    #[arg(long)]
    pub nc1: Option<f64>,
    #[arg(long)]
    pub nc2: Option<f64>,
    #[arg(long)]
    pub hbar: Option<f64>,
    /// Balanced shorthand: both masses.
    #[arg(long)]
    pub m: Option<f64>,
    /// Balanced shorthand: g11 = g22.
    #[arg(long)]
    pub g: Option<f64>,
    /// Sets g12 = lambda * g11.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    /// Balanced shorthand: n1 = n2 (and the condensate densities unless --nc).
    #[arg(long)]
    pub n: Option<f64>,
    #[arg(long)]
    pub nc: Option<f64>,
}

impl ParamArgs {
    pub fn patch(&self) -> ParamsPatch {
        ParamsPatch {
            m1: self.m1,
            m2: self.m2,
            g11: self.g11,
            g22: self.g22,
            g12: self.g12,
            n1: self.n1,
            n2: self.n2,
            nc1: self.nc1,
            nc2: self.nc2,
            hbar: self.hbar,
            m: self.m,
            g: self.g,
            lambda: self.lambda,
            n: self.n,
            nc: self.nc,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct FluctArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub nt11: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub nt22: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub nt12: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub mt11: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub mt22: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub mt12: Option<f64>,
    /// Use the closed-form fluctuations of this branch (balanced input only).
    #[arg(long, value_parser = parse_branch)]
    pub fluct_branch: Option<BranchLabel>,
}

impl FluctArgs {
    pub fn patch(&self) -> FluctuationPatch {
        FluctuationPatch {
            nt11: self.nt11,
            nt22: self.nt22,
            nt12: self.nt12,
            mt11: self.mt11,
            mt22: self.mt22,
            mt12: self.mt12,
            branch: self.fluct_branch,
        }
    }
}

pub fn parse_branch(s: &str) -> std::result::Result<BranchLabel, String> {
    s.parse::<BranchLabel>().map_err(|e| e.to_string())
}

pub fn resolve_params(file: &ConfigFile, flags: &ParamArgs) -> MixtureParams {
    let from_file = file.params.apply(MixtureParams::default());
    flags.patch().apply(from_file)
}

/// How the fluctuation set was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolvedFluctuations {
    pub set: FluctuationSet,
    pub closure_branch: Option<BranchLabel>,
}

/// Closed forms with the branch closure for balanced `params`.
pub fn closure_fluctuations(params: &MixtureParams, branch: BranchLabel) -> Result<FluctuationSet> {
    let sym = reduce_symmetric(params)?;
    let gamma = gamma_1d(&sym)?.value;
    let (nt, mt) = closed_form_intraspecies(branch, sym.lambda, gamma)?;
    Ok(branch_closure(branch, nt, mt))
}

/// A branch (flag, else file) yields the closed forms; otherwise the
/// individual entries are layered file-then-flags over zero.
pub fn resolve_fluctuations(
    file: &ConfigFile,
    flags: &FluctArgs,
    params: &MixtureParams,
) -> Result<ResolvedFluctuations> {
    let flag = flags.patch();
    if let Some(branch) = flag.branch.or(file.fluctuations.branch) {
        return Ok(ResolvedFluctuations {
            set: closure_fluctuations(params, branch)?,
            closure_branch: Some(branch),
        });
    }
    let mut v = FluctuationSet::zero().as_array();
    for patch in [&file.fluctuations, &flag] {
        let entries = [patch.nt11, patch.nt22, patch.nt12, patch.mt11, patch.mt22, patch.mt12];
        for (slot, e) in v.iter_mut().zip(entries) {
            if let Some(x) = e {
                *slot = x;
            }
        }
    }
    Ok(ResolvedFluctuations {
        set: FluctuationSet::from_array(v),
        closure_branch: None,
    })
}

#[derive(Debug, Clone, Default, Args)]
pub struct DropletArgs {
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub hbar: Option<f64>,
    #[arg(long)]
    pub g: Option<f64>,
    /// δg = g12 + g, so that 1 + lambda = dg/g.
    #[arg(long, allow_hyphen_values = true)]
    pub dg: Option<f64>,
    #[arg(long, value_parser = parse_branch)]
    pub branch: Option<BranchLabel>,
    /// full | asymptotic | first_order
    #[arg(long, value_parser = parse_form)]
    pub form: Option<DropletForm>,
    /// exact | paper_rounded
    #[arg(long, value_parser = parse_coeff)]
    pub coeff: Option<LhyCoefficient>,
}

fn parse_form(s: &str) -> std::result::Result<DropletForm, String> {
    serde_json::from_value(serde_json::Value::String(s.replace('-', "_")))
        .map_err(|_| format!("unknown form '{s}' (expected full, asymptotic or first_order)"))
}

fn parse_coeff(s: &str) -> std::result::Result<LhyCoefficient, String> {
    serde_json::from_value(serde_json::Value::String(s.replace('-', "_")))
        .map_err(|_| format!("unknown coefficient mode '{s}' (expected exact or paper_rounded)"))
}

/// Droplet defaults: m = ħ = g = 1, δg = 0.01, minus branch, leading-order
/// form, exact coefficient.
pub fn resolve_droplet(file: &ConfigFile, flags: &DropletArgs) -> DropletConfig {
    let mut cfg = DropletConfig::new(1.0, 0.01, BranchLabel::Minus);
    let f = &file.droplet;
    let layers = [
        (f.m, f.hbar, f.g, f.dg, f.branch, f.form, f.lhy_coeff_mode),
        (
            flags.m,
            flags.hbar,
            flags.g,
            flags.dg,
            flags.branch,
            flags.form,
            flags.coeff,
        ),
    ];
    for (m, hbar, g, dg, branch, form, coeff) in layers {
        cfg.m = m.unwrap_or(cfg.m);
        cfg.hbar = hbar.unwrap_or(cfg.hbar);
        cfg.g = g.unwrap_or(cfg.g);
        cfg.dg = dg.unwrap_or(cfg.dg);
        cfg.branch = branch.unwrap_or(cfg.branch);
        cfg.form = form.unwrap_or(cfg.form);
        cfg.lhy_coeff_mode = coeff.unwrap_or(cfg.lhy_coeff_mode);
    }
    cfg
}
