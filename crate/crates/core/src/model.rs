//! Domain types for a homogeneous two-species Bose mixture.
//!
//! All quantities are taken in one consistent unit system. Lengths enter
//! through the linear densities and the 1D couplings (energy × length).
//! Natural units `m = ħ = 1` are the default but both stay explicit.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Lieb-Liniger parameters above this value are flagged as leaving the
/// weak-coupling regime. The flag is a diagnostic only.
pub const WEAK_COUPLING_LIMIT: f64 = 0.3;

/// Full two-species parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureParams {
    pub m1: f64,
    pub m2: f64,
    pub g11: f64,
    pub g22: f64,
    pub g12: f64,
    /// Total linear densities.
    pub n1: f64,
    pub n2: f64,
    /// Condensate linear densities.
    pub nc1: f64,
    pub nc2: f64,
    #[serde(default = "one")]
    pub hbar: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for MixtureParams {
    fn default() -> Self {
        Self {
            m1: 1.0,
            m2: 1.0,
            g11: 1.0,
            g22: 1.0,
            g12: 0.0,
            n1: 1.0,
            n2: 1.0,
            nc1: 1.0,
            nc2: 1.0,
            hbar: 1.0,
        }
    }
}

/// A single invariant breach reported by [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub field: &'static str,
    pub rule: &'static str,
    pub value: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: violates \"{}\" (value {})", self.field, self.rule, self.value)
    }
}

/// Returns every invariant violated by `params`; empty when valid.
pub fn validate(params: &MixtureParams) -> Vec<Violation> {
    let p = params;
    let mut out = Vec::new();
    let mut positive = |field: &'static str, rule: &'static str, value: f64| {
        if !(value > 0.0 && value.is_finite()) {
            out.push(Violation { field, rule, value });
        }
    };
    positive("m1", "m1 > 0", p.m1);
    positive("m2", "m2 > 0", p.m2);
    positive("hbar", "hbar > 0", p.hbar);
    positive("n1", "n1 > 0", p.n1);
    positive("n2", "n2 > 0", p.n2);
    positive("nc1", "nc1 > 0", p.nc1);
    positive("nc2", "nc2 > 0", p.nc2);
    if p.nc1 > p.n1 {
        out.push(Violation {
            field: "nc1",
            rule: "nc1 ≤ n1",
            value: p.nc1,
        });
    }
    if p.nc2 > p.n2 {
        out.push(Violation {
            field: "nc2",
            rule: "nc2 ≤ n2",
            value: p.nc2,
        });
    }
    for (field, value) in [("g11", p.g11), ("g22", p.g22), ("g12", p.g12)] {
        if !value.is_finite() {
            out.push(Violation {
                field,
                rule: "finite coupling",
                value,
            });
        }
    }
    out
}

pub(crate) fn ensure_valid(params: &MixtureParams) -> Result<()> {
    let v = validate(params);
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidParams(v))
    }
}

/// Spectrum and fluctuation operations need repulsive intraspecies couplings.
pub(crate) fn ensure_repulsive(params: &MixtureParams) -> Result<()> {
    ensure_valid(params)?;
    let mut v = Vec::new();
    if !(params.g11 > 0.0) {
        v.push(Violation {
            field: "g11",
            rule: "g11 > 0",
            value: params.g11,
        });
    }
    if !(params.g22 > 0.0) {
        v.push(Violation {
            field: "g22",
            rule: "g22 > 0",
            value: params.g22,
        });
    }
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidParams(v))
    }
}

/// Balanced mixture: equal masses, couplings and densities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricParams {
    pub m: f64,
    pub g: f64,
    /// g12 / g
    pub lambda: f64,
    pub n: f64,
    pub nc: f64,
    #[serde(default = "one")]
    pub hbar: f64,
}

impl SymmetricParams {
    pub fn new(m: f64, g: f64, lambda: f64, n: f64, nc: f64) -> Self {
        Self {
            m,
            g,
            lambda,
            n,
            nc,
            hbar: 1.0,
        }
    }

    /// Embeds the balanced parameters into the general two-species form.
    pub fn to_mixture(&self) -> MixtureParams {
        MixtureParams {
            m1: self.m,
            m2: self.m,
            g11: self.g,
            g22: self.g,
            g12: self.lambda * self.g,
            n1: self.n,
            n2: self.n,
            nc1: self.nc,
            nc2: self.nc,
            hbar: self.hbar,
        }
    }

    /// Healing wavenumber √(4 m g n_c)/ħ, the natural scale of the spectrum.
    pub fn healing_wavenumber(&self) -> f64 {
        (4.0 * self.m * self.g * self.nc).sqrt() / self.hbar
    }

    /// Dimensionless kinetic energy ε_k = ħ²k²/(2 m g n_c).
    pub fn eps(&self, k: f64) -> f64 {
        self.hbar * self.hbar * k * k / (2.0 * self.m * self.g * self.nc)
    }

    /// Inverse of [`SymmetricParams::eps`] for k ≥ 0.
    pub fn k_of_eps(&self, eps: f64) -> f64 {
        (2.0 * self.m * self.g * self.nc * eps).sqrt() / self.hbar
    }

    /// Energy unit g·n_c of the dimensionless frequencies.
    pub fn energy_unit(&self) -> f64 {
        self.g * self.nc
    }
}

/// Requires exact equality of every paired field.
pub fn reduce_symmetric(params: &MixtureParams) -> Result<SymmetricParams> {
    let pairs = [
        ("m1", "m2", params.m1, params.m2),
        ("g11", "g22", params.g11, params.g22),
        ("n1", "n2", params.n1, params.n2),
        ("nc1", "nc2", params.nc1, params.nc2),
    ];
    for (field1, field2, left, right) in pairs {
        if left != right {
            return Err(Error::Asymmetric {
                field1,
                field2,
                left,
                right,
            });
        }
    }
    if !(params.g11 > 0.0) {
        return Err(Error::Domain(format!(
            "balanced reduction needs g > 0 to define lambda, got {}",
            params.g11
        )));
    }
    Ok(SymmetricParams {
        m: params.m1,
        g: params.g11,
        lambda: params.g12 / params.g11,
        n: params.n1,
        nc: params.nc1,
        hbar: params.hbar,
    })
}

/// Lieb-Liniger parameter together with its weak-coupling diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gamma1d {
    pub value: f64,
    pub weak_coupling_exceeded: bool,
}

/// γ1D = √(m g / (ħ² n)), evaluated with the total density n.
pub fn gamma_1d(sym: &SymmetricParams) -> Result<Gamma1d> {
    if !(sym.g > 0.0) {
        return Err(Error::Domain(format!("gamma_1d needs g > 0, got {}", sym.g)));
    }
    if !(sym.n > 0.0) {
        return Err(Error::Domain(format!("gamma_1d needs n > 0, got {}", sym.n)));
    }
    let value = (sym.m * sym.g / (sym.hbar * sym.hbar * sym.n)).sqrt();
    Ok(Gamma1d {
        value,
        weak_coupling_exceeded: value > WEAK_COUPLING_LIMIT,
    })
}

/// Reduced fluctuations Ñ_ij = ñ_ij/√(n_ci n_cj) and M̃_ij = m̃_ij/√(n_ci n_cj).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FluctuationSet {
    pub nt11: f64,
    pub nt22: f64,
    pub nt12: f64,
    pub mt11: f64,
    pub mt22: f64,
    pub mt12: f64,
}

impl FluctuationSet {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn symmetric(nt: f64, mt: f64, nt12: f64, mt12: f64) -> Self {
        Self {
            nt11: nt,
            nt22: nt,
            nt12,
            mt11: mt,
            mt22: mt,
            mt12,
        }
    }

    /// Ñ12 + M̃12, the combination entering the generalized couplings.
    pub fn f12(&self) -> f64 {
        self.nt12 + self.mt12
    }

    pub fn is_symmetric(&self) -> bool {
        self.nt11 == self.nt22 && self.mt11 == self.mt22
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|x| x.is_finite())
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.nt11, self.nt22, self.nt12, self.mt11, self.mt22, self.mt12]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self {
            nt11: a[0],
            nt22: a[1],
            nt12: a[2],
            mt11: a[3],
            mt22: a[4],
            mt12: a[5],
        }
    }

    /// Largest absolute component difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Exchanges the species labels.
    pub fn swapped(&self) -> Self {
        Self {
            nt11: self.nt22,
            nt22: self.nt11,
            mt11: self.mt22,
            mt22: self.mt11,
            ..*self
        }
    }
}

/// The two excitation branches of the balanced mixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchLabel {
    Minus,
    Plus,
}

impl BranchLabel {
    /// 1 ∓ λ: the zero-fluctuation gap factor of the branch.
    pub fn radicand(self, lambda: f64) -> f64 {
        match self {
            BranchLabel::Minus => 1.0 - lambda,
            BranchLabel::Plus => 1.0 + lambda,
        }
    }

    /// Sign relating interspecies to intraspecies fluctuations on this branch.
    pub fn closure_sign(self) -> f64 {
        match self {
            BranchLabel::Minus => -1.0,
            BranchLabel::Plus => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BranchLabel::Minus => "minus",
            BranchLabel::Plus => "plus",
        }
    }
}

impl fmt::Display for BranchLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for BranchLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minus" | "-" => Ok(BranchLabel::Minus),
            "plus" | "+" => Ok(BranchLabel::Plus),
            other => Err(Error::Config(format!("unknown branch '{other}'"))),
        }
    }
}

/// Partial parameter object, as read from JSON or assembled from flags.
///
/// Either the full keys or the symmetric shorthand (`m`, `g`, `lambda`,
/// `n`, `nc`) may appear. Shorthand keys are applied first, then per-species
/// keys; `lambda` sets `g12 = lambda * g11` after the couplings are resolved.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsPatch {
    pub m1: Option<f64>,
    pub m2: Option<f64>,
    pub g11: Option<f64>,
    pub g22: Option<f64>,
    pub g12: Option<f64>,
    pub n1: Option<f64>,
    pub n2: Option<f64>,
    pub nc1: Option<f64>,
    pub nc2: Option<f64>,
    pub hbar: Option<f64>,
    pub m: Option<f64>,
    pub g: Option<f64>,
    pub lambda: Option<f64>,
    pub n: Option<f64>,
    pub nc: Option<f64>,
}

impl ParamsPatch {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }

    fn is_shorthand(&self) -> bool {
        self.m.is_some() || self.g.is_some() || self.lambda.is_some() || self.n.is_some() || self.nc.is_some()
    }

    /// Overlays this patch on `base`.
    pub fn apply(&self, base: MixtureParams) -> MixtureParams {
        let mut p = base;
        if let Some(m) = self.m {
            p.m1 = m;
            p.m2 = m;
        }
        if let Some(g) = self.g {
            p.g11 = g;
            p.g22 = g;
        }
        if let Some(n) = self.n {
            p.n1 = n;
            p.n2 = n;
            if self.nc.is_none() {
                p.nc1 = n;
                p.nc2 = n;
            }
        }
        if let Some(nc) = self.nc {
            p.nc1 = nc;
            p.nc2 = nc;
        }
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut p.m1, self.m1);
        set(&mut p.m2, self.m2);
        set(&mut p.g11, self.g11);
        set(&mut p.g22, self.g22);
        set(&mut p.n1, self.n1);
        set(&mut p.n2, self.n2);
        set(&mut p.nc1, self.nc1);
        set(&mut p.nc2, self.nc2);
        set(&mut p.hbar, self.hbar);
        if let Some(lambda) = self.lambda {
            p.g12 = lambda * p.g11;
        }
        set(&mut p.g12, self.g12);
        p
    }

    /// Overlays `other` on top of `self`; values in `other` win.
    pub fn merged(&self, other: &ParamsPatch) -> ParamsPatch {
        let pick = |a: Option<f64>, b: Option<f64>| b.or(a);
        ParamsPatch {
            m1: pick(self.m1, other.m1),
            m2: pick(self.m2, other.m2),
            g11: pick(self.g11, other.g11),
            g22: pick(self.g22, other.g22),
            g12: pick(self.g12, other.g12),
            n1: pick(self.n1, other.n1),
            n2: pick(self.n2, other.n2),
            nc1: pick(self.nc1, other.nc1),
            nc2: pick(self.nc2, other.nc2),
            hbar: pick(self.hbar, other.hbar),
            m: pick(self.m, other.m),
            g: pick(self.g, other.g),
            lambda: pick(self.lambda, other.lambda),
            n: pick(self.n, other.n),
            nc: pick(self.nc, other.nc),
        }
    }
}

impl MixtureParams {
    /// Parses a complete parameter object in either the full or the
    /// symmetric shorthand form.
    pub fn from_json(text: &str) -> Result<Self> {
        let patch = ParamsPatch::from_json(text)?;
        let full = [
            patch.m1, patch.m2, patch.g11, patch.g22, patch.g12, patch.n1, patch.n2, patch.nc1, patch.nc2,
        ];
        let complete = if patch.is_shorthand() {
            patch.m.is_some() && patch.g.is_some() && patch.lambda.is_some() && patch.n.is_some() && patch.nc.is_some()
        } else {
            full.iter().all(Option::is_some)
        };
        if !complete {
            return Err(Error::Config(
                "parameter object must give all of m1,m2,g11,g22,g12,n1,n2,nc1,nc2 or all of m,g,lambda,n,nc".into(),
            ));
        }
        Ok(patch.apply(MixtureParams::default()))
    }

    /// Species relabeling 1 ↔ 2.
    pub fn swapped(&self) -> Self {
        Self {
            m1: self.m2,
            m2: self.m1,
            g11: self.g22,
            g22: self.g11,
            n1: self.n2,
            n2: self.n1,
            nc1: self.nc2,
            nc2: self.nc1,
            ..*self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn balanced() -> MixtureParams {
        SymmetricParams::new(1.0, 1.0, 0.5, 1.0, 1.0).to_mixture()
    }

    #[test]
    fn valid_params_have_no_violations() {
        assert!(validate(&balanced()).is_empty());
    }

    #[test]
    fn condensate_exceeding_total_is_reported() {
        let p = MixtureParams {
            nc1: 2.0,
            n1: 1.0,
            ..balanced()
        };
        let v = validate(&p);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, "nc1 ≤ n1");
    }

    #[test]
    fn zero_hbar_is_reported() {
        let p = MixtureParams {
            hbar: 0.0,
            ..balanced()
        };
        let v = validate(&p);
        assert!(v.iter().any(|x| x.rule == "hbar > 0"));
    }

    #[test]
    fn reduce_gives_coupling_ratio() {
        let s = reduce_symmetric(&balanced()).unwrap();
        assert_eq!(s.lambda, 0.5);
        let p = MixtureParams {
            g12: -0.99,
            ..balanced()
        };
        assert_eq!(reduce_symmetric(&p).unwrap().lambda, -0.99);
    }

    #[test]
    fn reduce_rejects_unequal_masses() {
        let p = MixtureParams { m2: 2.0, ..balanced() };
        match reduce_symmetric(&p) {
            Err(Error::Asymmetric { field1, .. }) => assert_eq!(field1, "m1"),
            other => panic!("expected asymmetry error, got {other:?}"),
        }
    }

    #[test]
    fn gamma_examples() {
        let s = SymmetricParams::new(1.0, 1.0, 0.0, 100.0, 100.0);
        let g = gamma_1d(&s).unwrap();
        assert!((g.value - 0.1).abs() < 1e-15);
        assert!(!g.weak_coupling_exceeded);

        let s = SymmetricParams::new(1.0, 1.0, 0.0, 2464.0, 2464.0);
        let g = gamma_1d(&s).unwrap();
        assert!((g.value - (1.0f64 / 2464.0).sqrt()).abs() < 1e-16);
        assert!((g.value - 0.020145).abs() < 1e-5);

        let s = SymmetricParams::new(1.0, 1.0, 0.0, 1.0, 1.0);
        let g = gamma_1d(&s).unwrap();
        assert_eq!(g.value, 1.0);
        assert!(g.weak_coupling_exceeded);

        let s = SymmetricParams::new(1.0, 0.0, 0.0, 1.0, 1.0);
        assert!(gamma_1d(&s).is_err());
    }

    #[test]
    fn json_accepts_both_forms() {
        let full = r#"{"m1":1,"m2":1,"g11":1,"g22":1,"g12":0.5,"n1":1,"n2":1,"nc1":1,"nc2":1,"hbar":1}"#;
        assert_eq!(MixtureParams::from_json(full).unwrap(), balanced());
        let short = r#"{"m":1,"g":1,"lambda":0.5,"n":1,"nc":1}"#;
        assert_eq!(MixtureParams::from_json(short).unwrap(), balanced());
        assert!(MixtureParams::from_json(r#"{"m":1}"#).is_err());
        assert!(MixtureParams::from_json(r#"{"bogus":1}"#).is_err());
    }

    #[test]
    fn branch_labels_serialize_lowercase() {
        assert_eq!(serde_json::to_string(&BranchLabel::Minus).unwrap(), "\"minus\"");
        assert_eq!(serde_json::to_string(&BranchLabel::Plus).unwrap(), "\"plus\"");
        assert_eq!("plus".parse::<BranchLabel>().unwrap(), BranchLabel::Plus);
    }

    proptest! {
        #[test]
        fn reduce_inverts_embedding(
            m in 0.1f64..10.0, g in 0.01f64..10.0, lambda in -2.0f64..2.0,
            n in 0.1f64..1e4, frac in 0.1f64..1.0,
        ) {
            let s = SymmetricParams { m, g, lambda, n, nc: n * frac, hbar: 1.0 };
            let r = reduce_symmetric(&s.to_mixture()).unwrap();
            prop_assert_eq!(r.m, s.m);
            prop_assert_eq!(r.g, s.g);
            prop_assert_eq!(r.n, s.n);
            prop_assert_eq!(r.nc, s.nc);
            // (λ·g)/g is correctly rounded twice, so it can differ by one ulp
            prop_assert!((r.lambda - s.lambda).abs() <= 2.0 * f64::EPSILON * s.lambda.abs());
        }

        #[test]
        fn gamma_scales_as_inverse_sqrt_density(n in 1e-3f64..1e6) {
            let a = gamma_1d(&SymmetricParams::new(1.0, 1.0, 0.0, n, n)).unwrap().value;
            let b = gamma_1d(&SymmetricParams::new(1.0, 1.0, 0.0, 4.0 * n, 4.0 * n)).unwrap().value;
            prop_assert!((a / b - 2.0).abs() < 4.0 * f64::EPSILON);
        }
    }
}
