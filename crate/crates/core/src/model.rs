//! Model selection and named parameter access shared by the Fisher,
//! sweep and configuration layers.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::generator::Populations;
use crate::multilevel::{self, MultilevelParams, D0};
use crate::tls::{self, JunctionParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Tls,
    Multilevel,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Tls => "tls",
            ModelKind::Multilevel => "multilevel",
        }
    }

    pub fn n_states(self) -> usize {
        match self {
            ModelKind::Tls => 2,
            ModelKind::Multilevel => 5,
        }
    }

    pub fn state_labels(self) -> &'static [&'static str] {
        match self {
            ModelKind::Tls => &["p1", "p2"],
            ModelKind::Multilevel => &["p0", "pD0", "pD1", "pA0", "pA1"],
        }
    }

    pub fn params(self) -> &'static [Param] {
        use Param::*;
        match self {
            ModelKind::Tls => &[EpsD, EpsA, Omega0, MuL, MuR, TL, TR, GammaHyb],
            ModelKind::Multilevel => &[
                EpsD, EpsA, Omega0, MuL, MuR, TL, TR, GammaL, GammaR, GammaDA, GammaAD, Gamma0, TVib, Lambda,
            ],
        }
    }

    pub fn check_param(self, p: Param) -> Result<()> {
        if self.params().contains(&p) {
            Ok(())
        } else {
            Err(Error::InvalidParameter {
                name: p.name().to_string(),
                model: self.name(),
                valid: self.params().iter().map(|q| q.name()).collect(),
            })
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tls" => Ok(ModelKind::Tls),
            "multilevel" => Ok(ModelKind::Multilevel),
            _ => Err(Error::Domain(format!("unknown model '{s}'; expected tls or multilevel"))),
        }
    }
}

/// A scalar model parameter that can be differentiated or swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Param {
    EpsD,
    EpsA,
    Omega0,
    MuL,
    MuR,
    TL,
    TR,
    GammaHyb,
    GammaL,
    GammaR,
    GammaDA,
    GammaAD,
    Gamma0,
    TVib,
    Lambda,
}

impl Param {
    pub const ALL: [Param; 15] = [
        Param::EpsD,
        Param::EpsA,
        Param::Omega0,
        Param::MuL,
        Param::MuR,
        Param::TL,
        Param::TR,
        Param::GammaHyb,
        Param::GammaL,
        Param::GammaR,
        Param::GammaDA,
        Param::GammaAD,
        Param::Gamma0,
        Param::TVib,
        Param::Lambda,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Param::EpsD => "eps_d",
            Param::EpsA => "eps_a",
            Param::Omega0 => "omega0",
            Param::MuL => "mu_L",
            Param::MuR => "mu_R",
            Param::TL => "T_L",
            Param::TR => "T_R",
            Param::GammaHyb => "gamma_hyb",
            Param::GammaL => "gamma_L",
            Param::GammaR => "gamma_R",
            Param::GammaDA => "gamma_DA",
            Param::GammaAD => "gamma_AD",
            Param::Gamma0 => "gamma0",
            Param::TVib => "t_vib",
            Param::Lambda => "lambda",
        }
    }

    /// Parameters whose domain is the positive half-line. Finite-difference
    /// steps for these never cross zero.
    pub fn is_scale(self) -> bool {
        !matches!(self, Param::EpsD | Param::EpsA | Param::MuL | Param::MuR | Param::Lambda)
    }

    /// Unit of the parameter; everything but the coupling is an energy.
    pub fn unit(self) -> &'static str {
        if self == Param::Lambda {
            "1"
        } else {
            "eV"
        }
    }

    /// Unit of `I(self)`.
    pub fn fisher_unit(self) -> &'static str {
        if self == Param::Lambda {
            "1"
        } else {
            crate::fisher::FISHER_UNITS
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Param::ALL
            .iter()
            .copied()
            .find(|p| p.name() == s || p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter {
                name: s.to_string(),
                model: "any",
                valid: Param::ALL.iter().map(|p| p.name()).collect(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelParams {
    Tls(JunctionParams),
    Multilevel(MultilevelParams),
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Tls(_) => ModelKind::Tls,
            ModelParams::Multilevel(_) => ModelKind::Multilevel,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelParams::Tls(p) => p.validate(),
            ModelParams::Multilevel(p) => p.validate(),
        }
    }

    pub fn get(&self, param: Param) -> Result<f64> {
        self.kind().check_param(param)?;
        let v = match (self, param) {
            (ModelParams::Tls(p), _) => *tls_slot(&mut p.clone(), param),
            (ModelParams::Multilevel(p), _) => *ml_slot(&mut p.clone(), param),
        };
        Ok(v)
    }

    /// Copy with one parameter replaced. The result is not validated.
    pub fn with(&self, param: Param, value: f64) -> Result<Self> {
        self.kind().check_param(param)?;
        let mut out = *self;
        match &mut out {
            ModelParams::Tls(p) => *tls_slot(p, param) = value,
            ModelParams::Multilevel(p) => *ml_slot(p, param) = value,
        }
        Ok(out)
    }

    /// Rate scale used to express time tolerances: `Γ` for the two-level
    /// model, the largest rate prefactor for the five-state model.
    pub fn rate_scale(&self) -> f64 {
        match self {
            ModelParams::Tls(p) => p.gamma_hyb,
            ModelParams::Multilevel(p) => [p.gamma_l, p.gamma_r, p.gamma_da, p.gamma_ad, p.gamma0]
                .into_iter()
                .fold(0.0, f64::max),
        }
    }

    pub fn default_initial(&self) -> Vec<f64> {
        match self {
            ModelParams::Tls(_) => vec![1.0, 0.0],
            ModelParams::Multilevel(_) => Populations::<5>::basis(D0).values().to_vec(),
        }
    }

    /// Populations at time `t` from `p0`.
    pub fn populations(&self, p0: &[f64], t: f64) -> Result<Vec<f64>> {
        match self {
            ModelParams::Tls(p) => {
                let p0 = Populations::new(to_array(p0)?)?;
                Ok(tls::tls_propagate(&p0, t, p)?.values().to_vec())
            }
            ModelParams::Multilevel(p) => {
                let p0 = Populations::new(to_array(p0)?)?;
                let gen = multilevel::multilevel_generator(&multilevel::multilevel_rates(p)?);
                Ok(multilevel::propagate_multilevel(&p0, t, &gen)?.values().to_vec())
            }
        }
    }

    pub fn steady_state(&self) -> Result<Vec<f64>> {
        match self {
            ModelParams::Tls(p) => Ok(tls::tls_steady_state(&tls::tls_rates(p)?)?.values().to_vec()),
            ModelParams::Multilevel(p) => {
                let gen = multilevel::multilevel_generator(&multilevel::multilevel_rates(p)?);
                Ok(multilevel::multilevel_steady_state(&gen)?.values().to_vec())
            }
        }
    }
}

pub(crate) fn to_array<const N: usize>(v: &[f64]) -> Result<[f64; N]> {
    v.try_into()
        .map_err(|_| Error::Domain(format!("expected {N} populations, got {}", v.len())))
}

fn tls_slot(p: &mut JunctionParams, param: Param) -> &mut f64 {
    match param {
        Param::EpsD => &mut p.eps_d,
        Param::EpsA => &mut p.eps_a,
        Param::Omega0 => &mut p.omega0,
        Param::MuL => &mut p.left.mu,
        Param::MuR => &mut p.right.mu,
        Param::TL => &mut p.left.temperature,
        Param::TR => &mut p.right.temperature,
        Param::GammaHyb => &mut p.gamma_hyb,
        other => unreachable!("{other} checked against the tls parameter set"),
    }
}

fn ml_slot(p: &mut MultilevelParams, param: Param) -> &mut f64 {
    match param {
        Param::EpsD => &mut p.eps_d,
        Param::EpsA => &mut p.eps_a,
        Param::Omega0 => &mut p.omega0,
        Param::MuL => &mut p.left.mu,
        Param::MuR => &mut p.right.mu,
        Param::TL => &mut p.left.temperature,
        Param::TR => &mut p.right.temperature,
        Param::GammaL => &mut p.gamma_l,
        Param::GammaR => &mut p.gamma_r,
        Param::GammaDA => &mut p.gamma_da,
        Param::GammaAD => &mut p.gamma_ad,
        Param::Gamma0 => &mut p.gamma0,
        Param::TVib => &mut p.t_vib,
        Param::Lambda => &mut p.lambda,
        Param::GammaHyb => unreachable!("gamma_hyb checked against the multilevel parameter set"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for p in Param::ALL {
            assert_eq!(p.name().parse::<Param>().unwrap(), p);
        }
        assert!("kappa".parse::<Param>().is_err());
    }

    #[test]
    fn model_specific_parameters_are_rejected() {
        let tls = ModelParams::Tls(JunctionParams::anthracene_pmda());
        let ml = ModelParams::Multilevel(MultilevelParams::high_bias(0.1));
        assert!(matches!(tls.get(Param::Lambda), Err(Error::InvalidParameter { model: "tls", .. })));
        match ml.with(Param::GammaHyb, 1.0) {
            Err(Error::InvalidParameter { name, valid, .. }) => {
                assert_eq!(name, "gamma_hyb");
                assert!(valid.contains(&"gamma0"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn get_with_round_trip() {
        let ml = ModelParams::Multilevel(MultilevelParams::high_bias(0.1));
        for &p in ModelKind::Multilevel.params() {
            let v = ml.get(p).unwrap() + 0.25;
            assert_eq!(ml.with(p, v).unwrap().get(p).unwrap(), v);
        }
        let tls = ModelParams::Tls(JunctionParams::anthracene_pmda());
        assert_eq!(tls.get(Param::TL).unwrap(), 2.0);
        assert_eq!(tls.with(Param::MuR, -3.0).unwrap().get(Param::MuR).unwrap(), -3.0);
    }
}
