//! Exact parameter derivatives of the populations.
//!
//! The two-level closed forms are pushed through dual numbers. For the
//! five-state model the steady state is differentiated implicitly:
//! `A ∂ρ = −(∂L ρ)` with `A` the bordered generator and the last entry of the
//! right-hand side set to zero (the normalization row).

use nalgebra::SVector;

use crate::dual::{bose_factor, logistic, Dual};
use crate::error::{Error, Result};
use crate::model::Param;
use crate::multilevel::{self, MultilevelParams, RateSet5};
use crate::tls::JunctionParams;

struct TlsDual {
    /// outflow of state 1
    plus: Dual,
    /// outflow of state 2
    minus: Dual,
    gamma: Dual,
}

fn fermi_pair(e: Dual, mu: Dual, t: Dual) -> (Dual, Dual) {
    let x = (e - mu) / t;
    (logistic(x), logistic(-x))
}

fn tls_dual(p: &JunctionParams, theta: Param) -> TlsDual {
    let s = |param, v| Dual::seed(v, param == theta);
    let ed = s(Param::EpsD, p.eps_d);
    let ea = s(Param::EpsA, p.eps_a);
    let w = s(Param::Omega0, p.omega0);
    let (mu_l, t_l) = (s(Param::MuL, p.left.mu), s(Param::TL, p.left.temperature));
    let (mu_r, t_r) = (s(Param::MuR, p.right.mu), s(Param::TR, p.right.temperature));

    let (f_l, _) = fermi_pair(ed, mu_l, t_l);
    let (f_r, _) = fermi_pair(ea, mu_r, t_r);
    let (_, h_r_plus) = fermi_pair(ea + w, mu_r, t_r);
    let (_, h_l_plus) = fermi_pair(ed + w, mu_l, t_l);
    let (_, h_r_minus) = fermi_pair(ea - w, mu_r, t_r);
    let (_, h_l_minus) = fermi_pair(ed - w, mu_l, t_l);

    TlsDual {
        plus: f_l * h_r_plus + f_r * h_l_plus,
        minus: f_l * h_r_minus + f_r * h_l_minus,
        gamma: s(Param::GammaHyb, p.gamma_hyb),
    }
}

/// Steady-state populations with their θ-derivatives.
pub fn tls_steady(p: &JunctionParams, theta: Param) -> [Dual; 2] {
    let r = tls_dual(p, theta);
    let sigma = r.plus + r.minus;
    [r.minus / sigma, r.plus / sigma]
}

/// Populations at time `t` from a θ-independent `p0`, with θ-derivatives.
pub fn tls_at(p: &JunctionParams, theta: Param, p0: [f64; 2], t: f64) -> [Dual; 2] {
    if t == 0.0 {
        return p0.map(Dual::constant);
    }
    let r = tls_dual(p, theta);
    let sigma = r.plus + r.minus;
    let decay = (-(r.gamma * sigma) * t).exp();
    let ss = [r.minus / sigma, r.plus / sigma];
    [0, 1].map(|i| ss[i] + (Dual::constant(p0[i]) - ss[i]) * decay)
}

/// Rates of the five-state model with their θ-derivatives, as (values,
/// derivatives).
pub fn multilevel_rates_dual(p: &MultilevelParams, theta: Param) -> Result<(RateSet5, RateSet5)> {
    if theta == Param::Lambda && p.lambda == 0.0 {
        return Err(Error::Domain(
            "lambda derivative is undefined at lambda = 0 (unit Franck-Condon weights)".into(),
        ));
    }
    let s = |param, v| Dual::seed(v, param == theta);
    let ed = s(Param::EpsD, p.eps_d);
    let ea = s(Param::EpsA, p.eps_a);
    let w = s(Param::Omega0, p.omega0);
    let (mu_l, t_l) = (s(Param::MuL, p.left.mu), s(Param::TL, p.left.temperature));
    let (mu_r, t_r) = (s(Param::MuR, p.right.mu), s(Param::TR, p.right.temperature));
    let (gl, gr) = (s(Param::GammaL, p.gamma_l), s(Param::GammaR, p.gamma_r));
    let (gda, gad) = (s(Param::GammaDA, p.gamma_da), s(Param::GammaAD, p.gamma_ad));
    let g0 = s(Param::Gamma0, p.gamma0);
    let tv = s(Param::TVib, p.t_vib);

    let fc = if p.lambda == 0.0 {
        [Dual::constant(1.0); 2]
    } else {
        let g2 = (s(Param::Lambda, p.lambda) / w).powi2();
        let e = (-g2).exp();
        [e, g2 * e]
    };
    let nb = bose_factor(w / tv);

    let mut v = RateSet5::default();
    let mut d = RateSet5::default();
    let mut put = |slot: fn(&mut RateSet5) -> &mut f64, x: Dual| {
        *slot(&mut v) = x.v;
        *slot(&mut d) = x.d;
    };
    let (f0, h0) = fermi_pair(ed, mu_l, t_l);
    let (f1, h1) = fermi_pair(ed + w, mu_l, t_l);
    let (fr, hr) = fermi_pair(ea, mu_r, t_r);
    put(|r| &mut r.gl_plus[0], gl * fc[0] * f0);
    put(|r| &mut r.gl_plus[1], gl * fc[1] * f1);
    put(|r| &mut r.gl_minus[0], gl * fc[0] * h0);
    put(|r| &mut r.gl_minus[1], gl * fc[1] * h1);
    put(|r| &mut r.gr_plus[0], gr * fr);
    put(|r| &mut r.gr_minus[0], gr * hr);
    put(|r| &mut r.k_da[0], gda * fc[0] * (nb + 1.0));
    put(|r| &mut r.k_da[1], gda * fc[1] * (nb + 1.0));
    put(|r| &mut r.k_ad[0], gad * fc[0] * nb);
    put(|r| &mut r.k_ad[1], gad * fc[1] * nb);
    put(|r| &mut r.up, g0 * nb);
    put(|r| &mut r.down, g0 * (nb + 1.0));
    Ok((v, d))
}

/// Steady state and its θ-derivative for the five-state model.
pub fn multilevel_steady(p: &MultilevelParams, theta: Param) -> Result<([f64; 5], [f64; 5])> {
    p.validate()?;
    let (_, drates) = multilevel_rates_dual(p, theta)?;
    let gen = multilevel::multilevel_generator(&multilevel::multilevel_rates(p)?);
    let rho = multilevel::multilevel_steady_state(&gen)?;
    let dgen = multilevel::multilevel_generator(&drates);
    let mut rhs = -(dgen.matrix() * SVector::<f64, 5>::from_column_slice(rho.values()));
    rhs[4] = 0.0;
    let drho = multilevel::bordered(&gen).lu().solve(&rhs).ok_or(Error::DegenerateGenerator)?;
    Ok((*rho.values(), std::array::from_fn(|i| drho[i])))
}
