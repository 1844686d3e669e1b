//! Two-level (spin-fermion mapped) rectifier.
//!
//! State 1 is the donor-occupied configuration, state 2 the acceptor-occupied
//! one. Inelastic transfer happens through four lead-dressed channels: donor
//! to acceptor or back, each while exciting (`+`) or de-exciting (`−`) the
//! vibrational two-level system.

use nalgebra::SMatrix;

use crate::distributions::{fermi, fermi_hole, Reservoir};
use crate::error::{Error, Result};
use crate::generator::{Generator, Populations};

pub type PopulationVector2 = Populations<2>;

/// Physical parameters of the junction. Energies in eV, `hbar = k_B = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JunctionParams {
    pub eps_d: f64,
    pub eps_a: f64,
    pub omega0: f64,
    /// Overall rate prefactor Γ of the generator.
    pub gamma_hyb: f64,
    pub left: Reservoir,
    pub right: Reservoir,
}

impl JunctionParams {
    /// Reference anthracene/PMDA junction with the C-C-C bending mode.
    pub fn anthracene_pmda() -> Self {
        JunctionParams {
            eps_d: -5.4,
            eps_a: -3.8,
            omega0: 0.091,
            gamma_hyb: 0.7,
            left: Reservoir { mu: 1.0, temperature: 2.0 },
            right: Reservoir { mu: -1.0, temperature: 1.0 },
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eps_d", self.eps_d), ("eps_a", self.eps_a)] {
            if !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be finite, got {v}")));
            }
        }
        if !(self.omega0.is_finite() && self.omega0 > 0.0) {
            return Err(Error::Domain(format!("omega0 must be > 0, got {}", self.omega0)));
        }
        if !(self.gamma_hyb.is_finite() && self.gamma_hyb > 0.0) {
            return Err(Error::Domain(format!("gamma_hyb must be > 0, got {}", self.gamma_hyb)));
        }
        self.left.validate()?;
        self.right.validate()
    }
}

/// The four dimensionless transfer factors α.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSet2 {
    pub a_da_plus: f64,
    pub a_ad_plus: f64,
    pub a_da_minus: f64,
    pub a_ad_minus: f64,
}

impl RateSet2 {
    /// Total flow out of state 1, `α_da⁺ + α_ad⁺`.
    pub fn outflow_1(&self) -> f64 {
        self.a_da_plus + self.a_ad_plus
    }

    /// Total flow out of state 2, `α_da⁻ + α_ad⁻`.
    pub fn outflow_2(&self) -> f64 {
        self.a_da_minus + self.a_ad_minus
    }

    /// `σ`, the sum of all four factors.
    pub fn total(&self) -> f64 {
        self.outflow_1() + self.outflow_2()
    }
}

pub fn tls_rates(params: &JunctionParams) -> Result<RateSet2> {
    params.validate()?;
    let (l, r) = (&params.left, &params.right);
    let (ed, ea, w) = (params.eps_d, params.eps_a, params.omega0);
    let f_l = fermi(ed, l)?;
    let f_r = fermi(ea, r)?;
    Ok(RateSet2 {
        a_da_plus: f_l * fermi_hole(ea + w, r)?,
        a_ad_plus: f_r * fermi_hole(ed + w, l)?,
        a_da_minus: f_l * fermi_hole(ea - w, r)?,
        a_ad_minus: f_r * fermi_hole(ed - w, l)?,
    })
}

/// `L = Γ [[−(α_da⁺ + α_ad⁺), α_da⁻ + α_ad⁻], [α_da⁺ + α_ad⁺, −(α_da⁻ + α_ad⁻)]]`.
pub fn tls_generator(rates: &RateSet2, gamma_hyb: f64) -> Generator<2> {
    let out1 = gamma_hyb * rates.outflow_1();
    let out2 = gamma_hyb * rates.outflow_2();
    Generator::from_matrix_unchecked(SMatrix::<f64, 2, 2>::new(-out1, out2, out1, -out2))
}

pub fn tls_steady_state(rates: &RateSet2) -> Result<PopulationVector2> {
    let sigma = rates.total();
    if !(sigma > 0.0) {
        return Err(Error::DegenerateGenerator);
    }
    let p1 = rates.outflow_2() / sigma;
    let p2 = rates.outflow_1() / sigma;
    Populations::from_clamped([p1, p2], 0.0)
}

/// Closed-form relaxation `p(t) = p_ss + (p(0) − p_ss) e^{−Γσt}`; `t` in
/// units of ħ/eV.
pub fn tls_propagate(p0: &PopulationVector2, t: f64, params: &JunctionParams) -> Result<PopulationVector2> {
    let rates = tls_rates(params)?;
    propagate_with_rates(p0, t, &rates, params.gamma_hyb)
}

pub(crate) fn propagate_with_rates(
    p0: &PopulationVector2,
    t: f64,
    rates: &RateSet2,
    gamma_hyb: f64,
) -> Result<PopulationVector2> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Domain(format!("time must be finite and >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(*p0);
    }
    let ss = tls_steady_state(rates)?;
    let decay = (-gamma_hyb * rates.total() * t).exp();
    // each component relaxes separately so that a small p_i keeps its
    // relative precision; the trace is preserved to rounding
    let p = [0, 1].map(|i| ss[i] + (p0[i] - ss[i]) * decay);
    Populations::from_clamped(p, 1e-15)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::fermi;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn res(mu: f64, t: f64) -> Reservoir {
        Reservoir { mu, temperature: t }
    }

    #[test]
    fn symmetric_junction_gives_quarter_rates() {
        let p = JunctionParams {
            eps_d: 0.2,
            eps_a: 0.2,
            omega0: 1e-12,
            gamma_hyb: 1.0,
            left: res(0.2, 0.5),
            right: res(0.2, 0.5),
        };
        let r = tls_rates(&p).unwrap();
        for a in [r.a_da_plus, r.a_ad_plus, r.a_da_minus, r.a_ad_minus] {
            assert_relative_eq!(a, 0.25, max_relative = 1e-10);
        }
    }

    #[test]
    fn reference_junction_rates_match_composed_fermi_factors() {
        let p = JunctionParams { omega0: 0.196, ..JunctionParams::anthracene_pmda() };
        let r = tls_rates(&p).unwrap();
        let (l, rr) = (res(1.0, 2.0), res(-1.0, 1.0));
        let f = |e: f64, x: &Reservoir| fermi(e, x).unwrap();
        assert_relative_eq!(r.a_da_plus, f(-5.4, &l) * (1.0 - f(-3.8 + 0.196, &rr)), max_relative = 1e-13);
        assert_relative_eq!(r.a_ad_plus, f(-3.8, &rr) * (1.0 - f(-5.4 + 0.196, &l)), max_relative = 1e-12);
        assert_relative_eq!(r.a_da_minus, f(-5.4, &l) * (1.0 - f(-3.8 - 0.196, &rr)), max_relative = 1e-13);
        assert_relative_eq!(r.a_ad_minus, f(-3.8, &rr) * (1.0 - f(-5.4 - 0.196, &l)), max_relative = 1e-12);
        // Golden values from a 50-digit evaluation of the closed forms.
        assert_relative_eq!(r.a_da_plus, 0.066_183_639_388_872_82, max_relative = 1e-13);
        assert_relative_eq!(r.a_ad_plus, 0.040_558_469_194_497_57, max_relative = 1e-13);
        assert_relative_eq!(r.a_da_minus, 0.045_742_348_366_007_52, max_relative = 1e-13);
        assert_relative_eq!(r.a_ad_minus, 0.033_596_838_920_309_80, max_relative = 1e-13);
    }

    #[test]
    fn cold_leads_saturate_forward_excitation() {
        // eps_d < mu_L, eps_a < mu_R < eps_a + omega0
        let p = JunctionParams {
            eps_d: -1.0,
            eps_a: -0.5,
            omega0: 0.4,
            gamma_hyb: 1.0,
            left: res(0.0, 1e-3),
            right: res(-0.3, 1e-3),
        };
        let r = tls_rates(&p).unwrap();
        assert_relative_eq!(r.a_da_plus, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn generator_columns_sum_to_zero_and_equal_rates_spectrum() {
        let r = RateSet2 { a_da_plus: 0.3, a_ad_plus: 0.3, a_da_minus: 0.3, a_ad_minus: 0.3 };
        let g = tls_generator(&r, 0.7);
        assert_eq!(g.column_sums(), [0.0, 0.0]);
        let mut ev: Vec<f64> = g.eigenvalues().iter().map(|z| z.0).collect();
        ev.sort_by(f64::total_cmp);
        assert_relative_eq!(ev[0], -4.0 * 0.7 * 0.3, max_relative = 1e-12);
        assert!(ev[1].abs() < 1e-15);
        let zero = tls_generator(&r, 0.0);
        assert_eq!(zero.max_abs_entry(), 0.0);
    }

    #[test]
    fn steady_state_ratios() {
        let r = RateSet2 { a_da_plus: 0.2, a_ad_plus: 0.2, a_da_minus: 0.2, a_ad_minus: 0.2 };
        assert_eq!(tls_steady_state(&r).unwrap().values(), &[0.5, 0.5]);
        let r = RateSet2 { a_da_plus: 0.4, a_ad_plus: 0.2, a_da_minus: 0.15, a_ad_minus: 0.05 };
        let ss = tls_steady_state(&r).unwrap();
        assert_relative_eq!(ss[0], 0.25, max_relative = 1e-15);
        assert_relative_eq!(ss[1], 0.75, max_relative = 1e-15);
        let zero = RateSet2 { a_da_plus: 0.0, a_ad_plus: 0.0, a_da_minus: 0.0, a_ad_minus: 0.0 };
        assert_eq!(tls_steady_state(&zero), Err(Error::DegenerateGenerator));
    }

    #[test]
    fn steady_state_is_in_generator_kernel() {
        let p = JunctionParams::anthracene_pmda();
        let r = tls_rates(&p).unwrap();
        let ss = tls_steady_state(&r).unwrap();
        let lp = tls_generator(&r, p.gamma_hyb).apply(ss.values());
        assert!(lp[0].abs() < 1e-14 * p.gamma_hyb && lp[1].abs() < 1e-14 * p.gamma_hyb);
    }

    #[test]
    fn propagate_boundaries() {
        let p = JunctionParams::anthracene_pmda();
        let p0 = Populations::new([1.0, 0.0]).unwrap();
        assert_eq!(tls_propagate(&p0, 0.0, &p).unwrap(), p0);
        let ss = tls_steady_state(&tls_rates(&p).unwrap()).unwrap();
        let late = tls_propagate(&p0, 1e4, &p).unwrap();
        assert_relative_eq!(late[0], ss[0], max_relative = 1e-14);
        assert!(matches!(tls_propagate(&p0, -1.0, &p), Err(Error::Domain(_))));
    }

    fn arb_params() -> impl Strategy<Value = JunctionParams> {
        (
            -6.0..2.0f64,
            -6.0..2.0f64,
            0.01..0.5f64,
            0.05..2.0f64,
            (-4.0..4.0f64, 0.02..3.0f64),
            (-4.0..4.0f64, 0.02..3.0f64),
        )
            .prop_map(|(ed, ea, w, g, (ml, tl), (mr, tr))| JunctionParams {
                eps_d: ed,
                eps_a: ea,
                omega0: w,
                gamma_hyb: g,
                left: res(ml, tl),
                right: res(mr, tr),
            })
            .prop_filter("nondegenerate", |p| tls_rates(p).map(|r| r.total() > 1e-300).unwrap_or(false))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn trace_and_positivity(p in arb_params(), q in 0.0..1.0f64, t in 0.0..20.0f64) {
            let p0 = Populations::new([q, 1.0 - q]).unwrap();
            let pt = tls_propagate(&p0, t, &p).unwrap();
            prop_assert!((pt[0] + pt[1] - 1.0).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&pt[0]) && (0.0..=1.0).contains(&pt[1]));
        }

        #[test]
        fn steady_state_is_a_fixpoint(p in arb_params(), t in 0.0..50.0f64) {
            let ss = tls_steady_state(&tls_rates(&p).unwrap()).unwrap();
            let pt = tls_propagate(&ss, t, &p).unwrap();
            prop_assert!((pt[0] - ss[0]).abs() < 1e-14);
        }

        #[test]
        fn relaxation_is_monotone(p in arb_params(), q in 0.0..1.0f64, t in 0.0..20.0f64, dt in 0.0..5.0f64) {
            let p0 = Populations::new([q, 1.0 - q]).unwrap();
            let ss = tls_steady_state(&tls_rates(&p).unwrap()).unwrap();
            let a = (tls_propagate(&p0, t, &p).unwrap()[0] - ss[0]).abs();
            let b = (tls_propagate(&p0, t + dt, &p).unwrap()[0] - ss[0]).abs();
            prop_assert!(b <= a + 1e-15);
        }

        #[test]
        fn closed_form_matches_matrix_exponential(p in arb_params(), q in 0.0..1.0f64, t in 0.0..20.0f64) {
            let p0 = Populations::new([q, 1.0 - q]).unwrap();
            let rates = tls_rates(&p).unwrap();
            let via_exp = tls_generator(&rates, p.gamma_hyb).evolve_raw(p0.values(), t).unwrap();
            let closed = tls_propagate(&p0, t, &p).unwrap();
            prop_assert!((via_exp[0] - closed[0]).abs() < 1e-12);
            prop_assert!((via_exp[1] - closed[1]).abs() < 1e-12);
        }
    }
}
