use num_traits::Signed;

use super::cochain::{cech_delta, cell_d, simplicial_delta, Component, DeligneCochain, DiscreteForm};
use super::model::SimplicialGroupModel;
use super::{DeligneError, Q};

fn expect_form(f: &DiscreteForm, level: usize, degree: usize, name: &str) -> Result<(), DeligneError> {
    if (f.level, f.degree) != (level, degree) {
        return Err(DeligneError::Degree(format!(
            "{name} is a {}-form on K_{}, expected a {degree}-form on K_{level}",
            f.degree, f.level
        )));
    }
    Ok(())
}

/// The degree-3, n = 2 cocycle of a pair (φ, ψ) with Δψ = 0: a = 1,
/// μ = (1, ψ), ξ = (1, 0, φ), ρ = dψ + Δφ.
pub fn make_trivial_multiplicative(
    model: &SimplicialGroupModel,
    phi: &DiscreteForm,
    psi: &DiscreteForm,
) -> Result<DeligneCochain, DeligneError> {
    expect_form(phi, 1, 2, "φ")?;
    expect_form(psi, 2, 1, "ψ")?;
    if model.depth() < 3 {
        return Err(DeligneError::Model("Δψ needs level 3".into()));
    }
    let dpsi = psi.delta(model)?;
    if !dpsi.is_zero() {
        return Err(DeligneError::NotDeltaClosed(format!("Δψ ≠ 0 on {} cells", dpsi.values.len())));
    }
    let mut c = DeligneCochain::zero(2, 3);
    c.set(1, 0, 2, phi.restrict(model));
    c.set(2, 0, 1, psi.restrict(model));
    c.rho = Some(psi.d(model).add(&phi.delta(model)?));
    Ok(c)
}

/// The degree-2 cochain (h, ζ) with h = 1 and ζ = (0, α|) built from a
/// global 1-form α on K_1.
pub fn shift_witness(model: &SimplicialGroupModel, alpha: &DiscreteForm) -> Result<DeligneCochain, DeligneError> {
    expect_form(alpha, 1, 1, "α")?;
    let mut w = DeligneCochain::zero(2, 2);
    w.set(1, 0, 1, alpha.restrict(model));
    Ok(w)
}

/// Exact evaluation of the conditions on (H, ρ, B); empty when all hold.
pub fn hrb_violations(
    model: &SimplicialGroupModel,
    n: usize,
    h: &DiscreteForm,
    rho: &DiscreteForm,
    b: &Component,
) -> Result<Vec<String>, DeligneError> {
    expect_form(h, 1, n + 1, "H")?;
    expect_form(rho, 2, n, "ρ")?;
    if model.depth() < 3 {
        return Err(DeligneError::Model("the conditions need level 3".into()));
    }
    let mut v = Vec::new();
    let dh = h.d(model);
    if !dh.is_zero() {
        v.push(format!("dH ≠ 0 on {} cells", dh.values.len()));
    }
    let second = h.delta(model)?.add(&rho.d(model).scale(-1));
    if !second.is_zero() {
        v.push(format!("ΔH − dρ ≠ 0 on {} cells", second.values.len()));
    }
    let third = rho.delta(model)?;
    if !third.is_zero() {
        v.push(format!("Δρ ≠ 0 on {} cells", third.values.len()));
    }
    let mut dbh = cell_d(model, 1, 0, b);
    for (k, x) in h.restrict(model) {
        let e = dbh.entry(k).or_insert_with(|| Q::from_integer(0));
        *e -= x;
    }
    let off = dbh.values().filter(|x| x.abs() > Q::from_integer(0)).count();
    if off > 0 {
        v.push(format!("dB_i ≠ H on {off} patch cells"));
    }
    Ok(v)
}

/// The degree-(n + 2) cochain (0, …, 0, ξ_n, ξ_{n+1}) with
/// ξ_n = (1, 0, …, 0, ΔB + ρ) and ξ_{n+1} = (1, 0, …, 0, −δB).
pub fn make_lemma2_cocycle(
    model: &SimplicialGroupModel,
    n: usize,
    h: &DiscreteForm,
    rho: &DiscreteForm,
    b: &Component,
) -> Result<DeligneCochain, DeligneError> {
    let v = hrb_violations(model, n, h, rho, b)?;
    if !v.is_empty() {
        return Err(DeligneError::Precondition(v));
    }
    Ok(hrb_shape(model, n, rho, b, 1))
}

fn hrb_shape(model: &SimplicialGroupModel, n: usize, rho: &DiscreteForm, b: &Component, rho_sign: i64) -> DeligneCochain {
    let mut c = DeligneCochain::zero(n, n + 2);
    let mut top = simplicial_delta(model, 1, 0, b);
    for (k, x) in rho.restrict(model) {
        let e = top.entry(k).or_insert_with(|| Q::from_integer(0));
        *e += x * rho_sign;
    }
    top.retain(|_, x| *x != Q::from_integer(0));
    c.set(2, 0, n, top);
    let neg: Component = cech_delta(model, 1, 0, b).into_iter().map(|(k, x)| (k, -x)).collect();
    c.set(1, 1, n, neg);
    c
}

/// d of the (2, 0, n) component of the (H, ρ, B) shape, with ρ entering as
/// +ρ and as −ρ. Under the conditions on (H, ρ) the first equals 2dρ
/// restricted to the patches and the second vanishes.
#[derive(Clone, Debug, PartialEq)]
pub struct TopFormClosedness {
    pub plus_rho_max: Q,
    pub minus_rho_max: Q,
    pub two_drho_max: Q,
}

pub fn top_form_closedness(
    model: &SimplicialGroupModel,
    n: usize,
    rho: &DiscreteForm,
    b: &Component,
) -> TopFormClosedness {
    let max_d = |s: i64| {
        let c = hrb_shape(model, n, rho, b, s);
        let top = c.component(2, 0, n).cloned().unwrap_or_default();
        cell_d(model, 2, 0, &top).values().map(|x| x.abs()).max().unwrap_or_else(|| Q::from_integer(0))
    };
    TopFormClosedness {
        plus_rho_max: max_d(1),
        minus_rho_max: max_d(-1),
        two_drho_max: rho.d(model).scale(2).max_abs(),
    }
}
