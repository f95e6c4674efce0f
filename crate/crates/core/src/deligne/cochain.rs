use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::model::SimplicialGroupModel;
use super::{DeligneError, Q};

/// Longest Čech tuple a key can hold.
pub const MAX_TUPLE: usize = 12;

/// (patch tuple, cell) packed with the first patch index most significant,
/// so that keys sort by tuple, then by cell.
pub type Key = u128;

pub fn key(tuple: &[u8], cell: u32) -> Key {
    debug_assert!(tuple.len() <= MAX_TUPLE);
    let t = tuple.iter().fold(0u128, |acc, &i| acc << 8 | i as u128);
    t << 32 | cell as u128
}

pub fn unkey(k: Key, len: usize) -> (Vec<u8>, u32) {
    let cell = (k & 0xffff_ffff) as u32;
    let mut t = k >> 32;
    let mut tuple = vec![0u8; len];
    for slot in tuple.iter_mut().rev() {
        *slot = (t & 0xff) as u8;
        t >>= 8;
    }
    (tuple, cell)
}

fn tuple_of(k: Key) -> u128 {
    k >> 32
}

fn mask_of(tuple: &[u8]) -> u128 {
    tuple.iter().fold(0u128, |m, &i| m | 1u128 << i)
}

/// Values of one Čech component Č^p(U_q, level-k coefficients), zeros omitted.
pub type Component = BTreeMap<Key, Q>;

fn add_to(c: &mut Component, k: Key, v: Q) {
    if v.is_zero() {
        return;
    }
    let e = c.entry(k).or_insert_with(Q::zero);
    *e += v;
    if e.is_zero() {
        c.remove(&k);
    }
}

/// Sums terms with equal keys and drops zeros.
fn collect(mut terms: Vec<(Key, Q)>) -> Component {
    terms.sort_unstable_by_key(|t| t.0);
    let mut out = Vec::with_capacity(terms.len());
    let mut it = terms.into_iter();
    let Some((mut k, mut acc)) = it.next() else {
        return Component::new();
    };
    for (k2, v) in it {
        if k2 == k {
            acc += v;
        } else {
            if !acc.is_zero() {
                out.push((k, acc));
            }
            (k, acc) = (k2, v);
        }
    }
    if !acc.is_zero() {
        out.push((k, acc));
    }
    out.into_iter().collect()
}

fn signed(v: Q, s: i64) -> Q {
    match s {
        1 => v,
        -1 => -v,
        _ => v * s,
    }
}

fn merge(into: &mut Component, from: Component, scale: i64) {
    if into.is_empty() {
        *into = from.into_iter().map(|(k, v)| (k, signed(v, scale))).collect();
        return;
    }
    for (k, v) in from {
        add_to(into, k, signed(v, scale));
    }
}

fn sign(e: usize) -> i64 {
    if e % 2 == 0 {
        1
    } else {
        -1
    }
}

/// A rational cochain on all of K_q.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiscreteForm {
    pub level: usize,
    pub degree: usize,
    pub values: BTreeMap<u32, Q>,
}

impl DiscreteForm {
    pub fn zero(level: usize, degree: usize) -> Self {
        DiscreteForm { level, degree, values: BTreeMap::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    fn add_value(&mut self, cell: u32, v: Q) {
        if v.is_zero() {
            return;
        }
        let e = self.values.entry(cell).or_insert_with(Q::zero);
        *e += v;
        if e.is_zero() {
            self.values.remove(&cell);
        }
    }

    pub fn add(&self, other: &DiscreteForm) -> DiscreteForm {
        assert_eq!((self.level, self.degree), (other.level, other.degree));
        let mut out = self.clone();
        for (&c, &v) in &other.values {
            out.add_value(c, v);
        }
        out
    }

    pub fn scale(&self, s: i64) -> DiscreteForm {
        let mut out = DiscreteForm::zero(self.level, self.degree);
        for (&c, &v) in &self.values {
            out.add_value(c, v * s);
        }
        out
    }

    /// Cell coboundary; cells above the level's dimension cap are absent.
    pub fn d(&self, model: &SimplicialGroupModel) -> DiscreteForm {
        let k = &model.level(self.level).complex;
        let mut out = DiscreteForm::zero(self.level, self.degree + 1);
        for (&c, &v) in &self.values {
            for &(s, i) in k.coboundary(c) {
                out.add_value(s, v * i);
            }
        }
        out
    }

    /// Δ = Σ_i (−1)^i Δ_i^*, into level + 1.
    pub fn delta(&self, model: &SimplicialGroupModel) -> Result<DiscreteForm, DeligneError> {
        if self.level >= model.depth() {
            return Err(DeligneError::Degree(format!("no level {} for Δ", self.level + 1)));
        }
        let up = model.level(self.level + 1);
        let mut out = DiscreteForm::zero(self.level + 1, self.degree);
        for (i, f) in up.faces.iter().enumerate() {
            for (&c, &v) in &self.values {
                for &(s, m) in f.preimage(c) {
                    out.add_value(s, v * (m * sign(i)));
                }
            }
        }
        Ok(out)
    }

    /// The Čech 0-cochain of restrictions to the patches.
    pub fn restrict(&self, model: &SimplicialGroupModel) -> Component {
        let l = model.level(self.level);
        let mut out = Component::new();
        for (&c, &v) in &self.values {
            for i in 0..l.n_patches() {
                if l.mask(c) >> i & 1 == 1 {
                    out.insert(key(&[i as u8], c), v);
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> Q {
        self.values.values().map(|v| v.abs()).max().unwrap_or_else(Q::zero)
    }

    /// Random small rationals on a fraction of the cells of the given degree.
    pub fn random<R: Rng + ?Sized>(model: &SimplicialGroupModel, level: usize, degree: usize, density: f64, rng: &mut R) -> Self {
        let mut out = DiscreteForm::zero(level, degree);
        for &c in model.level(level).complex.cells_of_dim(degree) {
            if rng.random_bool(density) {
                out.add_value(c, random_rational(rng));
            }
        }
        out
    }
}

/// Numerator in [−20, 20], denominator in [1, 6].
pub fn random_rational<R: Rng + ?Sized>(rng: &mut R) -> Q {
    Q::new(rng.random_range(-20..=20), rng.random_range(1..=6))
}

/// Čech coboundary on full ordered tuples:
/// (δc)_{i₀…i_{p+1}} = Σ_j (−1)^j c_{i₀…î_j…i_{p+1}}.
pub fn cech_delta(model: &SimplicialGroupModel, q: usize, p: usize, c: &Component) -> Component {
    let l = model.level(q);
    let mut out = Vec::new();
    for (&k, &v) in c {
        let (t, cell) = unkey(k, p + 1);
        let m = l.mask(cell);
        for i in 0..l.n_patches() {
            if m >> i & 1 == 0 {
                continue;
            }
            for j in 0..=p + 1 {
                let mut u = Vec::with_capacity(p + 2);
                u.extend_from_slice(&t[..j]);
                u.push(i as u8);
                u.extend_from_slice(&t[j..]);
                out.push((key(&u, cell), signed(v, sign(j))));
            }
        }
    }
    collect(out)
}

/// Cell coboundary on each patch intersection; on functions this is dlog of
/// the representative.
pub fn cell_d(model: &SimplicialGroupModel, q: usize, p: usize, c: &Component) -> Component {
    let l = model.level(q);
    let mut out = Vec::new();
    for (&k, &v) in c {
        let (t, cell) = unkey(k, p + 1);
        let tm = mask_of(&t);
        for &(s, i) in l.complex.coboundary(cell) {
            if l.in_all(s, tm) {
                out.push((key(&t, s), signed(v, i)));
            }
        }
    }
    collect(out)
}

/// Δ = Σ_i (−1)^i Δ_i^* from level q to level q + 1.
pub fn simplicial_delta(model: &SimplicialGroupModel, q: usize, p: usize, c: &Component) -> Component {
    let up = model.level(q + 1);
    let mut out = Vec::new();
    let mut allowed = [0u128; MAX_TUPLE];
    let mut tuple = [0u8; MAX_TUPLE];
    for (face, f) in up.faces.iter().enumerate() {
        let pre: Vec<u128> =
            (0..model.level(q).n_patches()).map(|j| mask_of_u32(up.index_preimage(face, j as u32))).collect();
        for (&k, &v) in c {
            let (t, cell) = unkey(k, p + 1);
            for &(s, m) in f.preimage(cell) {
                // all tuples I with Δ_face(I) = t and s ∈ U_I
                let sm = up.mask(s);
                for (a, &j) in allowed.iter_mut().zip(&t) {
                    *a = pre[j as usize] & sm;
                }
                if allowed[..t.len()].contains(&0) {
                    continue;
                }
                let w = signed(v, m * sign(face));
                product_of_masks(&allowed[..t.len()], &mut tuple[..t.len()], 0, &mut |u| out.push((key(u, s), w)));
            }
        }
    }
    collect(out)
}

fn mask_of_u32(xs: &[u32]) -> u128 {
    xs.iter().fold(0u128, |m, &i| m | 1u128 << i)
}

fn product_of_masks(masks: &[u128], tuple: &mut [u8], pos: usize, f: &mut dyn FnMut(&[u8])) {
    if pos == masks.len() {
        f(tuple);
        return;
    }
    let mut m = masks[pos];
    while m != 0 {
        tuple[pos] = m.trailing_zeros() as u8;
        product_of_masks(masks, tuple, pos + 1, f);
        m &= m - 1;
    }
}

/// An element of Del^m_Δ(𝔘, n), with the extra n-form ρ on K_2 in degree n + 1.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DeligneCochain {
    pub n: usize,
    pub degree: usize,
    /// (q, p, k) → component; k = 0 holds logarithms of U(1)-valued functions
    /// divided by 2πi.
    pub comps: BTreeMap<(usize, usize, usize), Component>,
    pub rho: Option<DiscreteForm>,
}

impl DeligneCochain {
    pub fn zero(n: usize, degree: usize) -> Self {
        DeligneCochain { n, degree, comps: BTreeMap::new(), rho: None }
    }

    pub fn component(&self, q: usize, p: usize, k: usize) -> Option<&Component> {
        self.comps.get(&(q, p, k))
    }

    pub fn set(&mut self, q: usize, p: usize, k: usize, c: Component) {
        if c.is_empty() {
            self.comps.remove(&(q, p, k));
        } else {
            self.comps.insert((q, p, k), c);
        }
    }

    fn accumulate(&mut self, q: usize, p: usize, k: usize, c: Component, scale: i64) {
        let mut cur = self.comps.remove(&(q, p, k)).unwrap_or_default();
        merge(&mut cur, c, scale);
        self.set(q, p, k, cur);
    }

    pub fn is_zero(&self) -> bool {
        self.comps.values().all(|c| c.is_empty()) && self.rho.as_ref().is_none_or(|r| r.is_zero())
    }

    pub fn add(&self, other: &DeligneCochain, scale: i64) -> Result<DeligneCochain, DeligneError> {
        if (self.n, self.degree) != (other.n, other.degree) {
            return Err(DeligneError::Degree(format!(
                "degree/truncation ({}, {}) vs ({}, {})",
                self.degree, self.n, other.degree, other.n
            )));
        }
        let mut out = self.clone();
        for (&(q, p, k), c) in &other.comps {
            out.accumulate(q, p, k, c.clone(), scale);
        }
        out.rho = match (&self.rho, &other.rho) {
            (None, None) => None,
            (a, b) => {
                let base = a.clone().unwrap_or_else(|| DiscreteForm::zero(2, self.n));
                let other = b.clone().unwrap_or_else(|| DiscreteForm::zero(2, self.n));
                Some(base.add(&other.scale(scale)))
            }
        };
        Ok(out)
    }

    /// Checks the shape: 1 ≤ q ≤ Q, k ≤ n, q + p + k = m, cells of dimension
    /// k inside the tuple's intersection, ρ only in degree n + 1.
    pub fn validate(&self, model: &SimplicialGroupModel) -> Result<(), DeligneError> {
        for (&(q, p, k), c) in &self.comps {
            if q == 0 || q > model.depth() || k > self.n || q + p + k != self.degree || p + 1 > MAX_TUPLE {
                return Err(DeligneError::Degree(format!("component (q={q}, p={p}, k={k}) in degree {}", self.degree)));
            }
            let l = model.level(q);
            for &key in c.keys() {
                let (t, cell) = unkey(key, p + 1);
                if t.iter().any(|&i| i as usize >= l.n_patches())
                    || cell as usize >= l.complex.len()
                    || l.complex.dim(cell) != k
                    || !l.in_all(cell, mask_of(&t))
                {
                    return Err(DeligneError::Degree(format!("entry {t:?}/{cell} of (q={q}, p={p}, k={k})")));
                }
            }
        }
        if let Some(r) = &self.rho {
            if self.degree != self.n + 1 || r.level != 2 || r.degree != self.n {
                return Err(DeligneError::Degree("ρ is an n-form on K_2 in degree n + 1".into()));
            }
        }
        Ok(())
    }
}

/// Deligne differential D = δ + (−1)^p d on the components of one level,
/// (p, k) → component; d stops at the truncation n.
pub fn deligne_d(
    model: &SimplicialGroupModel,
    n: usize,
    q: usize,
    comps: &BTreeMap<(usize, usize), Component>,
) -> BTreeMap<(usize, usize), Component> {
    let mut out: BTreeMap<(usize, usize), Component> = BTreeMap::new();
    for (&(p, k), c) in comps {
        merge(out.entry((p + 1, k)).or_default(), cech_delta(model, q, p, c), 1);
        if k < n {
            merge(out.entry((p, k + 1)).or_default(), cell_d(model, q, p, c), sign(p));
        }
    }
    out.retain(|_, c| !c.is_empty());
    out
}

/// D^bi_Δ = (−1)^q D + Δ, with ρ ↦ −ρ in Č^0(U_2, Ω^n). Components beyond
/// level Q are dropped, which is a quotient of the complex.
pub fn bi_d(model: &SimplicialGroupModel, c: &DeligneCochain) -> Result<DeligneCochain, DeligneError> {
    c.validate(model)?;
    let mut out = DeligneCochain::zero(c.n, c.degree + 1);
    let mut by_level: BTreeMap<usize, BTreeMap<(usize, usize), Component>> = BTreeMap::new();
    for (&(q, p, k), x) in &c.comps {
        by_level.entry(q).or_default().insert((p, k), x.clone());
    }
    for (q, comps) in &by_level {
        for ((p, k), y) in deligne_d(model, c.n, *q, comps) {
            out.accumulate(*q, p, k, y, sign(*q));
        }
        if *q < model.depth() {
            for (&(p, k), x) in comps {
                out.accumulate(q + 1, p, k, simplicial_delta(model, *q, p, x), 1);
            }
        }
    }
    if let Some(r) = &c.rho {
        if model.depth() >= 3 {
            let dr = r.delta(model)?;
            if !dr.is_zero() {
                return Err(DeligneError::NotDeltaClosed(format!("Δρ ≠ 0 on {} cells", dr.values.len())));
            }
        }
        out.accumulate(2, 0, c.n, r.restrict(model), -1);
    }
    Ok(out)
}

/// True iff the function component is an integer constant on every connected
/// component of every patch intersection.
pub fn functions_vanish_mod_shifts(model: &SimplicialGroupModel, q: usize, p: usize, c: &Component) -> bool {
    locally_constant_integers(model, q, p, c, false)
}

fn locally_constant_integers(model: &SimplicialGroupModel, q: usize, p: usize, c: &Component, _strict: bool) -> bool {
    let l = model.level(q);
    let mut by_tuple: BTreeMap<u128, BTreeMap<u32, Q>> = BTreeMap::new();
    for (&k, &v) in c {
        if !v.is_integer() {
            return false;
        }
        by_tuple.entry(tuple_of(k)).or_default().insert((k & 0xffff_ffff) as u32, v);
    }
    for (t, vals) in by_tuple {
        let (tuple, _) = unkey(t << 32, p + 1);
        let comps = l.vertex_components(mask_of(&tuple));
        let mut seen: BTreeMap<u32, (Q, usize)> = BTreeMap::new();
        for (v, root) in &comps {
            let x = vals.get(v).copied().unwrap_or_else(Q::zero);
            match seen.get(root) {
                Some((y, _)) if *y != x => return false,
                Some(_) => {}
                None => {
                    seen.insert(*root, (x, 0));
                }
            }
        }
    }
    true
}

/// Offending components of a residual, with the number of entries and the
/// largest absolute value.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub offending: Vec<ResidualEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualEntry {
    pub q: usize,
    pub p: usize,
    pub k: usize,
    pub entries: usize,
    pub max_abs: String,
}

impl Residual {
    pub fn is_zero(&self) -> bool {
        self.offending.is_empty()
    }

    /// No offending form components (k > 0).
    pub fn forms_vanish(&self) -> bool {
        self.offending.iter().all(|e| e.k == 0)
    }
}

/// Residual of a cochain that should vanish in the bi-complex: forms exactly,
/// functions modulo locally constant integers.
pub fn residual(model: &SimplicialGroupModel, c: &DeligneCochain) -> Residual {
    let mut r = Residual::default();
    for (&(q, p, k), x) in &c.comps {
        let bad = if k == 0 { !functions_vanish_mod_shifts(model, q, p, x) } else { !x.is_empty() };
        if bad {
            let max = x.values().map(|v| v.abs()).max().unwrap_or_else(Q::zero);
            r.offending.push(ResidualEntry { q, p, k, entries: x.len(), max_abs: max.to_string() });
        }
    }
    if let Some(rho) = &c.rho {
        if !rho.is_zero() {
            r.offending.push(ResidualEntry { q: 2, p: 0, k: c.n, entries: rho.values.len(), max_abs: rho.max_abs().to_string() });
        }
    }
    r
}

/// bi_D(c) = 0, with U(1)-valued parts compared modulo constant integer
/// shifts per connected component.
pub fn is_cocycle(model: &SimplicialGroupModel, c: &DeligneCochain) -> Result<(bool, Residual), DeligneError> {
    let r = residual(model, &bi_d(model, c)?);
    Ok((r.is_zero(), r))
}

/// c₂ = c₁ + bi_D(witness), exactly up to the integer-shift ambiguity of
/// the U(1)-valued parts.
pub fn check_coboundary(
    model: &SimplicialGroupModel,
    c1: &DeligneCochain,
    c2: &DeligneCochain,
    witness: &DeligneCochain,
) -> Result<bool, DeligneError> {
    if c1.degree != c2.degree || witness.degree + 1 != c1.degree || c1.n != c2.n || witness.n != c1.n {
        return Err(DeligneError::Degree(format!(
            "degrees {} and {} with witness of degree {}",
            c1.degree, c2.degree, witness.degree
        )));
    }
    let diff = c2.add(c1, -1)?.add(&bi_d(model, witness)?, -1)?;
    Ok(residual(model, &diff).is_zero())
}

/// Shifts each U(1)-valued component so that its value at the smallest
/// vertex of every connected component of U_I lies in [0, 1).
pub fn canonical_functions(model: &SimplicialGroupModel, c: &DeligneCochain) -> DeligneCochain {
    let mut out = c.clone();
    for (&(q, p, k), x) in &c.comps {
        if k != 0 {
            continue;
        }
        let l = model.level(q);
        let mut by_tuple: BTreeMap<u128, Vec<(u32, Q)>> = BTreeMap::new();
        for (&key, &v) in x {
            by_tuple.entry(tuple_of(key)).or_default().push(((key & 0xffff_ffff) as u32, v));
        }
        let mut y = x.clone();
        for (t, vals) in by_tuple {
            let (tuple, _) = unkey(t << 32, p + 1);
            let comps = l.vertex_components(mask_of(&tuple));
            let vals: BTreeMap<u32, Q> = vals.into_iter().collect();
            for (v, root) in &comps {
                let base = vals.get(root).copied().unwrap_or_else(Q::zero);
                let shift = base.floor();
                if !shift.is_zero() {
                    add_to(&mut y, key(&tuple, *v), -shift);
                }
            }
        }
        out.set(q, p, k, y);
    }
    out
}

/// Integer-valued components of Tot_Δ(𝔘, Z), (q, p) → component on vertices.
pub type TotCochain = BTreeMap<(usize, usize), Component>;

/// (−1)^q δ + Δ on the total complex of U(1)- or Z-valued Čech cochains.
pub fn tot_differential(model: &SimplicialGroupModel, x: &TotCochain) -> TotCochain {
    let mut out: TotCochain = BTreeMap::new();
    for (&(q, p), c) in x {
        merge(out.entry((q, p + 1)).or_default(), cech_delta(model, q, p, c), sign(q));
        if q < model.depth() {
            merge(out.entry((q + 1, p)).or_default(), simplicial_delta(model, q, p, c), 1);
        }
    }
    out.retain(|_, c| !c.is_empty());
    out
}

/// The U(1)-valued parts p^m(c) as rational representatives.
pub fn function_parts(c: &DeligneCochain) -> TotCochain {
    c.comps.iter().filter(|((_, _, k), _)| *k == 0).map(|(&(q, p, _), x)| ((q, p), x.clone())).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct KappaReport {
    /// κ = D_tot of the representatives: κ_q = (−1)^q δ log α_q + Δ log α_{q−1}.
    pub kappa: TotCochain,
    /// Every entry an integer, constant on connected components.
    pub is_integer: bool,
    /// D_tot κ = 0 exactly.
    pub is_cocycle: bool,
}

/// Integer lift of the multiplicative class of a cocycle, n ≥ 1.
pub fn mc_class(model: &SimplicialGroupModel, c: &DeligneCochain) -> Result<KappaReport, DeligneError> {
    if c.n == 0 {
        return Err(DeligneError::Degree("κ needs n ≥ 1".into()));
    }
    let (ok, r) = is_cocycle(model, c)?;
    if !ok {
        return Err(DeligneError::NotCocycle(format!("{:?}", r.offending)));
    }
    let kappa = tot_differential(model, &function_parts(c));
    let is_integer = kappa.iter().all(|(&(q, p), x)| locally_constant_integers(model, q, p, x, true));
    let is_cocycle = tot_differential(model, &kappa).is_empty();
    Ok(KappaReport { kappa, is_integer, is_cocycle })
}

#[derive(Clone, Debug, PartialEq)]
pub struct OmegaReport {
    /// d of the top form on the level-1 patches, assembled on K_1.
    pub h: DiscreteForm,
    pub rho: DiscreteForm,
    /// Cells where patches disagree on d of the top form.
    pub overlap_mismatches: usize,
    pub dh_vanishes: bool,
    /// ΔH − dρ = 0.
    pub delta_h_matches_drho: bool,
    pub delta_rho_vanishes: bool,
}

impl OmegaReport {
    pub fn conditions_hold(&self) -> bool {
        self.overlap_mismatches == 0 && self.dh_vanishes && self.delta_h_matches_drho && self.delta_rho_vanishes
    }
}

/// The pair (dω^n, ρ) of a degree-(n + 1) cochain and the conditions
/// dH = 0, ΔH − dρ = 0, Δρ = 0.
pub fn omega_projection(model: &SimplicialGroupModel, c: &DeligneCochain) -> Result<OmegaReport, DeligneError> {
    c.validate(model)?;
    if c.degree != c.n + 1 {
        return Err(DeligneError::Degree(format!("degree {} is not n + 1 = {}", c.degree, c.n + 1)));
    }
    let n = c.n;
    let l = model.level(1);
    let top = c.component(1, 0, n).cloned().unwrap_or_default();
    let dtop = cell_d(model, 1, 0, &top);
    let mut h = DiscreteForm::zero(1, n + 1);
    let mut mismatches = 0;
    for &s in l.complex.cells_of_dim(n + 1) {
        let mut val: Option<Q> = None;
        for i in 0..l.n_patches() {
            if l.mask(s) >> i & 1 == 0 {
                continue;
            }
            let v = dtop.get(&key(&[i as u8], s)).copied().unwrap_or_else(Q::zero);
            match val {
                None => val = Some(v),
                Some(w) if w != v => mismatches += 1,
                _ => {}
            }
        }
        match val {
            Some(v) => h.add_value(s, v),
            None => return Err(DeligneError::Model(format!("cell {s} of K_1 lies in no patch"))),
        }
    }
    let rho = c.rho.clone().unwrap_or_else(|| DiscreteForm::zero(2, n));
    let (dh, delta_h_matches_drho, delta_rho_vanishes) = pair_conditions(model, &h, &rho)?;
    Ok(OmegaReport { h, rho, overlap_mismatches: mismatches, dh_vanishes: dh, delta_h_matches_drho, delta_rho_vanishes })
}

/// (dH = 0, ΔH − dρ = 0, Δρ = 0), each skipped when its level is absent.
pub fn pair_conditions(model: &SimplicialGroupModel, h: &DiscreteForm, rho: &DiscreteForm) -> Result<(bool, bool, bool), DeligneError> {
    let dh = h.d(model).is_zero();
    let second = if model.depth() >= 2 { h.delta(model)?.add(&rho.d(model).scale(-1)).is_zero() } else { true };
    let third = if model.depth() >= 3 { rho.delta(model)?.is_zero() } else { true };
    Ok((dh, second, third))
}

/// Random cochain: up to `per_comp` random entries in every component of the
/// degree, at random tuples and cells of the right dimension.
pub fn random_cochain<R: Rng + ?Sized>(
    model: &SimplicialGroupModel,
    n: usize,
    degree: usize,
    per_comp: usize,
    rng: &mut R,
) -> DeligneCochain {
    let mut c = DeligneCochain::zero(n, degree);
    for q in 1..=model.depth().min(degree) {
        for k in 0..=n.min(degree - q) {
            let p = degree - q - k;
            if p + 1 > MAX_TUPLE {
                continue;
            }
            let l = model.level(q);
            let cells = l.complex.cells_of_dim(k);
            if cells.is_empty() {
                continue;
            }
            let mut comp = Component::new();
            for _ in 0..per_comp {
                for _attempt in 0..50 {
                    let t: Vec<u8> = (0..=p).map(|_| rng.random_range(0..l.n_patches()) as u8).collect();
                    let cell = cells[rng.random_range(0..cells.len())];
                    if l.in_all(cell, mask_of(&t)) {
                        add_to(&mut comp, key(&t, cell), random_rational(rng));
                        break;
                    }
                }
            }
            c.set(q, p, k, comp);
        }
    }
    c
}

/// A random Δ-closed n-form on K_2, Δβ for a random n-form β on K_1.
pub fn random_delta_closed<R: Rng + ?Sized>(model: &SimplicialGroupModel, n: usize, density: f64, rng: &mut R) -> DiscreteForm {
    DiscreteForm::random(model, 1, n, density, rng).delta(model).expect("model has level 2")
}

/// Serialized cochain: rational values per (q, p, k, tuple, cell).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CochainFile {
    pub n: usize,
    pub degree: usize,
    pub entries: Vec<CochainEntry>,
    #[serde(default)]
    pub rho: Option<Vec<(u32, String)>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CochainEntry {
    pub q: usize,
    pub p: usize,
    pub k: usize,
    pub tuple: Vec<u8>,
    pub cell: u32,
    pub value: String,
}

impl CochainFile {
    pub fn from_cochain(c: &DeligneCochain) -> Self {
        let mut entries = Vec::new();
        for (&(q, p, k), x) in &c.comps {
            for (&key, v) in x {
                let (tuple, cell) = unkey(key, p + 1);
                entries.push(CochainEntry { q, p, k, tuple, cell, value: v.to_string() });
            }
        }
        let rho = c.rho.as_ref().map(|r| r.values.iter().map(|(&c, v)| (c, v.to_string())).collect());
        CochainFile { n: c.n, degree: c.degree, entries, rho }
    }

    pub fn to_cochain(&self) -> Result<DeligneCochain, DeligneError> {
        let parse = |s: &str| s.parse::<Q>().map_err(|e| DeligneError::Model(format!("rational {s:?}: {e}")));
        let mut c = DeligneCochain::zero(self.n, self.degree);
        for e in &self.entries {
            if e.tuple.len() != e.p + 1 || e.tuple.len() > MAX_TUPLE {
                return Err(DeligneError::Degree(format!("tuple {:?} for p = {}", e.tuple, e.p)));
            }
            let mut comp = c.comps.remove(&(e.q, e.p, e.k)).unwrap_or_default();
            add_to(&mut comp, key(&e.tuple, e.cell), parse(&e.value)?);
            c.set(e.q, e.p, e.k, comp);
        }
        if let Some(r) = &self.rho {
            let mut f = DiscreteForm::zero(2, self.n);
            for (cell, v) in r {
                f.add_value(*cell, parse(v)?);
            }
            c.rho = Some(f);
        }
        Ok(c)
    }
}
