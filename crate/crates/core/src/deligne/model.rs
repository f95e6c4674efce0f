use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::DeligneError;

/// A finite cell complex given by its incidence numbers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellComplex {
    pub dims: Vec<u8>,
    pub boundary: Vec<Vec<(u32, i64)>>,
    #[serde(skip)]
    coboundary: Vec<Vec<(u32, i64)>>,
    #[serde(skip)]
    by_dim: Vec<Vec<u32>>,
}

impl CellComplex {
    pub fn new(dims: Vec<u8>, boundary: Vec<Vec<(u32, i64)>>) -> Self {
        let mut c = CellComplex { dims, boundary, coboundary: Vec::new(), by_dim: Vec::new() };
        c.index();
        c
    }

    fn index(&mut self) {
        let n = self.dims.len();
        self.coboundary = vec![Vec::new(); n];
        for (s, b) in self.boundary.iter().enumerate() {
            for &(t, c) in b {
                self.coboundary[t as usize].push((s as u32, c));
            }
        }
        let top = self.dims.iter().copied().max().unwrap_or(0) as usize;
        self.by_dim = vec![Vec::new(); top + 1];
        for (c, &d) in self.dims.iter().enumerate() {
            self.by_dim[d as usize].push(c as u32);
        }
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn dim(&self, cell: u32) -> usize {
        self.dims[cell as usize] as usize
    }

    pub fn max_dim(&self) -> usize {
        self.by_dim.len().saturating_sub(1)
    }

    pub fn cells_of_dim(&self, k: usize) -> &[u32] {
        self.by_dim.get(k).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn boundary(&self, cell: u32) -> &[(u32, i64)] {
        &self.boundary[cell as usize]
    }

    pub fn coboundary(&self, cell: u32) -> &[(u32, i64)] {
        &self.coboundary[cell as usize]
    }
}

/// A chain map given on cells, with its transpose for pullbacks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainMap {
    pub image: Vec<Vec<(u32, i64)>>,
    #[serde(skip)]
    preimage: Vec<Vec<(u32, i64)>>,
}

impl ChainMap {
    pub fn new(image: Vec<Vec<(u32, i64)>>, target_len: usize) -> Self {
        let mut m = ChainMap { image, preimage: Vec::new() };
        m.index(target_len);
        m
    }

    fn index(&mut self, target_len: usize) {
        self.preimage = vec![Vec::new(); target_len];
        for (s, im) in self.image.iter().enumerate() {
            for &(t, c) in im {
                if (t as usize) < target_len {
                    self.preimage[t as usize].push((s as u32, c));
                }
            }
        }
    }

    pub fn image(&self, cell: u32) -> &[(u32, i64)] {
        &self.image[cell as usize]
    }

    /// Cells σ with f(σ) ∋ c·τ, as (σ, c).
    pub fn preimage(&self, cell: u32) -> &[(u32, i64)] {
        &self.preimage[cell as usize]
    }
}

/// One level K_q with its cover and its face maps to K_{q−1}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub complex: CellComplex,
    /// Cell lists of the patches U_i^q.
    pub patches: Vec<Vec<u32>>,
    /// (Δ_i)_# : chains(K_q) → chains(K_{q−1}), i = 0..=q; empty on level 1.
    pub faces: Vec<ChainMap>,
    /// Δ_i on patch indices.
    pub index_faces: Vec<Vec<u32>>,
    #[serde(skip)]
    membership: Vec<u128>,
    #[serde(skip)]
    index_preimages: Vec<Vec<Vec<u32>>>,
}

impl Level {
    pub fn n_patches(&self) -> usize {
        self.patches.len()
    }

    /// Bitmask of the patches containing a cell.
    pub fn mask(&self, cell: u32) -> u128 {
        self.membership[cell as usize]
    }

    /// Upper patch indices i with Δ_face(i) = lower.
    pub fn index_preimage(&self, face: usize, lower: u32) -> &[u32] {
        &self.index_preimages[face][lower as usize]
    }

    pub fn in_all(&self, cell: u32, tuple_mask: u128) -> bool {
        self.mask(cell) & tuple_mask == tuple_mask
    }

    /// Connected components of the vertices of ∩ U_i over the tuple mask.
    pub fn vertex_components(&self, tuple_mask: u128) -> BTreeMap<u32, u32> {
        let mut comp: BTreeMap<u32, u32> = BTreeMap::new();
        for &v in self.complex.cells_of_dim(0) {
            if !self.in_all(v, tuple_mask) || comp.contains_key(&v) {
                continue;
            }
            comp.insert(v, v);
            let mut queue = VecDeque::from([v]);
            while let Some(x) = queue.pop_front() {
                for &(e, _) in self.complex.coboundary(x) {
                    if !self.in_all(e, tuple_mask) {
                        continue;
                    }
                    for &(y, _) in self.complex.boundary(e) {
                        if !comp.contains_key(&y) {
                            comp.insert(y, v);
                            queue.push_back(y);
                        }
                    }
                }
            }
        }
        comp
    }
}

/// Cell complexes K_q for q = 1..=Q with covers and face chain maps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplicialGroupModel {
    pub name: String,
    pub levels: Vec<Level>,
}

impl SimplicialGroupModel {
    pub fn new(name: impl Into<String>, levels: Vec<Level>) -> Result<Self, DeligneError> {
        let mut m = SimplicialGroupModel { name: name.into(), levels };
        m.rebuild()?;
        Ok(m)
    }

    /// Recomputes the transposes and patch masks after construction or parsing.
    fn rebuild(&mut self) -> Result<(), DeligneError> {
        for q in 0..self.levels.len() {
            let below = if q > 0 { Some((self.levels[q - 1].complex.len(), self.levels[q - 1].patches.len())) } else { None };
            let l = &mut self.levels[q];
            l.complex.index();
            if l.patches.len() > 128 {
                return Err(DeligneError::Model(format!("level {}: at most 128 patches", q + 1)));
            }
            let n = l.complex.len();
            if l.complex.boundary.len() != n {
                return Err(DeligneError::Model(format!("level {}: boundary table length", q + 1)));
            }
            l.membership = vec![0; n];
            for (i, p) in l.patches.iter().enumerate() {
                for &c in p {
                    if c as usize >= n {
                        return Err(DeligneError::Model(format!("level {}: patch cell {c} out of range", q + 1)));
                    }
                    l.membership[c as usize] |= 1u128 << i;
                }
            }
            match below {
                None => {
                    if !l.faces.is_empty() || !l.index_faces.is_empty() {
                        return Err(DeligneError::Model("level 1 carries no face maps".into()));
                    }
                    l.index_preimages = Vec::new();
                }
                Some((lower_len, lower_patches)) => {
                    if l.faces.len() != q + 2 || l.index_faces.len() != q + 2 {
                        return Err(DeligneError::Model(format!("level {} needs {} face maps", q + 1, q + 2)));
                    }
                    for f in &mut l.faces {
                        if f.image.len() != n {
                            return Err(DeligneError::Model(format!("level {}: face map length", q + 1)));
                        }
                        f.index(lower_len);
                    }
                    l.index_preimages = Vec::with_capacity(q + 2);
                    for im in &l.index_faces {
                        if im.len() != l.patches.len() || im.iter().any(|&j| j as usize >= lower_patches) {
                            return Err(DeligneError::Model(format!("level {}: index face map", q + 1)));
                        }
                        let mut pre = vec![Vec::new(); lower_patches];
                        for (i, &j) in im.iter().enumerate() {
                            pre[j as usize].push(i as u32);
                        }
                        l.index_preimages.push(pre);
                    }
                }
            }
        }
        Ok(())
    }

    /// Number of levels Q.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Level q, 1-based.
    pub fn level(&self, q: usize) -> &Level {
        &self.levels[q - 1]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, DeligneError> {
        let mut m: SimplicialGroupModel = serde_json::from_str(s)?;
        m.rebuild()?;
        Ok(m)
    }

    /// The same complexes with the one-patch cover on every level.
    pub fn one_patch(&self) -> Self {
        let levels = self
            .levels
            .iter()
            .enumerate()
            .map(|(q, l)| Level {
                complex: l.complex.clone(),
                patches: vec![(0..l.complex.len() as u32).collect()],
                faces: l.faces.clone(),
                index_faces: if q == 0 { Vec::new() } else { vec![vec![0]; q + 2] },
                membership: Vec::new(),
                index_preimages: Vec::new(),
            })
            .collect();
        SimplicialGroupModel::new(format!("{} (one patch)", self.name), levels).expect("one-patch cover is well formed")
    }
}

/// A 1-dimensional complex with a cellular monoid structure: vertices
/// 0..V, then edges.
struct Factor {
    n_vertices: usize,
    edges: Vec<(usize, usize)>,
    mult: Vec<Vec<Option<(usize, i64)>>>,
}

impl Factor {
    fn n_cells(&self) -> usize {
        self.n_vertices + self.edges.len()
    }

    fn is_edge(&self, c: usize) -> bool {
        c >= self.n_vertices
    }

    /// The cyclic group Z_N on the N-gon.
    fn cyclic(n: usize) -> Factor {
        let edges = (0..n).map(|a| (a, (a + 1) % n)).collect();
        let mut mult = vec![vec![None; 2 * n]; 2 * n];
        for a in 0..n {
            for b in 0..n {
                let s = (a + b) % n;
                mult[a][b] = Some((s, 1));
                mult[a][n + b] = Some((n + s, 1));
                mult[n + a][b] = Some((n + s, 1));
            }
        }
        Factor { n_vertices: n, edges, mult }
    }

    /// The interval [0, 1] under multiplication.
    fn interval() -> Factor {
        let mut mult = vec![vec![None; 3]; 3];
        mult[0][0] = Some((0, 1));
        mult[0][1] = Some((0, 1));
        mult[1][0] = Some((0, 1));
        mult[1][1] = Some((1, 1));
        mult[1][2] = Some((2, 1));
        mult[2][1] = Some((2, 1));
        Factor { n_vertices: 2, edges: vec![(0, 1)], mult }
    }
}

/// K_q = X^q for X a product of 1-dimensional monoid factors, with cells of
/// dimension above `max_dims[q − 1]` dropped.
struct ProductTower<'a> {
    factors: &'a [Factor],
}

struct ProductLevel {
    complex: CellComplex,
    /// Slot cells of each compact cell.
    slots: Vec<Vec<u16>>,
    /// Full mixed-radix id → compact id.
    compact: Vec<u32>,
}

impl ProductTower<'_> {
    fn radix(&self, n_slots: usize) -> Vec<usize> {
        (0..n_slots).map(|j| self.factors[j % self.factors.len()].n_cells()).collect()
    }

    fn full_id(&self, slots: &[u16]) -> usize {
        let r = self.radix(slots.len());
        slots.iter().zip(&r).fold(0, |acc, (&s, &b)| acc * b + s as usize)
    }

    fn level(&self, q: usize, max_dim: usize) -> ProductLevel {
        let f = self.factors.len();
        let n_slots = q * f;
        let r = self.radix(n_slots);
        let total: usize = r.iter().product();
        let mut compact = vec![u32::MAX; total];
        let mut slots = Vec::new();
        let mut dims = Vec::new();
        let mut cur = vec![0u16; n_slots];
        for id in 0..total {
            let mut rem = id;
            for j in (0..n_slots).rev() {
                cur[j] = (rem % r[j]) as u16;
                rem /= r[j];
            }
            let d = (0..n_slots).filter(|&j| self.factors[j % f].is_edge(cur[j] as usize)).count();
            if d <= max_dim {
                compact[id] = slots.len() as u32;
                slots.push(cur.clone());
                dims.push(d as u8);
            }
        }
        let mut boundary = Vec::with_capacity(slots.len());
        for s in &slots {
            let mut b = Vec::new();
            let mut before = 0;
            for j in 0..n_slots {
                let fac = &self.factors[j % f];
                if !fac.is_edge(s[j] as usize) {
                    continue;
                }
                let (a, z) = fac.edges[s[j] as usize - fac.n_vertices];
                let sign = if before % 2 == 0 { 1 } else { -1 };
                let mut t = s.clone();
                t[j] = z as u16;
                b.push((compact[self.full_id(&t)], sign));
                t[j] = a as u16;
                b.push((compact[self.full_id(&t)], -sign));
                before += 1;
            }
            boundary.push(b);
        }
        ProductLevel { complex: CellComplex::new(dims, boundary), slots, compact }
    }

    /// (Δ_i)_# from level q to the level below.
    fn face(&self, i: usize, q: usize, upper: &ProductLevel, lower: &ProductLevel) -> ChainMap {
        let f = self.factors.len();
        let edge = |j: usize, c: u16| self.factors[j % f].is_edge(c as usize);
        let image = upper
            .slots
            .iter()
            .map(|s| {
                let target: Option<(Vec<u16>, i64)> = if i == 0 || i == q {
                    let g = if i == 0 { 0 } else { q - 1 };
                    if (g * f..(g + 1) * f).any(|j| edge(j, s[j])) {
                        None
                    } else {
                        let mut t = s[..g * f].to_vec();
                        t.extend_from_slice(&s[(g + 1) * f..]);
                        Some((t, 1))
                    }
                } else {
                    let (a, b) = ((i - 1) * f, i * f);
                    // interleave (s_1..s_f, t_1..t_f) into (s_1 t_1 .. s_f t_f)
                    let mut sign = 1i64;
                    for j in 0..f {
                        for l in (j + 1)..f {
                            if edge(b + j, s[b + j]) && edge(a + l, s[a + l]) {
                                sign = -sign;
                            }
                        }
                    }
                    let mut merged = Vec::with_capacity(f);
                    let mut ok = true;
                    for j in 0..f {
                        match self.factors[j].mult[s[a + j] as usize][s[b + j] as usize] {
                            Some((c, sg)) => {
                                merged.push(c as u16);
                                sign *= sg;
                            }
                            None => {
                                ok = false;
                                break;
                            }
                        }
                    }
                    ok.then(|| {
                        let mut t = s[..a].to_vec();
                        t.extend(merged);
                        t.extend_from_slice(&s[b + f..]);
                        (t, sign)
                    })
                };
                match target {
                    Some((t, sign)) => {
                        let c = lower.compact[self.full_id(&t)];
                        debug_assert!(c != u32::MAX);
                        vec![(c, sign)]
                    }
                    None => Vec::new(),
                }
            })
            .collect();
        ChainMap::new(image, lower.complex.len())
    }
}

/// Patch indices in Z_3^q as base-3 digits, group g at 3^g.
fn digits(mut a: usize, q: usize) -> Vec<usize> {
    (0..q)
        .map(|_| {
            let d = a % 3;
            a /= 3;
            d
        })
        .collect()
}

fn undigits(d: &[usize]) -> u32 {
    d.iter().rev().fold(0, |acc, &x| acc * 3 + x as u32)
}

/// Bar-construction face maps on Z_3^q.
fn z3_index_faces(q: usize) -> Vec<Vec<u32>> {
    let n = 3usize.pow(q as u32);
    (0..=q)
        .map(|i| {
            (0..n)
                .map(|a| {
                    let d = digits(a, q);
                    let mut e = Vec::with_capacity(q - 1);
                    for g in 0..q {
                        if (i == 0 && g == 0) || (i == q && g == q - 1) {
                            continue;
                        }
                        if i > 0 && i < q && g == i {
                            continue;
                        }
                        if i > 0 && i < q && g == i - 1 {
                            e.push((d[g] + d[g + 1]) % 3);
                        } else {
                            e.push(d[g]);
                        }
                    }
                    undigits(&e)
                })
                .collect()
        })
        .collect()
}

/// Default arc radius of the circle model, in steps of Z_N.
pub const CIRCLE_RADIUS: usize = 4;
/// Default per-level cell dimension caps of the circle model.
pub const CIRCLE_MAX_DIMS: [usize; 4] = [1, 2, 2, 1];

/// The cyclic group Z_N on the N-gon, N divisible by 3.
///
/// Patch A ∈ Z_3^q of level q holds the cells all of whose vertices x satisfy
/// |x_i + … + x_j − (N/3)(A_i + … + A_j)| ≤ radius on the circle for every
/// block i ≤ j. Blocks are preserved by the face maps, which gives the cover
/// compatibility; coverage and acyclicity are left to `validate_model`.
pub fn circle_model_with(n_points: usize, radius: usize, max_dims: &[usize]) -> Result<SimplicialGroupModel, DeligneError> {
    if n_points % 3 != 0 || n_points == 0 {
        return Err(DeligneError::Model("N must be a positive multiple of 3".into()));
    }
    if max_dims.is_empty() {
        return Err(DeligneError::Model("at least one level".into()));
    }
    let factors = [Factor::cyclic(n_points)];
    let tower = ProductTower { factors: &factors };
    let step = n_points / 3;
    // signed offset in (−N/2, N/2]
    let offset = |x: usize| {
        let x = (x % n_points) as i64;
        if 2 * x > n_points as i64 {
            x - n_points as i64
        } else {
            x
        }
    };
    let mut built: Vec<ProductLevel> = Vec::new();
    let mut levels = Vec::new();
    for (qi, &md) in max_dims.iter().enumerate() {
        let q = qi + 1;
        let pl = tower.level(q, md);
        let n_patch = 3usize.pow(q as u32);
        let mut vmask = vec![0u128; pl.complex.len()];
        for &v in pl.complex.cells_of_dim(0) {
            let x: Vec<usize> = pl.slots[v as usize].iter().map(|&s| s as usize).collect();
            for a in 0..n_patch {
                let d = digits(a, q);
                // offsets from the centers, lifted to Z; every block sum
                // stays within the radius
                let u: Vec<i64> = (0..q).map(|i| offset(x[i] + n_points - step * d[i])).collect();
                let ok = (0..q).all(|i| {
                    let mut s = 0i64;
                    (i..q).all(|j| {
                        s += u[j];
                        s.abs() <= radius as i64
                    })
                });
                if ok {
                    vmask[v as usize] |= 1u128 << a;
                }
            }
        }
        let mut patches = vec![Vec::new(); n_patch];
        for c in 0..pl.complex.len() as u32 {
            let m = corner_mask(&pl.complex, c, &vmask);
            for (a, p) in patches.iter_mut().enumerate() {
                if m >> a & 1 == 1 {
                    p.push(c);
                }
            }
        }
        let (faces, index_faces) = if q == 1 {
            (Vec::new(), Vec::new())
        } else {
            let lower = &built[qi - 1];
            ((0..=q).map(|i| tower.face(i, q, &pl, lower)).collect(), z3_index_faces(q))
        };
        levels.push(Level {
            complex: pl.complex.clone(),
            patches,
            faces,
            index_faces,
            membership: Vec::new(),
            index_preimages: Vec::new(),
        });
        built.push(pl);
    }
    SimplicialGroupModel::new(format!("circle Z_{n_points}, radius {radius}"), levels)
}

/// AND of the vertex masks over the corners of a cell.
fn corner_mask(c: &CellComplex, cell: u32, vmask: &[u128]) -> u128 {
    if c.dim(cell) == 0 {
        return vmask[cell as usize];
    }
    c.boundary(cell).iter().fold(u128::MAX, |m, &(f, _)| m & corner_mask(c, f, vmask))
}

/// The built-in circle model: Z_12, arcs of radius 4, levels 1..=4.
pub fn circle_model() -> SimplicialGroupModel {
    circle_model_with(12, CIRCLE_RADIUS, &CIRCLE_MAX_DIMS).expect("built-in model")
}

/// The band Z_3 × [0, 1] (a monoid under multiplication in both factors)
/// with the one-patch cover; level 1 carries 2-cells.
pub fn band_model(levels: usize) -> SimplicialGroupModel {
    let factors = [Factor::cyclic(3), Factor::interval()];
    let tower = ProductTower { factors: &factors };
    let mut built: Vec<ProductLevel> = Vec::new();
    let mut out = Vec::new();
    for q in 1..=levels {
        let pl = tower.level(q, usize::MAX);
        let (faces, index_faces) = if q == 1 {
            (Vec::new(), Vec::new())
        } else {
            ((0..=q).map(|i| tower.face(i, q, &pl, &built[q - 2])).collect(), vec![vec![0]; q + 1])
        };
        out.push(Level {
            complex: pl.complex.clone(),
            patches: vec![(0..pl.complex.len() as u32).collect()],
            faces,
            index_faces,
            membership: Vec::new(),
            index_preimages: Vec::new(),
        });
        built.push(pl);
    }
    SimplicialGroupModel::new("band Z_3 x [0,1]", out).expect("built-in model")
}

/// Violations found by `validate_model`, by invariant.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub boundary_squared: Vec<String>,
    pub chain_maps: Vec<String>,
    pub vertex_maps: Vec<String>,
    pub simplicial_identities: Vec<String>,
    pub subcomplexes: Vec<String>,
    pub compatibility: Vec<String>,
    pub coverage: Vec<String>,
    /// Patches that are not connected and acyclic below their top dimension.
    pub acyclicity: Vec<String>,
}

impl ModelReport {
    /// Every structural invariant holds.
    pub fn is_valid(&self) -> bool {
        self.boundary_squared.is_empty()
            && self.chain_maps.is_empty()
            && self.vertex_maps.is_empty()
            && self.simplicial_identities.is_empty()
            && self.subcomplexes.is_empty()
            && self.compatibility.is_empty()
            && self.coverage.is_empty()
    }

    /// Valid, with connected and acyclic patches.
    pub fn is_good_cover(&self) -> bool {
        self.is_valid() && self.acyclicity.is_empty()
    }
}

const MAX_MESSAGES: usize = 20;

fn note(list: &mut Vec<String>, msg: impl FnOnce() -> String) {
    if list.len() < MAX_MESSAGES {
        list.push(msg());
    }
}

type Chain = BTreeMap<u32, i64>;

fn add_into(out: &mut Chain, terms: &[(u32, i64)], scale: i64) {
    for &(c, v) in terms {
        *out.entry(c).or_insert(0) += scale * v;
    }
    out.retain(|_, v| *v != 0);
}

fn apply_map(m: &ChainMap, chain: &Chain) -> Chain {
    let mut out = Chain::new();
    for (&c, &v) in chain {
        add_into(&mut out, m.image(c), v);
    }
    out
}

fn boundary_chain(k: &CellComplex, chain: &Chain) -> Chain {
    let mut out = Chain::new();
    for (&c, &v) in chain {
        add_into(&mut out, k.boundary(c), v);
    }
    out
}

/// Checks every invariant exactly. Acyclicity is tested on levels up to
/// `acyclicity_levels` by ranks over F_p, p = 2³¹ − 1 (acyclic over F_p
/// implies acyclic over Q).
pub fn validate_model(model: &SimplicialGroupModel, acyclicity_levels: usize) -> ModelReport {
    let mut r = ModelReport::default();
    for q in 1..=model.depth() {
        let l = model.level(q);
        let k = &l.complex;
        for c in 0..k.len() as u32 {
            let b = boundary_chain(k, &k.boundary(c).iter().copied().collect());
            if !b.is_empty() {
                note(&mut r.boundary_squared, || format!("level {q}, cell {c}: ∂∂ ≠ 0"));
            }
            for &(f, _) in k.boundary(c) {
                if l.mask(f) & l.mask(c) != l.mask(c) {
                    note(&mut r.subcomplexes, || format!("level {q}: face {f} of cell {c} leaves a patch"));
                }
            }
            if l.mask(c) == 0 {
                note(&mut r.coverage, || format!("level {q}: cell {c} in no patch"));
            }
        }
        if q == 1 {
            continue;
        }
        let lower = model.level(q - 1);
        for (i, f) in l.faces.iter().enumerate() {
            for c in 0..k.len() as u32 {
                let lhs = boundary_chain(&lower.complex, &f.image(c).iter().copied().collect());
                let rhs = apply_map(f, &k.boundary(c).iter().copied().collect());
                if lhs != rhs {
                    note(&mut r.chain_maps, || format!("level {q}, face {i}, cell {c}: ∂Δ ≠ Δ∂"));
                }
                if k.dim(c) == 0 {
                    let im = f.image(c);
                    if im.len() != 1 || im[0].1 != 1 || lower.complex.dim(im[0].0) != 0 {
                        note(&mut r.vertex_maps, || format!("level {q}, face {i}: vertex {c} is not sent to one vertex"));
                    }
                }
                let target = l.index_faces[i].iter().enumerate();
                for (a, &b) in target {
                    if l.mask(c) >> a & 1 == 1 {
                        for &(t, _) in f.image(c) {
                            if lower.mask(t) >> b & 1 == 0 {
                                note(&mut r.compatibility, || {
                                    format!("level {q}, face {i}: cell {c} of U_{a} lands outside U_{b}")
                                });
                            }
                        }
                    }
                }
            }
        }
        if q >= 3 {
            for i in 0..=q {
                for j in (i + 1)..=q {
                    // Δ_i Δ_j = Δ_{j−1} Δ_i for i < j
                    for c in 0..k.len() as u32 {
                        let single: Chain = [(c, 1)].into_iter().collect();
                        let a = apply_map(&lower.faces[i], &apply_map(&l.faces[j], &single));
                        let b = apply_map(&lower.faces[j - 1], &apply_map(&l.faces[i], &single));
                        if a != b {
                            note(&mut r.simplicial_identities, || format!("level {q}: Δ_{i}Δ_{j} ≠ Δ_{}Δ_{i} on cell {c}", j - 1));
                        }
                    }
                    for a in 0..l.n_patches() {
                        let x = lower.index_faces[i][l.index_faces[j][a] as usize];
                        let y = lower.index_faces[j - 1][l.index_faces[i][a] as usize];
                        if x != y {
                            note(&mut r.simplicial_identities, || format!("level {q}: index identity fails at patch {a}"));
                        }
                    }
                }
            }
        }
    }
    for q in 1..=model.depth().min(acyclicity_levels) {
        let l = model.level(q);
        for a in 0..l.n_patches() {
            if let Some(msg) = patch_acyclicity(l, a) {
                note(&mut r.acyclicity, || format!("level {q}, patch {a}: {msg}"));
            }
        }
    }
    r
}

const PRIME: i64 = 2_147_483_647;

fn inv_mod(a: i64) -> i64 {
    let (mut base, mut e, mut acc) = (a.rem_euclid(PRIME), PRIME - 2, 1i64);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % PRIME;
        }
        base = base * base % PRIME;
        e >>= 1;
    }
    acc
}

/// Rank over F_p of the boundary map from k-cells of the patch.
fn boundary_rank(l: &Level, patch: usize, k: usize) -> usize {
    let bit = 1u128 << patch;
    let mut pivots: BTreeMap<u32, BTreeMap<u32, i64>> = BTreeMap::new();
    for &c in l.complex.cells_of_dim(k) {
        if l.mask(c) & bit == 0 {
            continue;
        }
        let mut col: BTreeMap<u32, i64> = l.complex.boundary(c).iter().map(|&(f, v)| (f, v.rem_euclid(PRIME))).collect();
        col.retain(|_, v| *v != 0);
        while let Some((&low, &lv)) = col.iter().next_back() {
            match pivots.get(&low) {
                Some(p) => {
                    let factor = lv * inv_mod(p[&low]) % PRIME;
                    for (&row, &pv) in p {
                        let e = col.entry(row).or_insert(0);
                        *e = (*e - factor * pv % PRIME).rem_euclid(PRIME);
                    }
                    col.retain(|_, v| *v != 0);
                }
                None => {
                    pivots.insert(low, col);
                    break;
                }
            }
        }
    }
    pivots.len()
}

fn patch_acyclicity(l: &Level, patch: usize) -> Option<String> {
    let bit = 1u128 << patch;
    let top = l.complex.max_dim();
    let count = |k: usize| l.complex.cells_of_dim(k).iter().filter(|&&c| l.mask(c) & bit != 0).count();
    if count(0) == 0 {
        return Some("empty".into());
    }
    let comps: BTreeSet<u32> = l.vertex_components(bit).values().copied().collect();
    if comps.len() != 1 {
        return Some(format!("{} components", comps.len()));
    }
    let ranks: Vec<usize> = (0..=top).map(|k| if k == 0 { 0 } else { boundary_rank(l, patch, k) }).collect();
    for k in 1..top {
        let betti = count(k) - ranks[k] - ranks[k + 1];
        if betti != 0 {
            return Some(format!("b_{k} = {betti}"));
        }
    }
    None
}
