use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::subspace::distance_unchecked;
use super::Subspace;
use crate::error::{ensure, Error, Result};
use crate::rng::{gaussian, seeded, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Net,
    Random,
    Explicit,
}

/// Finite Σ ⊂ Gr(d,n) with optional separation metadata.
#[derive(Clone, Debug)]
pub struct DirectionSet {
    pub n: usize,
    pub d: usize,
    pub elements: Vec<Subspace>,
    pub separation: Option<f64>,
    pub provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
struct DirectionSetJson {
    n: usize,
    d: usize,
    delta: Option<f64>,
    elements: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<Provenance>,
}

impl DirectionSet {
    pub fn new(n: usize, d: usize, elements: Vec<Subspace>, provenance: Provenance) -> Result<Self> {
        ensure!(
            elements.iter().all(|s| s.n() == n && s.d() == d),
            Shape,
            "elements must all lie in Gr({d},{n})"
        );
        Ok(DirectionSet { n, d, elements, separation: None, provenance })
    }

    /// Explicit list; (n, d) taken from the first element.
    pub fn from_elements(elements: Vec<Subspace>) -> Result<Self> {
        ensure!(!elements.is_empty(), Domain, "direction set is empty");
        let (n, d) = (elements[0].n(), elements[0].d());
        Self::new(n, d, elements, Provenance::Explicit)
    }

    /// `count` Haar-random subspaces.
    pub fn random(n: usize, d: usize, count: usize, seed: u64) -> Self {
        let mut rng = seeded(seed);
        let elements = (0..count).map(|_| Subspace::random(n, d, &mut rng)).collect();
        DirectionSet { n, d, elements, separation: None, provenance: Provenance::Random }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Smallest pairwise distance (∞ for fewer than two elements).
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                best = best.min(distance_unchecked(&self.elements[i], &self.elements[j]));
            }
        }
        best
    }

    /// Checks the recorded separation against all pairs.
    pub fn verify_separation(&self) -> Result<()> {
        if let Some(delta) = self.separation {
            let got = self.min_separation();
            ensure!(got >= delta - 1e-12, Domain, "set is not {delta}-separated (min distance {got})");
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let j = DirectionSetJson {
            n: self.n,
            d: self.d,
            delta: self.separation,
            elements: self.elements.iter().map(|s| s.to_column_major()).collect(),
            provenance: Some(self.provenance),
        };
        serde_json::to_string(&j).expect("direction set serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: DirectionSetJson = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        let mut elements = Vec::with_capacity(j.elements.len());
        for (k, e) in j.elements.into_iter().enumerate() {
            ensure!(e.len() == j.n * j.d, Format, "element {k} has {} entries, expected {}", e.len(), j.n * j.d);
            elements.push(Subspace::from_orthonormal(DMatrix::from_column_slice(j.n, j.d, &e))?);
        }
        let mut set = DirectionSet::new(j.n, j.d, elements, j.provenance.unwrap_or(Provenance::Explicit))?;
        set.separation = j.delta;
        Ok(set)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Default rejection budget: 200 × current cardinality.
pub fn default_stop_after(cardinality: usize) -> usize {
    200 * cardinality.max(1)
}

/// Greedy random δ-net in Gr(d,n).
///
/// Candidates are Haar-random; a candidate is kept when its distance to every
/// member is at least δ. Sampling stops after `stop_after` consecutive
/// rejections (`None` uses [`default_stop_after`] of the running cardinality).
pub fn greedy_net(d: usize, n: usize, delta: f64, seed: u64, stop_after: Option<usize>) -> Result<DirectionSet> {
    match stop_after {
        Some(k) => build_net(d, n, delta, seed, &|_| k),
        None => build_net(d, n, delta, seed, &default_stop_after),
    }
}

/// Greedy net whose rejection budget is `per_element` × current cardinality.
pub fn greedy_net_with_budget(d: usize, n: usize, delta: f64, seed: u64, per_element: usize) -> Result<DirectionSet> {
    build_net(d, n, delta, seed, &|c| per_element * c.max(1))
}

fn build_net(d: usize, n: usize, delta: f64, seed: u64, budget: &dyn Fn(usize) -> usize) -> Result<DirectionSet> {
    ensure!(d >= 1 && d < n, Domain, "need 1 ≤ d < n, got d={d}, n={n}");
    ensure!(delta > 0.0, Domain, "delta must be positive");
    let mut rng = seeded(seed);
    let first = Subspace::random(n, d, &mut rng);
    if delta >= 1.0 {
        let mut set = DirectionSet::new(n, d, vec![first], Provenance::Net)?;
        set.separation = Some(delta);
        return Ok(set);
    }
    if d == 1 || d + 1 == n {
        return keyed_net(d, n, delta, first, &mut rng, budget);
    }
    let mut index = NetIndex::new();
    index.insert(first);
    let mut rejections = 0usize;
    loop {
        let budget = budget(index.len());
        if rejections >= budget {
            break;
        }
        let cand = random_candidate(n, d, &mut rng);
        if index.is_far(&cand, delta) {
            index.insert(cand);
            rejections = 0;
        } else {
            rejections += 1;
        }
    }
    let mut set = DirectionSet::new(n, d, index.into_elements(), Provenance::Net)?;
    set.separation = Some(delta);
    Ok(set)
}

/// Lines and hyperplanes: both are determined by a unit key (the line or the
/// normal), Haar measure pushes forward to the uniform measure on S^{n-1}, and
/// d(σ,τ) = sqrt(1 − (u·w)²). Candidates are drawn as keys directly.
fn keyed_net(d: usize, n: usize, delta: f64, first: Subspace, rng: &mut Rng, budget: &dyn Fn(usize) -> usize) -> Result<DirectionSet> {
    let key_of_complement = d != 1;
    let first_key = if key_of_complement { first.complement().column(0) } else { first.column(0) };
    let r = (2.0 - 2.0 * (1.0 - delta * delta).max(0.0).sqrt()).sqrt();
    let mut grid = CellGrid::new(n, r.max(1e-6));
    let mut keys: Vec<f64> = Vec::new();
    // |u·w| > sqrt(1 − δ²) ⇔ d < δ.
    let cos_limit = (1.0 - delta * delta).max(0.0).sqrt();
    let push = |k: &[f64], keys: &mut Vec<f64>, grid: &mut Option<CellGrid>| {
        let id = (keys.len() / n) as u32;
        keys.extend_from_slice(k);
        if let Some(g) = grid.as_mut() {
            let neg: Vec<f64> = k.iter().map(|x| -x).collect();
            g.insert(k, id);
            g.insert(&neg, id);
        }
    };
    push(&first_key, &mut keys, &mut grid);
    let mut cand = vec![0.0; n];
    let mut rejections = 0usize;
    loop {
        let count = keys.len() / n;
        let budget = budget(count);
        if rejections >= budget {
            break;
        }
        loop {
            let mut r2 = 0.0;
            for c in cand.iter_mut() {
                *c = gaussian(rng);
                r2 += *c * *c;
            }
            if r2 > 1e-24 {
                let r = r2.sqrt();
                cand.iter_mut().for_each(|c| *c /= r);
                break;
            }
        }
        let near = |id: u32| {
            let w = &keys[id as usize * n..id as usize * n + n];
            let dot: f64 = w.iter().zip(&cand).map(|(a, b)| a * b).sum();
            dot.abs() > cos_limit
        };
        let mut far = true;
        match &grid {
            Some(g) => g.for_neighbors(&cand, |id| {
                if far && near(id) {
                    far = false;
                }
            }),
            None => far = !(0..count as u32).any(near),
        }
        if far {
            push(&cand.clone(), &mut keys, &mut grid);
            rejections = 0;
        } else {
            rejections += 1;
        }
    }
    let elements = keys
        .chunks(n)
        .map(|k| {
            let line = Subspace::line(k).expect("unit key");
            if key_of_complement { line.complement() } else { line }
        })
        .collect();
    let mut set = DirectionSet::new(n, d, elements, Provenance::Net)?;
    set.separation = Some(delta);
    Ok(set)
}

fn random_candidate(n: usize, d: usize, rng: &mut Rng) -> Subspace {
    Subspace::random(n, d, rng)
}

/// Linear-scan separation index for general (d, n).
///
/// Π_a − Π_b has rank ≤ 2d, so ‖·‖_op ≤ ‖·‖_F ≤ √(2d)‖·‖_op; the Frobenius
/// distance of stored projectors decides most pairs without an eigensolve.
struct NetIndex {
    elements: Vec<Subspace>,
    projectors: Vec<f64>,
}

impl NetIndex {
    fn new() -> Self {
        NetIndex { elements: Vec::new(), projectors: Vec::new() }
    }

    fn len(&self) -> usize {
        self.elements.len()
    }

    fn insert(&mut self, s: Subspace) {
        self.projectors.extend_from_slice(s.projector().as_slice());
        self.elements.push(s);
    }

    fn is_far(&self, cand: &Subspace, delta: f64) -> bool {
        let p = cand.projector();
        let p = p.as_slice();
        let k = p.len();
        let wide = 2.0 * cand.d() as f64 * delta * delta;
        self.elements.iter().enumerate().all(|(i, e)| {
            let q = &self.projectors[i * k..(i + 1) * k];
            let f2: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
            if f2 < delta * delta {
                false
            } else if f2 >= wide {
                true
            } else {
                distance_unchecked(e, cand) >= delta
            }
        })
    }

    fn into_elements(self) -> Vec<Subspace> {
        self.elements
    }
}

/// Uniform cell list over [-1,1]^n with cell side ≥ 2r.
struct CellGrid {
    n: usize,
    cells_per_axis: usize,
    side: f64,
    head: Vec<u32>,
    next: Vec<u32>,
    ids: Vec<u32>,
}

const NIL: u32 = u32::MAX;
const MAX_KEY_DIM: usize = 8;

impl CellGrid {
    fn new(n: usize, r: f64) -> Option<Self> {
        if n > MAX_KEY_DIM {
            return None;
        }
        let per = ((1.0 / r).floor() as usize).max(1);
        let total = per.checked_pow(n as u32)?;
        if total > 1 << 24 {
            return None;
        }
        Some(CellGrid {
            n,
            cells_per_axis: per,
            side: 2.0 / per as f64,
            head: vec![NIL; total],
            next: Vec::new(),
            ids: Vec::new(),
        })
    }

    fn cell_coord(&self, x: f64) -> usize {
        (((x + 1.0) / self.side).floor().max(0.0) as usize).min(self.cells_per_axis - 1)
    }

    fn insert(&mut self, key: &[f64], id: u32) {
        let mut c = 0;
        for &x in key {
            c = c * self.cells_per_axis + self.cell_coord(x);
        }
        let slot = self.ids.len() as u32;
        self.ids.push(id);
        self.next.push(self.head[c]);
        self.head[c] = slot;
    }

    /// Visits every id within distance r of `key`: with side ≥ 2r the ball
    /// meets at most two cells per axis, on the side of the nearer face.
    fn for_neighbors(&self, key: &[f64], mut f: impl FnMut(u32)) {
        let n = self.n;
        let mut base = [0usize; MAX_KEY_DIM];
        let mut step = [0isize; MAX_KEY_DIM];
        for k in 0..n {
            let pos = (key[k] + 1.0) / self.side;
            let c = self.cell_coord(key[k]);
            base[k] = c;
            step[k] = if pos - c as f64 >= 0.5 { 1 } else { -1 };
        }
        let per = self.cells_per_axis as isize;
        for corner in 0..(1usize << n) {
            let mut c = 0usize;
            let mut ok = true;
            for k in 0..n {
                let v = base[k] as isize + if corner >> k & 1 == 1 { step[k] } else { 0 };
                if v < 0 || v >= per {
                    ok = false;
                    break;
                }
                c = c * self.cells_per_axis + v as usize;
            }
            if ok {
                let mut slot = self.head[c];
                while slot != NIL {
                    f(self.ids[slot as usize]);
                    slot = self.next[slot as usize];
                }
            }
        }
    }
}

/// Covering of S^{n-1} with mesh ≤ `mesh`: radially projected grid on the
/// faces of [-1,1]^n (radial projection is 1-Lipschitz outside the ball).
pub fn sphere_net(n: usize, mesh: f64) -> Vec<Vec<f64>> {
    assert!(n >= 2 && mesh > 0.0);
    if n == 2 {
        let k = ((2.0 * std::f64::consts::PI / mesh).ceil() as usize).max(3);
        return (0..k)
            .map(|i| {
                let a = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
                vec![a.cos(), a.sin()]
            })
            .collect();
    }
    let g = 2.0 * mesh / ((n - 1) as f64).sqrt();
    let per = ((2.0 / g).ceil() as usize).max(1);
    let ticks: Vec<f64> = (0..=per).map(|i| -1.0 + 2.0 * i as f64 / per as f64).collect();
    let mut out = Vec::new();
    for axis in 0..n {
        for sign in [-1.0, 1.0] {
            let mut idx = vec![0usize; n - 1];
            loop {
                let mut p = Vec::with_capacity(n);
                let mut it = idx.iter();
                for k in 0..n {
                    p.push(if k == axis { sign } else { ticks[*it.next().unwrap()] });
                }
                let r = p.iter().map(|x| x * x).sum::<f64>().sqrt();
                out.push(p.into_iter().map(|x| x / r).collect());
                let mut k = 0;
                loop {
                    if k == n - 1 {
                        break;
                    }
                    idx[k] += 1;
                    if idx[k] <= per {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == n - 1 {
                    break;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::unit_vector;

    /// Largest δ-separated set of lines in R²: lines at angles kπ/M are
    /// δ-separated iff sin(π/M) ≥ δ, so M = ⌊π / asin δ⌋.
    fn max_packing_gr12(delta: f64) -> usize {
        (std::f64::consts::PI / delta.asin()).floor() as usize
    }

    fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
        let k = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / k;
        let my = ys.iter().sum::<f64>() / k;
        let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        sxy / sxx
    }

    #[test]
    fn large_delta_gives_a_singleton() {
        for (d, n) in [(1, 2), (2, 4)] {
            let set = greedy_net(d, n, 1.0, 3, None).unwrap();
            assert_eq!(set.len(), 1);
            assert_eq!(set.provenance, Provenance::Net);
        }
    }

    #[test]
    fn nets_are_separated() {
        for (d, n, delta) in [(1, 2, 0.05), (1, 3, 0.15), (2, 3, 0.2), (2, 4, 0.45), (2, 5, 0.7)] {
            let set = greedy_net(d, n, delta, 7, None).unwrap();
            assert_eq!(set.separation, Some(delta));
            set.verify_separation().unwrap();
            assert!(set.min_separation() >= delta - 1e-12);
        }
    }

    #[test]
    fn gr12_counts_track_the_packing_number() {
        let deltas = [0.125, 0.0625, 0.03125, 0.015625];
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &delta in &deltas {
            let set = greedy_net(1, 2, delta, 1, None).unwrap();
            let max = max_packing_gr12(delta);
            // A maximal separated set is a δ-cover, so it has at least half the packing number.
            assert!(set.len() <= max && 2 * set.len() >= max, "{} vs {max}", set.len());
            xs.push((1.0 / delta).ln());
            ys.push((set.len() as f64).ln());
        }
        let slope = log_slope(&xs, &ys);
        assert!((slope - 1.0).abs() < 0.15, "{slope}");
    }

    #[test]
    fn nets_are_nearly_maximal() {
        let delta = 0.1;
        let set = greedy_net(1, 3, delta, 2, None).unwrap();
        let mut rng = seeded(99);
        let far = (0..2000)
            .filter(|_| {
                let c = Subspace::line(&unit_vector(&mut rng, 3)).unwrap();
                set.elements.iter().all(|s| distance_unchecked(s, &c) >= delta)
            })
            .count();
        assert!(far <= 20, "{far} of 2000 fresh candidates are uncovered");
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let mut set = greedy_net(2, 4, 0.4, 5, None).unwrap();
        set.separation = Some(0.4);
        let back = DirectionSet::from_json(&set.to_json()).unwrap();
        assert_eq!(back.separation, set.separation);
        assert_eq!(back.provenance, Provenance::Net);
        for (a, b) in set.elements.iter().zip(&back.elements) {
            assert!(a.to_column_major().iter().zip(b.to_column_major()).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
        assert_eq!(back.to_json(), set.to_json());
    }

    #[test]
    fn malformed_json_is_rejected() {
        assert!(DirectionSet::from_json(r#"{"n":3,"d":1,"delta":null,"elements":[[1.0,0.0]]}"#).is_err());
        assert!(DirectionSet::from_json(r#"{"n":2,"d":1,"delta":null,"elements":[[2.0,0.0]]}"#).is_err());
        let ok = DirectionSet::from_json(r#"{"n":2,"d":1,"delta":null,"elements":[[0.6,0.8]]}"#).unwrap();
        assert_eq!(ok.provenance, Provenance::Explicit);
    }

    #[test]
    fn sphere_net_covers_the_sphere() {
        let mut rng = seeded(3);
        for (n, mesh) in [(2, 0.1), (3, 0.2), (4, 0.4)] {
            let pts = sphere_net(n, mesh);
            for _ in 0..500 {
                let x = unit_vector(&mut rng, n);
                let best = pts
                    .iter()
                    .map(|p| p.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
                    .fold(f64::INFINITY, f64::min);
                assert!(best <= mesh, "n={n}: {best}");
            }
        }
    }

    #[test]
    fn random_sets_are_reproducible() {
        let a = DirectionSet::random(4, 2, 5, 8);
        let b = DirectionSet::random(4, 2, 5, 8);
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.provenance, Provenance::Random);
    }
}
