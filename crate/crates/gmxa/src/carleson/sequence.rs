use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::geometry::for_each_node;
use super::lattice::PlateLattice;
use crate::error::{ensure, Error, Result};
use crate::gridops::GridFunction;
use crate::plates::ShearedPlate;
use crate::rng::seeded;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceEntry {
    pub id: String,
    pub plate: ShearedPlate,
    pub a: f64,
}

/// Finite plate-indexed sequence a_Q ≥ 0.
#[derive(Clone, Debug, PartialEq)]
pub struct CarlesonSequence {
    pub n: usize,
    pub entries: Vec<SequenceEntry>,
}

#[derive(Serialize, Deserialize)]
struct SequenceJson {
    n: usize,
    a: BTreeMap<String, f64>,
    plates: BTreeMap<String, ShearedPlate>,
}

impl CarlesonSequence {
    pub fn new(n: usize, entries: Vec<SequenceEntry>) -> Result<Self> {
        let mut seen = HashSet::new();
        for e in &entries {
            ensure!(e.plate.n() == n, Shape, "plate {} lives in R^{}, expected R^{n}", e.id, e.plate.n());
            ensure!(e.a >= 0.0 && e.a.is_finite(), Domain, "a_Q must be finite and nonnegative (plate {})", e.id);
            ensure!(seen.insert(e.id.clone()), Domain, "duplicate plate id {}", e.id);
        }
        Ok(CarlesonSequence { n, entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// mass_a = Σ a_Q.
    pub fn mass(&self) -> f64 {
        self.entries.iter().map(|e| e.a).sum()
    }

    /// Distinct orientations, in order of first appearance.
    pub fn directions(&self) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        for e in &self.entries {
            if !out.iter().any(|v| *v == e.plate.v) {
                out.push(e.plate.v.clone());
            }
        }
        out
    }

    /// Entries with a_Q > 0 satisfying `keep`.
    pub fn restrict(&self, keep: impl Fn(&SequenceEntry) -> bool) -> CarlesonSequence {
        CarlesonSequence { n: self.n, entries: self.entries.iter().filter(|e| e.a > 0.0 && keep(e)).cloned().collect() }
    }

    /// Entrywise sum over the union of plates.
    pub fn add(&self, other: &CarlesonSequence) -> Result<CarlesonSequence> {
        ensure!(self.n == other.n, Shape, "sequences live in different dimensions");
        let mut out = self.entries.clone();
        for e in &other.entries {
            match out.iter_mut().find(|x| x.id == e.id) {
                Some(x) => {
                    ensure!(x.plate == e.plate, Domain, "plate id {} names different plates", e.id);
                    x.a += e.a;
                }
                None => out.push(e.clone()),
            }
        }
        CarlesonSequence::new(self.n, out)
    }

    pub fn to_json(&self) -> String {
        let j = SequenceJson {
            n: self.n,
            a: self.entries.iter().map(|e| (e.id.clone(), e.a)).collect(),
            plates: self.entries.iter().map(|e| (e.id.clone(), e.plate.clone())).collect(),
        };
        serde_json::to_string_pretty(&j).expect("sequence serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: SequenceJson = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        ensure!(j.a.len() == j.plates.len(), Format, "{} weights for {} plates", j.a.len(), j.plates.len());
        let mut entries = Vec::with_capacity(j.a.len());
        for (id, a) in j.a {
            let plate = j.plates.get(&id).ok_or_else(|| Error::Format(format!("no geometry for plate {id}")))?.clone();
            let plate = ShearedPlate::with_frame(plate.c_i, plate.side, plate.frame, plate.k, plate.v)?;
            entries.push(SequenceEntry { id, plate, a });
        }
        CarlesonSequence::new(j.n, entries)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// a_Q = |F_Q ∩ E| for regions F_Q given as sets of grid nodes (each node
/// standing for its cell of volume h^n).
///
/// Every node of F_Q must lie in Q and no node may belong to two regions.
pub fn adjoint_sequence(
    plates: &[(String, ShearedPlate)],
    regions: &[Vec<usize>],
    grid: &GridFunction,
    e: impl Fn(&[f64]) -> bool,
) -> Result<CarlesonSequence> {
    ensure!(plates.len() == regions.len(), Shape, "{} plates but {} regions", plates.len(), regions.len());
    ensure!(!plates.is_empty(), Domain, "no plates");
    let n = grid.n();
    let mut owner: Vec<u32> = vec![u32::MAX; grid.len()];
    let cell = grid.cell_volume();
    let mut entries = Vec::with_capacity(plates.len());
    let mut x = vec![0.0; n];
    for (q, ((id, plate), region)) in plates.iter().zip(regions).enumerate() {
        ensure!(plate.n() == n, Shape, "plate {id} lives in R^{}, grid in R^{n}", plate.n());
        let mut a = 0.0;
        for &node in region {
            ensure!(node < grid.len(), Shape, "node {node} is outside the grid");
            if owner[node] != u32::MAX {
                let other = &plates[owner[node] as usize].0;
                return Err(Error::Domain(format!("regions of {other} and {id} overlap at node {node}")));
            }
            owner[node] = q as u32;
            grid.point_into(node, &mut x);
            ensure!(plate.contains(&x), Domain, "region of {id} leaves its plate at node {node}");
            if e(&x) {
                a += cell;
            }
        }
        entries.push(SequenceEntry { id: id.clone(), plate: plate.clone(), a });
    }
    CarlesonSequence::new(n, entries)
}

/// Linearized selection: every grid node covered by some plate is given to
/// one of the plates containing it, uniformly at random (reservoir sampling).
pub fn random_selection(plates: &[ShearedPlate], grid: &GridFunction, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = seeded(seed);
    let mut seen: Vec<u32> = vec![0; grid.len()];
    let mut owner: Vec<u32> = vec![u32::MAX; grid.len()];
    for (q, p) in plates.iter().enumerate() {
        for_each_node(p, grid, |node| {
            seen[node] += 1;
            if rng.random_range(0..seen[node]) == 0 {
                owner[node] = q as u32;
            }
        });
    }
    let mut regions = vec![Vec::new(); plates.len()];
    for (node, &o) in owner.iter().enumerate() {
        if o != u32::MAX {
            regions[o as usize].push(node);
        }
    }
    regions
}

/// Adjoint sequence of a random linearization over `count` distinct random
/// lattice plates, with E the whole box.
pub fn random_lattice_sequence(lattice: &PlateLattice, count: usize, grid: &GridFunction, seed: u64) -> Result<CarlesonSequence> {
    ensure!(grid.n() == lattice.n(), Shape, "grid lives in R^{}, lattice in R^{}", grid.n(), lattice.n());
    ensure!(count as u64 <= lattice.count(), Domain, "asked for {count} plates from a lattice of {}", lattice.count());
    let mut rng = seeded(seed);
    let mut ids = std::collections::BTreeSet::new();
    while ids.len() < count {
        ids.insert(lattice.random_id(&mut rng));
    }
    let mut plates = Vec::with_capacity(count);
    for id in ids {
        let p = lattice.plate(&id)?;
        plates.push((id.to_string(), p));
    }
    let geometry: Vec<ShearedPlate> = plates.iter().map(|(_, p)| p.clone()).collect();
    let regions = random_selection(&geometry, grid, seed ^ 0x5eed);
    Ok(adjoint_sequence(&plates, &regions, grid, |_| true)?.restrict(|_| true))
}

/// T_Q(a) = Σ a_Q 1_Q/|Q| over the selected plates, sampled at the grid nodes.
pub fn balayage(seq: &CarlesonSequence, keep: impl Fn(&SequenceEntry) -> bool, shape: Vec<usize>, origin: Vec<f64>, h: f64) -> Result<GridFunction> {
    let mut g = GridFunction::zeros(shape, origin, h)?;
    ensure!(g.n() == seq.n, Shape, "grid lives in R^{}, sequence in R^{}", g.n(), seq.n);
    let selected: Vec<&SequenceEntry> = seq.entries.iter().filter(|e| keep(e)).collect();
    let thinnest = selected.iter().map(|e| e.plate.thickness()).fold(f64::INFINITY, f64::min);
    ensure!(selected.is_empty() || h <= thinnest / 4.0 * (1.0 + 1e-12), Domain, "spacing {h} does not resolve plates of thickness {thinnest} (need h ≤ δ/4)");
    let mut values = std::mem::take(&mut g.values);
    for e in selected {
        let w = e.a / e.plate.volume();
        for_each_node(&e.plate, &g, |node| values[node] += w);
    }
    g.values = values;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::carleson::lattice::{build_lattice, random_cap_directions};
    use crate::plates::MAX_TILT;

    fn flat(c: Vec<f64>, side: f64, k: (f64, f64)) -> ShearedPlate {
        let mut v = vec![0.0; c.len()];
        v.push(1.0);
        ShearedPlate::new(c, side, k, v).unwrap()
    }

    fn grid2(h: f64) -> GridFunction {
        let m = (1.0 / h) as usize;
        GridFunction::zeros(vec![m, m], vec![0.5 * h, 0.5 * h], h).unwrap()
    }

    #[test]
    fn empty_set_gives_zero_sequence() {
        let g = grid2(1.0 / 32.0);
        let p = flat(vec![0.5], 1.0, (0.0, 0.5));
        let regions = random_selection(std::slice::from_ref(&p), &g, 1);
        let seq = adjoint_sequence(&[("p".into(), p)], &regions, &g, |_| false).unwrap();
        assert_eq!(seq.mass(), 0.0);
    }

    #[test]
    fn partition_of_the_box_has_full_mass() {
        let h = 1.0 / 32.0;
        let g = grid2(h);
        let plates = vec![("lo".to_string(), flat(vec![0.5], 1.0, (0.0, 0.5))), ("hi".to_string(), flat(vec![0.5], 1.0, (0.5, 1.0)))];
        let geom: Vec<ShearedPlate> = plates.iter().map(|p| p.1.clone()).collect();
        let regions = random_selection(&geom, &g, 1);
        let seq = adjoint_sequence(&plates, &regions, &g, |_| true).unwrap();
        assert!((seq.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overlapping_regions_are_reported() {
        let g = grid2(0.25);
        let p = flat(vec![0.5], 1.0, (0.0, 1.0));
        let plates = vec![("a".to_string(), p.clone()), ("b".to_string(), p)];
        let err = adjoint_sequence(&plates, &[vec![0, 1], vec![1]], &g, |_| true).unwrap_err();
        assert!(err.to_string().contains("a and b"), "{err}");
        let outside = flat(vec![0.5], 1.0, (0.0, 0.2));
        assert!(adjoint_sequence(&[("c".into(), outside)], &[vec![15]], &g, |_| true).is_err());
    }

    #[test]
    fn json_round_trip() {
        let v = random_cap_directions(3, 2, MAX_TILT, 5).unwrap();
        let lat = build_lattice(v, 0.25, vec![0.0, 0.0], 1.0, (0.0, 1.0), 0.5, 2, 3).unwrap();
        let grid = GridFunction::zeros(vec![32; 3], vec![1.0 / 64.0; 3], 1.0 / 32.0).unwrap();
        let seq = random_lattice_sequence(&lat, 30, &grid, 5).unwrap();
        let back = CarlesonSequence::from_json(&seq.to_json()).unwrap();
        let mut a = seq.entries.clone();
        a.sort_by(|x, y| x.id.cmp(&y.id));
        assert_eq!(a, back.entries);
    }

    #[test]
    fn single_plate_balayage_is_its_indicator() {
        let p = flat(vec![0.5], 0.5, (0.25, 0.375));
        let seq = CarlesonSequence::new(2, vec![SequenceEntry { id: "p".into(), plate: p.clone(), a: p.volume() }]).unwrap();
        let h = 1.0 / 64.0;
        let t = balayage(&seq, |_| true, vec![65, 65], vec![0.0, 0.0], h).unwrap();
        for i in 0..t.len() {
            let x = t.point(i);
            assert_eq!(t.values[i], if p.contains(&x) { 1.0 } else { 0.0 });
        }
        assert!(balayage(&seq, |_| true, vec![9, 9], vec![0.0, 0.0], 0.125).is_err());
    }

    #[test]
    fn balayage_integral_and_linearity() {
        let v = random_cap_directions(3, 4, MAX_TILT, 6).unwrap();
        let lat = build_lattice(v, 0.25, vec![0.0, 0.0], 1.0, (0.0, 1.0), 0.5, 2, 3).unwrap();
        let sel = GridFunction::zeros(vec![32; 3], vec![1.0 / 64.0; 3], 1.0 / 32.0).unwrap();
        let seq = random_lattice_sequence(&lat, 60, &sel, 6).unwrap();
        let h = 1.0 / 128.0;
        let shape = vec![129; 3];
        let t = balayage(&seq, |_| true, shape.clone(), vec![0.0; 3], h).unwrap();
        assert!((t.integral() - seq.mass()).abs() <= 0.02 * seq.mass(), "{} vs {}", t.integral(), seq.mass());
        let half = |e: &SequenceEntry| e.id < seq.entries[30].id;
        let a = balayage(&seq, half, shape.clone(), vec![0.0; 3], h).unwrap();
        let b = balayage(&seq, |e| !half(e), shape, vec![0.0; 3], h).unwrap();
        for i in 0..t.len() {
            assert!((t.values[i] - a.values[i] - b.values[i]).abs() <= 1e-12 * t.values[i].abs().max(1.0));
        }
        assert!(t.values.iter().all(|&x| x >= 0.0));
    }
}
