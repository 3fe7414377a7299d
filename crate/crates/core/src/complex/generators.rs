//! Built-in model meshes: disk, annulus, flat cylinder, two-volume junction
//! and a genus-1 surface with one boundary circle. All models carry product
//! collars so cylinders can be attached for the q(a) study.

use std::collections::HashMap;
use std::f64::consts::PI;

use super::cylinder::{attach_layers, orient_consistently};
use super::{CellComplex, CollarInfo, ComplexData, CylinderSpec};
use crate::error::{Error, Result};
use crate::sparse::{cg, CgConfig, Csr};

/// Requested geometry for [`generate_model`].
#[derive(Debug, Clone)]
pub enum ModelSpec {
    /// Flat disk of incircle radius `radius` (circumscribed polygon core).
    Disk { radius: f64 },
    /// Flat annulus between two radii.
    Annulus { r_inner: f64, r_outer: f64 },
    /// Flat cylinder [0, length] × S¹ of the given circumference.
    FlatCylinder { length: f64, circumference: f64 },
    /// Two cylinder segments of mismatched circumference joined by a
    /// calibrated transition layer. `volumes` are the segment volumes, which
    /// for unit segment lengths equal the circumferences.
    Junction { lengths: (f64, f64), volumes: (f64, f64), tilt: f64 },
    /// Square-grid torus with one vertex star removed (genus 1, one hole).
    Genus1OneHole,
}

/// Volumes reported by a generator: requested ideal vs discrete mesh value.
#[derive(Debug, Clone)]
pub struct VolumeReport {
    pub name: String,
    pub nominal: f64,
    pub discrete: f64,
}

#[derive(Debug, Clone)]
pub struct ModelReport {
    pub kind: String,
    pub volume: VolumeReport,
    pub boundary: Vec<VolumeReport>,
    pub euler_characteristic: i64,
    /// Largest calibration residual for models that solve for their metric.
    pub calibration_residual: Option<f64>,
}

/// Build one of the reference models at the given resolution (circumference
/// subdivisions; ≥ 4).
pub fn generate_model(spec: &ModelSpec, resolution: usize) -> Result<(CellComplex, ModelReport)> {
    if resolution < 4 {
        return Err(Error::Parameter("resolution must be at least 4".into()));
    }
    match spec {
        ModelSpec::Disk { radius } => disk(*radius, resolution),
        ModelSpec::Annulus { r_inner, r_outer } => annulus(*r_inner, *r_outer, resolution),
        ModelSpec::FlatCylinder { length, circumference } => {
            flat_cylinder(*length, *circumference, resolution)
        }
        ModelSpec::Junction { lengths, volumes, tilt } => {
            junction(*lengths, *volumes, *tilt, resolution)
        }
        ModelSpec::Genus1OneHole => genus1_one_hole(resolution),
    }
}

fn ring_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).map(move |i| (i, (i + 1) % n))
}

/// Flat cylinder [0, L] × S¹: exact product metric, collar at both ends.
fn flat_cylinder(length: f64, circumference: f64, res: usize) -> Result<(CellComplex, ModelReport)> {
    if !(length > 0.0) || !(circumference > 0.0) {
        return Err(Error::Parameter("cylinder length and circumference must be positive".into()));
    }
    let n = res;
    let ell = circumference / n as f64;
    let layers = ((length / ell).round() as usize).max(4);
    let delta = length / layers as f64;
    let vid = |ring: usize, i: usize| ring * n + i;

    let mut edge_lengths = HashMap::new();
    let mut top_cells = Vec::new();
    for ring in 0..=layers {
        for (i, j) in ring_pairs(n) {
            let (a, b) = (vid(ring, i), vid(ring, j));
            edge_lengths.insert((a.min(b), a.max(b)), ell);
        }
    }
    let diag = (ell * ell + delta * delta).sqrt();
    for ring in 0..layers {
        for i in 0..n {
            let (a, b) = (vid(ring, i), vid(ring + 1, i));
            edge_lengths.insert((a.min(b), a.max(b)), delta);
        }
        for (i, j) in ring_pairs(n) {
            // staircase split keyed by bottom vertex order
            let (b0, b1) = (vid(ring, i.min(j)), vid(ring, i.max(j)));
            let (t0, t1) = (vid(ring + 1, i.min(j)), vid(ring + 1, i.max(j)));
            edge_lengths.insert((b0.min(t1), b0.max(t1)), diag);
            top_cells.push(vec![b0, t0, t1]);
            top_cells.push(vec![b0, b1, t1]);
        }
    }
    let fixed = vec![false; top_cells.len()];
    let oriented = orient_consistently(2, &top_cells, &fixed)?;

    let ring_vec = |r: usize| (0..n).map(|i| vid(r, i)).collect::<Vec<_>>();
    let components = vec![
        ("Y1".to_string(), vec![ring_vec(0), ring_vec(1), ring_vec(2)]),
        (
            "Y2".to_string(),
            vec![ring_vec(layers), ring_vec(layers - 1), ring_vec(layers - 2)],
        ),
    ];
    let complex = CellComplex::new(ComplexData {
        dim: 2,
        vertex_count: (layers + 1) * n,
        top_cells: oriented,
        edge_lengths,
        vertex_coords: None,
        components,
        collar: Some(CollarInfo { layers: 2, thickness: delta }),
    })?;
    let report = ModelReport {
        kind: "flat_cylinder".into(),
        volume: VolumeReport {
            name: "M".into(),
            nominal: length * circumference,
            discrete: complex.volume(),
        },
        boundary: (0..2)
            .map(|c| VolumeReport {
                name: format!("Y{}", c + 1),
                nominal: circumference,
                discrete: complex.boundary_component_volume(c),
            })
            .collect(),
        euler_characteristic: complex.euler_characteristic(),
        calibration_residual: None,
    };
    Ok((complex, report))
}

/// Disk with incircle radius r: polygon fan (vertices on the circumscribed
/// circle) plus two abstract product collar layers.
fn disk(radius: f64, res: usize) -> Result<(CellComplex, ModelReport)> {
    if !(radius > 0.0) {
        return Err(Error::Parameter("disk radius must be positive".into()));
    }
    let n = res;
    let spoke = radius / (PI / n as f64).cos();
    let ring_edge = 2.0 * radius * (PI / n as f64).tan();
    let mut edge_lengths = HashMap::new();
    let mut top_cells = Vec::new();
    // vertex 0 = center, 1..=n ring
    for (i, j) in ring_pairs(n) {
        let (a, b) = (1 + i, 1 + j);
        edge_lengths.insert((a.min(b), a.max(b)), ring_edge);
        edge_lengths.insert((0, a), spoke);
        top_cells.push(vec![0, a, b]);
    }
    let fixed = vec![false; top_cells.len()];
    let oriented = orient_consistently(2, &top_cells, &fixed)?;
    let ring: Vec<usize> = (1..=n).collect();
    let core = CellComplex::new(ComplexData {
        dim: 2,
        vertex_count: n + 1,
        top_cells: oriented,
        edge_lengths,
        vertex_coords: None,
        components: vec![("Y1".to_string(), vec![ring])],
        collar: None,
    })?;
    // grow a 2-layer product collar; thickness scales like 1/res so the
    // model converges to the round disk under refinement
    let collar_thickness = radius / n as f64;
    let complex = attach_layers(
        &core,
        &CylinderSpec::new(2.0 * collar_thickness, 2),
        false,
    )?;
    let report = ModelReport {
        kind: "disk".into(),
        volume: VolumeReport {
            name: "M".into(),
            nominal: PI * radius * radius,
            discrete: complex.volume(),
        },
        boundary: vec![VolumeReport {
            name: "Y1".into(),
            nominal: 2.0 * PI * radius,
            discrete: complex.boundary_component_volume(0),
        }],
        euler_characteristic: complex.euler_characteristic(),
        calibration_residual: None,
    };
    Ok((complex, report))
}

/// Flat annulus between r_inner and r_outer, embedded polygon rings, with
/// abstract product collars at both boundary circles.
fn annulus(r_inner: f64, r_outer: f64, res: usize) -> Result<(CellComplex, ModelReport)> {
    if !(r_inner > 0.0) || !(r_outer > r_inner) {
        return Err(Error::Parameter("need 0 < r_inner < r_outer".into()));
    }
    let n = res;
    let chord = |r: f64| 2.0 * r * (PI / n as f64).sin();
    let radial_layers = (((r_outer - r_inner) / chord(r_inner)).round() as usize).max(3);
    let dr = (r_outer - r_inner) / radial_layers as f64;
    let radius = |k: usize| r_inner + dr * k as f64;
    let vid = |ring: usize, i: usize| ring * n + i;
    let gamma = 2.0 * PI / n as f64;

    let mut edge_lengths = HashMap::new();
    let mut top_cells = Vec::new();
    for k in 0..=radial_layers {
        for (i, j) in ring_pairs(n) {
            let (a, b) = (vid(k, i), vid(k, j));
            edge_lengths.insert((a.min(b), a.max(b)), chord(radius(k)));
        }
    }
    for k in 0..radial_layers {
        let (r0, r1) = (radius(k), radius(k + 1));
        let diag = (r0 * r0 + r1 * r1 - 2.0 * r0 * r1 * gamma.cos()).sqrt();
        for i in 0..n {
            let (a, b) = (vid(k, i), vid(k + 1, i));
            edge_lengths.insert((a.min(b), a.max(b)), dr);
        }
        for (i, j) in ring_pairs(n) {
            let (b0, b1) = (vid(k, i.min(j)), vid(k, i.max(j)));
            let (t0, t1) = (vid(k + 1, i.min(j)), vid(k + 1, i.max(j)));
            edge_lengths.insert((b0.min(t1), b0.max(t1)), diag);
            top_cells.push(vec![b0, t0, t1]);
            top_cells.push(vec![b0, b1, t1]);
        }
    }
    let fixed = vec![false; top_cells.len()];
    let oriented = orient_consistently(2, &top_cells, &fixed)?;
    let ring_vec = |r: usize| (0..n).map(|i| vid(r, i)).collect::<Vec<_>>();
    let core = CellComplex::new(ComplexData {
        dim: 2,
        vertex_count: (radial_layers + 1) * n,
        top_cells: oriented,
        edge_lengths,
        vertex_coords: None,
        components: vec![
            ("Y1".to_string(), vec![ring_vec(0)]),
            ("Y2".to_string(), vec![ring_vec(radial_layers)]),
        ],
        collar: None,
    })?;
    let complex = attach_layers(&core, &CylinderSpec::new(2.0 * dr, 2), false)?;
    let report = ModelReport {
        kind: "annulus".into(),
        volume: VolumeReport {
            name: "M".into(),
            nominal: PI * (r_outer * r_outer - r_inner * r_inner),
            discrete: complex.volume(),
        },
        boundary: vec![
            VolumeReport {
                name: "Y1".into(),
                nominal: 2.0 * PI * r_inner,
                discrete: complex.boundary_component_volume(0),
            },
            VolumeReport {
                name: "Y2".into(),
                nominal: 2.0 * PI * r_outer,
                discrete: complex.boundary_component_volume(1),
            },
        ],
        euler_characteristic: complex.euler_characteristic(),
        calibration_residual: None,
    };
    Ok((complex, report))
}

/// Square-grid flat torus with the star of one vertex removed; boundary is
/// the hexagonal link of that vertex, carrying a two-layer product collar.
fn genus1_one_hole(res: usize) -> Result<(CellComplex, ModelReport)> {
    let k = res.max(4);
    let h = 1.0 / k as f64;
    let vid = |i: usize, j: usize| (i % k) * k + (j % k);
    let removed = vid(0, 0);
    let mut edge_lengths = HashMap::new();
    let mut top_cells = Vec::new();
    let mut put_edge = |a: usize, b: usize, l: f64| {
        edge_lengths.insert((a.min(b), a.max(b)), l);
    };
    for i in 0..k {
        for j in 0..k {
            let v = vid(i, j);
            let r = vid(i + 1, j);
            let u = vid(i, j + 1);
            let d = vid(i + 1, j + 1);
            let t1 = [v, r, d];
            let t2 = [v, u, d];
            for t in [t1, t2] {
                if t.contains(&removed) {
                    continue;
                }
                top_cells.push(t.to_vec());
            }
            put_edge(v, r, h);
            put_edge(v, u, h);
            put_edge(v, d, h * 2f64.sqrt());
        }
    }
    // hexagonal link of the removed vertex, in cyclic order
    let hex = [
        vid(1, 0),
        vid(1, 1),
        vid(0, 1),
        vid(k - 1, 0),
        vid(k - 1, k - 1),
        vid(0, k - 1),
    ];
    let fixed = vec![false; top_cells.len()];
    let oriented = orient_consistently(2, &top_cells, &fixed)?;
    // compact vertex ids (drop the removed vertex)
    let mut remap = HashMap::new();
    let mut count = 0usize;
    for i in 0..k {
        for j in 0..k {
            let v = vid(i, j);
            if v != removed {
                remap.insert(v, count);
                count += 1;
            }
        }
    }
    let top_cells: Vec<Vec<usize>> =
        oriented.iter().map(|c| c.iter().map(|v| remap[v]).collect()).collect();
    let edge_lengths: HashMap<(usize, usize), f64> = edge_lengths
        .iter()
        .filter(|((a, b), _)| *a != removed && *b != removed)
        .map(|((a, b), l)| {
            let (x, y) = (remap[a], remap[b]);
            ((x.min(y), x.max(y)), *l)
        })
        .collect();
    let hex_ring: Vec<usize> = hex.iter().map(|v| remap[v]).collect();
    let core = CellComplex::new(ComplexData {
        dim: 2,
        vertex_count: count,
        top_cells,
        edge_lengths,
        vertex_coords: None,
        components: vec![("Y1".to_string(), vec![hex_ring])],
        collar: None,
    })?;
    let complex = attach_layers(&core, &CylinderSpec::new(2.0 * h, 2), false)?;
    let perimeter = (4.0 + 2.0 * 2f64.sqrt()) * h;
    let report = ModelReport {
        kind: "genus1_one_hole".into(),
        volume: VolumeReport { name: "M".into(), nominal: 1.0, discrete: complex.volume() },
        boundary: vec![VolumeReport {
            name: "Y1".into(),
            nominal: perimeter,
            discrete: complex.boundary_component_volume(0),
        }],
        euler_characteristic: complex.euler_characteristic(),
        calibration_residual: None,
    };
    Ok((complex, report))
}

/// Effective resistance of the vertex network between two boundary
/// components under the P1 Dirichlet energy (potential locally constant on
/// each of the two rings).
pub(crate) fn network_resistance(m: &CellComplex, comp_a: usize, comp_b: usize) -> Result<f64> {
    let nv = m.cell_count(0);
    let dim = m.dim();
    let mut trips = Vec::new();
    for t in 0..m.cell_count(dim) {
        let metric = m.simplex_metric(dim, t)?;
        let verts = &m.cells(dim)[t];
        for (li, &vi) in verts.iter().enumerate() {
            for (lj, &vj) in verts.iter().enumerate() {
                trips.push((vi, vj, metric.volume * metric.grad_gram[(li, lj)]));
            }
        }
    }
    let k = Csr::from_triplets(nv, nv, &trips);
    let b = m
        .boundary_structure()
        .ok_or_else(|| Error::Structure("network resistance needs a boundary".into()))?;
    let mut fixed = vec![false; nv];
    let mut u = vec![0.0; nv];
    for (comp, val) in [(comp_a, 0.0), (comp_b, 1.0)] {
        for &v in &b.components[comp].rings[0] {
            fixed[v] = true;
            u[v] = val;
        }
    }
    let free: Vec<bool> = fixed.iter().map(|&f| !f).collect();
    let k_ff = k.restrict(&free, &free);
    let k_fb = k.restrict(&free, &fixed);
    let ub: Vec<f64> = (0..nv).filter(|&v| fixed[v]).map(|v| u[v]).collect();
    let mut rhs = k_fb.apply(&ub);
    rhs.iter_mut().for_each(|v| *v = -*v);
    let x = cg(&k_ff, &rhs, &k_ff.diagonal(), &CgConfig::default())?;
    let mut xi = x.iter();
    for v in 0..nv {
        if !fixed[v] {
            u[v] = *xi.next().unwrap();
        }
    }
    let energy = crate::sparse::dot(&u, &k.apply(&u));
    if !(energy > 0.0) {
        return Err(Error::Numerical("degenerate network energy".into()));
    }
    Ok(1.0 / energy)
}

struct JunctionParams {
    l1: f64,
    l2: f64,
    c1: f64,
    c2: f64,
    tilt: f64,
    n: usize,
    k1: usize,
    k2: usize,
    delta_j: f64,
}

/// Build the junction mesh for given shaved lengths (da, db) and junction
/// thickness scale sigma.
fn build_junction(p: &JunctionParams, da: f64, db: f64, sigma: f64) -> Result<CellComplex> {
    let n = p.n;
    let ell1 = p.c1 / n as f64;
    let ell2 = p.c2 / n as f64;
    let th1 = (p.l1 - da) / p.k1 as f64;
    let th2 = (p.l2 - db) / p.k2 as f64;
    if th1 <= 0.0 || th2 <= 0.0 || sigma <= 0.0 {
        return Err(Error::Parameter("junction calibration left the feasible set".into()));
    }
    let a_ring = |r: usize, i: usize| r * n + i;
    let b_off = (p.k1 + 1) * n;
    let b_ring = |r: usize, i: usize| b_off + r * n + i;

    let mut edge_lengths = HashMap::new();
    let mut top_cells = Vec::new();
    let strip = |edge_lengths: &mut HashMap<(usize, usize), f64>,
                     top_cells: &mut Vec<Vec<usize>>,
                     bot: &dyn Fn(usize) -> usize,
                     top: &dyn Fn(usize) -> usize,
                     ell: f64,
                     th: f64| {
        let diag = (ell * ell + th * th).sqrt();
        for (i, j) in ring_pairs(n) {
            let (x, y) = (bot(i), bot(j));
            edge_lengths.insert((x.min(y), x.max(y)), ell);
            let (x, y) = (top(i), top(j));
            edge_lengths.insert((x.min(y), x.max(y)), ell);
        }
        for i in 0..n {
            let (x, y) = (bot(i), top(i));
            edge_lengths.insert((x.min(y), x.max(y)), th);
        }
        for (i, j) in ring_pairs(n) {
            let (lo, hi) = if bot(i) < bot(j) { (i, j) } else { (j, i) };
            let (b0, b1, t0, t1) = (bot(lo), bot(hi), top(lo), top(hi));
            edge_lengths.insert((b0.min(t1), b0.max(t1)), diag);
            top_cells.push(vec![b0, t0, t1]);
            top_cells.push(vec![b0, b1, t1]);
        }
    };
    for r in 0..p.k1 {
        strip(
            &mut edge_lengths,
            &mut top_cells,
            &|i| a_ring(r, i),
            &|i| a_ring(r + 1, i),
            ell1,
            th1,
        );
    }
    for r in 0..p.k2 {
        strip(
            &mut edge_lengths,
            &mut top_cells,
            &|i| b_ring(r, i),
            &|i| b_ring(r + 1, i),
            ell2,
            th2,
        );
    }
    // tilted transition layer between A_{k1} and B_0; the cross edges are
    // trapezoid sides, with a horizontal half-offset from the circumference
    // mismatch, so thin layers stay non-degenerate
    let tvert = |i: usize| -> f64 {
        sigma * p.delta_j * (1.0 + p.tilt * (2.0 * PI * i as f64 / n as f64).cos())
    };
    let ell_mid = 0.5 * (ell1 + ell2);
    let offs = 0.5 * (ell1 - ell2).abs();
    for (i, j) in ring_pairs(n) {
        let (x, y) = (a_ring(p.k1, i), b_ring(0, i));
        let side = (tvert(i) * tvert(i) + offs * offs).sqrt();
        edge_lengths.insert((x.min(y), x.max(y)), side);
        let tbar = 0.5 * (tvert(i) + tvert(j));
        let diag = (tbar * tbar + ell_mid * ell_mid).sqrt();
        // bottom ring is the A side (smaller ids)
        let (lo, hi) = if a_ring(p.k1, i) < a_ring(p.k1, j) { (i, j) } else { (j, i) };
        let (b0, b1) = (a_ring(p.k1, lo), a_ring(p.k1, hi));
        let (t0, t1) = (b_ring(0, lo), b_ring(0, hi));
        edge_lengths.insert((b0.min(t1), b0.max(t1)), diag);
        top_cells.push(vec![b0, t0, t1]);
        top_cells.push(vec![b0, b1, t1]);
    }
    let fixed = vec![false; top_cells.len()];
    let oriented = orient_consistently(2, &top_cells, &fixed)?;
    let ring_a = |r: usize| (0..n).map(|i| a_ring(r, i)).collect::<Vec<_>>();
    let ring_b = |r: usize| (0..n).map(|i| b_ring(r, i)).collect::<Vec<_>>();
    CellComplex::new(ComplexData {
        dim: 2,
        vertex_count: (p.k1 + 1) * n + (p.k2 + 1) * n,
        top_cells: oriented,
        edge_lengths,
        vertex_coords: None,
        components: vec![
            ("Y1".to_string(), vec![ring_a(0), ring_a(1), ring_a(2)]),
            ("Y2".to_string(), vec![ring_b(p.k2), ring_b(p.k2 - 1), ring_b(p.k2 - 2)]),
        ],
        collar: Some(CollarInfo { layers: 2, thickness: th1.max(th2) }),
    })
}

/// Two-segment junction, calibrated so that the discrete network realizes
/// the ideal piecewise-cylinder exactly: total volume, end-to-end network
/// resistance and boundary distance are matched to the target model by
/// adjusting the segment spans and the transition thickness.
fn junction(
    lengths: (f64, f64),
    volumes: (f64, f64),
    tilt: f64,
    res: usize,
) -> Result<(CellComplex, ModelReport)> {
    let (l1, l2) = lengths;
    let (v1, v2) = volumes;
    if !(l1 > 0.0 && l2 > 0.0 && v1 > 0.0 && v2 > 0.0) {
        return Err(Error::Parameter("junction lengths and volumes must be positive".into()));
    }
    if !(0.0..0.9).contains(&tilt) {
        return Err(Error::Parameter("tilt must lie in [0, 0.9)".into()));
    }
    if res % 2 != 0 {
        return Err(Error::Parameter("junction resolution must be even".into()));
    }
    let (c1, c2) = (v1 / l1, v2 / l2);
    let n = res;
    let ell1 = c1 / n as f64;
    let ell2 = c2 / n as f64;
    let delta_j = ell1.min(ell2);
    let params = JunctionParams {
        l1,
        l2,
        c1,
        c2,
        tilt,
        n,
        k1: ((l1 - 0.5 * delta_j) / ell1).round().max(3.0) as usize,
        k2: ((l2 - 0.5 * delta_j) / ell2).round().max(3.0) as usize,
        delta_j,
    };
    let vol_target = v1 + v2;
    let res_target = l1 / c1 + l2 / c2;
    let dist_target = l1 + l2;

    if (c1 - c2).abs() < 1e-12 {
        return Err(Error::Parameter(
            "junction circumferences coincide; use flat_cylinder instead".into(),
        ));
    }
    let offs = 0.5 * (ell1 - ell2).abs();
    let dmin_of = |sigma: f64| -> f64 {
        let tmin = sigma * delta_j * (1.0 - tilt);
        (tmin * tmin + offs * offs).sqrt()
    };
    let clamp = |x: &mut [f64; 2]| {
        x[0] = x[0].clamp(1e-4 * l1, 0.45 * l1);
        x[1] = x[1].clamp(1e-4 * l2, 0.45 * l2);
    };

    // Inner solve: at fixed sigma, volume is exactly linear in (da, db) and
    // resistance nearly so; a 2x2 linear update converges in a few passes.
    let inner = |sigma: f64, start: [f64; 2]| -> Result<([f64; 2], f64)> {
        let mut d = start;
        let det = c1 / c2 - c2 / c1;
        let mut res = f64::INFINITY;
        for _ in 0..12 {
            let m = build_junction(&params, d[0], d[1], sigma)?;
            let fv = m.volume() - vol_target;
            let fr = network_resistance(&m, 0, 1)? - res_target;
            res = fv.abs().max(fr.abs());
            if res < 1e-13 {
                break;
            }
            // [-c1 -c2; -1/c1 -1/c2] · step = (fv, fr)
            let step_a = (-fv / c2 + c2 * fr) / det;
            let step_b = (fv / c1 - c1 * fr) / det;
            d[0] -= step_a;
            d[1] -= step_b;
            clamp(&mut d);
        }
        Ok((d, res))
    };

    // Outer secant on sigma for the boundary-distance equation.
    let mut sigma = 1.0f64;
    let mut d = [0.3 * delta_j, 0.3 * delta_j];
    let mut prev: Option<(f64, f64)> = None;
    let mut final_res = f64::INFINITY;
    for _ in 0..40 {
        let (dd, inner_res) = inner(sigma, d)?;
        d = dd;
        let f3 = (l1 - d[0]) + dmin_of(sigma) + (l2 - d[1]) - dist_target;
        final_res = inner_res.max(f3.abs());
        if final_res < 1e-11 {
            break;
        }
        let slope = match prev {
            Some((s_prev, f_prev)) if (sigma - s_prev).abs() > 1e-14 => {
                (f3 - f_prev) / (sigma - s_prev)
            }
            _ => delta_j * (1.0 - tilt),
        };
        prev = Some((sigma, f3));
        sigma = (sigma - f3 / slope).clamp(0.1, 10.0);
    }
    if final_res > 1e-9 * vol_target.max(res_target) {
        return Err(Error::Generation(format!(
            "junction calibration did not converge (residual {final_res:.3e})"
        )));
    }
    let complex = build_junction(&params, d[0], d[1], sigma)?;
    let report = ModelReport {
        kind: "junction".into(),
        volume: VolumeReport { name: "M".into(), nominal: vol_target, discrete: complex.volume() },
        boundary: vec![
            VolumeReport {
                name: "Y1".into(),
                nominal: c1,
                discrete: complex.boundary_component_volume(0),
            },
            VolumeReport {
                name: "Y2".into(),
                nominal: c2,
                discrete: complex.boundary_component_volume(1),
            },
        ],
        euler_characteristic: complex.euler_characteristic(),
        calibration_residual: Some(final_res),
    };
    Ok((complex, report))
}

/// Reference homology data of the solid torus, produced alongside the mesh.
#[derive(Debug, Clone)]
pub struct TorusClasses {
    /// Meridian cross-section disk as an integer relative 2-cycle.
    pub meridian_cycle: Vec<i64>,
    /// Integer 1-cocycle counting windings around the core circle.
    pub core_tracking_cocycle: Vec<i64>,
    /// Length of the straight core-parallel circle.
    pub core_length: f64,
}

/// Solid torus D × S¹: product of a collared disk cross-section with a
/// circle of the given core length. Prisms are split into tetrahedra with
/// wall diagonals keyed to the cross-section vertex order, which keeps the
/// seam layer compatible with its neighbors. Not part of the builtin model
/// enum; used for the three-dimensional pipeline exercise.
pub fn solid_torus(
    core_length: f64,
    cross_radius: f64,
    res_cross: usize,
    res_core: usize,
) -> Result<(CellComplex, ModelReport, TorusClasses)> {
    if !(core_length > 0.0) || !(cross_radius > 0.0) {
        return Err(Error::Parameter("torus lengths must be positive".into()));
    }
    if res_core < 3 {
        return Err(Error::Parameter("need at least 3 core subdivisions".into()));
    }
    let (disk, _) = disk(cross_radius, res_cross)?;
    let vd = disk.cell_count(0);
    let k_core = res_core;
    let delta = core_length / k_core as f64;
    let vid = |ring: usize, v: usize| (ring % k_core) * vd + v;

    let mut edge_lengths = HashMap::new();
    let mut top_cells = Vec::new();
    let disk_len = |a: usize, b: usize| disk.edge_length(a, b).expect("disk edge");
    for ring in 0..k_core {
        // in-plane copies of the disk edges
        for e in disk.cells(1) {
            let (a, b) = (vid(ring, e[0]), vid(ring, e[1]));
            edge_lengths.insert((a.min(b), a.max(b)), disk_len(e[0], e[1]));
        }
        // verticals and wall diagonals to the next ring
        let next = ring + 1;
        for v in 0..vd {
            let (a, b) = (vid(ring, v), vid(next, v));
            edge_lengths.insert((a.min(b), a.max(b)), delta);
        }
        for e in disk.cells(1) {
            let l = disk_len(e[0], e[1]);
            let diag = (l * l + delta * delta).sqrt();
            // wall diagonal keyed to the local order: lower disk vertex below
            let (a, b) = (vid(ring, e[0]), vid(next, e[1]));
            edge_lengths.insert((a.min(b), a.max(b)), diag);
        }
        // prisms over each disk triangle: staircase split in the local order
        for tri in disk.cells(2) {
            let (a, b, c) = (tri[0], tri[1], tri[2]);
            let bot = [vid(ring, a), vid(ring, b), vid(ring, c)];
            let top = [vid(next, a), vid(next, b), vid(next, c)];
            top_cells.push(vec![bot[0], top[0], top[1], top[2]]);
            top_cells.push(vec![bot[0], bot[1], top[1], top[2]]);
            top_cells.push(vec![bot[0], bot[1], bot[2], top[2]]);
        }
    }
    let fixed = vec![false; top_cells.len()];
    let oriented = orient_consistently(3, &top_cells, &fixed)?;

    // boundary rings: the disk's collar rings, swept around the core
    let disk_b = disk.boundary_structure().expect("disk has a boundary");
    let disk_rings = &disk_b.components[0].rings;
    let mut rings = Vec::new();
    for dr in disk_rings {
        let mut ring_list = Vec::new();
        for k in 0..k_core {
            for &v in dr {
                ring_list.push(vid(k, v));
            }
        }
        rings.push(ring_list);
    }
    let collar = disk.collar().expect("disk has a collar");
    let complex = CellComplex::new(ComplexData {
        dim: 3,
        vertex_count: vd * k_core,
        top_cells: oriented,
        edge_lengths,
        vertex_coords: None,
        components: vec![("Y1".to_string(), rings)],
        collar: Some(collar),
    })?;

    // meridian: the ring-0 copy of each disk triangle, with the disk's
    // fundamental-class signs, is a relative 2-cycle
    let mut meridian = vec![0i64; complex.cell_count(2)];
    for (t, tri) in disk.cells(2).iter().enumerate() {
        let cell: Vec<usize> = {
            let mut c: Vec<usize> = tri.iter().map(|&v| vid(0, v)).collect();
            c.sort_unstable();
            c
        };
        let idx = complex
            .cell_index(2, &cell)
            .ok_or_else(|| Error::Generation("meridian face missing".into()))?;
        meridian[idx] = disk.top_orientation()[t] as i64;
    }
    // core winding counter: edges crossing the seam between ring k-1 and 0
    let mut cocycle = vec![0i64; complex.cell_count(1)];
    for (ei, e) in complex.cells(1).iter().enumerate() {
        let (ra, rb) = (e[0] / vd, e[1] / vd);
        if ra == 0 && rb == k_core - 1 {
            // sorted edge runs ring 0 -> ring k-1, against the +core direction
            cocycle[ei] = -1;
        }
    }
    let report = ModelReport {
        kind: "solid_torus".into(),
        volume: VolumeReport {
            name: "M".into(),
            nominal: core_length * disk.volume(),
            discrete: complex.volume(),
        },
        boundary: vec![VolumeReport {
            name: "Y1".into(),
            nominal: core_length * disk.boundary_volume(),
            discrete: complex.boundary_component_volume(0),
        }],
        euler_characteristic: complex.euler_characteristic(),
        calibration_residual: None,
    };
    Ok((
        complex,
        report,
        TorusClasses {
            meridian_cycle: meridian,
            core_tracking_cocycle: cocycle,
            core_length,
        },
    ))
}
