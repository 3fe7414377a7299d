//! Integer (co)homology ranks of a complex, its boundary and the relative
//! pair, from exact modular ranks of the incidence matrices. These are the
//! hard cross-checks for every numerically computed harmonic space.

use crate::complex::CellComplex;
use crate::error::{Error, Result};
use crate::sparse::IntCsr;

/// Which cochain complex to take Betti numbers of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    /// Full complex: H^p(M).
    Absolute,
    /// Cochains vanishing on the boundary: H^p(M, Y).
    Relative,
}

/// Betti numbers b_0..b_n of the complex in the chosen flavor.
pub fn betti_numbers(m: &CellComplex, flavor: Flavor) -> Result<Vec<usize>> {
    let n = m.dim();
    let mut dims = Vec::with_capacity(n + 1);
    let mut coboundaries: Vec<IntCsr> = Vec::with_capacity(n);
    match flavor {
        Flavor::Absolute => {
            for k in 0..=n {
                dims.push(m.cell_count(k));
            }
            for p in 0..n {
                coboundaries.push(m.coboundary(p)?);
            }
        }
        Flavor::Relative => {
            for k in 0..=n {
                dims.push(m.interior_mask(k).iter().filter(|&&b| b).count());
            }
            for p in 0..n {
                let d = m.coboundary(p)?;
                coboundaries.push(restrict_int(
                    &d,
                    m.interior_mask(p + 1),
                    m.interior_mask(p),
                ));
            }
        }
    }
    let mut ranks = vec![0usize; n + 1]; // rank of d_p, with rank(d_n) = 0
    for p in 0..n {
        ranks[p] = coboundaries[p].rank();
    }
    let mut betti = Vec::with_capacity(n + 1);
    for p in 0..=n {
        let rank_prev = if p == 0 { 0 } else { ranks[p - 1] };
        let ker = dims[p] - ranks[p];
        if ker < rank_prev {
            return Err(Error::Rank(format!(
                "inconsistent ranks at degree {p}: kernel {ker} < image {rank_prev}"
            )));
        }
        betti.push(ker - rank_prev);
    }
    Ok(betti)
}

/// Betti numbers of the boundary complex Y.
pub fn boundary_betti_numbers(m: &CellComplex) -> Result<Vec<usize>> {
    let b = m
        .boundary_structure()
        .ok_or_else(|| Error::Structure("complex has no boundary".into()))?;
    betti_numbers(&b.complex, Flavor::Absolute)
}

pub(crate) fn restrict_int(d: &IntCsr, rows: &[bool], cols: &[bool]) -> IntCsr {
    let mut row_map = vec![usize::MAX; rows.len()];
    let mut r = 0;
    for (i, &b) in rows.iter().enumerate() {
        if b {
            row_map[i] = r;
            r += 1;
        }
    }
    let mut col_map = vec![usize::MAX; cols.len()];
    let mut c = 0;
    for (i, &b) in cols.iter().enumerate() {
        if b {
            col_map[i] = c;
            c += 1;
        }
    }
    let mut triplets = Vec::new();
    for row in 0..d.nrows {
        if !rows[row] {
            continue;
        }
        for k in d.indptr[row]..d.indptr[row + 1] {
            let col = d.indices[k];
            if cols[col] {
                triplets.push((row_map[row], col_map[col], d.data[k]));
            }
        }
    }
    IntCsr::from_triplets(r, c, &triplets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::generators::{generate_model, ModelSpec};

    #[test]
    fn annulus_betti() {
        let (m, _) = generate_model(&ModelSpec::Annulus { r_inner: 1.0, r_outer: 2.0 }, 12)
            .unwrap();
        assert_eq!(betti_numbers(&m, Flavor::Absolute).unwrap(), vec![1, 1, 0]);
        assert_eq!(betti_numbers(&m, Flavor::Relative).unwrap(), vec![0, 1, 1]);
        assert_eq!(boundary_betti_numbers(&m).unwrap(), vec![2, 2]);
    }

    #[test]
    fn disk_betti() {
        let (m, _) = generate_model(&ModelSpec::Disk { radius: 1.0 }, 12).unwrap();
        assert_eq!(betti_numbers(&m, Flavor::Absolute).unwrap(), vec![1, 0, 0]);
        assert_eq!(betti_numbers(&m, Flavor::Relative).unwrap(), vec![0, 0, 1]);
        assert_eq!(boundary_betti_numbers(&m).unwrap(), vec![1, 1]);
    }

    #[test]
    fn genus1_one_hole_betti() {
        let (m, _) = generate_model(&ModelSpec::Genus1OneHole, 6).unwrap();
        assert_eq!(betti_numbers(&m, Flavor::Absolute).unwrap(), vec![1, 2, 0]);
        assert_eq!(betti_numbers(&m, Flavor::Relative).unwrap(), vec![0, 2, 1]);
        assert_eq!(boundary_betti_numbers(&m).unwrap(), vec![1, 1]);
    }
}
