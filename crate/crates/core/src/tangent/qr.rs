use nalgebra::DMatrix;

use crate::domain::Field;
use crate::error::{Error, Result};

/// Thin QR of a family in the weighted `L2` inner product by modified
/// Gram-Schmidt, applied twice. `R` has a positive diagonal; only the
/// diagonal is returned.
pub(crate) fn qr_in_place(vectors: &mut [Field]) -> Result<Vec<f64>> {
    let d = vectors.len();
    let mut diag = vec![0.0; d];
    for i in 0..d {
        let norm0 = vectors[i].dot(&vectors[i]).sqrt();
        let mut r_ii = norm0;
        for _pass in 0..2 {
            for j in 0..i {
                let (head, tail) = vectors.split_at_mut(i);
                let c = head[j].dot(&tail[0]);
                let w = head[j].values();
                for (x, y) in tail[0].values_mut().iter_mut().zip(w) {
                    *x -= c * y;
                }
            }
            r_ii = vectors[i].dot(&vectors[i]).sqrt();
        }
        if !(r_ii > 1e-300) || !r_ii.is_finite() {
            return Err(Error::DegenerateBundle { index: i, value: r_ii });
        }
        let inv = 1.0 / r_ii;
        vectors[i].values_mut().iter_mut().for_each(|x| *x *= inv);
        diag[i] = r_ii;
    }
    Ok(diag)
}

/// Weighted `L2` Gram matrix.
pub fn gram_matrix(vectors: &[Field]) -> DMatrix<f64> {
    let d = vectors.len();
    let mut g = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..=i {
            let v = vectors[i].dot(&vectors[j]);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

/// `det` of the Gram matrix, clamped at zero.
pub fn gram_determinant(vectors: &[Field]) -> f64 {
    if vectors.is_empty() {
        return 1.0;
    }
    gram_matrix(vectors).determinant().max(0.0)
}

/// `d`-dimensional volume spanned by `vectors`, `sqrt(det Gram)`.
pub fn gram_volume(vectors: &[Field]) -> f64 {
    gram_determinant(vectors).sqrt()
}

/// Largest entry of `|Gram - I|`.
pub fn orthonormality_defect(vectors: &[Field]) -> f64 {
    let g = gram_matrix(vectors);
    let d = vectors.len();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Grid;

    #[test]
    fn qr_orthonormalizes_and_keeps_volume() {
        let g = Grid::unit_cube(4).unwrap();
        let mut v = vec![
            Field::from_fn(g, |x| x[0] + 0.1),
            Field::from_fn(g, |x| x[0] * x[1] + 0.3),
            Field::from_fn(g, |x| (x[2] * 4.0).sin()),
        ];
        let vol = gram_volume(&v);
        let r = qr_in_place(&mut v).unwrap();
        assert!(orthonormality_defect(&v) < 1e-12);
        let prod: f64 = r.iter().product();
        assert!((prod - vol).abs() <= 1e-10 * vol);
        assert!(r.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn dependent_family_has_zero_volume() {
        let g = Grid::unit_cube(3).unwrap();
        let a = Field::from_fn(g, |x| x[0] - x[1]);
        let b = Field::from_fn(g, |x| x[2] * x[2]);
        let c = a.axpy(2.0, &b);
        let fam = vec![a, b, c];
        assert!(gram_determinant(&fam) <= 1e-14);
        let mut fam2 = fam.clone();
        fam2[2] = Field::zeros(g);
        assert!(matches!(qr_in_place(&mut fam2), Err(Error::DegenerateBundle { index: 2, .. })));
    }
}
