use nalgebra::{DMatrix, SymmetricEigen};

use crate::points::PointSet;

/// Scores on the first two principal components of the centered data.
///
/// Each component's sign is fixed so that its largest-magnitude loading is
/// positive. Missing components (`d = 1`) are zero.
pub fn principal_scores(points: &PointSet) -> Vec<[f64; 2]> {
    let (n, d) = (points.len(), points.dim());
    let mut mean = vec![0.0; d];
    for row in points.rows() {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let centered = DMatrix::from_fn(n, d, |i, j| points.row(i)[j] - mean[j]);
    let cov = centered.transpose() * &centered / (n.max(2) - 1) as f64;
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let axes: Vec<Vec<f64>> = order
        .iter()
        .take(2)
        .map(|&c| {
            let v: Vec<f64> = eig.eigenvectors.column(c).iter().copied().collect();
            let lead = v
                .iter()
                .copied()
                .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
            if lead < 0.0 {
                v.iter().map(|x| -x).collect()
            } else {
                v
            }
        })
        .collect();

    (0..n)
        .map(|i| {
            let mut s = [0.0; 2];
            for (slot, axis) in s.iter_mut().zip(&axes) {
                *slot = centered.row(i).iter().zip(axis).map(|(x, a)| x * a).sum();
            }
            s
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_dominant_axis() {
        // points along the diagonal of the plane plus a small orthogonal wobble
        let rows: Vec<[f64; 2]> = (0..20)
            .map(|i| {
                let t = i as f64 - 9.5;
                let w = if matches!(i % 4, 0 | 3) { 0.1 } else { -0.1 };
                [t + w, t - w]
            })
            .collect();
        let p = PointSet::from_rows(&rows).unwrap();
        let s = principal_scores(&p);
        for (row, sc) in rows.iter().zip(&s) {
            let along = (row[0] + row[1]) / 2f64.sqrt();
            assert!((sc[0].abs() - along.abs()).abs() < 1e-9);
        }
        // scores are centered
        assert!(s.iter().map(|v| v[0]).sum::<f64>().abs() < 1e-9);
        assert!(s.iter().map(|v| v[1]).sum::<f64>().abs() < 1e-9);
    }

    #[test]
    fn one_dimensional_data() {
        let p = PointSet::from_scalars(&[1.0, 2.0, 6.0]).unwrap();
        let s = principal_scores(&p);
        assert_eq!(s.iter().map(|v| v[1]).collect::<Vec<_>>(), vec![0.0; 3]);
        assert!((s[2][0] - 3.0).abs() < 1e-12);
    }
}
