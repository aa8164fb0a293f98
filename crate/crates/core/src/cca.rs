//! Linear CDMCA baseline.
//!
//! Many-to-many links are turned into one-to-one pairs by repeating each data
//! vector once per link, and regularized CCA is fitted to the pairs. Both
//! covariances are whitened with `(C + lambda I)^(-1/2)` and the whitened
//! cross-covariance is decomposed by SVD.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{Block, Error, Result};
use crate::model::{Embedding, MultimodalDataset};

/// Ridge added to both covariance diagonals unless overridden.
pub const DEFAULT_LAMBDA: f64 = 0.01;

/// Row `r` of `a` and of `b` are the two ends of link `links[r]`.
#[derive(Debug, Clone)]
pub struct PairedData {
    pub a: Array2<f64>,
    pub b: Array2<f64>,
    pub links: Vec<(usize, usize)>,
}

impl PairedData {
    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }
}

/// One pair per positive entry of the cross graph, in row-major order.
/// Weights are binarized.
pub fn expand_pairs(dataset: &MultimodalDataset) -> Result<PairedData> {
    let x2 = dataset.domain2().ok_or_else(|| Error::EmptyDomain {
        block: Block::Domain2,
        reason: "CDMCA needs two domains".into(),
    })?;
    let x1 = dataset.domain1();
    let links: Vec<(usize, usize)> = dataset
        .cross_graph()
        .indexed_iter()
        .filter(|(_, &w)| w > 0.0)
        .map(|(ij, _)| ij)
        .collect();
    if links.is_empty() {
        return Err(Error::AllZeroCrossGraph);
    }
    let a = x1.select(Axis(0), &links.iter().map(|l| l.0).collect::<Vec<_>>());
    let b = x2.select(Axis(0), &links.iter().map(|l| l.1).collect::<Vec<_>>());
    Ok(PairedData { a, b, links })
}

/// Fitted projections. Columns are ordered by nonincreasing correlation.
#[derive(Debug, Clone)]
pub struct CcaModel {
    pub proj_a: Array2<f64>,
    pub proj_b: Array2<f64>,
    pub correlations: Vec<f64>,
    pub mean_a: Array1<f64>,
    pub mean_b: Array1<f64>,
}

impl CcaModel {
    pub fn transform_a(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        (&x - &self.mean_a).dot(&self.proj_a)
    }

    pub fn transform_b(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        (&x - &self.mean_b).dot(&self.proj_b)
    }
}

fn to_na(m: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[[i, j]])
}

fn inverse_sqrt(c: DMatrix<f64>, block: Block) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(c);
    let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    if eig
        .eigenvalues
        .iter()
        .any(|&l| l.is_nan() || l <= max * 1e-12 || !l.is_finite())
    {
        return Err(Error::RankDeficient { block });
    }
    let scaled = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    Ok(&eig.eigenvectors * scaled * eig.eigenvectors.transpose())
}

/// Regularized CCA of paired rows `a` and `b` keeping `k` directions.
pub fn regularized_cca(
    a: ArrayView2<'_, f64>,
    b: ArrayView2<'_, f64>,
    k: usize,
    lambda: f64,
) -> Result<CcaModel> {
    let m = a.nrows();
    if b.nrows() != m {
        return Err(Error::ShapeMismatch(format!(
            "{m} rows in domain 1 but {} in domain 2",
            b.nrows()
        )));
    }
    if m < 2 {
        return Err(Error::TooFewPoints {
            block: Block::Cross,
            needed: 2,
            got: m,
        });
    }
    let (d1, d2) = (a.ncols(), b.ncols());
    if k < 1 || k > d1.min(d2) {
        return Err(Error::InvalidConfig(format!(
            "CCA dimension must lie in 1..={}, got {k}",
            d1.min(d2)
        )));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "regularization must be nonnegative, got {lambda}"
        )));
    }

    let mean_a = a.mean_axis(Axis(0)).expect("m >= 2");
    let mean_b = b.mean_axis(Axis(0)).expect("m >= 2");
    let ca = to_na(&(&a - &mean_a));
    let cb = to_na(&(&b - &mean_b));
    let scale = 1.0 / (m as f64 - 1.0);
    let caa = ca.transpose() * &ca * scale + DMatrix::identity(d1, d1) * lambda;
    let cbb = cb.transpose() * &cb * scale + DMatrix::identity(d2, d2) * lambda;
    let cab = ca.transpose() * &cb * scale;

    let wa = inverse_sqrt(caa, Block::Domain1)?;
    let wb = inverse_sqrt(cbb, Block::Domain2)?;
    let whitened = &wa * cab * &wb;
    let svd = whitened.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");

    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| {
        svd.singular_values[y]
            .total_cmp(&svd.singular_values[x])
            .then(x.cmp(&y))
    });

    let mut proj_a = Array2::zeros((d1, k));
    let mut proj_b = Array2::zeros((d2, k));
    let mut correlations = Vec::with_capacity(k);
    for (c, &idx) in order.iter().take(k).enumerate() {
        let pa = &wa * u.column(idx);
        let pb = &wb * v_t.row(idx).transpose();
        // Flip both sides together so the largest loading of the domain-1
        // direction is positive; the correlation sign is unchanged.
        let pivot = pa
            .iter()
            .cloned()
            .fold(0.0, |acc: f64, v| if v.abs() > acc.abs() { v } else { acc });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for r in 0..d1 {
            proj_a[[r, c]] = sign * pa[r];
        }
        for r in 0..d2 {
            proj_b[[r, c]] = sign * pb[r];
        }
        correlations.push(svd.singular_values[idx]);
    }

    Ok(CcaModel {
        proj_a,
        proj_b,
        correlations,
        mean_a,
        mean_b,
    })
}

/// Fits CDMCA on the link-expanded pairs and projects every original item
/// (centered by the pair means) into the shared `k`-dimensional space.
pub fn cdmca_embed(dataset: &MultimodalDataset, k: usize, lambda: f64) -> Result<Embedding> {
    let pairs = expand_pairs(dataset)?;
    let model = regularized_cca(pairs.a.view(), pairs.b.view(), k, lambda)?;
    let y1 = model.transform_a(dataset.domain1());
    let y2 = model.transform_b(dataset.domain2().expect("checked by expand_pairs"));
    let coords = ndarray::concatenate(Axis(0), &[y1.view(), y2.view()]).expect("same width");
    Embedding::new(coords, dataset.n1())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn gaussian(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Array2<f64> {
        Array2::from_shape_fn((r, c), |_| rng.sample(StandardNormal))
    }

    fn dataset(w: Array2<f64>) -> MultimodalDataset {
        let (n1, n2) = w.dim();
        MultimodalDataset::new(
            Array2::from_shape_fn((n1, 2), |(i, j)| (i * 2 + j) as f64),
            Some(Array2::from_shape_fn((n2, 3), |(i, j)| {
                (i * 3 + j) as f64 * 0.5
            })),
            w,
        )
        .unwrap()
    }

    #[test]
    fn pairs_follow_row_major_links() {
        let p = expand_pairs(&dataset(array![[1.0, 0.0], [1.0, 1.0]])).unwrap();
        assert_eq!(p.links, vec![(0, 0), (1, 0), (1, 1)]);
        assert_eq!(p.a.row(1), array![2.0, 3.0]);
        assert_eq!(p.b.row(2), array![1.5, 2.0, 2.5]);
    }

    #[test]
    fn full_bipartite_pairs() {
        assert_eq!(
            expand_pairs(&dataset(Array2::ones((2, 3)))).unwrap().len(),
            6
        );
    }

    #[test]
    fn weights_are_binarized() {
        let p = expand_pairs(&dataset(array![[0.5, 0.0], [0.0, 2.0]])).unwrap();
        assert_eq!(p.links, vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn single_domain_rejected() {
        let ds = MultimodalDataset::single(array![[0.0], [1.0]]).unwrap();
        assert!(expand_pairs(&ds).is_err());
    }

    #[test]
    fn identical_views_correlate_perfectly() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = gaussian(&mut rng, 50, 4);
        let model = regularized_cca(a.view(), a.view(), 1, 0.0).unwrap();
        assert!((model.correlations[0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn linear_relation_correlates_perfectly() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = gaussian(&mut rng, 60, 3);
        let m = array![[2.0, 0.5, 0.0], [0.1, 1.0, -1.0], [0.0, 0.3, 1.5]];
        let b = a.dot(&m);
        let model = regularized_cca(a.view(), b.view(), 3, 0.0).unwrap();
        for c in &model.correlations {
            assert!((c - 1.0).abs() < 1e-6, "{c}");
        }
    }

    #[test]
    fn independent_views_correlate_weakly() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = gaussian(&mut rng, 2000, 5);
        let b = gaussian(&mut rng, 2000, 5);
        let model = regularized_cca(a.view(), b.view(), 5, 0.01).unwrap();
        assert!(model.correlations[0] < 0.15, "{:?}", model.correlations);
    }

    #[test]
    fn collinear_columns_without_ridge_are_rank_deficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut a = gaussian(&mut rng, 30, 3);
        let first = a.column(0).to_owned();
        a.column_mut(2).assign(&first);
        let b = gaussian(&mut rng, 30, 2);
        assert!(matches!(
            regularized_cca(a.view(), b.view(), 1, 0.0),
            Err(Error::RankDeficient {
                block: Block::Domain1
            })
        ));
        assert!(regularized_cca(a.view(), b.view(), 1, 0.01).is_ok());
    }

    #[test]
    fn dimension_checked() {
        let a = Array2::<f64>::zeros((5, 2));
        let b = Array2::<f64>::zeros((5, 3));
        assert!(matches!(
            regularized_cca(a.view(), b.view(), 3, 0.1),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn perfectly_correlated_domains_coincide() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = gaussian(&mut rng, 20, 3);
        let ds = MultimodalDataset::new(x.clone(), Some(x), Array2::eye(20)).unwrap();
        let e = cdmca_embed(&ds, 2, DEFAULT_LAMBDA).unwrap();
        for c in 0..2 {
            let sign = if (e.domain1()[[0, c]] * e.domain2()[[0, c]]) < 0.0 {
                -1.0
            } else {
                1.0
            };
            for i in 0..20 {
                assert!((e.domain1()[[i, c]] - sign * e.domain2()[[i, c]]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn one_dimensional_output_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let w = Array2::from_shape_fn((8, 5), |_| f64::from(u8::from(rng.random::<f64>() < 0.5)));
        let ds =
            MultimodalDataset::new(gaussian(&mut rng, 8, 3), Some(gaussian(&mut rng, 5, 2)), w)
                .unwrap();
        let e = cdmca_embed(&ds, 1, DEFAULT_LAMBDA).unwrap();
        assert_eq!(e.coords().dim(), (13, 1));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn correlations_sorted_in_unit_interval(seed in any::<u64>(), lambda in 0.0f64..1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = gaussian(&mut rng, 40, 4);
            let b = &a.slice(ndarray::s![.., ..3]) + &gaussian(&mut rng, 40, 3);
            let model = regularized_cca(a.view(), b.view(), 3, lambda).unwrap();
            for c in &model.correlations {
                prop_assert!(*c >= -1e-8 && *c <= 1.0 + 1e-8);
            }
            for w in model.correlations.windows(2) {
                prop_assert!(w[0] >= w[1]);
            }
        }
    }
}
