//! Within-domain stochastic neighbor graphs.
//!
//! Each point gets a Gaussian conditional distribution over the other points
//! whose bandwidth is tuned so that the distribution's perplexity (2 raised to
//! its entropy in bits) hits a common target. The conditionals are then
//! symmetrized into a joint distribution over pairs.

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use crate::error::{Block, Error, Result};
use crate::model::check_finite;

const MAX_BISECTION_STEPS: usize = 100;
/// Acceptance tolerance on the achieved perplexity, relative to the target.
pub const PERPLEXITY_TOLERANCE: f64 = 1e-5;
/// Bisection keeps refining until this much closer, so the bandwidth is a
/// smooth function of the input rather than of where the search stopped.
const REFINE_TOLERANCE: f64 = 1e-13;

/// Symmetric joint probabilities of one domain together with the per-point
/// Gaussian bandwidths that produced them.
#[derive(Debug, Clone)]
pub struct SnGraph {
    probs: Array2<f64>,
    bandwidths: Vec<f64>,
}

impl SnGraph {
    /// Builds the graph for the given domain's feature matrix.
    pub fn build(data: ArrayView2<'_, f64>, perplexity: f64, block: Block) -> Result<Self> {
        let n = data.nrows();
        if n < 2 {
            return Err(Error::TooFewPoints {
                block,
                needed: 2,
                got: n,
            });
        }
        check_finite(data, block)?;
        let dists = squared_distance_matrix(data)?;

        let rows: Vec<(f64, Vec<f64>)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let row = dists.row(i);
                let row = row.as_slice().expect("standard layout");
                let sigma = calibrate_bandwidth(row, i, perplexity).map_err(|e| match e {
                    Error::PerplexityUnreachable {
                        point,
                        perplexity,
                        min,
                        max,
                        ..
                    } => Error::PerplexityUnreachable {
                        block,
                        point,
                        perplexity,
                        min,
                        max,
                    },
                    other => other,
                })?;
                Ok((sigma, conditional_row(row, i, sigma)?))
            })
            .collect::<Result<_>>()?;

        let denom = 2.0 * n as f64;
        let mut probs = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    probs[[i, j]] = (rows[i].1[j] + rows[j].1[i]) / denom;
                }
            }
        }
        let bandwidths = rows.into_iter().map(|(s, _)| s).collect();
        Ok(Self { probs, bandwidths })
    }

    pub fn probs(&self) -> &Array2<f64> {
        &self.probs
    }

    pub fn bandwidths(&self) -> &[f64] {
        &self.bandwidths
    }

    pub fn len(&self) -> usize {
        self.probs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.nrows() == 0
    }
}

/// `build_sn_graph` for a matrix that is not tied to a particular domain.
pub fn build_sn_graph(data: ArrayView2<'_, f64>, perplexity: f64) -> Result<SnGraph> {
    SnGraph::build(data, perplexity, Block::Domain1)
}

/// Pairwise squared Euclidean distances between the rows of `data`.
pub fn squared_distance_matrix(data: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    check_finite(data, Block::Domain1)?;
    let n = data.nrows();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = data.row(i);
            (0..n)
                .map(|j| {
                    if i == j {
                        0.0
                    } else {
                        xi.iter()
                            .zip(data.row(j).iter())
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum()
                    }
                })
                .collect()
        })
        .collect();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Ok(Array2::from_shape_vec((n, n), flat).expect("n*n entries"))
}

fn min_off_diagonal(sq_dists: &[f64], i: usize) -> f64 {
    sq_dists
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &d)| d)
        .fold(f64::INFINITY, f64::min)
}

/// `ln 2^H` for point `i`'s conditional row, computed from shifted kernels.
fn kernel_log_perplexity(sq_dists: &[f64], i: usize, sigma: f64, dmin: f64) -> f64 {
    let scale = 1.0 / (2.0 * sigma * sigma);
    let mut sum = 0.0;
    let mut weighted = 0.0;
    for (j, &d) in sq_dists.iter().enumerate() {
        if j == i {
            continue;
        }
        let a = (d - dmin) * scale;
        let e = (-a).exp();
        sum += e;
        if e > 0.0 {
            weighted += e * a;
        }
    }
    // H (nats) = ln S + sum(e a) / S
    sum.ln() + weighted / sum
}

/// Gaussian conditional distribution of point `i` over the others.
///
/// The smallest off-diagonal distance is subtracted before exponentiation so
/// the largest kernel value is exactly one.
pub fn conditional_row(sq_dists: &[f64], i: usize, sigma: f64) -> Result<Vec<f64>> {
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "bandwidth must be positive, got {sigma}"
        )));
    }
    let dmin = min_off_diagonal(sq_dists, i);
    if !dmin.is_finite() {
        return Err(Error::DegenerateRow { point: i });
    }
    let scale = 1.0 / (2.0 * sigma * sigma);
    let mut row: Vec<f64> = sq_dists
        .iter()
        .enumerate()
        .map(|(j, &d)| {
            if j == i {
                0.0
            } else {
                (-(d - dmin) * scale).exp()
            }
        })
        .collect();
    let sum: f64 = row.iter().sum();
    if sum.is_nan() || sum <= 0.0 || !sum.is_finite() {
        return Err(Error::DegenerateRow { point: i });
    }
    row.iter_mut().for_each(|p| *p /= sum);
    Ok(row)
}

/// Perplexity `2^H` of point `i`'s conditional distribution at bandwidth `sigma`.
pub fn row_perplexity(sq_dists: &[f64], i: usize, sigma: f64) -> f64 {
    let dmin = min_off_diagonal(sq_dists, i);
    kernel_log_perplexity(sq_dists, i, sigma, dmin).exp()
}

/// Finds the bandwidth of point `i` whose conditional distribution has the
/// requested perplexity.
///
/// Bisection runs on `ln sigma` inside `[1e-20 rho, 1e20 rho]`, where `rho` is
/// the root mean positive squared distance; perplexity is nondecreasing in
/// sigma so the bracket always contains the answer when it exists.
pub fn calibrate_bandwidth(sq_dists: &[f64], i: usize, perplexity: f64) -> Result<f64> {
    if !(perplexity.is_finite() && perplexity > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "perplexity must be positive, got {perplexity}"
        )));
    }
    if sq_dists.len() < 2 || i >= sq_dists.len() {
        return Err(Error::DegenerateRow { point: i });
    }
    let dmin = min_off_diagonal(sq_dists, i);
    if !dmin.is_finite() {
        return Err(Error::DegenerateRow { point: i });
    }

    let (count, total) = sq_dists
        .iter()
        .enumerate()
        .filter(|&(j, &d)| j != i && d > 0.0)
        .fold((0usize, 0.0), |(c, t), (_, &d)| (c + 1, t + d));
    let rho = if count > 0 {
        (total / count as f64).sqrt()
    } else {
        1.0
    };

    let target = perplexity.ln();
    let accept = PERPLEXITY_TOLERANCE * perplexity;
    let log_perp = |ln_sigma: f64| kernel_log_perplexity(sq_dists, i, ln_sigma.exp(), dmin);

    let mut lo = (1e-20 * rho).ln();
    let mut hi = (1e20 * rho).ln();
    let perp_lo = log_perp(lo).exp();
    let perp_hi = log_perp(hi).exp();
    if perplexity < perp_lo - accept || perplexity > perp_hi + accept {
        return Err(Error::PerplexityUnreachable {
            block: Block::Domain1,
            point: i,
            perplexity,
            min: perp_lo,
            max: perp_hi,
        });
    }

    let mut mid = 0.5 * (lo + hi);
    for _ in 0..MAX_BISECTION_STEPS {
        mid = 0.5 * (lo + hi);
        let lp = log_perp(mid);
        if (lp - target).abs() <= REFINE_TOLERANCE || mid <= lo || mid >= hi {
            break;
        }
        if lp < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid.exp())
}
