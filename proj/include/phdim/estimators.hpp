#pragma once

#include "phdim/point_cloud.hpp"

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace phdim {

/// Parameters of the persistent-homology dimension estimator. The defaults
/// are the values used for ~50-510 token texts.
struct PhdParams {
    double alpha = 1.0;          // exponent of the MST edge lengths
    std::size_t k_grid = 8;      // number of subsample sizes
    std::size_t j_samples = 7;   // subsets drawn per size; their median score is kept
    std::size_t rounds = 3;      // independent regressions averaged into the slope
    std::size_t min_subsample = 40;
    std::uint64_t seed = 42;
    /// Sample from points sorted lexicographically instead of input order, so
    /// the estimate does not depend on point order. Breaks rigid-motion
    /// invariance of the random draws, hence off by default.
    bool canonical_order = false;

    /// Throws ParamError when a field is out of range.
    void validate() const;
};

struct DimensionEstimate {
    double value = 0.0;
    std::vector<double> slopes; // one per round
    /// Per round: (log n_i, log E(S_i)) for every grid size.
    std::vector<std::vector<std::pair<double, double>>> regression_points;
    PhdParams params;
};

/// Grid n_i = round_half_up(n_min + (i-1)(n - n_min)/(k-1)), i = 1..k, so
/// that the first size is n_min and the last is n. Throws TooFewPoints when
/// n < params.min_subsample.
std::vector<std::size_t> subsample_sizes(std::size_t n, const PhdParams& params);

/// 1 / (1 - kappa). Throws UnstableEstimate when kappa >= 1 (pole / negative dimension).
double slope_to_dimension(double kappa);

/// Least-squares slope of y on x. Throws UnstableEstimate if x has no spread.
double ols_slope(const std::vector<std::pair<double, double>>& xy);

/// Persistent-homology dimension of the cloud.
///
/// For each round and each grid size n_i, `j_samples` subsets of size n_i are
/// drawn without replacement and the median of their alpha-weighted MST
/// scores is taken as E(S_i). The slope kappa of log E(S_i) against log n_i is
/// averaged over rounds and converted to a dimension as alpha / (1 - kappa)
/// (which is 1 / (1 - kappa) for the default alpha = 1).
///
/// Each draw has its own stream derived from (seed, cloud id, round, i, j),
/// so the result does not depend on evaluation order or thread count.
///
/// Throws TooFewPoints, UnstableEstimate or DegenerateCloud (zero score).
DimensionEstimate phd_estimate(const PointCloud& cloud, const PhdParams& params);

/// Pooled Levina-Bickel maximum-likelihood dimension with k nearest neighbours:
/// the inverse of the mean of log(T_k(x)/T_j(x)) over all points x and
/// j = 1..k-1. Ratio terms with T_j(x) = 0 are dropped.
///
/// Throws ParamError unless 2 <= k_neighbors < N, DegenerateCloud if some
/// point has no usable ratio term.
double mle_estimate(const PointCloud& cloud, std::size_t k_neighbors = 20);

} // namespace phdim
