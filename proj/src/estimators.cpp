#include "phdim/estimators.hpp"

#include "phdim/errors.hpp"
#include "phdim/geometry.hpp"
#include "phdim/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>

namespace phdim {

void PhdParams::validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw ParamError("alpha must be positive and finite");
    if (k_grid < 2)
        throw ParamError("k_grid must be at least 2");
    if (j_samples < 1)
        throw ParamError("j_samples must be at least 1");
    if (rounds < 1)
        throw ParamError("rounds must be at least 1");
    if (min_subsample < 2)
        throw ParamError("min_subsample must be at least 2");
}

std::vector<std::size_t> subsample_sizes(std::size_t n, const PhdParams& params) {
    params.validate();
    if (n < params.min_subsample)
        throw TooFewPoints("cloud has " + std::to_string(n) + " points, need at least " +
                           std::to_string(params.min_subsample));
    const auto lo = static_cast<double>(params.min_subsample);
    const double step = (static_cast<double>(n) - lo) / static_cast<double>(params.k_grid - 1);
    std::vector<std::size_t> sizes(params.k_grid);
    for (std::size_t i = 0; i < params.k_grid; ++i)
        sizes[i] = static_cast<std::size_t>(std::floor(lo + static_cast<double>(i) * step + 0.5));
    sizes.back() = n;
    return sizes;
}

double slope_to_dimension(double kappa) {
    if (!(kappa < 1.0))
        throw UnstableEstimate("regression slope " + std::to_string(kappa) +
                               " is not below 1; dimension would be infinite or negative");
    return 1.0 / (1.0 - kappa);
}

double ols_slope(const std::vector<std::pair<double, double>>& xy) {
    if (xy.size() < 2 || std::all_of(xy.begin(), xy.end(), [&](const auto& p) { return p.first == xy.front().first; }))
        throw UnstableEstimate("all subsample sizes are equal; slope is undefined");
    const auto m = static_cast<double>(xy.size());
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : xy) {
        mx += x;
        my += y;
    }
    mx /= m;
    my /= m;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : xy) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    return sxy / sxx;
}

namespace {

constexpr std::size_t kMaxCachedPoints = 4096;

std::vector<std::size_t> canonical_permutation(const PointCloud& cloud) {
    std::vector<std::size_t> order(cloud.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto pa = cloud.point(a), pb = cloud.point(b);
        return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
    });
    return order;
}

} // namespace

DimensionEstimate phd_estimate(const PointCloud& cloud, const PhdParams& params) {
    const std::size_t n = cloud.size();
    const auto sizes = subsample_sizes(n, params);

    std::vector<std::size_t> base(n);
    if (params.canonical_order)
        base = canonical_permutation(cloud);
    else
        std::iota(base.begin(), base.end(), std::size_t{0});

    const std::uint64_t cloud_key = fnv1a(cloud.id());

    // Every subset MST reads the same pairwise distances; cache them unless the
    // matrix would be large.
    std::optional<SquaredDistances> cache;
    if (n <= kMaxCachedPoints)
        cache.emplace(cloud);
    auto score_of = [&](std::span<const std::size_t> subset) {
        return persistence_score(cache ? euclidean_mst(*cache, subset) : euclidean_mst(cloud, subset),
                                 params.alpha);
    };

    DimensionEstimate est;
    est.params = params;
    est.slopes.reserve(params.rounds);
    est.regression_points.reserve(params.rounds);

    std::vector<double> scores(params.j_samples);
    std::vector<std::size_t> rows;
    for (std::size_t round = 0; round < params.rounds; ++round) {
        std::vector<std::pair<double, double>> points;
        points.reserve(sizes.size());
        for (std::size_t i = 0; i < sizes.size(); ++i) {
            if (sizes[i] == n) {
                // Every draw is the whole cloud.
                std::fill(scores.begin(), scores.end(), score_of(base));
            } else {
                for (std::size_t j = 0; j < params.j_samples; ++j) {
                    SplitMix64 rng(mix_seed({params.seed, cloud_key, round, i, j}));
                    const auto picks = sample_without_replacement(n, sizes[i], rng);
                    rows.resize(picks.size());
                    for (std::size_t t = 0; t < picks.size(); ++t)
                        rows[t] = base[picks[t]];
                    scores[j] = score_of(rows);
                }
            }
            // Lower median.
            auto mid = scores.begin() + static_cast<std::ptrdiff_t>((scores.size() - 1) / 2);
            std::nth_element(scores.begin(), mid, scores.end());
            const double median = *mid;
            if (!(median > 0.0))
                throw DegenerateCloud("subsample of size " + std::to_string(sizes[i]) +
                                      " has zero persistence score (duplicate points)");
            points.emplace_back(std::log(static_cast<double>(sizes[i])), std::log(median));
        }
        est.slopes.push_back(ols_slope(points));
        est.regression_points.push_back(std::move(points));
    }

    const double mean_slope =
        std::accumulate(est.slopes.begin(), est.slopes.end(), 0.0) / static_cast<double>(est.slopes.size());
    est.value = params.alpha * slope_to_dimension(mean_slope);
    return est;
}

double mle_estimate(const PointCloud& cloud, std::size_t k_neighbors) {
    const std::size_t n = cloud.size();
    if (k_neighbors < 2 || k_neighbors >= n)
        throw ParamError("k_neighbors must satisfy 2 <= k < N (k = " + std::to_string(k_neighbors) +
                         ", N = " + std::to_string(n) + ")");

    std::vector<double> dist(n - 1);
    std::vector<double> point_sums(n);
    std::size_t terms = 0;
    for (std::size_t x = 0; x < n; ++x) {
        const auto px = cloud.point(x);
        std::size_t t = 0;
        for (std::size_t y = 0; y < n; ++y)
            if (y != x)
                dist[t++] = squared_distance(px, cloud.point(y));
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_neighbors), dist.end());

        // log(T_k / T_j) = (log T_k^2 - log T_j^2) / 2.
        const double tk2 = dist[k_neighbors - 1];
        std::size_t used = 0;
        double sum = 0.0;
        if (tk2 > 0.0) {
            const double log_tk2 = std::log(tk2);
            for (std::size_t j = 0; j + 1 < k_neighbors; ++j) {
                if (dist[j] > 0.0) {
                    sum += 0.5 * (log_tk2 - std::log(dist[j]));
                    ++used;
                }
            }
        }
        if (used == 0)
            throw DegenerateCloud("point " + std::to_string(x) + " has " + std::to_string(k_neighbors) +
                                  " neighbours at distance zero");
        point_sums[x] = sum;
        terms += used;
    }
    // Accumulate in sorted order so the result does not depend on point order.
    std::sort(point_sums.begin(), point_sums.end());
    const double total = std::accumulate(point_sums.begin(), point_sums.end(), 0.0);
    if (!(total > 0.0))
        throw DegenerateCloud("all neighbour distance ratios are one");
    return static_cast<double>(terms) / total;
}

} // namespace phdim
