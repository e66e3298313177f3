#include "phdim/geometry.hpp"

#include "phdim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

namespace phdim {

namespace {

// `dist(a, b)` returns the squared distance between rows a and b.
template <class Dist>
MstResult prim(std::span<const std::size_t> rows, Dist&& dist) {
    const std::size_t n = rows.size();
    if (n < 2)
        throw SizeError("minimum spanning tree needs at least 2 points, got " + std::to_string(n));

    // best[i]: squared distance from rows[i] to the current tree, for i not yet in it.
    // Vertices outside the tree are kept compacted in the prefix [0, remaining).
    std::vector<std::size_t> outside(n - 1);
    std::iota(outside.begin(), outside.end(), std::size_t{1});
    std::vector<double> best(n - 1, std::numeric_limits<double>::infinity());

    MstResult result;
    result.edge_lengths.reserve(n - 1);

    std::size_t last = 0;
    std::size_t remaining = n - 1;
    while (remaining > 0) {
        const std::size_t anchor = rows[last];
        std::size_t arg = 0;
        double arg_d = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < remaining; ++k) {
            const double d = dist(anchor, rows[outside[k]]);
            if (d < best[k])
                best[k] = d;
            if (best[k] < arg_d) {
                arg_d = best[k];
                arg = k;
            }
        }
        result.edge_lengths.push_back(std::sqrt(arg_d));
        last = outside[arg];
        --remaining;
        outside[arg] = outside[remaining];
        best[arg] = best[remaining];
    }

    for (double len : result.edge_lengths)
        result.total_weight += len;
    return result;
}

struct DisjointSets {
    std::vector<std::size_t> parent;
    std::vector<std::size_t> rank;

    explicit DisjointSets(std::size_t n) : parent(n), rank(n, 0) {
        std::iota(parent.begin(), parent.end(), std::size_t{0});
    }

    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }

    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b)
            return false;
        if (rank[a] < rank[b])
            std::swap(a, b);
        parent[b] = a;
        if (rank[a] == rank[b])
            ++rank[a];
        return true;
    }
};

} // namespace

MstResult euclidean_mst(const PointCloud& cloud) {
    std::vector<std::size_t> all(cloud.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return euclidean_mst(cloud, all);
}

MstResult euclidean_mst(const PointCloud& cloud, std::span<const std::size_t> subset) {
    return prim(subset, [&cloud](std::size_t a, std::size_t b) {
        return squared_distance(cloud.point(a), cloud.point(b));
    });
}

SquaredDistances::SquaredDistances(const PointCloud& cloud) : n_(cloud.size()), d_(n_ * n_, 0.0) {
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = i + 1; j < n_; ++j) {
            const double d = squared_distance(cloud.point(i), cloud.point(j));
            d_[i * n_ + j] = d;
            d_[j * n_ + i] = d;
        }
}

MstResult euclidean_mst(const SquaredDistances& distances, std::span<const std::size_t> subset) {
    return prim(subset, [&distances](std::size_t a, std::size_t b) { return distances(a, b); });
}

double persistence_score(const MstResult& mst, double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw ParamError("alpha must be a positive finite number, got " + std::to_string(alpha));
    double s = 0.0;
    if (alpha == 1.0) {
        for (double len : mst.edge_lengths)
            s += len;
    } else {
        for (double len : mst.edge_lengths)
            s += std::pow(len, alpha);
    }
    return s;
}

std::vector<double> zeroth_barcode(const PointCloud& cloud) {
    const std::size_t n = cloud.size();
    if (n < 2)
        throw SizeError("barcode needs at least 2 points, got " + std::to_string(n));

    std::vector<std::tuple<double, std::size_t, std::size_t>> edges;
    edges.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            edges.emplace_back(std::sqrt(squared_distance(cloud.point(i), cloud.point(j))), i, j);
    std::sort(edges.begin(), edges.end());

    // Every point is born at 0; a component dies when an edge first joins it
    // to another one, which closes the bar (0, length).
    DisjointSets components(n);
    std::vector<double> bars;
    bars.reserve(n - 1);
    for (const auto& [len, i, j] : edges) {
        if (components.unite(i, j)) {
            bars.push_back(len);
            if (bars.size() == n - 1)
                break;
        }
    }
    return bars;
}

} // namespace phdim
