#pragma once

#include "phdim/point_cloud.hpp"

#include <span>
#include <vector>

namespace phdim {

/// Edge lengths of a Euclidean minimum spanning tree. Only the multiset of
/// lengths is kept; it is the same for every MST of the cloud.
struct MstResult {
    std::vector<double> edge_lengths; // N-1 entries, in Prim insertion order
    double total_weight = 0.0;
};

/// Dense Prim over the complete Euclidean graph. O(N^2 D) time, O(N) memory.
/// Throws SizeError for fewer than two points.
MstResult euclidean_mst(const PointCloud& cloud);

/// Same as above, restricted to the rows listed in `subset`.
MstResult euclidean_mst(const PointCloud& cloud, std::span<const std::size_t> subset);

/// Dense matrix of squared pairwise distances, used when many MSTs are built
/// over subsets of the same cloud.
class SquaredDistances {
public:
    explicit SquaredDistances(const PointCloud& cloud);

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return d_[i * n_ + j]; }

private:
    std::size_t n_;
    std::vector<double> d_;
};

/// MST over the rows in `subset`, reading distances from a precomputed matrix.
/// Gives bit-identical lengths to the on-the-fly overloads.
MstResult euclidean_mst(const SquaredDistances& distances, std::span<const std::size_t> subset);

/// Sum of |e|^alpha over MST edges. Throws ParamError unless alpha > 0.
double persistence_score(const MstResult& mst, double alpha);

/// Finite bar lengths of the 0-th persistence barcode of the Vietoris-Rips
/// filtration, obtained by merging components with union-find over all
/// pairwise edges in increasing length. Quadratic memory; meant as a test
/// oracle for euclidean_mst, not for production use.
std::vector<double> zeroth_barcode(const PointCloud& cloud);

} // namespace phdim
