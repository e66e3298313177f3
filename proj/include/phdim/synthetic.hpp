#pragma once

#include "phdim/estimators.hpp"
#include "phdim/point_cloud.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace phdim {

enum class ManifoldKind { cube, sphere, segment };

std::string to_string(ManifoldKind kind);
ManifoldKind manifold_kind_from_string(const std::string& name); // throws ParamError

/// Recipe for a point cloud with known intrinsic dimension.
struct ManifoldSpec {
    ManifoldKind kind = ManifoldKind::cube;
    std::size_t intrinsic_d = 1;
    std::size_t ambient_d = 1;
    std::size_t n_points = 2;
    double noise_sigma = 0.0; // per-coordinate Gaussian std, all ambient dims
    std::uint64_t seed = 0;

    void validate() const; // throws ParamError
};

/// cube: uniform in [0,1]^d on the first d coordinates.
/// sphere: uniform on the unit d-sphere in the first d+1 coordinates.
/// segment: n equally spaced points on [0,1] along a random unit direction.
/// Isotropic Gaussian noise is then added to every ambient coordinate.
PointCloud sample_manifold(const ManifoldSpec& spec);

enum class Estimator { phd, mle };

std::string to_string(Estimator e);
Estimator estimator_from_string(const std::string& name); // throws ParamError

struct BenchmarkParams {
    PhdParams phd;
    std::size_t mle_neighbors = 20;
    std::size_t threads = 1; // 0 = hardware concurrency
};

struct BenchmarkCell {
    ManifoldSpec spec;
    Estimator estimator = Estimator::phd;
    std::vector<double> estimates;     // successful repeats, in repeat order
    std::vector<std::string> failures; // "repeat r: Kind: message"
    std::optional<double> median;
    std::optional<double> mean;
    std::optional<double> percentage_error;      // |median - d| / d
    std::optional<double> mean_abs_percentage_error; // mean of |estimate - d| / d
};

struct BenchmarkReport {
    std::vector<BenchmarkCell> cells; // spec-major, estimator order as given
};

/// Seed used for repeat `r` of a spec.
std::uint64_t repeat_seed(std::uint64_t spec_seed, std::size_t repeat);

/// Estimates `repeats` fresh clouds per (spec, estimator). Estimator errors
/// are recorded in the cell instead of aborting the run.
BenchmarkReport run_benchmark(const std::vector<ManifoldSpec>& specs,
                              const std::vector<Estimator>& estimators, std::size_t repeats,
                              const BenchmarkParams& params = {});

/// Lower median of a non-empty list.
double lower_median(std::vector<double> values);

} // namespace phdim
