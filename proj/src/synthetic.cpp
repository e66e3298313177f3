#include "phdim/synthetic.hpp"

#include "phdim/errors.hpp"
#include "phdim/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

namespace phdim {

std::string to_string(ManifoldKind kind) {
    switch (kind) {
    case ManifoldKind::cube: return "cube";
    case ManifoldKind::sphere: return "sphere";
    case ManifoldKind::segment: return "segment";
    }
    return "?";
}

ManifoldKind manifold_kind_from_string(const std::string& name) {
    if (name == "cube") return ManifoldKind::cube;
    if (name == "sphere") return ManifoldKind::sphere;
    if (name == "segment") return ManifoldKind::segment;
    throw ParamError("unknown manifold kind '" + name + "'");
}

std::string to_string(Estimator e) { return e == Estimator::phd ? "phd" : "mle"; }

Estimator estimator_from_string(const std::string& name) {
    if (name == "phd") return Estimator::phd;
    if (name == "mle") return Estimator::mle;
    throw ParamError("unknown estimator '" + name + "'");
}

void ManifoldSpec::validate() const {
    if (intrinsic_d < 1)
        throw ParamError("intrinsic_d must be at least 1");
    if (kind == ManifoldKind::segment && intrinsic_d != 1)
        throw ParamError("segment has intrinsic dimension 1");
    const std::size_t needed = kind == ManifoldKind::sphere ? intrinsic_d + 1 : intrinsic_d;
    if (ambient_d < needed)
        throw ParamError("ambient_d " + std::to_string(ambient_d) + " is too small for a " +
                         to_string(kind) + " of dimension " + std::to_string(intrinsic_d));
    if (n_points < 2)
        throw ParamError("n_points must be at least 2");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
        throw ParamError("noise_sigma must be a finite nonnegative number");
}

PointCloud sample_manifold(const ManifoldSpec& spec) {
    spec.validate();
    const std::size_t n = spec.n_points, big_d = spec.ambient_d, d = spec.intrinsic_d;
    SplitMix64 rng(mix_seed({spec.seed, static_cast<std::uint64_t>(spec.kind), d, big_d, n}));
    std::vector<double> coords(n * big_d, 0.0);

    switch (spec.kind) {
    case ManifoldKind::cube:
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < d; ++k)
                coords[i * big_d + k] = rng.uniform();
        break;
    case ManifoldKind::sphere:
        for (std::size_t i = 0; i < n; ++i) {
            double* p = &coords[i * big_d];
            double norm2 = 0.0;
            do {
                norm2 = 0.0;
                for (std::size_t k = 0; k <= d; ++k) {
                    p[k] = rng.normal();
                    norm2 += p[k] * p[k];
                }
            } while (norm2 == 0.0);
            const double norm = std::sqrt(norm2);
            for (std::size_t k = 0; k <= d; ++k)
                p[k] /= norm;
        }
        break;
    case ManifoldKind::segment: {
        std::vector<double> dir(big_d);
        double norm2 = 0.0;
        do {
            norm2 = 0.0;
            for (auto& v : dir) {
                v = rng.normal();
                norm2 += v * v;
            }
        } while (norm2 == 0.0);
        const double norm = std::sqrt(norm2);
        for (auto& v : dir)
            v /= norm;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) / static_cast<double>(n - 1);
            for (std::size_t k = 0; k < big_d; ++k)
                coords[i * big_d + k] = t * dir[k];
        }
        break;
    }
    }

    if (spec.noise_sigma > 0.0)
        for (auto& c : coords)
            c += spec.noise_sigma * rng.normal();

    return PointCloud(std::move(coords), big_d,
                      to_string(spec.kind) + "-d" + std::to_string(d) + "-D" + std::to_string(big_d) +
                          "-n" + std::to_string(n) + "-s" + std::to_string(spec.seed));
}

std::uint64_t repeat_seed(std::uint64_t spec_seed, std::size_t repeat) {
    return mix_seed({spec_seed, 0x5EED, repeat});
}

double lower_median(std::vector<double> values) {
    if (values.empty())
        throw DataError("median of an empty list");
    auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
    std::nth_element(values.begin(), mid, values.end());
    return *mid;
}

BenchmarkReport run_benchmark(const std::vector<ManifoldSpec>& specs,
                              const std::vector<Estimator>& estimators, std::size_t repeats,
                              const BenchmarkParams& params) {
    if (repeats < 1)
        throw ParamError("repeats must be at least 1");

    // One job per (spec, repeat); each job fills every estimator's slot, so a
    // cloud is generated once and the result layout is independent of scheduling.
    struct Outcome {
        std::optional<double> value;
        std::string failure;
    };
    const std::size_t n_est = estimators.size();
    std::vector<Outcome> outcomes(specs.size() * repeats * n_est);

    auto run_job = [&](std::size_t job) {
        const std::size_t s = job / repeats, r = job % repeats;
        ManifoldSpec spec = specs[s];
        spec.seed = repeat_seed(specs[s].seed, r);
        std::optional<PointCloud> cloud;
        std::string cloud_error;
        try {
            cloud.emplace(sample_manifold(spec));
        } catch (const Error& e) {
            cloud_error = e.kind() + ": " + e.what();
        }
        for (std::size_t e = 0; e < n_est; ++e) {
            Outcome& out = outcomes[job * n_est + e];
            if (!cloud) {
                out.failure = cloud_error;
                continue;
            }
            try {
                out.value = estimators[e] == Estimator::phd ? phd_estimate(*cloud, params.phd).value
                                                            : mle_estimate(*cloud, params.mle_neighbors);
            } catch (const Error& err) {
                out.failure = err.kind() + ": " + err.what();
            }
        }
    };

    const std::size_t jobs = specs.size() * repeats;
    std::size_t threads = params.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : params.threads;
    threads = std::min(threads, std::max<std::size_t>(jobs, 1));
    if (threads <= 1) {
        for (std::size_t job = 0; job < jobs; ++job)
            run_job(job);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t job = next++; job < jobs; job = next++)
                    run_job(job);
            });
    }

    BenchmarkReport report;
    for (std::size_t s = 0; s < specs.size(); ++s) {
        for (std::size_t e = 0; e < n_est; ++e) {
            BenchmarkCell cell;
            cell.spec = specs[s];
            cell.estimator = estimators[e];
            for (std::size_t r = 0; r < repeats; ++r) {
                const Outcome& out = outcomes[(s * repeats + r) * n_est + e];
                if (out.value)
                    cell.estimates.push_back(*out.value);
                else
                    cell.failures.push_back("repeat " + std::to_string(r) + ": " + out.failure);
            }
            if (!cell.estimates.empty()) {
                const auto d = static_cast<double>(cell.spec.intrinsic_d);
                const auto m = static_cast<double>(cell.estimates.size());
                cell.median = lower_median(cell.estimates);
                cell.mean = std::accumulate(cell.estimates.begin(), cell.estimates.end(), 0.0) / m;
                cell.percentage_error = std::abs(*cell.median - d) / d;
                double mape = 0.0;
                for (double v : cell.estimates)
                    mape += std::abs(v - d) / d;
                cell.mean_abs_percentage_error = mape / m;
            }
            report.cells.push_back(std::move(cell));
        }
    }
    return report;
}

} // namespace phdim
