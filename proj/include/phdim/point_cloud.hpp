#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace phdim {

/// N points of dimension D stored row-major in 64-bit floats.
///
/// Construction validates the invariants: N >= 1, D >= 1, the coordinate
/// buffer holds exactly N*D values and all of them are finite.
class PointCloud {
public:
    PointCloud(std::vector<double> coords, std::size_t dim, std::string id = {});

    /// Builds a cloud from a list of points; every point must have the same size.
    static PointCloud from_rows(const std::vector<std::vector<double>>& rows,
                                std::string id = {});

    std::size_t size() const noexcept { return n_; }
    std::size_t dim() const noexcept { return dim_; }
    const std::string& id() const noexcept { return id_; }
    void set_id(std::string id) { id_ = std::move(id); }

    std::span<const double> point(std::size_t i) const noexcept {
        return {coords_.data() + i * dim_, dim_};
    }
    std::span<const double> coords() const noexcept { return coords_; }

    /// New cloud containing the given rows, in the given order.
    PointCloud select(std::span<const std::size_t> indices) const;

private:
    std::vector<double> coords_;
    std::size_t dim_ = 0;
    std::size_t n_ = 0;
    std::string id_;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double t = a[k] - b[k];
        s += t * t;
    }
    return s;
}

} // namespace phdim
