#include "phdim/point_cloud.hpp"

#include "phdim/errors.hpp"

#include <cmath>

namespace phdim {

PointCloud::PointCloud(std::vector<double> coords, std::size_t dim, std::string id)
    : coords_(std::move(coords)), dim_(dim), id_(std::move(id)) {
    if (dim_ == 0)
        throw SizeError("point cloud dimension must be at least 1");
    if (coords_.empty() || coords_.size() % dim_ != 0)
        throw SizeError("coordinate count " + std::to_string(coords_.size()) +
                        " is not a positive multiple of dimension " + std::to_string(dim_));
    n_ = coords_.size() / dim_;
    for (std::size_t i = 0; i < coords_.size(); ++i)
        if (!std::isfinite(coords_[i]))
            throw ParamError("non-finite coordinate at point " + std::to_string(i / dim_));
}

PointCloud PointCloud::from_rows(const std::vector<std::vector<double>>& rows, std::string id) {
    if (rows.empty())
        throw SizeError("point cloud needs at least one point");
    const std::size_t dim = rows.front().size();
    std::vector<double> coords;
    coords.reserve(rows.size() * dim);
    for (const auto& r : rows) {
        if (r.size() != dim)
            throw SizeError("ragged point list: expected " + std::to_string(dim) +
                            " coordinates, got " + std::to_string(r.size()));
        coords.insert(coords.end(), r.begin(), r.end());
    }
    return PointCloud(std::move(coords), dim, std::move(id));
}

PointCloud PointCloud::select(std::span<const std::size_t> indices) const {
    std::vector<double> out;
    out.reserve(indices.size() * dim_);
    for (std::size_t i : indices) {
        auto p = point(i);
        out.insert(out.end(), p.begin(), p.end());
    }
    return PointCloud(std::move(out), dim_, id_);
}

} // namespace phdim
