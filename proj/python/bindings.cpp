#include "phdim/detector.hpp"
#include "phdim/errors.hpp"
#include "phdim/estimators.hpp"
#include "phdim/geometry.hpp"
#include "phdim/io.hpp"
#include "phdim/synthetic.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace phdim;

namespace {

PointCloud cloud_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& points,
                            const std::string& id) {
    if (points.ndim() != 2)
        throw SizeError("points must be a 2-D array of shape (N, D)");
    const auto n = static_cast<std::size_t>(points.shape(0));
    const auto dim = static_cast<std::size_t>(points.shape(1));
    std::vector<double> coords(points.data(), points.data() + n * dim);
    return PointCloud(std::move(coords), dim, id);
}

py::array_t<double> cloud_to_array(const PointCloud& cloud) {
    py::array_t<double> out({cloud.size(), cloud.dim()});
    std::copy(cloud.coords().begin(), cloud.coords().end(), out.mutable_data());
    return out;
}

} // namespace

PYBIND11_MODULE(_phdim, m) {
    m.doc() = "Intrinsic-dimension estimation (PHD, MLE) and score-based generated-text detection";

    static py::exception<Error> base_error(m, "Error");
    // Register each error kind as a Python subclass of phdim.Error.
    auto sub = [&](const char* name) { return py::exception<Error>(m, name, base_error.ptr()); };
    static auto size_error = sub("SizeError");
    static auto param_error = sub("ParamError");
    static auto too_few = sub("TooFewPoints");
    static auto unstable = sub("UnstableEstimate");
    static auto degenerate = sub("DegenerateCloud");
    static auto data_error = sub("DataError");
    static auto format_error = sub("FormatError");
    static auto io_error = sub("IoError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p)
                std::rethrow_exception(p);
        } catch (const FormatError& e) {
            py::set_error(format_error, (e.kind() + ": " + e.what()).c_str());
        } catch (const Error& e) {
            const std::string& k = e.kind();
            py::object target = k == "SizeError" ? size_error
                              : k == "ParamError" ? param_error
                              : k == "TooFewPoints" ? too_few
                              : k == "UnstableEstimate" ? unstable
                              : k == "DegenerateCloud" ? degenerate
                              : k == "DataError" ? data_error
                              : k == "IoError" ? io_error
                                               : py::object(base_error);
            py::set_error(target, e.what());
        }
    });

    // Geometry
    m.def(
        "euclidean_mst",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& points) {
            return euclidean_mst(cloud_from_array(points, {})).edge_lengths;
        },
        py::arg("points"), "MST edge lengths of an (N, D) point array.");
    m.def(
        "persistence_score",
        [](std::vector<double> edge_lengths, double alpha) {
            MstResult mst;
            mst.edge_lengths = std::move(edge_lengths);
            return persistence_score(mst, alpha);
        },
        py::arg("edge_lengths"), py::arg("alpha") = 1.0);
    m.def(
        "zeroth_barcode",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& points) {
            return zeroth_barcode(cloud_from_array(points, {}));
        },
        py::arg("points"));

    // Estimators
    py::class_<PhdParams>(m, "PhdParams")
        .def(py::init<>())
        .def_readwrite("alpha", &PhdParams::alpha)
        .def_readwrite("k_grid", &PhdParams::k_grid)
        .def_readwrite("j_samples", &PhdParams::j_samples)
        .def_readwrite("rounds", &PhdParams::rounds)
        .def_readwrite("min_subsample", &PhdParams::min_subsample)
        .def_readwrite("seed", &PhdParams::seed)
        .def_readwrite("canonical_order", &PhdParams::canonical_order);

    py::class_<DimensionEstimate>(m, "DimensionEstimate")
        .def_readonly("value", &DimensionEstimate::value)
        .def_readonly("slopes", &DimensionEstimate::slopes)
        .def_readonly("regression_points", &DimensionEstimate::regression_points)
        .def_readonly("params", &DimensionEstimate::params);

    m.def("subsample_sizes", &subsample_sizes, py::arg("n"), py::arg("params") = PhdParams{});
    m.def("slope_to_dimension", &slope_to_dimension, py::arg("kappa"));
    m.def(
        "phd_estimate",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& points, const PhdParams& params,
           const std::string& id) {
            auto cloud = cloud_from_array(points, id);
            py::gil_scoped_release release;
            return phd_estimate(cloud, params);
        },
        py::arg("points"), py::arg("params") = PhdParams{}, py::arg("id") = "");
    m.def(
        "mle_estimate",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& points, std::size_t k) {
            auto cloud = cloud_from_array(points, {});
            py::gil_scoped_release release;
            return mle_estimate(cloud, k);
        },
        py::arg("points"), py::arg("k_neighbors") = 20);

    // Synthetic manifolds
    m.def(
        "sample_manifold",
        [](const std::string& kind, std::size_t intrinsic_d, std::size_t ambient_d, std::size_t n_points,
           double noise_sigma, std::uint64_t seed) {
            return cloud_to_array(
                sample_manifold({manifold_kind_from_string(kind), intrinsic_d, ambient_d, n_points, noise_sigma, seed}));
        },
        py::arg("kind"), py::arg("intrinsic_d"), py::arg("ambient_d"), py::arg("n_points"),
        py::arg("noise_sigma") = 0.0, py::arg("seed") = 0);

    // Detector
    m.def("roc_auc", &roc_auc, py::arg("human"), py::arg("generated"));
    m.def(
        "fit_threshold_at_fpr",
        [](const std::vector<double>& human, double target_fpr) {
            return fit_threshold_at_fpr(human, target_fpr).threshold;
        },
        py::arg("human"), py::arg("target_fpr") = 0.01, "Threshold flagging at most target_fpr of humans.");
    m.def(
        "fit_threshold_eer",
        [](const std::vector<double>& human, const std::vector<double>& generated) {
            auto fit = fit_threshold_eer(human, generated);
            return py::make_tuple(fit.model.threshold, fit.eer);
        },
        py::arg("human"), py::arg("generated"), "Returns (threshold, eer).");
    m.def(
        "fit_logistic_1d",
        [](const std::vector<double>& human, const std::vector<double>& generated) {
            std::vector<ScoredSample> samples;
            for (double s : human)
                samples.push_back({{}, s, Label::human, {}});
            for (double s : generated)
                samples.push_back({{}, s, Label::generated, {}});
            return py::str(to_json(fit_logistic_1d(samples)).dump());
        },
        py::arg("human"), py::arg("generated"), "Fitted model as a JSON document.");
    m.def(
        "classify",
        [](const std::string& model_json, double score) {
            return to_string(classify(detector_model_from_json(Json::parse(model_json)), score));
        },
        py::arg("model_json"), py::arg("score"));

    // EMB1
    m.def(
        "read_embeddings", [](const std::filesystem::path& path) { return cloud_to_array(read_embeddings(path)); },
        py::arg("path"));
    m.def(
        "write_embeddings",
        [](const std::filesystem::path& path,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& points) {
            write_embeddings(path, cloud_from_array(points, {}));
        },
        py::arg("path"), py::arg("points"));
}
