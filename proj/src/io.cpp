#include "phdim/io.hpp"

#include "phdim/errors.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace phdim {

namespace fs = std::filesystem;

namespace {

std::uint32_t load_u32_le(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

void store_u32_le(std::uint8_t* p, std::uint32_t v) {
    p[0] = static_cast<std::uint8_t>(v);
    p[1] = static_cast<std::uint8_t>(v >> 8);
    p[2] = static_cast<std::uint8_t>(v >> 16);
    p[3] = static_cast<std::uint8_t>(v >> 24);
}

} // namespace

PointCloud decode_embeddings(std::span<const std::uint8_t> bytes, std::string id) {
    if (bytes.size() < 4)
        throw TruncatedFile("file ends inside the magic", bytes.size());
    if (std::memcmp(bytes.data(), "EMB1", 4) != 0)
        throw BadMagic("expected magic \"EMB1\"", 0);
    if (bytes.size() < kEmbHeaderSize)
        throw TruncatedFile("file ends inside the 16-byte header", bytes.size());
    if (bytes[4] != kEmbVersion)
        throw BadMagic("unsupported version " + std::to_string(bytes[4]), 4);
    for (std::size_t k = 5; k < 8; ++k)
        if (bytes[k] != 0)
            throw BadMagic("reserved header byte is not zero", k);

    const std::uint32_t n = load_u32_le(bytes.data() + 8);
    const std::uint32_t dim = load_u32_le(bytes.data() + 12);
    const std::uint64_t expected = kEmbHeaderSize + 4ull * n * dim;
    if (bytes.size() < expected)
        throw TruncatedFile("payload needs " + std::to_string(expected) + " bytes, file has " +
                                std::to_string(bytes.size()),
                            bytes.size());
    if (bytes.size() > expected)
        throw TrailingData("unexpected bytes after the payload", expected);
    if (n == 0 || dim == 0)
        throw SizeError("embedding file holds an empty cloud (n_vectors=" + std::to_string(n) +
                        ", dim=" + std::to_string(dim) + ")");

    std::vector<double> coords(static_cast<std::size_t>(n) * dim);
    const std::uint8_t* p = bytes.data() + kEmbHeaderSize;
    for (std::size_t i = 0; i < coords.size(); ++i, p += 4) {
        const auto v = std::bit_cast<float>(load_u32_le(p));
        if (!std::isfinite(v))
            throw NonFiniteValue("non-finite coordinate", kEmbHeaderSize + 4 * i);
        coords[i] = v;
    }
    return PointCloud(std::move(coords), dim, std::move(id));
}

std::vector<std::uint8_t> encode_embeddings(const PointCloud& cloud) {
    const auto coords = cloud.coords();
    std::vector<std::uint8_t> out(kEmbHeaderSize + 4 * coords.size(), 0);
    std::memcpy(out.data(), "EMB1", 4);
    out[4] = kEmbVersion;
    store_u32_le(out.data() + 8, static_cast<std::uint32_t>(cloud.size()));
    store_u32_le(out.data() + 12, static_cast<std::uint32_t>(cloud.dim()));
    std::uint8_t* p = out.data() + kEmbHeaderSize;
    for (double c : coords) {
        const auto f = static_cast<float>(c);
        if (!std::isfinite(f))
            throw ParamError("coordinate " + std::to_string(c) + " overflows binary32");
        store_u32_le(p, std::bit_cast<std::uint32_t>(f));
        p += 4;
    }
    return out;
}

std::vector<std::uint8_t> read_file_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const fs::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError("write to '" + path.string() + "' failed");
}

PointCloud read_embeddings(const fs::path& path) { return decode_embeddings(read_file_bytes(path), path.string()); }

void write_embeddings(const fs::path& path, const PointCloud& cloud) {
    write_file_bytes(path, encode_embeddings(cloud));
}

bool is_embedding_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path.string() + "'");
    char magic[4] = {};
    in.read(magic, 4);
    return in.gcount() == 4 && std::memcmp(magic, "EMB1", 4) == 0;
}

std::vector<Json> read_json_lines(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open '" + path.string() + "'");
    std::vector<Json> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        try {
            out.push_back(Json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::vector<ManifestRecord> read_manifest(const fs::path& path) {
    const fs::path base = path.parent_path();
    std::vector<ManifestRecord> records;
    std::size_t index = 0;
    for (const auto& j : read_json_lines(path)) {
        ++index;
        const std::string where = path.string() + " record " + std::to_string(index);
        if (!j.is_object())
            throw DataError(where + ": expected a JSON object");
        ManifestRecord r;
        try {
            for (const auto& [key, value] : j.items()) {
                if (key == "path") {
                    fs::path p = value.get<std::string>();
                    r.path = p.is_absolute() ? p : base / p;
                    if (r.id.empty())
                        r.id = value.get<std::string>();
                } else if (key == "id") {
                    r.id = value.get<std::string>();
                } else if (key == "label") {
                    r.label = label_from_string(value.get<std::string>());
                } else if (key == "score") {
                    r.score = value.get<double>();
                } else if (value.is_string()) {
                    r.meta[key] = value.get<std::string>();
                }
            }
        } catch (const nlohmann::json::exception& e) {
            throw DataError(where + ": " + e.what());
        } catch (const DataError& e) {
            throw DataError(where + ": " + e.what());
        }
        if (r.path.empty() && !r.score)
            throw DataError(where + ": needs a \"path\" or a \"score\"");
        if (r.id.empty())
            r.id = "record-" + std::to_string(index);
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<double> read_scores(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open '" + path.string() + "'");
    std::vector<double> scores;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#')
            continue;
        const std::string where = path.string() + ":" + std::to_string(lineno);
        if (line[first] == '{') {
            Json j;
            try {
                j = Json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw DataError(where + ": " + e.what());
            }
            if (j.contains("error") && !j["error"].is_null())
                continue;
            if (!j.contains("value") || !j["value"].is_number())
                throw DataError(where + ": record has no numeric \"value\"");
            scores.push_back(j["value"].get<double>());
        } else {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(line.substr(first), &used);
            } catch (const std::exception&) {
                throw DataError(where + ": not a number");
            }
            if (line.find_first_not_of(" \t\r", first + used) != std::string::npos)
                throw DataError(where + ": trailing characters after the score");
            scores.push_back(v);
        }
        if (!std::isfinite(scores.back()))
            throw DataError(where + ": non-finite score");
    }
    return scores;
}

Json to_json(const PhdParams& p) {
    return Json{{"alpha", p.alpha},
                {"k_grid", p.k_grid},
                {"j_samples", p.j_samples},
                {"rounds", p.rounds},
                {"min_subsample", p.min_subsample},
                {"seed", p.seed},
                {"canonical_order", p.canonical_order}};
}

PhdParams phd_params_from_json(const Json& j) {
    PhdParams p;
    try {
        p.alpha = j.value("alpha", p.alpha);
        p.k_grid = j.value("k_grid", p.k_grid);
        p.j_samples = j.value("j_samples", p.j_samples);
        p.rounds = j.value("rounds", p.rounds);
        p.min_subsample = j.value("min_subsample", p.min_subsample);
        p.seed = j.value("seed", p.seed);
        p.canonical_order = j.value("canonical_order", p.canonical_order);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad PHD parameters: ") + e.what());
    }
    p.validate();
    return p;
}

namespace {

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

} // namespace

Json to_json(const DetectorModel& m) {
    Json j;
    j["format"] = "phdim-detector";
    j["version"] = 1;
    j["rule"] = m.rule == DecisionRule::threshold ? "threshold" : "logistic";
    if (m.rule == DecisionRule::threshold) {
        j["threshold"] = m.threshold;
        j["direction"] = "generated_if_score_le_threshold";
    } else {
        j["weight"] = m.weight;
        j["bias"] = m.bias;
        j["direction"] = "generated_if_weight_times_score_plus_bias_gt_0";
    }
    Json cal;
    cal["method"] = m.calibration.method;
    cal["training_set"] = m.calibration.training_set;
    cal["target_fpr"] = optional_number(m.calibration.target_fpr);
    cal["eer"] = optional_number(m.calibration.eer);
    cal["n_human"] = m.calibration.n_human;
    cal["n_generated"] = m.calibration.n_generated;
    cal["note"] = m.calibration.note;
    j["calibration"] = cal;
    return j;
}

DetectorModel detector_model_from_json(const Json& j) {
    DetectorModel m;
    try {
        if (j.value("format", std::string{}) != "phdim-detector")
            throw DataError("not a detector model document");
        if (j.value("version", 0) != 1)
            throw DataError("unsupported detector model version");
        const auto rule = j.at("rule").get<std::string>();
        if (rule == "threshold") {
            m.rule = DecisionRule::threshold;
            m.threshold = j.at("threshold").get<double>();
            if (!std::isfinite(m.threshold))
                throw DataError("threshold must be finite");
        } else if (rule == "logistic") {
            m.rule = DecisionRule::logistic;
            m.weight = j.at("weight").get<double>();
            m.bias = j.at("bias").get<double>();
        } else {
            throw DataError("unknown rule '" + rule + "'");
        }
        if (j.contains("calibration")) {
            const auto& cal = j["calibration"];
            m.calibration.method = cal.value("method", std::string{});
            m.calibration.training_set = cal.value("training_set", std::string{});
            if (cal.contains("target_fpr") && cal["target_fpr"].is_number())
                m.calibration.target_fpr = cal["target_fpr"].get<double>();
            if (cal.contains("eer") && cal["eer"].is_number())
                m.calibration.eer = cal["eer"].get<double>();
            m.calibration.n_human = cal.value("n_human", std::size_t{0});
            m.calibration.n_generated = cal.value("n_generated", std::size_t{0});
            m.calibration.note = cal.value("note", std::string{});
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed detector model: ") + e.what());
    }
    return m;
}

DetectorModel read_detector_model(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open '" + path.string() + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    return detector_model_from_json(j);
}

void write_detector_model(const fs::path& path, const DetectorModel& model) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw IoError("cannot write '" + path.string() + "'");
    out << to_json(model).dump(2) << '\n';
}

Json to_json(const GroupMetrics& g) {
    Json acc = Json::array();
    for (const auto& [fpr, a] : g.accuracy_at_fpr) {
        Json e;
        e["fpr"] = fpr;
        e["accuracy"] = a;
        acc.push_back(e);
    }
    return Json{{"n_human", g.n_human},
                {"n_generated", g.n_generated},
                {"roc_auc", optional_number(g.roc_auc)},
                {"eer", optional_number(g.eer)},
                {"accuracy_at_fpr", acc},
                {"model_accuracy", g.model_accuracy}};
}

Json to_json(const EvalReport& r) {
    Json j = to_json(r.overall);
    j["excluded"] = r.excluded;
    Json breakdown = Json::object();
    for (const auto& [key, by_value] : r.breakdown) {
        Json slot = Json::object();
        for (const auto& [value, metrics] : by_value)
            slot[value] = to_json(metrics);
        breakdown[key] = slot;
    }
    j["breakdown"] = breakdown;
    return j;
}

Json to_json(const ManifoldSpec& s) {
    return Json{{"kind", to_string(s.kind)},       {"intrinsic_d", s.intrinsic_d},
                {"ambient_d", s.ambient_d},        {"n_points", s.n_points},
                {"noise_sigma", s.noise_sigma},    {"seed", s.seed}};
}

ManifoldSpec manifold_spec_from_json(const Json& j) {
    ManifoldSpec s;
    try {
        s.kind = manifold_kind_from_string(j.at("kind").get<std::string>());
        s.intrinsic_d = j.at("intrinsic_d").get<std::size_t>();
        s.ambient_d = j.value("ambient_d", s.intrinsic_d + (s.kind == ManifoldKind::sphere ? 1 : 0));
        s.n_points = j.at("n_points").get<std::size_t>();
        s.noise_sigma = j.value("noise_sigma", 0.0);
        s.seed = j.value("seed", std::uint64_t{0});
    } catch (const nlohmann::json::exception& e) {
        throw ParamError(std::string("malformed manifold spec: ") + e.what());
    }
    s.validate();
    return s;
}

Json to_json(const BenchmarkCell& c) {
    return Json{{"spec", to_json(c.spec)},
                {"estimator", to_string(c.estimator)},
                {"estimates", c.estimates},
                {"failures", c.failures},
                {"median", optional_number(c.median)},
                {"mean", optional_number(c.mean)},
                {"percentage_error", optional_number(c.percentage_error)},
                {"mean_abs_percentage_error", optional_number(c.mean_abs_percentage_error)}};
}

void write_json_lines(const fs::path& path, const std::vector<Json>& records) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw IoError("cannot write '" + path.string() + "'");
    for (const auto& r : records)
        out << r.dump() << '\n';
    if (!out)
        throw IoError("write to '" + path.string() + "' failed");
}

} // namespace phdim
