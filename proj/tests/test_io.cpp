#include "phdim/errors.hpp"
#include "phdim/io.hpp"

#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

using namespace phdim;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("phdim_test_io_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

/// Hand-assembled EMB1 image for a 2x3 cloud.
std::vector<std::uint8_t> minimal_file() {
    std::vector<std::uint8_t> b{'E', 'M', 'B', '1', 1, 0, 0, 0, 2, 0, 0, 0, 3, 0, 0, 0};
    for (float v : {1.0f, -2.5f, 0.0f, 3.25f, 1e-3f, 7.0f}) {
        std::uint8_t raw[4];
        std::memcpy(raw, &v, 4); // the host is little-endian
        b.insert(b.end(), raw, raw + 4);
    }
    return b;
}

template <class E>
std::uint64_t offset_of(const std::vector<std::uint8_t>& bytes) {
    try {
        decode_embeddings(bytes, "x");
    } catch (const E& e) {
        return e.offset();
    }
    FAIL("expected an error");
    return 0;
}

} // namespace

TEST_CASE("minimal EMB1 file decodes and re-encodes bit-exactly") {
    const auto bytes = minimal_file();
    const auto cloud = decode_embeddings(bytes, "mini");
    CHECK(cloud.size() == 2);
    CHECK(cloud.dim() == 3);
    CHECK(cloud.point(1)[0] == 3.25);
    CHECK(cloud.point(1)[1] == static_cast<double>(1e-3f));
    CHECK(encode_embeddings(cloud) == bytes);

    const auto dir = scratch_dir("mini");
    write_file_bytes(dir / "a.emb", bytes);
    const auto read = read_embeddings(dir / "a.emb");
    CHECK(read.id() == (dir / "a.emb").string());
    write_embeddings(dir / "b.emb", read);
    CHECK(read_file_bytes(dir / "b.emb") == bytes);
    CHECK(is_embedding_file(dir / "a.emb"));
}

TEST_CASE("EMB1 format errors name the byte offset") {
    auto bad = minimal_file();
    bad[3] = '2';
    CHECK(offset_of<BadMagic>(bad) == 0);

    bad = minimal_file();
    bad[4] = 2;
    CHECK(offset_of<BadMagic>(bad) == 4);

    bad = minimal_file();
    bad[6] = 1;
    CHECK(offset_of<BadMagic>(bad) == 6);

    bad = minimal_file();
    bad.resize(30);
    CHECK(offset_of<TruncatedFile>(bad) == 30);

    bad = minimal_file();
    bad.resize(10);
    CHECK(offset_of<TruncatedFile>(bad) == 10);

    bad = minimal_file();
    bad.push_back(0);
    CHECK(offset_of<TrailingData>(bad) == 40);

    bad = minimal_file();
    const float inf = std::numeric_limits<float>::infinity();
    std::memcpy(bad.data() + 16 + 4 * 4, &inf, 4);
    CHECK(offset_of<NonFiniteValue>(bad) == 32);

    std::vector<std::uint8_t> empty{'E', 'M', 'B', '1', 1, 0, 0, 0, 0, 0, 0, 0, 3, 0, 0, 0};
    CHECK_THROWS_AS(decode_embeddings(empty, "e"), SizeError);

    CHECK_THROWS_AS(read_embeddings("/nonexistent/file.emb"), IoError);
}

TEST_CASE("EMB1 round trip is byte-identical for random files") {
    std::mt19937_64 gen(7);
    std::uniform_int_distribution<std::uint32_t> nd(2, 40), dd(1, 24);
    std::uniform_int_distribution<std::uint32_t> bits;
    for (int trial = 0; trial < 20; ++trial) {
        const std::uint32_t n = trial == 0 ? 2 : nd(gen), dim = trial == 0 ? 1 : dd(gen);
        std::vector<std::uint8_t> b{'E', 'M', 'B', '1', 1, 0, 0, 0};
        for (std::uint32_t v : {n, dim})
            for (int k = 0; k < 4; ++k)
                b.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
        for (std::uint32_t i = 0; i < n * dim; ++i) {
            std::uint32_t raw;
            float f;
            do {
                raw = bits(gen);
                std::memcpy(&f, &raw, 4);
            } while (!std::isfinite(f));
            for (int k = 0; k < 4; ++k)
                b.push_back(static_cast<std::uint8_t>(raw >> (8 * k)));
        }
        CHECK(encode_embeddings(decode_embeddings(b, "r")) == b);
    }
}

TEST_CASE("manifest parsing") {
    const auto dir = scratch_dir("manifest");
    {
        std::ofstream out(dir / "m.jsonl");
        out << R"({"path": "a.emb", "label": "human", "language": "en", "domain": "wiki"})" << '\n'
            << '\n'
            << R"({"id": "x", "score": 8.25, "label": "generated", "generator": "gpt2"})" << '\n'
            << R"({"path": "/abs/b.emb"})" << '\n';
    }
    const auto recs = read_manifest(dir / "m.jsonl");
    REQUIRE(recs.size() == 3);
    CHECK(recs[0].id == "a.emb");
    CHECK(recs[0].path == dir / "a.emb");
    CHECK(*recs[0].label == Label::human);
    CHECK(recs[0].meta.at("language") == "en");
    CHECK(recs[0].meta.at("domain") == "wiki");
    CHECK(recs[1].id == "x");
    CHECK(*recs[1].score == 8.25);
    CHECK(recs[1].path.empty());
    CHECK(recs[2].path == fs::path("/abs/b.emb"));
    CHECK(!recs[2].label);

    {
        std::ofstream out(dir / "bad.jsonl");
        out << R"({"path": "a.emb", "label": "robot"})" << '\n';
    }
    CHECK_THROWS_AS(read_manifest(dir / "bad.jsonl"), DataError);
    {
        std::ofstream out(dir / "bad2.jsonl");
        out << R"({"label": "human"})" << '\n' << "{not json\n";
    }
    CHECK_THROWS_AS(read_manifest(dir / "bad2.jsonl"), DataError);
}

TEST_CASE("score files accept numbers or estimate records") {
    const auto dir = scratch_dir("scores");
    {
        std::ofstream out(dir / "plain.txt");
        out << "9.5\n# comment\n\n  10.25\n";
    }
    CHECK(read_scores(dir / "plain.txt") == std::vector<double>{9.5, 10.25});
    {
        std::ofstream out(dir / "report.jsonl");
        out << R"({"id":"a","value":8.5,"error":null})" << '\n'
            << R"({"id":"b","value":null,"error":"TooFewPoints"})" << '\n';
    }
    CHECK(read_scores(dir / "report.jsonl") == std::vector<double>{8.5});
    {
        std::ofstream out(dir / "bad.txt");
        out << "9.5x\n";
    }
    CHECK_THROWS_AS(read_scores(dir / "bad.txt"), DataError);
}

TEST_CASE("detector model documents round trip") {
    DetectorModel m;
    m.threshold = 8.375;
    m.calibration.method = "fpr";
    m.calibration.target_fpr = 0.01;
    m.calibration.training_set = "wiki-en";
    m.calibration.n_human = 100;
    const auto back = detector_model_from_json(to_json(m));
    CHECK(back.rule == DecisionRule::threshold);
    CHECK(back.threshold == 8.375);
    CHECK(*back.calibration.target_fpr == 0.01);
    CHECK(back.calibration.training_set == "wiki-en");
    CHECK(to_json(back) == to_json(m));

    DetectorModel lr;
    lr.rule = DecisionRule::logistic;
    lr.weight = -1.5;
    lr.bias = 13.0;
    const auto lback = detector_model_from_json(to_json(lr));
    CHECK(lback.weight == -1.5);
    CHECK(lback.bias == 13.0);

    CHECK_THROWS_AS(detector_model_from_json(Json{{"format", "other"}}), DataError);
    CHECK_THROWS_AS(detector_model_from_json(Json{{"format", "phdim-detector"}, {"version", 1}, {"rule", "tree"}}),
                    DataError);
}

TEST_CASE("manifold spec documents") {
    const auto s = manifold_spec_from_json(Json::parse(R"({"kind":"sphere","intrinsic_d":3,"n_points":50})"));
    CHECK(s.kind == ManifoldKind::sphere);
    CHECK(s.ambient_d == 4);
    CHECK(s.noise_sigma == 0.0);
    CHECK_THROWS_AS(manifold_spec_from_json(Json::parse(R"({"kind":"cube"})")), ParamError);
}
