#include "oracles.hpp"

#include "phdim/detector.hpp"
#include "phdim/errors.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace phdim;

namespace {

std::vector<ScoredSample> labelled(const std::vector<double>& human, const std::vector<double>& generated) {
    std::vector<ScoredSample> out;
    for (std::size_t i = 0; i < human.size(); ++i)
        out.push_back({"h" + std::to_string(i), human[i], Label::human, {}});
    for (std::size_t i = 0; i < generated.size(); ++i)
        out.push_back({"g" + std::to_string(i), generated[i], Label::generated, {}});
    return out;
}

/// Random scores rounded to one decimal so that ties occur.
std::vector<double> random_scores(std::mt19937_64& gen, std::size_t n, double mean) {
    std::normal_distribution<double> nd(mean, 1.0);
    std::vector<double> v(n);
    for (auto& x : v)
        x = std::round(nd(gen) * 10.0) / 10.0;
    return v;
}

} // namespace

TEST_CASE("threshold at fpr") {
    const auto m = fit_threshold_at_fpr({9, 10, 11}, 0.01);
    CHECK(m.threshold < 9.0);
    CHECK(rate_at_or_below({9, 10, 11}, m.threshold) == 0.0);

    std::vector<double> hundred;
    for (int i = 1; i <= 100; ++i)
        hundred.push_back(i);
    const auto q = fit_threshold_at_fpr(hundred, 0.05);
    CHECK(q.threshold == 5.0);
    CHECK(rate_at_or_below(hundred, q.threshold) == 0.05);
    CHECK(q.calibration.method == "fpr");

    CHECK_THROWS_AS(fit_threshold_at_fpr({}, 0.01), DataError);
    CHECK_THROWS_AS(fit_threshold_at_fpr({1.0}, 0.0), ParamError);
    CHECK_THROWS_AS(fit_threshold_at_fpr({1.0}, 1.0), ParamError);
}

TEST_CASE("threshold at fpr with ties stays conservative") {
    // Flagging 2 of 4 is allowed, but the value 2 appears twice after 1.
    const auto m = fit_threshold_at_fpr({1, 2, 2, 3}, 0.5);
    CHECK(m.threshold == 1.0);
}

TEST_CASE("threshold at fpr matches the exhaustive sweep") {
    std::mt19937_64 gen(10);
    std::uniform_int_distribution<std::size_t> size(1, 500);
    for (int trial = 0; trial < 50; ++trial) {
        const auto h = random_scores(gen, size(gen), 9.0);
        for (double f : {0.01, 0.05, 0.1, 0.37}) {
            const double t = fit_threshold_at_fpr(h, f).threshold;
            CHECK(t == oracle::sweep_threshold_at_fpr(h, f));
            CHECK(rate_at_or_below(h, t) <= f);
        }
    }
}

TEST_CASE("eer threshold") {
    const auto sep = fit_threshold_eer({9, 10, 11}, {7, 8});
    CHECK(sep.model.threshold > 8.0);
    CHECK(sep.model.threshold < 9.0);
    CHECK(sep.eer == 0.0);

    CHECK(fit_threshold_eer({1, 2}, {1, 2}).eer == 0.5);

    // Sweep by hand: candidate 8.5 gives FPR 1/4 and FNR 1/3, the smallest gap.
    const auto mixed = fit_threshold_eer({8, 9, 10, 11}, {7, 8, 9});
    CHECK(mixed.model.threshold == 8.5);
    CHECK(mixed.eer == doctest::Approx(7.0 / 24.0));
    const auto brute = oracle::sweep_eer({8, 9, 10, 11}, {7, 8, 9});
    CHECK(mixed.model.threshold == brute.threshold);
    CHECK(mixed.eer == brute.eer);

    CHECK(fit_threshold_eer({5}, {5}).eer == 0.5);
    CHECK_THROWS_AS(fit_threshold_eer({}, {1}), DataError);
    CHECK_THROWS_AS(fit_threshold_eer({1}, {}), DataError);
}

TEST_CASE("eer matches the exhaustive sweep") {
    std::mt19937_64 gen(20);
    std::uniform_int_distribution<std::size_t> size(1, 250);
    for (int trial = 0; trial < 50; ++trial) {
        const auto h = random_scores(gen, size(gen), 9.0);
        const auto g = random_scores(gen, size(gen), 8.0);
        const auto fit = fit_threshold_eer(h, g);
        const auto brute = oracle::sweep_eer(h, g);
        CHECK(fit.model.threshold == brute.threshold);
        CHECK(fit.eer == brute.eer);
    }
}

TEST_CASE("roc auc") {
    CHECK(roc_auc({9, 10}, {7, 8}) == 1.0);
    CHECK(roc_auc({1, 2, 3}, {1, 2, 3}) == 0.5);
    CHECK(roc_auc({1, 2}, {1.5}) == 0.5);
    CHECK(roc_auc({7, 8}, {9, 10}) == 0.0);
    CHECK_THROWS_AS(roc_auc({}, {1}), DataError);
    CHECK_THROWS_AS(roc_auc({1}, {}), DataError);
}

TEST_CASE("roc auc equals pair counting") {
    std::mt19937_64 gen(30);
    std::uniform_int_distribution<std::size_t> size(1, 250);
    for (int trial = 0; trial < 50; ++trial) {
        const auto h = random_scores(gen, size(gen), 9.0);
        const auto g = random_scores(gen, size(gen), 8.5);
        CHECK(roc_auc(h, g) == oracle::brute_auc(h, g));
    }
}

TEST_CASE("roc auc of swapped classes is the complement without ties") {
    std::mt19937_64 gen(31);
    std::normal_distribution<double> nd;
    std::vector<double> h(40), g(30);
    for (auto& x : h)
        x = nd(gen) + 1.0;
    for (auto& x : g)
        x = nd(gen);
    CHECK(roc_auc(h, g) + roc_auc(g, h) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("rank metrics are invariant to increasing transforms") {
    std::mt19937_64 gen(32);
    const auto h = random_scores(gen, 80, 9.0);
    const auto g = random_scores(gen, 70, 8.0);
    auto f = [](double x) { return std::exp(x / 3.0) + x * x * x; };
    std::vector<double> fh, fg;
    std::transform(h.begin(), h.end(), std::back_inserter(fh), f);
    std::transform(g.begin(), g.end(), std::back_inserter(fg), f);
    CHECK(roc_auc(fh, fg) == roc_auc(h, g));
    CHECK(fit_threshold_eer(fh, fg).eer == fit_threshold_eer(h, g).eer);

    DetectorModel m;
    m.threshold = 8.3;
    DetectorModel fm;
    fm.threshold = f(8.3);
    for (double x : h)
        CHECK(classify(m, x) == classify(fm, f(x)));
}

TEST_CASE("classify") {
    DetectorModel m;
    m.threshold = 8.5;
    CHECK(classify(m, 8.0) == Label::generated);
    CHECK(classify(m, 9.0) == Label::human);
    CHECK(classify(m, 8.5) == Label::generated);

    DetectorModel lr;
    lr.rule = DecisionRule::logistic;
    lr.weight = -2.0;
    lr.bias = 18.0;
    CHECK(classify(lr, 8.0) == Label::generated);
    CHECK(classify(lr, 10.0) == Label::human);
    CHECK(classify(lr, 9.0) == Label::human); // w*s+b == 0 is not > 0
}

TEST_CASE("logistic fit on separable data falls back to a midpoint threshold") {
    const auto m = fit_logistic_1d(labelled({9, 10, 11}, {7, 8}));
    CHECK(m.rule == DecisionRule::threshold);
    CHECK(m.threshold > 8.0);
    CHECK(m.threshold < 9.0);
    CHECK(!m.calibration.note.empty());
    CHECK(classify(m, 7.9) == Label::generated);
    CHECK(classify(m, 9.0) == Label::human);

    const auto rev = fit_logistic_1d(labelled({1, 2}, {5, 6}));
    CHECK(rev.calibration.note.find("generated scores above") != std::string::npos);
}

TEST_CASE("logistic fit on symmetric noisy data puts the boundary at the centre") {
    std::vector<double> human, generated;
    for (double d : {0.3, 0.7, 1.0, 1.4, 2.0, 2.5}) {
        human.push_back(9.0 + d);
        generated.push_back(9.0 - d);
    }
    // Label noise, mirrored.
    human.push_back(8.6);
    generated.push_back(9.4);
    human.push_back(8.1);
    generated.push_back(9.9);

    const auto samples = labelled(human, generated);
    const auto m = fit_logistic_1d(samples);
    REQUIRE(m.rule == DecisionRule::logistic);
    CHECK(m.weight < 0.0);
    CHECK(-m.bias / m.weight == doctest::Approx(9.0).epsilon(1e-6));

    // Finite-difference gradient of the log-likelihood vanishes at the fit.
    auto ll = [&](double w, double b) {
        double s = 0.0;
        for (const auto& x : samples) {
            const double eta = w * x.score + b;
            s += (x.label == Label::generated ? eta : 0.0) - std::log1p(std::exp(eta));
        }
        return s;
    };
    const double h = 1e-6;
    const double dw = (ll(m.weight + h, m.bias) - ll(m.weight - h, m.bias)) / (2 * h);
    const double db = (ll(m.weight, m.bias + h) - ll(m.weight, m.bias - h)) / (2 * h);
    CHECK(std::abs(dw) < 1e-4);
    CHECK(std::abs(db) < 1e-4);
}

TEST_CASE("logistic fit needs both classes") {
    CHECK_THROWS_AS(fit_logistic_1d(labelled({9, 10}, {})), DataError);
    CHECK_THROWS_AS(fit_logistic_1d(labelled({}, {7})), DataError);
}

TEST_CASE("evaluate on separable and identical populations") {
    DetectorModel m;
    m.threshold = 8.5;
    const auto sep = evaluate(m, labelled({9, 10, 11, 12}, {5, 6, 7, 8}), {0.01}, 2);
    CHECK(sep.overall.accuracy_at_fpr.at(0.01) == 1.0);
    CHECK(*sep.overall.roc_auc == 1.0);
    CHECK(*sep.overall.eer == 0.0);
    CHECK(sep.overall.model_accuracy == 1.0);
    CHECK(sep.excluded == 2);

    std::mt19937_64 gen(40);
    const auto same = random_scores(gen, 300, 9.0);
    const auto id = evaluate(m, labelled(same, same), {0.01, 0.05}, 0);
    CHECK(id.overall.accuracy_at_fpr.at(0.01) <= 0.01);
    CHECK(id.overall.accuracy_at_fpr.at(0.05) <= 0.05);
    CHECK(*id.overall.roc_auc == 0.5);

    CHECK_THROWS_AS(evaluate(m, labelled({1, 2}, {}), {0.01}), DataError);
    CHECK_THROWS_AS(evaluate(m, labelled({1, 2}, {1}), {1.5}), ParamError);
}

TEST_CASE("evaluate breaks results down by meta") {
    std::vector<ScoredSample> s{
        {"h1", 9.5, Label::human, {{"language", "en"}}},
        {"h2", 10.0, Label::human, {{"language", "en"}}},
        {"h3", 7.0, Label::human, {{"language", "zh"}}},
        {"h4", 7.5, Label::human, {{"language", "zh"}}},
        {"g1", 8.0, Label::generated, {{"language", "en"}, {"generator", "gpt2"}}},
        {"g2", 6.0, Label::generated, {{"language", "zh"}, {"generator", "opt"}}},
    };
    DetectorModel m;
    m.threshold = 8.5;
    const auto r = evaluate(m, s, {0.01});
    REQUIRE(r.breakdown.count("language"));
    const auto& en = r.breakdown.at("language").at("en");
    CHECK(en.n_human == 2);
    CHECK(en.n_generated == 1);
    CHECK(*en.roc_auc == 1.0);
    const auto& zh = r.breakdown.at("language").at("zh");
    CHECK(*zh.roc_auc == 1.0);
    CHECK(zh.model_accuracy == doctest::Approx(1.0 / 3.0));
    // Generator slices have no humans and are scored against all of them.
    const auto& gpt2 = r.breakdown.at("generator").at("gpt2");
    CHECK(gpt2.n_human == 0);
    CHECK(*gpt2.roc_auc == 0.5); // 8.0 beats 9.5 and 10.0, loses to 7.0 and 7.5
}

TEST_CASE("evaluate is invariant to sample order") {
    std::mt19937_64 gen(41);
    auto samples = labelled(random_scores(gen, 60, 9.0), random_scores(gen, 50, 8.0));
    DetectorModel m;
    m.threshold = 8.6;
    const auto a = evaluate(m, samples, {0.01, 0.1});
    std::shuffle(samples.begin(), samples.end(), gen);
    const auto b = evaluate(m, samples, {0.01, 0.1});
    CHECK(*a.overall.roc_auc == *b.overall.roc_auc);
    CHECK(*a.overall.eer == *b.overall.eer);
    CHECK(a.overall.accuracy_at_fpr == b.overall.accuracy_at_fpr);
    CHECK(a.overall.model_accuracy == b.overall.model_accuracy);
}
