#include "phdim/detector.hpp"

#include "phdim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>

namespace phdim {

std::string to_string(Label label) { return label == Label::human ? "human" : "generated"; }

Label label_from_string(const std::string& name) {
    if (name == "human") return Label::human;
    if (name == "generated") return Label::generated;
    throw DataError("unknown label '" + name + "' (expected human or generated)");
}

namespace {

std::vector<double> sorted_copy(const std::vector<double>& v) {
    std::vector<double> s(v);
    std::sort(s.begin(), s.end());
    return s;
}

void require_finite(const std::vector<double>& v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x))
            throw DataError(std::string(what) + " contains a non-finite score");
}

std::size_t count_at_or_below(const std::vector<double>& sorted, double t) {
    return static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
}

} // namespace

double rate_at_or_below(const std::vector<double>& scores, double threshold) {
    if (scores.empty())
        return 0.0;
    const auto n = std::count_if(scores.begin(), scores.end(), [&](double s) { return s <= threshold; });
    return static_cast<double>(n) / static_cast<double>(scores.size());
}

DetectorModel fit_threshold_at_fpr(const std::vector<double>& human_scores, double target_fpr) {
    if (human_scores.empty())
        throw DataError("threshold calibration needs at least one human score");
    if (!(target_fpr > 0.0 && target_fpr < 1.0))
        throw ParamError("target FPR must lie in (0, 1)");
    require_finite(human_scores, "human score list");

    const auto h = sorted_copy(human_scores);
    const auto m = static_cast<double>(h.size());

    // Largest number of flagged humans c with c / m <= target.
    auto c = static_cast<std::size_t>(std::floor(target_fpr * m));
    while (c + 1 <= h.size() && static_cast<double>(c + 1) / m <= target_fpr)
        ++c;
    while (c > 0 && static_cast<double>(c) / m > target_fpr)
        --c;

    double threshold = std::nextafter(h.front(), -std::numeric_limits<double>::infinity());
    for (std::size_t i = c; i > 0; --i) {
        if (count_at_or_below(h, h[i - 1]) <= c) {
            threshold = h[i - 1];
            break;
        }
    }

    DetectorModel model;
    model.rule = DecisionRule::threshold;
    model.threshold = threshold;
    model.calibration.method = "fpr";
    model.calibration.target_fpr = target_fpr;
    model.calibration.n_human = h.size();
    return model;
}

std::vector<double> eer_candidates(const std::vector<double>& human, const std::vector<double>& generated) {
    std::set<double> pooled(human.begin(), human.end());
    pooled.insert(generated.begin(), generated.end());
    std::vector<double> u(pooled.begin(), pooled.end());
    std::vector<double> cand;
    if (u.empty())
        return cand;
    cand.reserve(u.size() + 1);
    cand.push_back(u.front() - 1.0);
    for (std::size_t i = 0; i + 1 < u.size(); ++i)
        cand.push_back(u[i] + (u[i + 1] - u[i]) / 2.0);
    cand.push_back(u.back() + 1.0);
    return cand;
}

EerFit fit_threshold_eer(const std::vector<double>& human, const std::vector<double>& generated) {
    if (human.empty() || generated.empty())
        throw DataError("EER calibration needs both human and generated scores");
    require_finite(human, "human score list");
    require_finite(generated, "generated score list");

    const auto h = sorted_copy(human), g = sorted_copy(generated);
    const auto nh = static_cast<std::int64_t>(h.size()), ng = static_cast<std::int64_t>(g.size());

    // Compare rates exactly through cross-multiplied integer counts:
    // FPR = fp / nh, FNR = fn / ng.
    double best_t = 0.0;
    std::int64_t best_gap = std::numeric_limits<std::int64_t>::max();
    std::int64_t best_sum = std::numeric_limits<std::int64_t>::max();
    std::int64_t best_fp = 0, best_fn = 0;
    for (double t : eer_candidates(h, g)) {
        const auto fp = static_cast<std::int64_t>(count_at_or_below(h, t));
        const auto fn = ng - static_cast<std::int64_t>(count_at_or_below(g, t));
        const std::int64_t gap = std::abs(fp * ng - fn * nh);
        const std::int64_t sum = fp * ng + fn * nh;
        if (gap < best_gap || (gap == best_gap && sum < best_sum)) {
            best_gap = gap;
            best_sum = sum;
            best_t = t;
            best_fp = fp;
            best_fn = fn;
        }
    }

    EerFit fit;
    fit.eer = (static_cast<double>(best_fp) / static_cast<double>(nh) +
               static_cast<double>(best_fn) / static_cast<double>(ng)) / 2.0;
    fit.model.rule = DecisionRule::threshold;
    fit.model.threshold = best_t;
    fit.model.calibration.method = "eer";
    fit.model.calibration.eer = fit.eer;
    fit.model.calibration.n_human = h.size();
    fit.model.calibration.n_generated = g.size();
    return fit;
}

namespace {

// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
    if (x >= 0.0)
        return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace

DetectorModel fit_logistic_1d(const std::vector<ScoredSample>& samples) {
    std::vector<double> hum, gen;
    for (const auto& s : samples) {
        if (!std::isfinite(s.score))
            throw DataError("sample '" + s.id + "' has a non-finite score");
        (s.label == Label::human ? hum : gen).push_back(s.score);
    }
    if (hum.empty() || gen.empty())
        throw DataError("logistic fit needs both human and generated samples");

    DetectorModel model;
    model.calibration.method = "logistic";
    model.calibration.n_human = hum.size();
    model.calibration.n_generated = gen.size();

    const double min_h = *std::min_element(hum.begin(), hum.end());
    const double max_h = *std::max_element(hum.begin(), hum.end());
    const double min_g = *std::min_element(gen.begin(), gen.end());
    const double max_g = *std::max_element(gen.begin(), gen.end());
    if (max_g <= min_h) {
        model.rule = DecisionRule::threshold;
        model.threshold = max_g + (min_h - max_g) / 2.0;
        model.calibration.note = "perfect separation: likelihood is unbounded, using the midpoint threshold";
        return model;
    }
    if (max_h <= min_g) {
        model.rule = DecisionRule::threshold;
        model.threshold = max_h + (min_g - max_h) / 2.0;
        model.calibration.note =
            "perfect separation with generated scores above human scores: likelihood is unbounded; "
            "the fixed low-score-is-generated direction misclassifies this data";
        return model;
    }

    // Fit on standardised scores for conditioning.
    const auto n = static_cast<double>(samples.size());
    double mu = 0.0;
    for (const auto& s : samples)
        mu += s.score;
    mu /= n;
    double var = 0.0;
    for (const auto& s : samples)
        var += (s.score - mu) * (s.score - mu);
    const double sd = std::sqrt(var / n);

    auto log_lik = [&](double a, double c) {
        double ll = 0.0;
        for (const auto& s : samples) {
            const double eta = a * (s.score - mu) / sd + c;
            ll += (s.label == Label::generated ? eta : 0.0) - softplus(eta);
        }
        return ll;
    };

    const double p0 = static_cast<double>(gen.size()) / n;
    double a = 0.0, c = std::log(p0 / (1.0 - p0));
    double ll = log_lik(a, c);
    for (int iter = 0; iter < 100; ++iter) {
        double ga = 0.0, gc = 0.0, haa = 0.0, hac = 0.0, hcc = 0.0;
        for (const auto& s : samples) {
            const double z = (s.score - mu) / sd;
            const double p = sigmoid(a * z + c);
            const double r = (s.label == Label::generated ? 1.0 : 0.0) - p;
            const double w = p * (1.0 - p);
            ga += r * z;
            gc += r;
            haa += w * z * z;
            hac += w * z;
            hcc += w;
        }
        const double det = haa * hcc - hac * hac;
        if (!(det > 0.0))
            break;
        const double da = (hcc * ga - hac * gc) / det;
        const double dc = (haa * gc - hac * ga) / det;

        double step = 1.0, next_ll = ll;
        double na = a, nc = c;
        for (int halve = 0; halve < 30; ++halve) {
            na = a + step * da;
            nc = c + step * dc;
            next_ll = log_lik(na, nc);
            if (next_ll >= ll)
                break;
            step /= 2.0;
        }
        if (!(next_ll >= ll))
            break;
        const double gain = next_ll - ll;
        a = na;
        c = nc;
        ll = next_ll;
        if (gain < 1e-10)
            break;
    }

    model.rule = DecisionRule::logistic;
    model.weight = a / sd;
    model.bias = c - a * mu / sd;
    return model;
}

Label classify(const DetectorModel& model, double score) {
    if (model.rule == DecisionRule::threshold)
        return score <= model.threshold ? Label::generated : Label::human;
    return model.weight * score + model.bias > 0.0 ? Label::generated : Label::human;
}

double roc_auc(const std::vector<double>& human, const std::vector<double>& generated) {
    if (human.empty() || generated.empty())
        throw DataError("ROC-AUC needs both human and generated scores");
    require_finite(human, "human score list");
    require_finite(generated, "generated score list");

    const auto g = sorted_copy(generated);
    // Twice the Mann-Whitney count, kept integral so the result is exact.
    std::uint64_t twice = 0;
    for (double h : human) {
        const auto lo = std::lower_bound(g.begin(), g.end(), h);
        const auto hi = std::upper_bound(lo, g.end(), h);
        twice += 2 * static_cast<std::uint64_t>(lo - g.begin()) + static_cast<std::uint64_t>(hi - lo);
    }
    return static_cast<double>(twice) /
           (2.0 * static_cast<double>(human.size()) * static_cast<double>(generated.size()));
}

namespace {

GroupMetrics group_metrics(const DetectorModel& model, const std::vector<const ScoredSample*>& group,
                           const std::vector<double>& fallback_humans, const std::vector<double>& fprs) {
    GroupMetrics gm;
    std::vector<double> hum, gen;
    std::size_t correct = 0;
    for (const auto* s : group) {
        (s->label == Label::human ? hum : gen).push_back(s->score);
        if (classify(model, s->score) == s->label)
            ++correct;
    }
    gm.n_human = hum.size();
    gm.n_generated = gen.size();
    gm.model_accuracy = group.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(group.size());

    const auto& ref_humans = hum.empty() ? fallback_humans : hum;
    if (gen.empty() || ref_humans.empty())
        return gm;
    gm.roc_auc = roc_auc(ref_humans, gen);
    gm.eer = fit_threshold_eer(ref_humans, gen).eer;
    for (double f : fprs)
        gm.accuracy_at_fpr[f] = rate_at_or_below(gen, fit_threshold_at_fpr(ref_humans, f).threshold);
    return gm;
}

} // namespace

EvalReport evaluate(const DetectorModel& model, const std::vector<ScoredSample>& samples,
                    const std::vector<double>& fprs, std::size_t excluded) {
    std::vector<const ScoredSample*> all;
    std::vector<double> humans;
    bool any_generated = false;
    for (const auto& s : samples) {
        if (!std::isfinite(s.score))
            throw DataError("sample '" + s.id + "' has a non-finite score");
        all.push_back(&s);
        if (s.label == Label::human)
            humans.push_back(s.score);
        else
            any_generated = true;
    }
    if (humans.empty() || !any_generated)
        throw DataError("evaluation needs both human and generated samples");
    for (double f : fprs)
        if (!(f > 0.0 && f < 1.0))
            throw ParamError("FPR levels must lie in (0, 1)");

    EvalReport report;
    report.excluded = excluded;
    report.overall = group_metrics(model, all, humans, fprs);

    std::map<std::string, std::map<std::string, std::vector<const ScoredSample*>>> slices;
    for (const auto* s : all)
        for (const auto& [key, value] : s->meta)
            slices[key][value].push_back(s);
    for (const auto& [key, by_value] : slices)
        for (const auto& [value, group] : by_value)
            report.breakdown[key][value] = group_metrics(model, group, humans, fprs);
    return report;
}

} // namespace phdim
