#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace phdim {

enum class Label { human, generated };

std::string to_string(Label label);
Label label_from_string(const std::string& name); // throws DataError

struct ScoredSample {
    std::string id;
    double score = 0.0; // estimated intrinsic dimension
    Label label = Label::human;
    std::map<std::string, std::string> meta; // language, generator, domain, ...
};

enum class DecisionRule { threshold, logistic };

/// Calibrated one-feature decision rule. Lower scores mean "generated":
/// the threshold rule predicts generated iff score <= threshold, the logistic
/// rule iff w * score + b > 0.
struct DetectorModel {
    DecisionRule rule = DecisionRule::threshold;
    double threshold = 0.0;
    double weight = 0.0;
    double bias = 0.0;

    struct Calibration {
        std::string method;       // "fpr", "eer" or "logistic"
        std::string training_set; // free-form identifier of the calibration data
        std::optional<double> target_fpr;
        std::optional<double> eer;
        std::size_t n_human = 0;
        std::size_t n_generated = 0;
        std::string note; // e.g. the perfect-separation fallback of the logistic fit
    } calibration;
};

/// Conservative empirical quantile: the largest human score s such that the
/// fraction of human scores <= s is at most target_fpr. If even the smallest
/// score is too many, the threshold is the next double below it, so no
/// training human is flagged.
DetectorModel fit_threshold_at_fpr(const std::vector<double>& human_scores, double target_fpr);

struct EerFit {
    DetectorModel model;
    double eer = 0.0;
};

/// Threshold minimising |FPR - FNR| over the midpoints of adjacent distinct
/// pooled scores (plus one candidate below and one above all scores). Ties
/// are broken by the smaller (FPR + FNR) / 2, then by the smaller threshold.
/// The reported EER is (FPR + FNR) / 2 at the chosen threshold.
EerFit fit_threshold_eer(const std::vector<double>& human, const std::vector<double>& generated);

/// Threshold-rule candidates used by fit_threshold_eer, ascending.
std::vector<double> eer_candidates(const std::vector<double>& human, const std::vector<double>& generated);

/// 1-D logistic regression of P(generated | score) fitted by Newton/IRLS.
/// Stops when the log-likelihood gains less than 1e-10 or after 100
/// iterations. When the classes are separable the likelihood has no maximum;
/// the fit then falls back to a threshold rule at the midpoint of the gap and
/// says so in calibration.note.
DetectorModel fit_logistic_1d(const std::vector<ScoredSample>& samples);

Label classify(const DetectorModel& model, double score);

/// Mann-Whitney AUC with generated as the positive class at low scores:
/// P(gen < human) + P(gen == human) / 2.
double roc_auc(const std::vector<double>& human, const std::vector<double>& generated);

/// Fraction of scores <= threshold.
double rate_at_or_below(const std::vector<double>& scores, double threshold);

struct GroupMetrics {
    std::size_t n_human = 0;
    std::size_t n_generated = 0;
    std::optional<double> roc_auc;
    std::optional<double> eer;
    std::map<double, double> accuracy_at_fpr;
    double model_accuracy = 0.0; // fraction classified correctly by the given model
};

struct EvalReport {
    GroupMetrics overall;
    std::size_t excluded = 0; // samples without a score (estimator errors)
    /// meta key -> meta value -> metrics on that slice.
    std::map<std::string, std::map<std::string, GroupMetrics>> breakdown;
};

/// Metrics on a labelled evaluation set. Accuracy at a given FPR is the
/// detection rate on generated samples after thresholding at the
/// evaluation-set human quantile (fit_threshold_at_fpr). Slices of a meta
/// breakdown that hold only generated samples are scored against all humans.
EvalReport evaluate(const DetectorModel& model, const std::vector<ScoredSample>& samples,
                    const std::vector<double>& fprs, std::size_t excluded = 0);

} // namespace phdim
