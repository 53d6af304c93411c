#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "adacast/errors.hpp"
#include "adacast/rng.hpp"

namespace adacast {

/// Index into the task's label set {0, ..., num_classes-1}.
using ClassLabel = int;

using PredictorId = std::string;

/// Binned confidence histogram: for each true class, a discrete
/// distribution over probability bins. Stands in for the predicted
/// probability a trained model would assign, calibrated on a validation
/// set. Sampling is uniform within a bin, which makes the accept /
/// reject / undecided split computable in closed form.
struct ConfidenceProfile {
    std::vector<double> bin_edges;            ///< strictly increasing, first 0, last 1
    std::vector<std::vector<double>> mass;    ///< [true_class][bin], rows sum to 1

    /// 20 uniform bins on [0,1].
    static std::vector<double> default_edges();

    void validate(int num_classes, const std::string& context) const;

    /// P(confidence < x | true_class), linear within bins.
    double cdf(ClassLabel true_class, double x) const;

    /// Inverse CDF; u in [0,1).
    double quantile(ClassLabel true_class, double u) const;
};

enum class PredictorKind { Specialized, Fallback };

/// Cost/confidence abstraction of one model: a one-vs-rest specialized
/// predictor (SP) or the multiclass fallback (FB).
struct PredictorProfile {
    PredictorId id;
    PredictorKind kind = PredictorKind::Specialized;
    ClassLabel target = -1;        ///< SP only: the class it recognizes
    double macs = 0;               ///< multiply-accumulate ops per inference
    double memory_bytes = 0;
    double latency_ms = 0;
    double energy_mj = 0;
    /// SP: distribution of the probability assigned to `target`.
    /// FB: distribution of the argmax probability (used by big-little).
    ConfidenceProfile confidence;
    /// FB only: per-true-class predicted-label distribution.
    std::vector<std::vector<double>> confusion;

    bool is_fallback() const noexcept { return kind == PredictorKind::Fallback; }
};

/// Validation-set summary shipped with the calibration file.
struct ValidationStats {
    std::vector<double> class_distribution;   ///< sums to 1
    double fb_balanced_accuracy = 0;

    void validate(int num_classes) const;
};

/// Immutable bundle loaded from one calibration file: all predictor
/// profiles of a task plus its validation statistics. Safe to share
/// across threads after construction.
class TaskProfiles {
public:
    TaskProfiles(std::string task, int num_classes,
                 std::vector<PredictorProfile> predictors, ValidationStats stats,
                 double thr_minus, double thr_plus);

    const std::string& task() const noexcept { return task_; }
    int num_classes() const noexcept { return num_classes_; }
    double default_thr_minus() const noexcept { return thr_minus_; }
    double default_thr_plus() const noexcept { return thr_plus_; }
    const ValidationStats& stats() const noexcept { return stats_; }

    /// All predictors, SPs first sorted by id, fallback last.
    const std::vector<PredictorProfile>& predictors() const noexcept { return predictors_; }
    const PredictorProfile& fallback() const { return predictors_.back(); }
    const PredictorProfile& by_id(const PredictorId& id) const;
    int index_of(const PredictorId& id) const;

    /// Ids of all specialized predictors, sorted.
    std::vector<PredictorId> sp_ids() const;

    /// Loader warnings (e.g. an SP not strictly cheaper than the FB).
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }
    void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

private:
    std::string task_;
    int num_classes_;
    double thr_minus_;
    double thr_plus_;
    std::vector<PredictorProfile> predictors_;
    ValidationStats stats_;
    std::unordered_map<PredictorId, int> index_;
    std::vector<std::string> warnings_;
};

/// Parses and validates a calibration file (JSON, schema documented in
/// the README). Throws CalibrationError on any invariant violation.
TaskProfiles load_task_profiles(const std::filesystem::path& path);

/// Same, from an already-parsed JSON string. Exposed for tests.
TaskProfiles parse_task_profiles(const std::string& json_text);

/// Draws a confidence value for `profile` given the sample's true class.
/// One uniform variate per call; deterministic given the stream state.
double sample_confidence(const PredictorProfile& profile, ClassLabel true_class, Rng& rng);

struct ExitProbabilities {
    double accept = 0;
    double reject = 0;
    double undecided = 0;
};

/// Closed-form probability that one predictor accepts (confidence >
/// thr_plus), rejects (< thr_minus) or stays undecided, for a sample of
/// the given true class. Exact under the binned-uniform confidence model.
ExitProbabilities exit_probabilities(const PredictorProfile& profile, ClassLabel true_class,
                                     double thr_minus, double thr_plus);

/// Mean of the diagonal of a confusion matrix (per-class recall average).
double balanced_accuracy_of_confusion(const std::vector<std::vector<double>>& confusion);

} // namespace adacast
