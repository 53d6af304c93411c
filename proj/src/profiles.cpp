#include "adacast/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace adacast {

namespace {

constexpr double kSumTolerance = 1e-9;

void require(bool ok, const std::string& msg) {
    if (!ok) throw CalibrationError(msg);
}

double sum(std::span<const double> v) {
    double s = 0;
    for (double x : v) s += x;
    return s;
}

} // namespace

std::vector<double> ConfidenceProfile::default_edges() {
    std::vector<double> edges(21);
    for (int i = 0; i <= 20; ++i) edges[i] = static_cast<double>(i) / 20.0;
    edges.back() = 1.0;
    return edges;
}

void ConfidenceProfile::validate(int num_classes, const std::string& context) const {
    require(bin_edges.size() >= 2, context + ": needs at least two bin edges");
    require(bin_edges.front() == 0.0, context + ": first bin edge must be 0");
    require(bin_edges.back() == 1.0, context + ": last bin edge must be 1");
    for (std::size_t i = 1; i < bin_edges.size(); ++i)
        require(bin_edges[i] > bin_edges[i - 1], context + ": bin edges must be strictly increasing");
    require(static_cast<int>(mass.size()) == num_classes,
            context + ": every true class needs a confidence row");
    for (int c = 0; c < num_classes; ++c) {
        require(mass[c].size() == bin_edges.size() - 1,
                context + ": confidence row length must match bin count");
        for (double w : mass[c])
            require(w >= 0.0, context + ": negative confidence mass");
        require(std::abs(sum(mass[c]) - 1.0) <= kSumTolerance,
                context + ": confidence row distribution must sum to 1");
    }
}

double ConfidenceProfile::cdf(ClassLabel true_class, double x) const {
    const auto& row = mass[static_cast<std::size_t>(true_class)];
    if (x <= bin_edges.front()) return 0.0;
    if (x >= bin_edges.back()) return 1.0;
    double acc = 0;
    for (std::size_t b = 0; b + 1 < bin_edges.size(); ++b) {
        const double lo = bin_edges[b], hi = bin_edges[b + 1];
        if (x >= hi) {
            acc += row[b];
        } else {
            acc += row[b] * (x - lo) / (hi - lo);
            break;
        }
    }
    return acc;
}

double ConfidenceProfile::quantile(ClassLabel true_class, double u) const {
    const auto& row = mass[static_cast<std::size_t>(true_class)];
    double acc = 0;
    for (std::size_t b = 0; b + 1 < bin_edges.size(); ++b) {
        if (row[b] <= 0) continue;
        if (u < acc + row[b]) {
            const double frac = (u - acc) / row[b];
            return bin_edges[b] + frac * (bin_edges[b + 1] - bin_edges[b]);
        }
        acc += row[b];
    }
    // u landed in the rounding slack past the last positive bin
    for (std::size_t b = bin_edges.size() - 1; b-- > 0;)
        if (row[b] > 0) return bin_edges[b + 1];
    return bin_edges.back();
}

void ValidationStats::validate(int num_classes) const {
    require(static_cast<int>(class_distribution.size()) == num_classes,
            "validation distribution must cover every class");
    for (double p : class_distribution)
        require(p >= 0.0, "validation distribution has a negative frequency");
    require(std::abs(sum(class_distribution) - 1.0) <= kSumTolerance,
            "validation distribution must sum to 1");
    require(fb_balanced_accuracy >= 0.0 && fb_balanced_accuracy <= 1.0,
            "fb balanced accuracy must lie in [0,1]");
}

TaskProfiles::TaskProfiles(std::string task, int num_classes,
                           std::vector<PredictorProfile> predictors, ValidationStats stats,
                           double thr_minus, double thr_plus)
    : task_(std::move(task)),
      num_classes_(num_classes),
      thr_minus_(thr_minus),
      thr_plus_(thr_plus),
      predictors_(std::move(predictors)),
      stats_(std::move(stats)) {
    require(num_classes_ > 0, "class count must be positive");
    if (!(thr_minus_ >= 0.0 && thr_minus_ <= thr_plus_ && thr_plus_ <= 1.0))
        throw ThresholdError("task thresholds must satisfy 0 <= thr_minus <= thr_plus <= 1");

    // canonical order: SPs sorted by id, fallback last
    std::stable_sort(predictors_.begin(), predictors_.end(),
                     [](const PredictorProfile& a, const PredictorProfile& b) {
                         if (a.is_fallback() != b.is_fallback()) return !a.is_fallback();
                         return a.id < b.id;
                     });

    int fb_count = 0;
    std::vector<bool> target_seen(static_cast<std::size_t>(num_classes_), false);
    for (std::size_t i = 0; i < predictors_.size(); ++i) {
        const auto& p = predictors_[i];
        require(!p.id.empty(), "predictor id must not be empty");
        require(index_.emplace(p.id, static_cast<int>(i)).second,
                "duplicate predictor id '" + p.id + "'");
        require(p.macs > 0, p.id + ": macs must be positive");
        require(p.latency_ms > 0, p.id + ": latency_ms must be positive");
        require(p.energy_mj >= 0, p.id + ": energy_mj must be non-negative");
        require(p.memory_bytes > 0, p.id + ": memory_bytes must be positive");
        p.confidence.validate(num_classes_, p.id);
        if (p.is_fallback()) {
            ++fb_count;
            require(static_cast<int>(p.confusion.size()) == num_classes_,
                    p.id + ": fallback needs a confusion row per true class");
            for (const auto& row : p.confusion) {
                require(static_cast<int>(row.size()) == num_classes_,
                        p.id + ": confusion rows must have one entry per predicted class");
                for (double w : row) require(w >= 0.0, p.id + ": negative confusion mass");
                require(std::abs(sum(row) - 1.0) <= kSumTolerance,
                        p.id + ": confusion row distribution must sum to 1");
            }
        } else {
            require(p.target >= 0 && p.target < num_classes_,
                    p.id + ": SP target class out of range");
            if (target_seen[static_cast<std::size_t>(p.target)])
                throw CalibrationError("duplicate target class " + std::to_string(p.target));
            target_seen[static_cast<std::size_t>(p.target)] = true;
        }
    }
    require(fb_count != 0, "no fallback profile in calibration");
    require(fb_count == 1, "calibration must contain exactly one fallback");
    require(predictors_.size() >= 2, "calibration must contain at least one SP");

    stats_.validate(num_classes_);

    const auto& fb = predictors_.back();
    for (const auto& p : predictors_) {
        if (p.is_fallback()) continue;
        if (!(p.macs < fb.macs && p.memory_bytes < fb.memory_bytes))
            warnings_.push_back(p.id + ": SP is not strictly cheaper than the fallback");
    }
}

const PredictorProfile& TaskProfiles::by_id(const PredictorId& id) const {
    return predictors_[static_cast<std::size_t>(index_of(id))];
}

int TaskProfiles::index_of(const PredictorId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw CalibrationError("unknown predictor id '" + id + "'");
    return it->second;
}

std::vector<PredictorId> TaskProfiles::sp_ids() const {
    std::vector<PredictorId> ids;
    for (const auto& p : predictors_)
        if (!p.is_fallback()) ids.push_back(p.id);
    return ids;
}

namespace {

using nlohmann::json;

ConfidenceProfile parse_confidence(const json& j, const std::vector<double>& default_edges) {
    ConfidenceProfile cp;
    cp.bin_edges = j.contains("bins") ? j.at("bins").get<std::vector<double>>() : default_edges;
    cp.mass = j.at("mass").get<std::vector<std::vector<double>>>();
    return cp;
}

PredictorProfile parse_predictor(const json& j, PredictorKind kind,
                                 const std::vector<double>& default_edges) {
    PredictorProfile p;
    p.kind = kind;
    p.id = j.at("id").get<std::string>();
    p.macs = j.at("macs").get<double>();
    p.memory_bytes = j.at("memory_bytes").get<double>();
    p.latency_ms = j.at("latency_ms").get<double>();
    p.energy_mj = j.at("energy_mj").get<double>();
    p.confidence = parse_confidence(j.at("confidence"), default_edges);
    if (kind == PredictorKind::Specialized)
        p.target = j.at("target").get<int>();
    else
        p.confusion = j.at("confusion").get<std::vector<std::vector<double>>>();
    return p;
}

TaskProfiles parse_task_json(const json& root) {
    const auto task = root.at("task").get<std::string>();
    const int num_classes = root.at("classes").get<int>();

    std::vector<double> default_edges = ConfidenceProfile::default_edges();
    if (root.contains("bins")) default_edges = root.at("bins").get<std::vector<double>>();

    double thr_minus = 0.1, thr_plus = 0.9;
    if (root.contains("thresholds")) {
        thr_minus = root.at("thresholds").at("lower").get<double>();
        thr_plus = root.at("thresholds").at("upper").get<double>();
    }

    std::vector<PredictorProfile> predictors;
    if (!root.contains("fallback")) throw CalibrationError("no fallback profile in calibration");
    predictors.push_back(parse_predictor(root.at("fallback"), PredictorKind::Fallback, default_edges));
    for (const auto& sp : root.at("specialized"))
        predictors.push_back(parse_predictor(sp, PredictorKind::Specialized, default_edges));

    ValidationStats stats;
    const auto& val = root.at("validation");
    stats.class_distribution = val.at("distribution").get<std::vector<double>>();
    if (val.contains("fb_balanced_accuracy"))
        stats.fb_balanced_accuracy = val.at("fb_balanced_accuracy").get<double>();
    else
        stats.fb_balanced_accuracy = balanced_accuracy_of_confusion(predictors.front().confusion);

    return TaskProfiles(task, num_classes, std::move(predictors), std::move(stats),
                        thr_minus, thr_plus);
}

} // namespace

TaskProfiles load_task_profiles(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CalibrationError("cannot open calibration file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_task_profiles(buf.str());
}

TaskProfiles parse_task_profiles(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw CalibrationError(std::string("calibration parse error: ") + e.what());
    }
    try {
        return parse_task_json(root);
    } catch (const json::exception& e) {
        throw CalibrationError(std::string("calibration schema error: ") + e.what());
    }
}

double sample_confidence(const PredictorProfile& profile, ClassLabel true_class, Rng& rng) {
    return profile.confidence.quantile(true_class, rng.uniform());
}

ExitProbabilities exit_probabilities(const PredictorProfile& profile, ClassLabel true_class,
                                     double thr_minus, double thr_plus) {
    if (!(thr_minus >= 0.0 && thr_minus <= thr_plus && thr_plus <= 1.0))
        throw ThresholdError("exit_probabilities: need 0 <= thr_minus <= thr_plus <= 1");
    ExitProbabilities e;
    e.reject = profile.confidence.cdf(true_class, thr_minus);
    e.accept = 1.0 - profile.confidence.cdf(true_class, thr_plus);
    e.undecided = std::max(0.0, 1.0 - e.reject - e.accept);
    return e;
}

double balanced_accuracy_of_confusion(const std::vector<std::vector<double>>& confusion) {
    if (confusion.empty()) return 0.0;
    double s = 0;
    for (std::size_t c = 0; c < confusion.size(); ++c) s += confusion[c][c];
    return s / static_cast<double>(confusion.size());
}

} // namespace adacast
