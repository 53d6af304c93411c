// Writes the example calibration and scenario files under data/. The
// numeric cost figures follow the published MobileNetV2/LeNet baselines;
// the confidence histograms are synthetic calibrations shaped so the
// shipped scenarios exercise the whole control loop (scheduling, Pareto
// sweep, LC disable/reorder, GC deployment).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace {

using nlohmann::json;

// 20-bin row: `reject` mass on [0,0.1), `undecided` on [0.3,0.7),
// `accept` on (0.9,1]. Region edges align with the default thresholds.
json region_row(double reject, double undecided, double accept) {
    std::vector<double> row(20, 0.0);
    row[0] = row[1] = reject / 2.0;
    for (int b = 6; b < 14; ++b) row[b] = undecided / 8.0;
    row[18] = row[19] = accept / 2.0;
    return json(row);
}

struct Rates {
    double accept;
    double undecided;
};

json sp_confidence(int num_classes, int target, Rates own, Rates wrong,
                   const std::vector<std::pair<int, Rates>>& overrides = {}) {
    json mass = json::array();
    for (int c = 0; c < num_classes; ++c) {
        Rates r = c == target ? own : wrong;
        for (const auto& [cls, rate] : overrides)
            if (cls == c) r = rate;
        mass.push_back(region_row(1.0 - r.accept - r.undecided, r.undecided, r.accept));
    }
    return json{{"mass", mass}};
}

json fb_confidence(int num_classes, double confident) {
    json mass = json::array();
    for (int c = 0; c < num_classes; ++c)
        mass.push_back(region_row(0.0, 1.0 - confident, confident));
    return json{{"mass", mass}};
}

json confusion_matrix(const std::vector<double>& diag) {
    const auto n = diag.size();
    json rows = json::array();
    for (std::size_t c = 0; c < n; ++c) {
        std::vector<double> row(n, (1.0 - diag[c]) / static_cast<double>(n - 1));
        row[c] = diag[c];
        rows.push_back(row);
    }
    return rows;
}

json sp_profile(const std::string& id, int target, const json& confidence) {
    return json{{"id", id},
                {"target", target},
                {"macs", 0.65e6},
                {"memory_bytes", 61.24e3 * 4},
                {"latency_ms", 0.44},
                {"energy_mj", 0.40},
                {"confidence", confidence}};
}

json scd_calibration() {
    const int n = 7;
    json fallback{{"id", "fb"},
                  {"macs", 31.64e6},
                  {"memory_bytes", 696.65e3 * 4},
                  {"latency_ms", 14.24},
                  {"energy_mj", 18.13},
                  {"confidence", fb_confidence(n, 0.80)},
                  {"confusion", confusion_matrix({0.72, 0.86, 0.97, 0.86, 0.86, 0.97, 0.97})}};

    json sps = json::array();
    const Rates clean_own{0.93, 0.02}, clean_wrong{0.015, 0.01};
    for (int c : {2, 5, 6})
        sps.push_back(sp_profile("sp" + std::to_string(c), c,
                                 sp_confidence(n, c, clean_own, clean_wrong)));
    // class-0 model: accurate on its own class, heavily confusable with
    // the rare classes 1/3/4 - worth deploying only once class 0 dominates
    sps.push_back(sp_profile(
        "sp0", 0,
        sp_confidence(n, 0, {0.68, 0.03}, {0.01, 0.01},
                      {{1, {0.44, 0.02}}, {3, {0.44, 0.02}}, {4, {0.44, 0.02}}})));
    // near-useless models for the rare classes
    for (int c : {1, 3, 4})
        sps.push_back(sp_profile("sp" + std::to_string(c), c,
                                 sp_confidence(n, c, {0.05, 0.04}, {0.002, 0.01})));

    return json{{"task", "scd"},
                {"classes", n},
                {"thresholds", {{"lower", 0.1}, {"upper", 0.9}}},
                {"validation",
                 {{"distribution", {0.12, 0.092, 0.245, 0.088, 0.081, 0.069, 0.305}}}},
                {"fallback", fallback},
                {"specialized", sps}};
}

json cifar_calibration() {
    const int n = 10;
    json fallback{{"id", "fb"},
                  {"macs", 94.54e6},
                  {"memory_bytes", 2236.68e3 * 4},
                  {"latency_ms", 33.65},
                  {"energy_mj", 43.88},
                  {"confidence", fb_confidence(n, 0.82)},
                  {"confusion", confusion_matrix(std::vector<double>(n, 0.908))}};

    json sps = json::array();
    for (int c = 0; c < n; ++c) {
        // a small quality gradient keeps expected-MAC scores strictly
        // ordered, so scheduling outcomes stay stable across platforms
        Rates own{0.945 - 0.001 * c, 0.005}, wrong{0.034, 0.003};
        if (c == 3) own = {0.96, 0.005}, wrong = {0.01, 0.003};
        if (c == 4) own = {0.95, 0.005}, wrong = {0.01, 0.003};
        sps.push_back(
            sp_profile("sp" + std::to_string(c), c, sp_confidence(n, c, own, wrong)));
    }

    std::vector<double> uniform(n, 0.1);
    return json{{"task", "cifar10"},
                {"classes", n},
                {"thresholds", {{"lower", 0.1}, {"upper", 0.9}}},
                {"validation", {{"distribution", uniform}}},
                {"fallback", fallback},
                {"specialized", sps}};
}

json scenario(const std::string& name, const std::string& kind, int length, int reps,
              std::uint64_t seed, int target_class = -1) {
    json s{{"name", name}, {"kind", kind}, {"factor", 5.0},
           {"length", length}, {"repetitions", reps}, {"seed", seed}};
    if (target_class >= 0) s["target_class"] = target_class;
    return s;
}

void write(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    out << j.dump(1) << "\n";
    std::cout << "wrote " << path.string() << "\n";
}

} // namespace

int main(int argc, char** argv) {
    std::filesystem::path out = argc > 1 ? argv[1] : "data";
    std::filesystem::create_directories(out);

    write(out / "scd.json", scd_calibration());
    write(out / "cifar10.json", cifar_calibration());

    write(out / "scd_base.json", scenario("scd_base", "base", 510, 3, 12));
    write(out / "scd_mismatch_minor.json",
          scenario("scd_mismatch_minor", "mismatch_minor", 510, 3, 21));
    write(out / "scd_mismatch_major.json",
          scenario("scd_mismatch_major", "mismatch_major", 510, 3, 2, 0));

    write(out / "cifar10_base.json", scenario("cifar10_base", "base", 600, 3, 41));
    write(out / "cifar10_mismatch_minor.json",
          scenario("cifar10_mismatch_minor", "mismatch_minor", 600, 3, 51));
    // class 9 carries the weakest SP, which never enters the 4% schedule
    write(out / "cifar10_mismatch_major.json",
          scenario("cifar10_mismatch_major", "mismatch_major", 600, 3, 61, 9));
    return 0;
}
