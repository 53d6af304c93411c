#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "adacast/cascade.hpp"
#include "test_support.hpp"

using namespace adacast;
using namespace adacast::testing;

namespace {

// Sample with hand-set confidences; label draws pinned to the diagonal
// (u = 0 selects the first positive confusion entry, so use a diag-heavy FB).
DrawnSample fixed_sample(const TaskProfiles& profiles, ClassLabel truth,
                         const std::vector<std::pair<PredictorId, double>>& confidences,
                         double fb_label_u = 0.0) {
    DrawnSample s;
    s.true_class = truth;
    s.confidence.assign(profiles.predictors().size(), 0.0);
    s.label_u.assign(profiles.predictors().size(), fb_label_u);
    for (const auto& [id, conf] : confidences)
        s.confidence[static_cast<std::size_t>(profiles.index_of(id))] = conf;
    return s;
}

TaskProfiles four_class_task() {
    // mirrors the running example: four classes, SPs for classes 3 and 1
    return make_task(4, {{"sp3", 3}, {"sp1", 1}});
}

} // namespace

TEST_CASE("evaluate stops at the first confident SP") {
    const auto task = four_class_task();
    const auto config = make_config(task, {"sp3", "sp1"});
    const auto out = evaluate(fixed_sample(task, 3, {{"sp3", 0.95}}), config, task);
    CHECK(out.predicted == 3);
    CHECK(out.executed == std::vector<PredictorId>{"sp3"});
    CHECK(out.exit == ExitReason{ExitKind::AcceptAtSp, 0});
    CHECK(out.macs == doctest::Approx(0.65e6));
}

TEST_CASE("evaluate routes undecided confidence straight to the fallback") {
    const auto task = four_class_task();
    const auto config = make_config(task, {"sp3", "sp1"});
    const auto out = evaluate(fixed_sample(task, 3, {{"sp3", 0.5}, {"sp1", 0.95}}), config, task);
    // sp1 is skipped even though it would have accepted
    CHECK(out.executed == std::vector<PredictorId>{"sp3", "fb"});
    CHECK(out.exit == ExitReason{ExitKind::UndecidedToFb, 0});
}

TEST_CASE("evaluate falls through to the fallback when every SP rejects") {
    const auto task = four_class_task();
    const auto config = make_config(task, {"sp3", "sp1"});
    const auto out = evaluate(fixed_sample(task, 0, {{"sp3", 0.05}, {"sp1", 0.05}}), config, task);
    CHECK(out.executed == std::vector<PredictorId>{"sp3", "sp1", "fb"});
    CHECK(out.exit.kind == ExitKind::ExhaustedToFb);
    CHECK(out.macs == doctest::Approx(0.65e6 + 0.65e6 + 31.64e6));
    CHECK(out.predicted == 0);   // diag-heavy confusion, label_u = 0
}

TEST_CASE("evaluate threshold boundaries are undecided per the three-way rule") {
    const auto task = four_class_task();
    const auto config = make_config(task, {"sp3"});
    // equality with either threshold is undecided
    CHECK(evaluate(fixed_sample(task, 3, {{"sp3", 0.9}}), config, task).exit.kind ==
          ExitKind::UndecidedToFb);
    CHECK(evaluate(fixed_sample(task, 3, {{"sp3", 0.1}}), config, task).exit.kind ==
          ExitKind::UndecidedToFb);
    CHECK(evaluate(fixed_sample(task, 3, {{"sp3", 0.0999}}), config, task).exit.kind ==
          ExitKind::ExhaustedToFb);

    // with thr_minus = 0 and thr_plus = 1, any confidence inside (0,1)
    // sits in the undecided band and routes straight to the fallback
    const auto wide = make_config(task, {"sp3"}, 0.0, 1.0);
    for (double conf : {0.001, 0.4, 0.97}) {
        const auto out = evaluate(fixed_sample(task, 3, {{"sp3", conf}}), wide, task);
        CHECK(out.exit.kind == ExitKind::UndecidedToFb);
    }
}

TEST_CASE("empty enabled set degenerates to fallback-only") {
    const auto task = four_class_task();
    auto config = make_config(task, {"sp3"});
    config.enabled[0] = false;
    const auto out = evaluate(fixed_sample(task, 2, {}), config, task);
    CHECK(out.executed == std::vector<PredictorId>{"fb"});
    CHECK(out.exit.kind == ExitKind::FbOnly);
}

TEST_CASE("config constructor rejects bad thresholds and structure") {
    const auto task = four_class_task();
    CHECK_THROWS_AS(make_config(task, {"sp3"}, 0.2, 0.1), ThresholdError);
    CHECK_THROWS_AS(make_config(task, {"sp3"}, 0.0, 1.5), ThresholdError);
    CHECK_THROWS_AS(make_config(task, {"sp3", "sp3"}), ConfigError);
    const auto five = make_task(2, {{"a", 0}, {"b", 1}});
    CHECK_THROWS_AS(make_config(five, {"a", "b", "a"}), ConfigError);
}

TEST_CASE("big-little executes the big model only below tau") {
    const auto big = make_fb({}, 4, "big");
    const auto little = make_fb({0.8, 2.0e6, 1.0e5, 2.0, 1.0, 0.75}, 4, "little");

    BigLittleSample sample{1, 0.6, 0.0, 0.0};

    SUBCASE("tau = 0 never runs the big model") {
        const auto out = big_little_evaluate(sample, little, big, 0.0);
        CHECK(out.executed == std::vector<PredictorId>{"little"});
    }
    SUBCASE("tau = 1 always runs the big model (no mass at exactly 1)") {
        Rng rng(3);
        for (int i = 0; i < 200; ++i) {
            const auto drawn = draw_big_little_sample(little, 2, rng);
            const auto out = big_little_evaluate(drawn, little, big, 1.0);
            CHECK(out.executed.size() == 2);
        }
    }
    SUBCASE("tau = 0.5 with confidence 0.6 stays little") {
        const auto out = big_little_evaluate(sample, little, big, 0.5);
        CHECK(out.executed == std::vector<PredictorId>{"little"});
        CHECK(out.macs == doctest::Approx(2.0e6));
    }
}

TEST_CASE("worst-case latency sums the enabled cascade") {
    const auto task = make_task(7, {{"sp6", 6}, {"sp2", 2}, {"sp5", 5}});
    NodeConstraints c{8e6, 50.0, 0.5};

    const auto three = make_config(task, {"sp6", "sp2", "sp5"});
    CHECK(worst_case_latency(three, c, task) == doctest::Approx(16.06));

    NodeConstraints zero_lc{8e6, 100.0, 0.0};
    auto none = make_config(task, {});
    // CIFAR-10-style fallback latency
    auto cifar_fb = FbSpec{};
    cifar_fb.latency_ms = 33.65;
    const auto cifar = make_task(10, {{"sp0", 0}}, cifar_fb);
    CHECK(worst_case_latency(make_config(cifar, {}), zero_lc, cifar) == doctest::Approx(33.65));
    CHECK(worst_case_latency(none, zero_lc, task) == doctest::Approx(14.24));
}

TEST_CASE("worst-case latency is monotone in the enabled set") {
    const auto task = make_uniform_task(5, 0.9, 0.02);
    NodeConstraints c{1e9, 1000.0, 0.3};
    auto config = make_config(task, task.sp_ids());
    double prev = worst_case_latency(make_config(task, {}), c, task);
    for (std::size_t d = 0; d < config.ordered_sps.size(); ++d) {
        auto partial = config;
        for (std::size_t i = d + 1; i < partial.enabled.size(); ++i) partial.enabled[i] = false;
        const double wcl = worst_case_latency(partial, c, task);
        CHECK(wcl >= prev);
        prev = wcl;
    }
}

TEST_CASE("expected cost equals the SP cost when the first SP always accepts") {
    const auto task = make_task(3, {{"sp0", 0, 1.0, 0.0, 1.0, 0.0}});
    const auto config = make_config(task, {"sp0"});
    const std::vector<double> dist{0.5, 0.3, 0.2};
    CHECK(expected_cost(config, dist, task).macs == doctest::Approx(0.65e6));
}

TEST_CASE("expected cost of the bare fallback is the fallback cost") {
    const auto task = make_uniform_task(4, 0.9, 0.02);
    const std::vector<double> dist{0.25, 0.25, 0.25, 0.25};
    CHECK(expected_cost(make_config(task, {}), dist, task).macs == doctest::Approx(31.64e6));
}

TEST_CASE("expected cost follows the hand chain rule and the Monte-Carlo oracle") {
    // every SP: accept 0.5 / reject 0.5, no undecided, for every class
    const auto task = make_task(2, {{"sp0", 0, 0.5, 0.0, 0.5, 0.0}, {"sp1", 1, 0.5, 0.0, 0.5, 0.0}});
    const auto config = make_config(task, {"sp0", "sp1"});
    const std::vector<double> dist{0.5, 0.5};

    const double expected = 0.65e6 + 0.5 * 0.65e6 + 0.25 * 31.64e6;
    const auto analytic = expected_cost(config, dist, task);
    CHECK(analytic.macs == doctest::Approx(expected));   // 8.885e6, hand-derived

    const auto mc = mc_estimate(config, task, dist, 1000000, 99);
    CHECK(rel_err(analytic.macs, mc.macs) < 0.01);
    CHECK(rel_err(analytic.latency_ms, mc.latency_ms) < 0.01);
    CHECK(rel_err(analytic.energy_mj, mc.energy_mj) < 0.01);
}

TEST_CASE("expected accuracy: perfect fallback and harmless SPs") {
    FbSpec perfect;
    perfect.diag = 1.0;
    const auto fb_only_task = make_task(4, {{"sp0", 0, 0.9, 0.02, 0.0, 0.0}}, perfect);
    const std::vector<double> dist{0.25, 0.25, 0.25, 0.25};

    CHECK(expected_balanced_accuracy(make_config(fb_only_task, {}), dist, fb_only_task) ==
          doctest::Approx(1.0));
    // SP accepts only on its own class: still perfect
    CHECK(expected_balanced_accuracy(make_config(fb_only_task, {"sp0"}), dist, fb_only_task) ==
          doctest::Approx(1.0));
}

TEST_CASE("expected accuracy accounts for wrong accepts, vs Monte-Carlo") {
    // SP accepts with prob 0.2 on every non-target class, identity FB, 4 classes
    FbSpec perfect;
    perfect.diag = 1.0;
    const auto task = make_task(4, {{"sp0", 0, 1.0, 0.0, 0.2, 0.0}}, perfect);
    const std::vector<double> dist{0.25, 0.25, 0.25, 0.25};
    const auto config = make_config(task, {"sp0"});

    const auto est = expected_accuracy(config, dist, task);
    CHECK(est.per_class_recall[0] == doctest::Approx(1.0));
    for (int c = 1; c < 4; ++c) CHECK(est.per_class_recall[c] == doctest::Approx(0.8));
    CHECK(est.balanced == doctest::Approx(0.85));

    const auto mc = mc_estimate(config, task, dist, 1000000, 7);
    CHECK(std::abs(est.balanced - mc.balanced_accuracy) < 0.005);
}

TEST_CASE("outcome macs equal the executed-profile sum exactly") {
    const auto task = make_uniform_task(5, 0.7, 0.1, 0.1);
    const auto config = make_config(task, task.sp_ids());
    Rng rng(31337);
    for (int i = 0; i < 2000; ++i) {
        const auto truth = static_cast<ClassLabel>(rng.below(5));
        const auto sample = draw_sample(task, truth, rng);
        const auto out = evaluate(sample, config, task);
        double macs = 0;
        for (const auto& id : out.executed) macs += task.by_id(id).macs;
        CHECK(out.macs == macs);   // exact, integer-valued MAC units
    }
}

TEST_CASE("expected cost honors the enable mask, vs Monte-Carlo") {
    const auto task = make_uniform_task(5, 0.7, 0.05, 0.08);
    auto config = make_config(task, task.sp_ids());
    config.enabled = {true, false, true, false, true};
    const std::vector<double> dist{0.3, 0.25, 0.2, 0.15, 0.1};
    const auto analytic = expected_cost(config, dist, task);
    const auto mc = mc_estimate(config, task, dist, 200000, 77);
    CHECK(rel_err(analytic.macs, mc.macs) < 0.01);

    // identical to the equivalent three-SP cascade
    const auto equivalent = make_config(task, {"sp0", "sp2", "sp4"});
    CHECK(expected_cost(equivalent, dist, task).macs == doctest::Approx(analytic.macs));
}

TEST_CASE("property: analytic expected cost matches Monte-Carlo on random configs") {
    Rng meta(4242);
    for (int trial = 0; trial < 5; ++trial) {
        const int classes = 3 + static_cast<int>(meta.below(3));
        std::vector<SpSpec> sps;
        for (int c = 0; c < classes; ++c) {
            SpSpec s{"sp" + std::to_string(c), c};
            s.accept = 0.4 + 0.5 * meta.uniform();
            s.undecided = (1.0 - s.accept) * meta.uniform();
            s.wrong_accept = 0.15 * meta.uniform();
            s.wrong_undecided = 0.1 * meta.uniform();
            sps.push_back(s);
        }
        const auto task = make_task(classes, sps);
        std::vector<double> dist(static_cast<std::size_t>(classes));
        double total = 0;
        for (auto& p : dist) total += (p = 0.05 + meta.uniform());
        for (auto& p : dist) p /= total;

        auto order = task.sp_ids();
        const auto depth = 1 + meta.below(static_cast<std::uint64_t>(order.size()));
        order.resize(depth);
        const auto config = make_config(task, order);

        const auto analytic = expected_cost(config, dist, task);
        const auto mc = mc_estimate(config, task, dist, 150000, 1000 + trial);
        CHECK(rel_err(analytic.macs, mc.macs) < 0.01);
    }
}

TEST_CASE("property: early-exit dominance under SP disabling") {
    // disabling an SP never changes samples that exited before its position
    const auto task = make_uniform_task(5, 0.6, 0.1, 0.15);
    auto full = make_config(task, task.sp_ids());
    Rng rng(888);
    for (int i = 0; i < 3000; ++i) {
        const auto truth = static_cast<ClassLabel>(rng.below(5));
        const auto sample = draw_sample(task, truth, rng);
        const auto out = evaluate(sample, full, task);
        if (out.exit.kind != ExitKind::AcceptAtSp ||
            out.exit.position >= full.depth() - 1)
            continue;
        auto pruned = full;
        pruned.enabled.back() = false;   // disable an SP after the exit position
        const auto out2 = evaluate(sample, pruned, task);
        CHECK(out2.predicted == out.predicted);
        CHECK(out2.executed == out.executed);
        CHECK(out2.exit == out.exit);
    }
}
