#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <vector>

#include "doctest.h"
#include "gridsentry/metrics.hpp"

using namespace gridsentry;

namespace {

std::vector<Decision> make_decisions(const std::vector<int>& classes) {
    std::vector<Decision> out;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        Decision d;
        d.emit_index = static_cast<std::int64_t>(i);
        d.class_id = classes[i];
        d.confidence = classes[i] == kAbstain ? 0.3 : 0.9;
        out.push_back(d);
    }
    return out;
}

}  // namespace

TEST_CASE("stream scoring hand case") {
    //               0  1  2   3  4  5  6   7  8  9
    std::vector<int> truth{0, 0, 0, 1, 1, 1, 1, 2, 0, 0};
    auto decisions = make_decisions({0, 0, kAbstain, 1, 1, 2, kAbstain, 2, 1, 0});

    auto m = score_stream(decisions, truth);
    CHECK(m.total == 10);
    CHECK(m.classified == 8);
    CHECK(m.abstained == 2);
    CHECK(m.correct == 6);
    CHECK(m.anomaly_total == 5);
    CHECK(m.anomaly_classified == 4);
    CHECK(m.anomaly_correct == 3);
    CHECK(m.overall_accuracy() == 0.75);
    CHECK(m.anomaly_accuracy() == 0.75);
    CHECK(m.coverage() == 0.8);
}

TEST_CASE("windowed scoring keeps only the settled range") {
    std::vector<int> truth{0, 0, 0, 1, 1, 1, 1, 2, 0, 0};
    auto decisions = make_decisions({0, 0, kAbstain, 1, 1, 2, kAbstain, 2, 1, 0});

    auto m = score_stream_window(decisions, truth, 2, 7);
    CHECK(m.total == 6);
    CHECK(m.classified == 4);
    CHECK(m.abstained == 2);
    CHECK(m.correct == 3);
    CHECK(m.anomaly_total == 5);

    // degenerate window
    auto empty = score_stream_window(decisions, truth, 100, 200);
    CHECK(empty.total == 0);
    CHECK(empty.coverage() == 0.0);
}

TEST_CASE("zero coverage yields zero accuracies, not NaN") {
    std::vector<int> truth{1, 1, 1, 1};
    auto decisions = make_decisions({kAbstain, kAbstain, kAbstain, kAbstain});
    auto m = score_stream(decisions, truth);
    CHECK(m.classified == 0);
    CHECK(m.coverage() == 0.0);
    CHECK(m.overall_accuracy() == 0.0);
    CHECK(m.anomaly_accuracy() == 0.0);
}

TEST_CASE("decisions without truth are rejected") {
    std::vector<int> truth{0, 0};
    auto decisions = make_decisions({0, 0, 1});
    CHECK_THROWS_AS(score_stream(decisions, truth), ValidationError);
}

TEST_CASE("interval scoring with margins") {
    // 10 Hz stream, truth: class 5 active on [0.35, 0.75], class 9 on [1.0, 1.2]
    LabelEncoder encoder = LabelEncoder::fit({0, 5, 9});
    EventSchedule schedule;
    schedule.duration = 1.5;
    schedule.events.push_back({5, 0.35, 0.75});
    schedule.events.push_back({9, 1.0, 1.2});

    // decisions indexed 0..14; encoded: 5 -> 1, 9 -> 2
    auto decisions = make_decisions(
        {0, 0, 0, 0, 1, 1, kAbstain, 2, 0, 0, 2, 2, 2, 0, 0});

    auto scores = per_event_scores(decisions, schedule, encoder, 10.0, 0.0, 0.05, 0.05);
    REQUIRE(scores.size() == 2);

    // interior [0.40, 0.70] covers samples 4..7
    CHECK(scores[0].class_id == 5);
    CHECK(scores[0].start == doctest::Approx(0.40));
    CHECK(scores[0].end == doctest::Approx(0.70));
    CHECK(scores[0].total == 4);
    CHECK(scores[0].classified == 3);
    CHECK(scores[0].correct == 2);
    CHECK(scores[0].detection_rate() == 0.5);
    CHECK(scores[0].accuracy_classified() == doctest::Approx(2.0 / 3.0));

    // interior [1.05, 1.15] covers only sample 11
    CHECK(scores[1].class_id == 9);
    CHECK(scores[1].total == 1);
    CHECK(scores[1].classified == 1);
    CHECK(scores[1].correct == 1);
    CHECK(scores[1].detection_rate() == 1.0);

    // no margins: the second event covers samples 10..12
    auto full = per_event_scores(decisions, schedule, encoder, 10.0, 0.0, 0.0, 0.0);
    CHECK(full[1].total == 3);
    CHECK(full[1].correct == 3);

    // a nonzero capture start shifts sample times
    auto shifted = score_interval(decisions, 9, 2, 1.0, 1.2, 10.0, 0.5);
    CHECK(shifted.total == 3);  // samples 5..7 now land on [1.0, 1.2]
    CHECK(shifted.correct == 1);

    CHECK_THROWS_AS(per_event_scores(decisions, schedule, encoder, 10.0, 0.0, 0.3, 0.3),
                    ValidationError);
    CHECK_THROWS_AS(per_event_scores(decisions, schedule, encoder, 10.0, 0.0, -0.1, 0.0),
                    ValidationError);
}

TEST_CASE("confusion matrix hand case") {
    std::vector<int> truth{0, 0, 1, 1, 2, 2};
    std::vector<int> pred{0, 1, 1, 1, 2, 0};
    Matrix m = confusion_matrix(truth, pred, 3);
    CHECK(m(0, 0) == 1.0);
    CHECK(m(0, 1) == 1.0);
    CHECK(m(1, 1) == 2.0);
    CHECK(m(2, 2) == 1.0);
    CHECK(m(2, 0) == 1.0);
    CHECK(m(1, 0) == 0.0);

    CHECK_THROWS_AS(confusion_matrix(truth, {0, 1}, 3), ValidationError);
    CHECK_THROWS_AS(confusion_matrix({0, 3}, {0, 0}, 3), ValidationError);
    CHECK_THROWS_AS(confusion_matrix({0, kAbstain}, {0, 0}, 3), ValidationError);
}

TEST_CASE("high accuracy, low coverage flag") {
    StreamMetrics starving;
    starving.total = 100;
    starving.classified = 20;
    CHECK(high_accuracy_low_coverage(0.99, starving));
    CHECK(!high_accuracy_low_coverage(0.90, starving));

    StreamMetrics healthy;
    healthy.total = 100;
    healthy.classified = 90;
    CHECK(!high_accuracy_low_coverage(0.99, healthy));
}
