#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "harvestkit/evaluation.hpp"
#include "testutil.hpp"

using hk::BinaryMask;
using hk::Detection;
using hk::GroundTruthInstance;
using hk::MatchResult;
using hk::OcclusionLevel;
using hk::average_precision;
using hk::match_detections;
using hk::occlusion_level_for_ratio;
using hk::occlusion_level_from_name;
using hk::precision_recall;

namespace {

constexpr int kW = 48, kH = 16;

BinaryMask box_mask(int x0, int y0, int x1, int y1, int w = kW, int h = kH) {
    BinaryMask m(w, h);
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) m.set(x, y, true);
    }
    return m;
}

Detection det(BinaryMask m, double conf, int cls = 0, int img = 0) {
    return Detection{std::move(m), conf, cls, img};
}

GroundTruthInstance gt(BinaryMask m, int cls = 0, int img = 0) {
    GroundTruthInstance g;
    g.amodal_mask = std::move(m);
    g.class_id = cls;
    g.image_id = img;
    return g;
}

}  // namespace

TEST_CASE("occlusion level names round trip") {
    using hk::occlusion_level_from_name;
    using hk::occlusion_level_name;
    for (OcclusionLevel lvl : {OcclusionLevel::Zero, OcclusionLevel::Low,
                               OcclusionLevel::Medium, OcclusionLevel::High}) {
        const auto back = occlusion_level_from_name(occlusion_level_name(lvl));
        REQUIRE(back.has_value());
        CHECK(*back == lvl);
    }
    CHECK_FALSE(occlusion_level_from_name("total").has_value());
    CHECK_FALSE(occlusion_level_from_name("Zero").has_value());  // names are lowercase
}

TEST_CASE("occlusion bands have inclusive upper bounds") {
    using hk::occlusion_level_for_ratio;
    CHECK(occlusion_level_for_ratio(0.0) == OcclusionLevel::Zero);
    CHECK(occlusion_level_for_ratio(0.005) == OcclusionLevel::Zero);
    CHECK(occlusion_level_for_ratio(0.006) == OcclusionLevel::Low);
    CHECK(occlusion_level_for_ratio(0.20) == OcclusionLevel::Low);
    CHECK(occlusion_level_for_ratio(0.21) == OcclusionLevel::Medium);
    CHECK(occlusion_level_for_ratio(0.50) == OcclusionLevel::Medium);
    CHECK(occlusion_level_for_ratio(0.51) == OcclusionLevel::High);
    CHECK(occlusion_level_for_ratio(1.0) == OcclusionLevel::High);
    tu::expect_error(hk::ErrorCode::RangeError, [] { occlusion_level_for_ratio(-0.1); });
    tu::expect_error(hk::ErrorCode::RangeError, [] { occlusion_level_for_ratio(1.1); });

    CHECK(hk::occlusion_level(100.0, 100.0) == OcclusionLevel::Zero);
    CHECK(hk::occlusion_level(40.0, 100.0) == OcclusionLevel::High);
    tu::expect_error(hk::ErrorCode::InvalidArgument, [] { hk::occlusion_level(1.0, 0.0); });
    tu::expect_error(hk::ErrorCode::ConsistencyError, [] { hk::occlusion_level(101.0, 100.0); });
}

TEST_CASE("greedy matching follows confidence, IoU, and index order") {
    std::vector<GroundTruthInstance> gts;
    gts.push_back(gt(box_mask(0, 0, 8, 8)));    // gt 0
    gts.push_back(gt(box_mask(16, 0, 24, 8)));  // gt 1

    // Higher-confidence detection claims the better-overlapping ground truth
    // first; the weaker one is left with nothing above the threshold.
    std::vector<Detection> dets;
    dets.push_back(det(box_mask(0, 0, 8, 8), 0.95));   // exact copy of gt 0
    dets.push_back(det(box_mask(0, 0, 8, 6), 0.90));   // overlaps gt 0 only
    const MatchResult m = match_detections(dets, gts, 0.5);
    REQUIRE(m.pairs.size() == 1);
    CHECK(m.pairs[0].det == 0);
    CHECK(m.pairs[0].gt == 0);
    CHECK(m.pairs[0].iou == 1.0);
    CHECK(m.unmatched_dets == std::vector<int>{1});
    CHECK(m.unmatched_gts == std::vector<int>{1});
}

TEST_CASE("equal IoU ties resolve to the lowest ground-truth index") {
    std::vector<GroundTruthInstance> gts;
    gts.push_back(gt(box_mask(0, 0, 2, 2)));  // gt 0, area 4
    gts.push_back(gt(box_mask(8, 0, 10, 2)));  // gt 1, area 4

    // One detection covering both squares: IoU 4/8 with each.
    BinaryMask both(kW, kH);
    for (int y = 0; y < 2; ++y) {
        for (int x = 0; x < 2; ++x) {
            both.set(x, y, true);
            both.set(x + 8, y, true);
        }
    }
    const MatchResult m = match_detections({det(std::move(both), 0.9)}, gts, 0.3);
    REQUIRE(m.pairs.size() == 1);
    CHECK(m.pairs[0].gt == 0);
    CHECK(tu::close(m.pairs[0].iou, 0.5, 1e-15));
}

TEST_CASE("confidence ties keep detection index order") {
    std::vector<GroundTruthInstance> gts;
    gts.push_back(gt(box_mask(0, 0, 8, 8)));
    std::vector<Detection> dets;
    dets.push_back(det(box_mask(0, 0, 8, 8), 0.7));
    dets.push_back(det(box_mask(0, 0, 8, 8), 0.7));  // same confidence, same mask
    const MatchResult m = match_detections(dets, gts, 0.5);
    REQUIRE(m.pairs.size() == 1);
    CHECK(m.pairs[0].det == 0);  // stable order: earlier index wins the claim
    CHECK(m.unmatched_dets == std::vector<int>{1});
}

TEST_CASE("matching respects class and image boundaries") {
    std::vector<GroundTruthInstance> gts;
    gts.push_back(gt(box_mask(0, 0, 8, 8), /*cls=*/1, /*img=*/0));
    gts.push_back(gt(box_mask(0, 0, 8, 8), /*cls=*/0, /*img=*/1));

    std::vector<Detection> dets;
    dets.push_back(det(box_mask(0, 0, 8, 8), 0.9, /*cls=*/0, /*img=*/0));  // wrong class
    dets.push_back(det(box_mask(0, 0, 8, 8), 0.8, /*cls=*/0, /*img=*/0));  // wrong image for gt 1
    const MatchResult m = match_detections(dets, gts, 0.5);
    CHECK(m.pairs.empty());
    CHECK(m.unmatched_dets.size() == 2);
    CHECK(m.unmatched_gts.size() == 2);

    // Same mask, right class and image: matches.
    const MatchResult ok =
        match_detections({det(box_mask(0, 0, 8, 8), 0.9, 0, 1)}, gts, 0.5);
    REQUIRE(ok.pairs.size() == 1);
    CHECK(ok.pairs[0].gt == 1);
}

TEST_CASE("one-to-one matching sends the runner-up to the next ground truth") {
    std::vector<GroundTruthInstance> gts;
    gts.push_back(gt(box_mask(0, 0, 8, 8)));
    gts.push_back(gt(box_mask(2, 0, 10, 8)));  // heavy overlap with gt 0

    std::vector<Detection> dets;
    dets.push_back(det(box_mask(0, 0, 8, 8), 0.9));   // exact gt 0
    dets.push_back(det(box_mask(0, 0, 8, 8), 0.8));   // also prefers gt 0, must settle
    const MatchResult m = match_detections(dets, gts, 0.5);
    REQUIRE(m.pairs.size() == 2);
    CHECK(m.pairs[0].det == 0);
    CHECK(m.pairs[0].gt == 0);
    CHECK(m.pairs[1].det == 1);
    CHECK(m.pairs[1].gt == 1);
    CHECK(tu::close(m.pairs[1].iou, 6.0 / 10.0, 1e-15));
}

TEST_CASE("matching validates threshold and confidence ranges") {
    tu::expect_error(hk::ErrorCode::InvalidArgument, [] {
        match_detections({}, {}, 0.0);
    });
    tu::expect_error(hk::ErrorCode::InvalidArgument, [] {
        match_detections({}, {}, 1.01);
    });
    tu::expect_error(hk::ErrorCode::RangeError, [] {
        match_detections({det(box_mask(0, 0, 2, 2), 1.5)}, {}, 0.5);
    });
    // Threshold 1.0 itself is legal and only exact copies survive it.
    std::vector<GroundTruthInstance> gts;
    gts.push_back(gt(box_mask(0, 0, 4, 4)));
    CHECK(match_detections({det(box_mask(0, 0, 4, 4), 0.9)}, gts, 1.0).pairs.size() == 1);
    CHECK(match_detections({det(box_mask(0, 0, 4, 3), 0.9)}, gts, 1.0).pairs.empty());
}

TEST_CASE("precision and recall conventions at the empty edges") {
    const MatchResult none = match_detections({}, {}, 0.5);
    const hk::PrecisionRecall both_empty = precision_recall(none);
    CHECK(both_empty.precision == 1.0);
    CHECK(both_empty.recall == 1.0);

    std::vector<GroundTruthInstance> gts;
    gts.push_back(gt(box_mask(0, 0, 4, 4)));
    const hk::PrecisionRecall no_dets = precision_recall(match_detections({}, gts, 0.5));
    CHECK(no_dets.precision == 0.0);
    CHECK(no_dets.recall == 0.0);

    const hk::PrecisionRecall no_gts =
        precision_recall(match_detections({det(box_mask(0, 0, 4, 4), 0.9)}, {}, 0.5));
    CHECK(no_gts.precision == 0.0);
    CHECK(no_gts.recall == 1.0);
}

TEST_CASE("average precision frozen hand case") {
    // Two ground truths; sweep hits, misses, hits: precisions 1, 1/2, 2/3,
    // envelope 1, 2/3, 2/3, so 51 recall points read 1 and 50 read 2/3.
    std::vector<GroundTruthInstance> gts;
    gts.push_back(gt(box_mask(0, 0, 4, 4)));
    gts.push_back(gt(box_mask(8, 0, 12, 4)));

    std::vector<Detection> dets;
    dets.push_back(det(box_mask(0, 0, 4, 4), 0.9));     // hit gt 0
    dets.push_back(det(box_mask(20, 0, 24, 4), 0.8));   // miss
    dets.push_back(det(box_mask(8, 0, 12, 4), 0.7));    // hit gt 1
    const double ap = average_precision(dets, gts, 0.5);
    CHECK(tu::close(ap, 0.8349834983498359, 1e-15));
    CHECK(tu::close(ap, (51.0 + 50.0 * (2.0 / 3.0)) / 101.0, 1e-15));

    // A single perfect detection per ground truth scores 1.
    std::vector<Detection> perfect;
    perfect.push_back(det(box_mask(0, 0, 4, 4), 0.9));
    perfect.push_back(det(box_mask(8, 0, 12, 4), 0.8));
    CHECK(average_precision(perfect, gts, 0.5) == 1.0);

    CHECK(average_precision({}, gts, 0.5) == 0.0);
    CHECK(average_precision(perfect, {}, 0.5) == 0.0);
}

TEST_CASE("average precision agrees with the slow envelope oracle") {
    hk::Rng rng(80);
    for (int trial = 0; trial < 12; ++trial) {
        const int n_gt = 1 + static_cast<int>(rng.next_below(6));
        const int n_det = 1 + static_cast<int>(rng.next_below(8));

        // Ground truths are disjoint 4x4 squares on a wide strip; planned
        // hits copy an unclaimed square, planned misses sit on empty ground.
        const int w = 8 * (n_gt + n_det) + 8;
        std::vector<GroundTruthInstance> gts;
        for (int g = 0; g < n_gt; ++g) {
            gts.push_back(gt(box_mask(8 * g, 0, 8 * g + 4, 4, w, 8), 0, 0));
        }
        std::vector<Detection> dets;
        std::vector<char> planned;
        int next_gt = 0;
        for (int d = 0; d < n_det; ++d) {
            const bool hit = next_gt < n_gt && rng.coin();
            planned.push_back(hit ? 1 : 0);
            const double conf = 1.0 - 0.05 * d;  // strictly descending
            if (hit) {
                dets.push_back(det(box_mask(8 * next_gt, 0, 8 * next_gt + 4, 4, w, 8), conf));
                ++next_gt;
            } else {
                const int x0 = 8 * (n_gt + d) + 8;
                dets.push_back(det(box_mask(x0, 0, x0 + 4, 4, w, 8), conf));
            }
        }
        const double got = average_precision(dets, gts, 0.5);
        const double want = tu::oracle_ap(planned, static_cast<std::size_t>(n_gt));
        CHECK(tu::close(got, want, 1e-12));
    }
}

TEST_CASE("threshold grid runs 0.50 to 0.95") {
    const std::vector<double> t = hk::map_thresholds_50_95();
    REQUIRE(t.size() == 10);
    CHECK(t.front() == 0.50);
    for (std::size_t i = 0; i < t.size(); ++i) {
        CHECK(tu::close(t[i], 0.50 + 0.05 * static_cast<double>(i), 1e-12));
    }
}

TEST_CASE("perfect predictions score 1.0 across the threshold grid") {
    std::vector<GroundTruthInstance> gts;
    std::vector<Detection> dets;
    // Two images, two classes, four instances.
    gts.push_back(gt(box_mask(0, 0, 6, 6), 0, 0));
    gts.push_back(gt(box_mask(10, 2, 18, 9), 1, 0));
    gts.push_back(gt(box_mask(4, 4, 9, 12), 0, 1));
    gts.push_back(gt(box_mask(20, 0, 30, 7), 1, 1));
    for (const auto& g : gts) {
        dets.push_back(det(g.amodal_mask, 0.9, g.class_id, g.image_id));
    }

    const hk::EvalReport r = evaluate(dets, gts, hk::EvalOptions{});
    CHECK(r.map50 == 1.0);
    CHECK(r.map50_95 == 1.0);
    CHECK(r.precision == 1.0);
    CHECK(r.recall == 1.0);
    REQUIRE(r.per_class.size() == 2);
    CHECK(r.per_class[0].class_id == 0);
    CHECK(r.per_class[1].class_id == 1);
    CHECK(r.per_class[0].ap50 == 1.0);
    CHECK(r.per_class[1].ap50_95 == 1.0);
    CHECK(r.per_occlusion.empty());

    // More workers, same report.
    const hk::EvalReport r4 = evaluate(dets, gts, hk::EvalOptions{false, 4});
    CHECK(r4.map50 == r.map50);
    CHECK(r4.map50_95 == r.map50_95);
    CHECK(r4.precision == r.precision);
    CHECK(r4.recall == r.recall);

    tu::expect_error(hk::ErrorCode::InvalidArgument, [&] {
        evaluate(dets, gts, hk::EvalOptions{false, 0});
    });
}

TEST_CASE("eroded predictions never raise the score") {
    std::vector<GroundTruthInstance> gts;
    gts.push_back(gt(box_mask(2, 2, 14, 13), 0, 0));
    gts.push_back(gt(box_mask(24, 1, 40, 14), 0, 0));

    double prev = 1.0;
    for (double radius : {0.0, 1.0, 2.0, 3.0}) {
        std::vector<Detection> dets;
        for (const auto& g : gts) {
            dets.push_back(det(erode(g.amodal_mask, radius), 0.9, 0, 0));
        }
        const hk::EvalReport r = evaluate(dets, gts, hk::EvalOptions{});
        CHECK(r.map50_95 <= prev);
        prev = r.map50_95;
    }
}

TEST_CASE("removing one of four detections costs exactly a quarter of recall") {
    std::vector<GroundTruthInstance> gts;
    std::vector<Detection> all;
    for (int k = 0; k < 4; ++k) {
        gts.push_back(gt(box_mask(10 * k, 0, 10 * k + 8, 8), 0, 0));
        all.push_back(det(box_mask(10 * k, 0, 10 * k + 8, 8), 0.9 - 0.1 * k, 0, 0));
    }
    const hk::EvalReport full = evaluate(all, gts, hk::EvalOptions{});
    CHECK(full.recall == 1.0);

    std::vector<Detection> three(all.begin() + 1, all.end());
    const hk::EvalReport r = evaluate(three, gts, hk::EvalOptions{});
    CHECK(r.recall == 0.75);
    CHECK(full.recall - r.recall == 0.25);
}

TEST_CASE("per-occlusion reports ignore detections matched to other levels") {
    std::vector<GroundTruthInstance> gts;
    GroundTruthInstance zero_gt = gt(box_mask(0, 0, 8, 8), 0, 0);
    zero_gt.occlusion = OcclusionLevel::Zero;
    GroundTruthInstance high_gt = gt(box_mask(16, 0, 24, 8), 0, 0);
    high_gt.occlusion = OcclusionLevel::High;
    gts.push_back(zero_gt);
    gts.push_back(high_gt);

    std::vector<Detection> dets;
    dets.push_back(det(box_mask(0, 0, 8, 8), 0.9, 0, 0));    // matches the zero-level gt
    dets.push_back(det(box_mask(16, 0, 24, 8), 0.8, 0, 0));  // matches the high-level gt

    const hk::EvalReport r = evaluate(dets, gts, hk::EvalOptions{true, 1});
    REQUIRE(r.per_occlusion.size() == 2);
    CHECK(r.per_occlusion[0].level == OcclusionLevel::Zero);
    CHECK(r.per_occlusion[0].n_gts == 1);
    CHECK(r.per_occlusion[0].ap50 == 1.0);
    // The zero-level detection sits higher in the ranking; it must be
    // ignored for the high band rather than counted as its false positive.
    CHECK(r.per_occlusion[1].level == OcclusionLevel::High);
    CHECK(r.per_occlusion[1].n_gts == 1);
    CHECK(r.per_occlusion[1].ap50 == 1.0);
    CHECK(r.per_occlusion[1].ap50_95 == 1.0);
}

TEST_CASE("per-occlusion level falls back from tag to visible mask to zero") {
    // Tagged level wins over mask arithmetic; otherwise the visible/amodal
    // ratio decides; with neither, the instance counts as unoccluded.
    GroundTruthInstance tagged = gt(box_mask(0, 0, 8, 8), 0, 0);
    tagged.occlusion = OcclusionLevel::Medium;
    GroundTruthInstance derived = gt(box_mask(0, 8, 8, 16), 0, 0);
    derived.visible_mask = box_mask(0, 8, 8, 12);  // ratio 0.5 -> Medium band
    GroundTruthInstance bare = gt(box_mask(16, 0, 24, 8), 0, 0);

    std::vector<GroundTruthInstance> gts{tagged, derived, bare};
    std::vector<Detection> dets;
    for (const auto& g : gts) dets.push_back(det(g.amodal_mask, 0.9, 0, 0));

    const hk::EvalReport r = evaluate(dets, gts, hk::EvalOptions{true, 1});
    REQUIRE(r.per_occlusion.size() == 2);
    CHECK(r.per_occlusion[0].level == OcclusionLevel::Zero);
    CHECK(r.per_occlusion[0].n_gts == 1);
    CHECK(r.per_occlusion[1].level == OcclusionLevel::Medium);
    CHECK(r.per_occlusion[1].n_gts == 2);
}

TEST_CASE("report serialization carries the expected keys") {
    std::vector<GroundTruthInstance> gts;
    gts.push_back(gt(box_mask(0, 0, 6, 6), 3, 0));
    std::vector<Detection> dets;
    dets.push_back(det(box_mask(0, 0, 6, 6), 0.9, 3, 0));
    const hk::EvalReport r = evaluate(dets, gts, hk::EvalOptions{true, 1});

    const std::string json = eval_report_to_json(r);
    for (const char* key : {"\"precision\"", "\"recall\"", "\"map50\"", "\"map50_95\"",
                            "\"per_class\"", "\"per_occlusion_level\"", "\"class\"",
                            "\"ap50\"", "\"ap50_95\"", "\"level\"", "\"n_gts\""}) {
        CHECK_MESSAGE(json.find(key) != std::string::npos, "missing ", key);
    }

    const std::string text = eval_report_to_text(r);
    CHECK(text.find("mAP@50") != std::string::npos);
    CHECK(text.find("mAP@50:95") != std::string::npos);
}

TEST_CASE("harvest percentages reproduce the frozen two-decimal cuts") {
    hk::HarvestLog log;
    log.levels.push_back({OcclusionLevel::Zero, 50, 54});
    log.levels.push_back({OcclusionLevel::Low, 46, 54});
    log.levels.push_back({OcclusionLevel::Medium, 26, 54});
    log.levels.push_back({OcclusionLevel::High, 12, 54});

    const hk::HarvestReport r = harvest_success(log);
    REQUIRE(r.rows.size() == 4);
    CHECK(r.rows[0].percent == "92.59");
    CHECK(r.rows[1].percent == "85.18");  // 46/54 = 85.185..., cut not rounded
    CHECK(r.rows[2].percent == "48.14");  // 26/54 = 48.148...
    CHECK(r.rows[3].percent == "22.22");
    CHECK(tu::close(r.rows[0].ratio, 50.0 / 54.0, 1e-15));
    CHECK(r.overall.n_picked == 134);
    CHECK(r.overall.n_total == 216);
    CHECK(r.overall.percent == "62.03");  // 134/216 = 62.037...

    hk::HarvestLog other;
    other.levels.push_back({OcclusionLevel::Zero, 52, 54});
    other.levels.push_back({OcclusionLevel::Low, 46, 54});
    other.levels.push_back({OcclusionLevel::Medium, 24, 54});
    other.levels.push_back({OcclusionLevel::High, 10, 54});
    const hk::HarvestReport r2 = harvest_success(other);
    CHECK(r2.rows[0].percent == "96.29");
    CHECK(r2.rows[1].percent == "85.18");
    CHECK(r2.rows[2].percent == "44.44");
    CHECK(r2.rows[3].percent == "18.51");
}

TEST_CASE("harvest accounting validates its rows") {
    tu::expect_error(hk::ErrorCode::InvalidArgument, [] {
        harvest_success(hk::HarvestLog{});
    });
    tu::expect_error(hk::ErrorCode::DegenerateInput, [] {
        hk::HarvestLog log;
        log.levels.push_back({OcclusionLevel::Zero, 0, 0});
        harvest_success(log);
    });
    tu::expect_error(hk::ErrorCode::ConsistencyError, [] {
        hk::HarvestLog log;
        log.levels.push_back({OcclusionLevel::Zero, 5, 4});
        harvest_success(log);
    });
    tu::expect_error(hk::ErrorCode::ConsistencyError, [] {
        hk::HarvestLog log;
        log.levels.push_back({OcclusionLevel::Zero, -1, 4});
        harvest_success(log);
    });
}

TEST_CASE("harvest log JSON parsing") {
    const std::string text = R"({"levels": [
        {"level": "zero", "picked": 50, "total": 54},
        {"level": "high", "picked": 12, "total": 54}
    ]})";
    const hk::HarvestLog log = hk::parse_harvest_log(text, "test");
    REQUIRE(log.levels.size() == 2);
    CHECK(log.levels[0].level == OcclusionLevel::Zero);
    CHECK(log.levels[1].n_picked == 12);

    tu::expect_error(hk::ErrorCode::ParseError, [] {
        hk::parse_harvest_log(R"({"levels": [{"level": "huge", "picked": 1, "total": 2}]})",
                              "test");
    });
    tu::expect_error(hk::ErrorCode::ParseError, [] { hk::parse_harvest_log("{", "test"); });
    tu::expect_error(hk::ErrorCode::ParseError, [] { hk::parse_harvest_log("{}", "test"); });

    const hk::HarvestReport r = harvest_success(log);
    const std::string json = hk::harvest_report_to_json(r);
    for (const char* key : {"\"levels\"", "\"overall\"", "\"ratio\"", "\"percent\"",
                            "\"picked\"", "\"total\""}) {
        CHECK_MESSAGE(json.find(key) != std::string::npos, "missing ", key);
    }
    CHECK(hk::harvest_report_to_text(r).find("92.59") != std::string::npos);
}

TEST_CASE("correlation of an exact line is 1") {
    const std::vector<double> x{1, 2, 3, 4, 5};
    std::vector<double> y;
    for (double v : x) y.push_back(-3.0 * v + 7.0);  // descending line correlates too
    CHECK(tu::close(hk::correlate(x, y), 1.0, 1e-12));
}

TEST_CASE("correlation reproduces the frozen reference values") {
    const std::vector<double> map_attn{0.872, 0.888, 0.569, 0.372};
    const std::vector<double> pct_attn{92.59, 85.18, 48.14, 22.22};
    CHECK(tu::close(hk::correlate(map_attn, pct_attn), 0.9860871424446181, 1e-12));
    CHECK(tu::close(hk::correlate(map_attn, pct_attn), 0.986, 1e-3));

    const std::vector<double> map_base{0.886, 0.88, 0.564, 0.341};
    const std::vector<double> pct_base{96.29, 85.18, 44.44, 18.51};
    CHECK(tu::close(hk::correlate(map_base, pct_base), 0.9838732114512254, 1e-12));

    // Swapping the axes leaves the coefficient unchanged.
    CHECK(hk::correlate(pct_attn, map_attn) == hk::correlate(map_attn, pct_attn));
}

TEST_CASE("correlation input validation") {
    tu::expect_error(hk::ErrorCode::ShapeMismatch, [] {
        hk::correlate({1, 2}, {1, 2, 3});
    });
    tu::expect_error(hk::ErrorCode::InvalidArgument, [] { hk::correlate({1}, {1}); });
    tu::expect_error(hk::ErrorCode::InvalidArgument, [] {
        hk::correlate({1, std::nan("")}, {1, 2});
    });
    tu::expect_error(hk::ErrorCode::DegenerateInput, [] {
        hk::correlate({2, 2, 2}, {1, 2, 3});
    });
    tu::expect_error(hk::ErrorCode::DegenerateInput, [] {
        hk::correlate({1, 2, 3}, {5, 5, 5});
    });
}
