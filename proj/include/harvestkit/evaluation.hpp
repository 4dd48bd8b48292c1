#pragma once

#include <optional>
#include <string>
#include <vector>

#include "harvestkit/mask.hpp"

namespace hk {

enum class OcclusionLevel { Zero, Low, Medium, High };

const char* occlusion_level_name(OcclusionLevel level);
std::optional<OcclusionLevel> occlusion_level_from_name(const std::string& name);

// Band for an occlusion ratio r = 1 - visible/amodal. The Zero band keeps a
// small tolerance so rasterization noise does not spill into Low.
OcclusionLevel occlusion_level_for_ratio(double r);
OcclusionLevel occlusion_level(double visible_area, double amodal_area);

struct Detection {
    BinaryMask mask;
    double confidence = 0.0;  // in [0,1]
    int class_id = 0;
    int image_id = 0;
};

struct GroundTruthInstance {
    BinaryMask amodal_mask;
    std::optional<BinaryMask> visible_mask;
    int class_id = 0;
    int image_id = 0;
    std::optional<OcclusionLevel> occlusion;
};

struct MatchResult {
    struct Pair {
        int det = -1;
        int gt = -1;
        double iou = 0.0;
    };
    std::vector<Pair> pairs;          // true positives
    std::vector<int> unmatched_dets;  // false positives
    std::vector<int> unmatched_gts;   // false negatives
    double iou_threshold = 0.0;
};

// Greedy one-to-one matching: detections in descending confidence (stable
// tie-break by index) claim the unclaimed same-class, same-image ground
// truth with the highest IoU >= threshold.
MatchResult match_detections(const std::vector<Detection>& dets,
                             const std::vector<GroundTruthInstance>& gts,
                             double iou_threshold);

// P = TP/(TP+FP), R = TP/(TP+FN). With no predictions: P is 1 when there
// are also no ground truths, else 0. With no ground truths: R = 1.
struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
};
PrecisionRecall precision_recall(const MatchResult& m);

// 101-point interpolated average precision with the monotone precision
// envelope, confidence-descending sweep.
double average_precision(const std::vector<Detection>& dets,
                         const std::vector<GroundTruthInstance>& gts, double iou_threshold);

struct ClassReport {
    int class_id = 0;
    double ap50 = 0.0;
    double ap50_95 = 0.0;
};

struct OcclusionReport {
    OcclusionLevel level = OcclusionLevel::Zero;
    int n_gts = 0;
    double ap50 = 0.0;
    double ap50_95 = 0.0;
};

struct EvalReport {
    double precision = 0.0;  // at the max-F1 point of the IoU-0.50 curve
    double recall = 0.0;
    double map50 = 0.0;
    double map50_95 = 0.0;
    std::vector<ClassReport> per_class;
    std::vector<OcclusionReport> per_occlusion;  // filled when requested
};

std::vector<double> map_thresholds_50_95();  // {0.50, 0.55, ..., 0.95}

// AP averaged over classes for each threshold, then over thresholds.
EvalReport map_at(const std::vector<Detection>& dets,
                  const std::vector<GroundTruthInstance>& gts,
                  const std::vector<double>& thresholds);

struct EvalOptions {
    bool by_occlusion = false;
    int workers = 1;
};

EvalReport evaluate(const std::vector<Detection>& dets,
                    const std::vector<GroundTruthInstance>& gts, const EvalOptions& opts);

std::string eval_report_to_json(const EvalReport& report);
std::string eval_report_to_text(const EvalReport& report);

// ---- harvest accounting ------------------------------------------------------

struct HarvestLog {
    struct Level {
        OcclusionLevel level = OcclusionLevel::Zero;
        int n_picked = 0;
        int n_total = 0;
    };
    std::vector<Level> levels;
};

struct HarvestReport {
    struct Row {
        OcclusionLevel level = OcclusionLevel::Zero;
        int n_picked = 0;
        int n_total = 0;
        double ratio = 0.0;           // exact
        std::string percent;          // 2-decimal rendering
    };
    std::vector<Row> rows;
    Row overall;
};

// Success ratio per level plus the pooled overall row. Percent strings
// keep exactly two decimals.
HarvestReport harvest_success(const HarvestLog& log);

HarvestLog parse_harvest_log(const std::string& json_text, const std::string& origin);
std::string harvest_report_to_json(const HarvestReport& report);
std::string harvest_report_to_text(const HarvestReport& report);

// Coefficient of determination of the least-squares line: Sxy^2/(Sxx*Syy).
double correlate(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace hk
