#include "harvestkit/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "harvestkit/parallel.hpp"

namespace hk {

const char* occlusion_level_name(OcclusionLevel level) {
    switch (level) {
        case OcclusionLevel::Zero: return "zero";
        case OcclusionLevel::Low: return "low";
        case OcclusionLevel::Medium: return "medium";
        case OcclusionLevel::High: return "high";
    }
    return "?";
}

std::optional<OcclusionLevel> occlusion_level_from_name(const std::string& name) {
    if (name == "zero") return OcclusionLevel::Zero;
    if (name == "low") return OcclusionLevel::Low;
    if (name == "medium") return OcclusionLevel::Medium;
    if (name == "high") return OcclusionLevel::High;
    return std::nullopt;
}

OcclusionLevel occlusion_level_for_ratio(double r) {
    if (!(r >= 0.0) || r > 1.0) {
        raise(ErrorCode::RangeError, "occlusion ratio must lie in [0,1]");
    }
    if (r <= 0.005) return OcclusionLevel::Zero;
    if (r <= 0.20) return OcclusionLevel::Low;
    if (r <= 0.50) return OcclusionLevel::Medium;
    return OcclusionLevel::High;
}

OcclusionLevel occlusion_level(double visible_area, double amodal_area) {
    if (!(amodal_area > 0.0)) {
        raise(ErrorCode::InvalidArgument, "amodal area must be positive");
    }
    if (visible_area < 0.0 || visible_area > amodal_area) {
        raise(ErrorCode::ConsistencyError, "visible area must lie in [0, amodal area]");
    }
    return occlusion_level_for_ratio(1.0 - visible_area / amodal_area);
}

// ---- matching core ----------------------------------------------------------

namespace {

// Per detection: the same-image same-class ground truths with their IoU.
struct IouTable {
    std::vector<std::vector<std::pair<int, double>>> by_det;
};

IouTable build_iou_table(const std::vector<Detection>& dets,
                         const std::vector<GroundTruthInstance>& gts, int workers) {
    IouTable table;
    table.by_det.resize(dets.size());
    parallel_for(dets.size(), workers, [&](std::size_t d) {
        auto& row = table.by_det[d];
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (gts[g].image_id != dets[d].image_id || gts[g].class_id != dets[d].class_id) {
                continue;
            }
            row.emplace_back(static_cast<int>(g), mask_iou(dets[d].mask, gts[g].amodal_mask));
        }
    });
    return table;
}

std::vector<int> confidence_order(const std::vector<Detection>& dets) {
    std::vector<int> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return dets[static_cast<std::size_t>(a)].confidence >
               dets[static_cast<std::size_t>(b)].confidence;
    });
    return order;
}

// Greedy one-to-one assignment; returns per-detection gt index or -1.
std::vector<int> greedy_assign(const IouTable& table, const std::vector<int>& order,
                               std::size_t n_gts, double threshold) {
    std::vector<int> det_to_gt(table.by_det.size(), -1);
    std::vector<char> gt_taken(n_gts, 0);
    for (int d : order) {
        const auto& row = table.by_det[static_cast<std::size_t>(d)];
        int best_gt = -1;
        double best_iou = 0.0;
        for (const auto& [g, iou] : row) {
            if (gt_taken[static_cast<std::size_t>(g)]) continue;
            if (iou < threshold) continue;
            if (iou > best_iou || (iou == best_iou && best_gt != -1 && g < best_gt)) {
                best_iou = iou;
                best_gt = g;
            }
        }
        if (best_gt != -1) {
            det_to_gt[static_cast<std::size_t>(d)] = best_gt;
            gt_taken[static_cast<std::size_t>(best_gt)] = 1;
        }
    }
    return det_to_gt;
}

void validate_threshold(double threshold) {
    if (!(threshold > 0.0) || threshold > 1.0) {
        raise(ErrorCode::InvalidArgument, "IoU threshold must lie in (0,1]");
    }
}

void validate_detections(const std::vector<Detection>& dets) {
    for (const auto& d : dets) {
        if (!(d.confidence >= 0.0) || d.confidence > 1.0) {
            raise(ErrorCode::RangeError, "detection confidence must lie in [0,1]");
        }
    }
}

// AP from ordered hit flags: cumulative precision/recall, monotone
// envelope, then the 101-point recall sampling.
double ap_from_flags(const std::vector<char>& tp_in_order, std::size_t n_gt) {
    if (n_gt == 0) return 0.0;
    const std::size_t n = tp_in_order.size();
    if (n == 0) return 0.0;
    std::vector<double> prec(n), rec(n);
    std::size_t tp = 0;
    for (std::size_t i = 0; i < n; ++i) {
        tp += tp_in_order[i] ? 1 : 0;
        prec[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
        rec[i] = static_cast<double>(tp) / static_cast<double>(n_gt);
    }
    for (std::size_t i = n - 1; i-- > 0;) {
        prec[i] = std::max(prec[i], prec[i + 1]);
    }
    double total = 0.0;
    std::size_t lo = 0;
    for (int k = 0; k <= 100; ++k) {
        const double r = k / 100.0;
        while (lo < n && rec[lo] < r) ++lo;
        if (lo >= n) break;
        total += prec[lo];
    }
    return total / 101.0;
}

OcclusionLevel effective_level(const GroundTruthInstance& gt) {
    if (gt.occlusion) return *gt.occlusion;
    if (gt.visible_mask) {
        return occlusion_level(static_cast<double>(gt.visible_mask->area()),
                               static_cast<double>(gt.amodal_mask.area()));
    }
    return OcclusionLevel::Zero;
}

}  // namespace

MatchResult match_detections(const std::vector<Detection>& dets,
                             const std::vector<GroundTruthInstance>& gts,
                             double iou_threshold) {
    validate_threshold(iou_threshold);
    validate_detections(dets);
    const IouTable table = build_iou_table(dets, gts, 1);
    const std::vector<int> order = confidence_order(dets);
    const std::vector<int> det_to_gt = greedy_assign(table, order, gts.size(), iou_threshold);

    MatchResult result;
    result.iou_threshold = iou_threshold;
    std::vector<char> gt_matched(gts.size(), 0);
    for (int d : order) {
        const int g = det_to_gt[static_cast<std::size_t>(d)];
        if (g < 0) {
            result.unmatched_dets.push_back(d);
            continue;
        }
        gt_matched[static_cast<std::size_t>(g)] = 1;
        double iou = 0.0;
        for (const auto& [gg, i] : table.by_det[static_cast<std::size_t>(d)]) {
            if (gg == g) iou = i;
        }
        result.pairs.push_back({d, g, iou});
    }
    for (std::size_t g = 0; g < gts.size(); ++g) {
        if (!gt_matched[g]) result.unmatched_gts.push_back(static_cast<int>(g));
    }
    return result;
}

PrecisionRecall precision_recall(const MatchResult& m) {
    const std::size_t tp = m.pairs.size();
    const std::size_t fp = m.unmatched_dets.size();
    const std::size_t fn = m.unmatched_gts.size();
    PrecisionRecall pr;
    if (tp + fp > 0) {
        pr.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    } else {
        pr.precision = (tp + fn == 0) ? 1.0 : 0.0;
    }
    pr.recall = (tp + fn == 0) ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    return pr;
}

double average_precision(const std::vector<Detection>& dets,
                         const std::vector<GroundTruthInstance>& gts, double iou_threshold) {
    validate_threshold(iou_threshold);
    validate_detections(dets);
    const IouTable table = build_iou_table(dets, gts, 1);
    const std::vector<int> order = confidence_order(dets);
    const std::vector<int> det_to_gt = greedy_assign(table, order, gts.size(), iou_threshold);
    std::vector<char> flags;
    flags.reserve(order.size());
    for (int d : order) flags.push_back(det_to_gt[static_cast<std::size_t>(d)] >= 0 ? 1 : 0);
    return ap_from_flags(flags, gts.size());
}

std::vector<double> map_thresholds_50_95() {
    std::vector<double> t;
    for (int k = 0; k < 10; ++k) t.push_back(0.50 + 0.05 * k);
    return t;
}

namespace {

EvalReport evaluate_impl(const std::vector<Detection>& dets,
                         const std::vector<GroundTruthInstance>& gts,
                         const std::vector<double>& thresholds, bool by_occlusion,
                         int workers) {
    if (thresholds.empty()) raise(ErrorCode::InvalidArgument, "threshold list is empty");
    for (double t : thresholds) validate_threshold(t);
    validate_detections(dets);

    const IouTable table = build_iou_table(dets, gts, workers);
    const std::vector<int> order = confidence_order(dets);

    std::set<int> class_set;
    for (const auto& g : gts) class_set.insert(g.class_id);
    const std::vector<int> classes(class_set.begin(), class_set.end());

    std::vector<OcclusionLevel> gt_level(gts.size(), OcclusionLevel::Zero);
    std::set<OcclusionLevel> level_set;
    if (by_occlusion) {
        for (std::size_t g = 0; g < gts.size(); ++g) {
            gt_level[g] = effective_level(gts[g]);
            level_set.insert(gt_level[g]);
        }
    }

    std::map<int, std::size_t> gts_per_class;
    for (const auto& g : gts) ++gts_per_class[g.class_id];

    EvalReport report;
    std::map<int, double> class_ap50;
    std::map<int, double> class_ap_sum;
    std::map<OcclusionLevel, double> level_ap50;
    std::map<OcclusionLevel, double> level_ap_sum;
    std::map<OcclusionLevel, int> level_gt_count;
    if (by_occlusion) {
        for (std::size_t g = 0; g < gts.size(); ++g) ++level_gt_count[gt_level[g]];
    }

    double map50 = 0.0;
    double map_sum = 0.0;
    bool have_50 = false;

    for (double thr : thresholds) {
        const std::vector<int> det_to_gt = greedy_assign(table, order, gts.size(), thr);

        double class_mean = 0.0;
        for (int c : classes) {
            std::vector<char> flags;
            for (int d : order) {
                if (dets[static_cast<std::size_t>(d)].class_id != c) continue;
                flags.push_back(det_to_gt[static_cast<std::size_t>(d)] >= 0 ? 1 : 0);
            }
            const double ap = ap_from_flags(flags, gts_per_class[c]);
            class_mean += ap;
            class_ap_sum[c] += ap;
            if (thr == 0.50) class_ap50[c] = ap;
        }
        if (!classes.empty()) class_mean /= static_cast<double>(classes.size());
        map_sum += class_mean;
        if (thr == 0.50) {
            map50 = class_mean;
            have_50 = true;
        }

        if (by_occlusion) {
            for (OcclusionLevel lvl : level_set) {
                double lvl_mean = 0.0;
                int lvl_classes = 0;
                for (int c : classes) {
                    std::size_t n_gt_lc = 0;
                    for (std::size_t g = 0; g < gts.size(); ++g) {
                        if (gts[g].class_id == c && gt_level[g] == lvl) ++n_gt_lc;
                    }
                    if (n_gt_lc == 0) continue;
                    // Detections matched to a ground truth of another level
                    // are ignored, not penalized.
                    std::vector<char> flags;
                    for (int d : order) {
                        if (dets[static_cast<std::size_t>(d)].class_id != c) continue;
                        const int g = det_to_gt[static_cast<std::size_t>(d)];
                        if (g >= 0 && gt_level[static_cast<std::size_t>(g)] != lvl) continue;
                        flags.push_back(g >= 0 ? 1 : 0);
                    }
                    lvl_mean += ap_from_flags(flags, n_gt_lc);
                    ++lvl_classes;
                }
                if (lvl_classes > 0) lvl_mean /= lvl_classes;
                level_ap_sum[lvl] += lvl_mean;
                if (thr == 0.50) level_ap50[lvl] = lvl_mean;
            }
        }
    }

    report.map50 = have_50 ? map50 : 0.0;
    report.map50_95 = map_sum / static_cast<double>(thresholds.size());

    for (int c : classes) {
        ClassReport cr;
        cr.class_id = c;
        cr.ap50 = class_ap50.count(c) ? class_ap50[c] : 0.0;
        cr.ap50_95 = class_ap_sum[c] / static_cast<double>(thresholds.size());
        report.per_class.push_back(cr);
    }
    if (by_occlusion) {
        for (OcclusionLevel lvl : level_set) {
            OcclusionReport orp;
            orp.level = lvl;
            orp.n_gts = level_gt_count[lvl];
            orp.ap50 = level_ap50.count(lvl) ? level_ap50[lvl] : 0.0;
            orp.ap50_95 = level_ap_sum[lvl] / static_cast<double>(thresholds.size());
            report.per_occlusion.push_back(orp);
        }
    }

    // Operating point: max F1 along the IoU-0.50 ranking.
    {
        const std::vector<int> det_to_gt = greedy_assign(table, order, gts.size(), 0.50);
        const std::size_t n_gts = gts.size();
        if (order.empty()) {
            report.precision = n_gts == 0 ? 1.0 : 0.0;
            report.recall = n_gts == 0 ? 1.0 : 0.0;
        } else {
            std::size_t tp = 0;
            double best_f1 = -1.0;
            std::size_t seen = 0;
            for (int d : order) {
                ++seen;
                if (det_to_gt[static_cast<std::size_t>(d)] >= 0) ++tp;
                const double p = static_cast<double>(tp) / static_cast<double>(seen);
                const double r =
                    n_gts == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(n_gts);
                const double f1 = (p + r > 0.0) ? 2.0 * p * r / (p + r) : 0.0;
                if (f1 > best_f1) {
                    best_f1 = f1;
                    report.precision = p;
                    report.recall = r;
                }
            }
        }
    }

    return report;
}

}  // namespace

EvalReport map_at(const std::vector<Detection>& dets,
                  const std::vector<GroundTruthInstance>& gts,
                  const std::vector<double>& thresholds) {
    return evaluate_impl(dets, gts, thresholds, false, 1);
}

EvalReport evaluate(const std::vector<Detection>& dets,
                    const std::vector<GroundTruthInstance>& gts, const EvalOptions& opts) {
    if (opts.workers < 1) raise(ErrorCode::InvalidArgument, "workers must be >= 1");
    return evaluate_impl(dets, gts, map_thresholds_50_95(), opts.by_occlusion, opts.workers);
}

std::string eval_report_to_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["precision"] = report.precision;
    j["recall"] = report.recall;
    j["map50"] = report.map50;
    j["map50_95"] = report.map50_95;
    j["per_class"] = nlohmann::ordered_json::array();
    for (const auto& c : report.per_class) {
        j["per_class"].push_back({{"class", c.class_id}, {"ap50", c.ap50}, {"ap50_95", c.ap50_95}});
    }
    j["per_occlusion_level"] = nlohmann::ordered_json::array();
    for (const auto& o : report.per_occlusion) {
        j["per_occlusion_level"].push_back({{"level", occlusion_level_name(o.level)},
                                            {"n_gts", o.n_gts},
                                            {"ap50", o.ap50},
                                            {"ap50_95", o.ap50_95}});
    }
    return j.dump(2) + "\n";
}

std::string eval_report_to_text(const EvalReport& report) {
    char buf[160];
    std::string out;
    std::snprintf(buf, sizeof buf, "%-12s %8.4f\n", "precision", report.precision);
    out += buf;
    std::snprintf(buf, sizeof buf, "%-12s %8.4f\n", "recall", report.recall);
    out += buf;
    std::snprintf(buf, sizeof buf, "%-12s %8.4f\n", "mAP@50", report.map50);
    out += buf;
    std::snprintf(buf, sizeof buf, "%-12s %8.4f\n", "mAP@50:95", report.map50_95);
    out += buf;
    if (!report.per_class.empty()) {
        out += "\nclass      ap50     ap50_95\n";
        for (const auto& c : report.per_class) {
            std::snprintf(buf, sizeof buf, "%-8d %8.4f %8.4f\n", c.class_id, c.ap50, c.ap50_95);
            out += buf;
        }
    }
    if (!report.per_occlusion.empty()) {
        out += "\nlevel      n_gts    ap50     ap50_95\n";
        for (const auto& o : report.per_occlusion) {
            std::snprintf(buf, sizeof buf, "%-8s %6d %8.4f %8.4f\n",
                          occlusion_level_name(o.level), o.n_gts, o.ap50, o.ap50_95);
            out += buf;
        }
    }
    return out;
}

// ---- harvest accounting ------------------------------------------------------

namespace {

std::string percent_2dp(int picked, int total) {
    // Truncates at the second decimal rather than rounding half-up:
    // 46/54 reports as 85.18, not 85.19.
    const std::int64_t bp = static_cast<std::int64_t>(picked) * 10000 / total;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld.%02lld", static_cast<long long>(bp / 100),
                  static_cast<long long>(bp % 100));
    return buf;
}

HarvestReport::Row make_row(OcclusionLevel level, int picked, int total) {
    if (total <= 0) {
        raise(ErrorCode::DegenerateInput, "harvest level has no trials; ratio undefined");
    }
    if (picked < 0 || picked > total) {
        raise(ErrorCode::ConsistencyError, "picked count must lie in [0, total]");
    }
    HarvestReport::Row row;
    row.level = level;
    row.n_picked = picked;
    row.n_total = total;
    row.ratio = static_cast<double>(picked) / static_cast<double>(total);
    row.percent = percent_2dp(picked, total);
    return row;
}

}  // namespace

HarvestReport harvest_success(const HarvestLog& log) {
    if (log.levels.empty()) {
        raise(ErrorCode::InvalidArgument, "harvest log has no levels");
    }
    HarvestReport report;
    int picked_sum = 0, total_sum = 0;
    for (const auto& lvl : log.levels) {
        report.rows.push_back(make_row(lvl.level, lvl.n_picked, lvl.n_total));
        picked_sum += lvl.n_picked;
        total_sum += lvl.n_total;
    }
    report.overall = make_row(OcclusionLevel::Zero, picked_sum, total_sum);
    return report;
}

HarvestLog parse_harvest_log(const std::string& json_text, const std::string& origin) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::ParseError, origin + ": " + e.what());
    }
    HarvestLog log;
    try {
        for (const auto& item : doc.at("levels")) {
            HarvestLog::Level lvl;
            const std::string name = item.at("level").get<std::string>();
            const auto parsed = occlusion_level_from_name(name);
            if (!parsed) {
                raise(ErrorCode::ParseError, origin + ": unknown occlusion level \"" + name + "\"");
            }
            lvl.level = *parsed;
            lvl.n_picked = item.at("picked").get<int>();
            lvl.n_total = item.at("total").get<int>();
            log.levels.push_back(lvl);
        }
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::ParseError, origin + ": " + e.what());
    }
    return log;
}

std::string harvest_report_to_json(const HarvestReport& report) {
    nlohmann::ordered_json j;
    j["levels"] = nlohmann::ordered_json::array();
    for (const auto& row : report.rows) {
        j["levels"].push_back({{"level", occlusion_level_name(row.level)},
                               {"picked", row.n_picked},
                               {"total", row.n_total},
                               {"ratio", row.ratio},
                               {"percent", row.percent}});
    }
    j["overall"] = {{"picked", report.overall.n_picked},
                    {"total", report.overall.n_total},
                    {"ratio", report.overall.ratio},
                    {"percent", report.overall.percent}};
    return j.dump(2) + "\n";
}

std::string harvest_report_to_text(const HarvestReport& report) {
    std::string out = "level     picked  total  ratio    H%\n";
    char buf[120];
    for (const auto& row : report.rows) {
        std::snprintf(buf, sizeof buf, "%-8s %6d %6d  %.4f  %s\n",
                      occlusion_level_name(row.level), row.n_picked, row.n_total, row.ratio,
                      row.percent.c_str());
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "%-8s %6d %6d  %.4f  %s\n", "overall",
                  report.overall.n_picked, report.overall.n_total, report.overall.ratio,
                  report.overall.percent.c_str());
    out += buf;
    return out;
}

double correlate(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) raise(ErrorCode::ShapeMismatch, "series lengths differ");
    if (x.size() < 2) raise(ErrorCode::InvalidArgument, "need at least 2 points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
            raise(ErrorCode::InvalidArgument, "series values must be finite");
        }
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        raise(ErrorCode::DegenerateInput, "a constant series has no defined correlation");
    }
    return (sxy * sxy) / (sxx * syy);
}

}  // namespace hk
