// Command-line front end. Links only the C interface; all domain logic
// lives behind it.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "harvestkit/harvestkit.h"

namespace {

int fail(hk_status st) {
    std::cerr << "error (" << hk_status_name(st) << "): " << hk_last_error() << "\n";
    return 1;
}

int emit(const std::string& text, const std::string& out_path) {
    std::cout << text;
    if (!out_path.empty()) {
        const hk_status st = hk_write_text_file(out_path.c_str(), text.c_str());
        if (st != HK_OK) return fail(st);
    }
    return 0;
}

int emit_owned(hk_status st, char* json, const std::string& out_path) {
    if (st != HK_OK) return fail(st);
    std::string text(json);
    hk_string_free(json);
    return emit(text, out_path);
}

bool read_text(const std::string& path, std::string* out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::ostringstream buf;
    buf << in.rdbuf();
    *out = buf.str();
    return true;
}

struct MaskHandle {
    hk_mask* ptr = nullptr;
    ~MaskHandle() { hk_mask_free(ptr); }
};
struct DepthHandle {
    hk_depth_map* ptr = nullptr;
    ~DepthHandle() { hk_depth_free(ptr); }
};
struct CalibHandle {
    hk_calibration* ptr = nullptr;
    ~CalibHandle() { hk_calibration_free(ptr); }
};

int run_pick(const std::string& mask_path, const std::string& out_path) {
    MaskHandle mask;
    hk_status st = hk_mask_load_pgm(mask_path.c_str(), &mask.ptr);
    if (st != HK_OK) return fail(st);
    int x = 0, y = 0;
    double clearance = 0.0;
    st = hk_picking_point(mask.ptr, &x, &y, &clearance);
    if (st != HK_OK) return fail(st);
    nlohmann::ordered_json j;
    j["x"] = x;
    j["y"] = y;
    j["clearance"] = clearance;
    return emit(j.dump() + "\n", out_path);
}

int run_locate(const std::string& mask_path, const std::string& depth_path,
               const std::string& calib_path, const std::string& out_path) {
    MaskHandle mask;
    DepthHandle depth;
    CalibHandle calib;
    hk_status st = hk_mask_load_pgm(mask_path.c_str(), &mask.ptr);
    if (st != HK_OK) return fail(st);
    st = hk_depth_load_pgm(depth_path.c_str(), &depth.ptr);
    if (st != HK_OK) return fail(st);
    st = hk_calibration_load(calib_path.c_str(), &calib.ptr);
    if (st != HK_OK) return fail(st);
    char* json = nullptr;
    st = hk_locate_json(mask.ptr, depth.ptr, calib.ptr, &json);
    return emit_owned(st, json, out_path);
}

int run_plan(const std::vector<double>& target, const std::vector<double>& rpy,
             double offset, double margin, double duration, const std::string& out_path) {
    const double t[3] = {target[0], target[1], target[2]};
    const double r[3] = {rpy[0], rpy[1], rpy[2]};
    char* json = nullptr;
    const hk_status st = hk_grasp_plan_json(t, r, offset, margin, duration, &json);
    return emit_owned(st, json, out_path);
}

int run_eval(const std::string& annotations, const std::string& predictions,
             bool by_occlusion, int workers, const std::string& out_path) {
    char* json = nullptr;
    const hk_status st = hk_evaluate_files(annotations.c_str(), predictions.c_str(),
                                           by_occlusion ? 1 : 0, workers, &json);
    return emit_owned(st, json, out_path);
}

int run_harvest_report(const std::string& log_path, const std::string& out_path) {
    std::string text;
    if (!read_text(log_path, &text)) {
        std::cerr << "error (io-error): cannot read " << log_path << "\n";
        return 1;
    }
    char* json = nullptr;
    const hk_status st = hk_harvest_report_json(text.c_str(), &json);
    return emit_owned(st, json, out_path);
}

int run_correlate(const std::string& pairs_path, const std::string& out_path) {
    std::string text;
    if (!read_text(pairs_path, &text)) {
        std::cerr << "error (io-error): cannot read " << pairs_path << "\n";
        return 1;
    }
    std::vector<double> xs, ys;
    try {
        const auto doc = nlohmann::json::parse(text);
        for (const auto& pair : doc.at("pairs")) {
            if (!pair.is_array() || pair.size() != 2) {
                throw std::runtime_error("each pair must be [x, y]");
            }
            xs.push_back(pair[0].get<double>());
            ys.push_back(pair[1].get<double>());
        }
    } catch (const std::exception& e) {
        std::cerr << "error (parse-error): " << pairs_path << ": " << e.what() << "\n";
        return 1;
    }
    double r2 = 0.0;
    const hk_status st = hk_correlate(xs.data(), ys.data(), xs.size(), &r2);
    if (st != HK_OK) return fail(st);
    nlohmann::ordered_json j;
    j["r2"] = r2;
    j["n"] = xs.size();
    return emit(j.dump() + "\n", out_path);
}

int run_augment(const std::string& image, const std::string& annotations, int image_id,
                const std::string& out_dir, int variants, std::uint64_t seed,
                const std::string& out_path) {
    char* json = nullptr;
    const hk_status st = hk_augment_files(image.c_str(), annotations.c_str(), image_id,
                                          out_dir.c_str(), variants, seed, &json);
    return emit_owned(st, json, out_path);
}

int run_synth(const std::string& out_dir, const std::vector<double>& ratios, int width,
              int height, std::uint64_t seed, const std::string& out_path) {
    char* json = nullptr;
    const hk_status st = hk_synth(out_dir.c_str(), ratios.data(), ratios.size(), width,
                                  height, seed, &json);
    return emit_owned(st, json, out_path);
}

int run_nn_check(std::uint64_t seed, const std::string& out_path) {
    int ok = 0;
    char* json = nullptr;
    const hk_status st = hk_nn_check(seed, &ok, &json);
    const int rc = emit_owned(st, json, out_path);
    if (rc != 0) return rc;
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fruit-picking toolkit: picking points, localisation, grasp planning, "
                 "evaluation, and data synthesis"};
    app.require_subcommand(1);
    int rc = 0;

    // pick
    auto* pick = app.add_subcommand("pick", "Picking point of a mask PGM");
    std::string pick_mask;
    std::string pick_out;
    pick->add_option("--mask", pick_mask, "Mask PGM (0 background, 255 foreground)")
        ->required();
    pick->add_option("--out", pick_out, "Also write the JSON result here");
    pick->callback([&] { rc = run_pick(pick_mask, pick_out); });

    // locate
    auto* locate = app.add_subcommand("locate", "Picking point to robot-base coordinates");
    std::string loc_mask, loc_depth, loc_calib, loc_out;
    locate->add_option("--mask", loc_mask, "Mask PGM")->required();
    locate->add_option("--depth", loc_depth, "16-bit depth PGM, millimeters")->required();
    locate->add_option("--calib", loc_calib, "Calibration text file")->required();
    locate->add_option("--out", loc_out, "Also write the JSON result here");
    locate->callback([&] { rc = run_locate(loc_mask, loc_depth, loc_calib, loc_out); });

    // plan
    auto* plan = app.add_subcommand("plan", "Grasp plan and approach schedule");
    std::vector<double> plan_target, plan_rpy{0.0, 0.0, 0.0};
    double plan_offset = 0.02, plan_margin = 0.10, plan_duration = 2.0;
    std::string plan_out;
    plan->add_option("--target", plan_target, "Base-frame target x y z (meters)")
        ->expected(3)
        ->required();
    plan->add_option("--rpy", plan_rpy, "End-effector roll pitch yaw (radians)")->expected(3);
    plan->add_option("--offset", plan_offset, "Forward enclose offset (meters)");
    plan->add_option("--margin", plan_margin, "Pre-grasp safety margin (meters)");
    plan->add_option("--duration", plan_duration, "Approach duration (seconds)");
    plan->add_option("--out", plan_out, "Also write the JSON result here");
    plan->callback([&] {
        rc = run_plan(plan_target, plan_rpy, plan_offset, plan_margin, plan_duration,
                      plan_out);
    });

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate predictions against annotations");
    std::string eval_ann, eval_pred, eval_out;
    bool eval_by_occ = false;
    int eval_workers = 1;
    eval->add_option("--annotations", eval_ann, "Annotation JSON")->required();
    eval->add_option("--predictions", eval_pred, "Prediction JSON")->required();
    eval->add_flag("--by-occlusion", eval_by_occ, "Break results out by occlusion level");
    eval->add_option("--workers", eval_workers, "Worker threads for mask comparisons");
    eval->add_option("--out", eval_out, "Also write the JSON report here");
    eval->callback(
        [&] { rc = run_eval(eval_ann, eval_pred, eval_by_occ, eval_workers, eval_out); });

    // harvest-report
    auto* harvest = app.add_subcommand("harvest-report", "Success table from picked/total counts");
    std::string harvest_log, harvest_out;
    harvest->add_option("--log", harvest_log, "Harvest log JSON")->required();
    harvest->add_option("--out", harvest_out, "Also write the JSON report here");
    harvest->callback([&] { rc = run_harvest_report(harvest_log, harvest_out); });

    // correlate
    auto* corr = app.add_subcommand("correlate", "Coefficient of determination for (x,y) pairs");
    std::string corr_pairs, corr_out;
    corr->add_option("--pairs", corr_pairs, "JSON {\"pairs\": [[x,y], ...]}")->required();
    corr->add_option("--out", corr_out, "Also write the JSON result here");
    corr->callback([&] { rc = run_correlate(corr_pairs, corr_out); });

    // augment
    auto* aug = app.add_subcommand("augment", "Write augmented variants of one annotated image");
    std::string aug_image, aug_ann, aug_dir, aug_out;
    int aug_image_id = 0, aug_variants = 2;
    std::uint64_t aug_seed = 0;
    aug->add_option("--image", aug_image, "Source image PGM")->required();
    aug->add_option("--annotations", aug_ann, "Annotation JSON")->required();
    aug->add_option("--image-id", aug_image_id, "Image id within the annotations")->required();
    aug->add_option("--out-dir", aug_dir, "Output directory")->required();
    aug->add_option("--variants", aug_variants, "Variants per image (besides the original)");
    aug->add_option("--seed", aug_seed, "Deterministic seed");
    aug->add_option("--out", aug_out, "Also write the manifest JSON here");
    aug->callback([&] {
        rc = run_augment(aug_image, aug_ann, aug_image_id, aug_dir, aug_variants, aug_seed,
                         aug_out);
    });

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic occluded scene");
    std::string synth_dir, synth_out;
    std::vector<double> synth_ratios;
    int synth_w = 256, synth_h = 256;
    std::uint64_t synth_seed = 0;
    synth->add_option("--out-dir", synth_dir, "Output directory")->required();
    synth->add_option("--ratios", synth_ratios, "Target occlusion ratios, e.g. 0,0.1,0.35,0.6")
        ->required()
        ->delimiter(',');
    synth->add_option("--width", synth_w, "Canvas width");
    synth->add_option("--height", synth_h, "Canvas height");
    synth->add_option("--seed", synth_seed, "Deterministic seed");
    synth->add_option("--out", synth_out, "Also write the manifest JSON here");
    synth->callback([&] {
        rc = run_synth(synth_dir, synth_ratios, synth_w, synth_h, synth_seed, synth_out);
    });

    // nn-check
    auto* nn = app.add_subcommand("nn-check", "Run gradient and shape self-verification");
    std::uint64_t nn_seed = 7;
    std::string nn_out;
    nn->add_option("--seed", nn_seed, "Deterministic seed");
    nn->add_option("--out", nn_out, "Also write the JSON results here");
    nn->callback([&] { rc = run_nn_check(nn_seed, nn_out); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    return rc;
}
