#include "harvestkit/harvestkit.h"

#include <cstring>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "harvestkit/dataset.hpp"
#include "harvestkit/error.hpp"
#include "harvestkit/evaluation.hpp"
#include "harvestkit/geometry.hpp"
#include "harvestkit/io_util.hpp"
#include "harvestkit/mask.hpp"
#include "harvestkit/nn_selfcheck.hpp"
#include "harvestkit/pgm.hpp"

struct hk_mask {
    hk::BinaryMask value;
};
struct hk_calibration {
    hk::Calibration value;
};
struct hk_depth_map {
    hk::DepthMap value;
};

namespace {

thread_local std::string g_last_error = "no error";

hk_status status_for(hk::ErrorCode code) {
    switch (code) {
        case hk::ErrorCode::InvalidArgument: return HK_INVALID_ARGUMENT;
        case hk::ErrorCode::ShapeMismatch: return HK_SHAPE_MISMATCH;
        case hk::ErrorCode::ParseError: return HK_PARSE_ERROR;
        case hk::ErrorCode::IoError: return HK_IO_ERROR;
        case hk::ErrorCode::EmptyMask: return HK_EMPTY_MASK;
        case hk::ErrorCode::InvalidDepth: return HK_INVALID_DEPTH;
        case hk::ErrorCode::BehindCamera: return HK_BEHIND_CAMERA;
        case hk::ErrorCode::RangeError: return HK_RANGE_ERROR;
        case hk::ErrorCode::ConsistencyError: return HK_CONSISTENCY_ERROR;
        case hk::ErrorCode::DegenerateInput: return HK_DEGENERATE_INPUT;
        case hk::ErrorCode::GenerationError: return HK_GENERATION_ERROR;
        case hk::ErrorCode::ValidationError: return HK_VALIDATION_ERROR;
        case hk::ErrorCode::EvaluationError: return HK_EVALUATION_ERROR;
    }
    return HK_INTERNAL_ERROR;
}

template <typename Fn>
hk_status guarded(Fn&& fn) {
    try {
        fn();
        return HK_OK;
    } catch (const hk::Error& e) {
        g_last_error = e.what();
        return status_for(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return HK_INTERNAL_ERROR;
    } catch (...) {
        g_last_error = "unknown failure";
        return HK_INTERNAL_ERROR;
    }
}

hk_status fail_null(const char* what) {
    g_last_error = std::string(what) + " must not be NULL";
    return HK_INVALID_ARGUMENT;
}

char* alloc_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

nlohmann::ordered_json point_json(const hk::Point3& p) {
    return nlohmann::ordered_json::array({p.x, p.y, p.z});
}

}  // namespace

extern "C" {

const char* hk_last_error(void) { return g_last_error.c_str(); }

const char* hk_status_name(hk_status status) {
    switch (status) {
        case HK_OK: return "ok";
        case HK_INVALID_ARGUMENT: return "invalid-argument";
        case HK_SHAPE_MISMATCH: return "shape-mismatch";
        case HK_PARSE_ERROR: return "parse-error";
        case HK_IO_ERROR: return "io-error";
        case HK_EMPTY_MASK: return "empty-mask";
        case HK_INVALID_DEPTH: return "invalid-depth";
        case HK_BEHIND_CAMERA: return "behind-camera";
        case HK_RANGE_ERROR: return "range-error";
        case HK_CONSISTENCY_ERROR: return "consistency-error";
        case HK_DEGENERATE_INPUT: return "degenerate-input";
        case HK_GENERATION_ERROR: return "generation-error";
        case HK_VALIDATION_ERROR: return "validation-error";
        case HK_EVALUATION_ERROR: return "evaluation-error";
        case HK_INTERNAL_ERROR: return "internal-error";
    }
    return "unknown";
}

void hk_string_free(char* s) { delete[] s; }

hk_status hk_mask_load_pgm(const char* path, hk_mask** out) {
    if (!path) return fail_null("path");
    if (!out) return fail_null("out");
    return guarded([&] { *out = new hk_mask{hk::load_mask_pgm(path)}; });
}

hk_status hk_mask_from_bytes(const unsigned char* data, int width, int height, hk_mask** out) {
    if (!data) return fail_null("data");
    if (!out) return fail_null("out");
    return guarded([&] {
        hk::BinaryMask mask(width, height);
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                mask.set(x, y, data[static_cast<std::size_t>(y) * width + x] != 0);
            }
        }
        *out = new hk_mask{std::move(mask)};
    });
}

void hk_mask_free(hk_mask* mask) { delete mask; }

hk_status hk_mask_dims(const hk_mask* mask, int* width, int* height) {
    if (!mask) return fail_null("mask");
    if (!width || !height) return fail_null("width/height");
    *width = mask->value.width();
    *height = mask->value.height();
    return HK_OK;
}

hk_status hk_picking_point(const hk_mask* mask, int* x, int* y, double* clearance) {
    if (!mask) return fail_null("mask");
    if (!x || !y || !clearance) return fail_null("x/y/clearance");
    return guarded([&] {
        const hk::PickingPoint p = hk::picking_point(mask->value);
        *x = p.x;
        *y = p.y;
        *clearance = p.clearance;
    });
}

hk_status hk_mask_iou(const hk_mask* a, const hk_mask* b, double* iou) {
    if (!a || !b) return fail_null("mask");
    if (!iou) return fail_null("iou");
    return guarded([&] { *iou = hk::mask_iou(a->value, b->value); });
}

hk_status hk_calibration_load(const char* path, hk_calibration** out) {
    if (!path) return fail_null("path");
    if (!out) return fail_null("out");
    return guarded([&] { *out = new hk_calibration{hk::load_calibration(path)}; });
}

void hk_calibration_free(hk_calibration* calib) { delete calib; }

hk_status hk_depth_load_pgm(const char* path, hk_depth_map** out) {
    if (!path) return fail_null("path");
    if (!out) return fail_null("out");
    return guarded([&] { *out = new hk_depth_map{hk::load_depth_pgm(path)}; });
}

void hk_depth_free(hk_depth_map* depth) { delete depth; }

hk_status hk_locate_json(const hk_mask* mask, const hk_depth_map* depth,
                         const hk_calibration* calib, char** out_json) {
    if (!mask || !depth || !calib) return fail_null("mask/depth/calib");
    if (!out_json) return fail_null("out_json");
    return guarded([&] {
        const hk::PickingPoint p = hk::picking_point(mask->value);
        if (mask->value.width() != depth->value.width() ||
            mask->value.height() != depth->value.height()) {
            hk::raise(hk::ErrorCode::ShapeMismatch, "mask and depth map dimensions differ");
        }
        const double z = depth->value.depth_at(p.x, p.y);
        // Pixel centers sit at +0.5 in the raster model.
        const hk::Point3 cam =
            hk::back_project(p.x + 0.5, p.y + 0.5, z, calib->value.intrinsics);
        const hk::Point3 base =
            hk::to_base(cam, calib->value.hand_eye, calib->value.ee_to_base);
        nlohmann::ordered_json j;
        j["x"] = p.x;
        j["y"] = p.y;
        j["clearance"] = p.clearance;
        j["camera"] = point_json(cam);
        j["base"] = point_json(base);
        *out_json = alloc_string(j.dump() + "\n");
    });
}

hk_status hk_grasp_plan_json(const double target_base[3], const double orientation_rpy[3],
                             double enclose_offset, double safety_margin,
                             double duration_seconds, char** out_json) {
    if (!target_base) return fail_null("target_base");
    if (!out_json) return fail_null("out_json");
    return guarded([&] {
        hk::EulerAngles rpy;
        if (orientation_rpy) {
            rpy = {orientation_rpy[0], orientation_rpy[1], orientation_rpy[2]};
        }
        const hk::Point3 target{target_base[0], target_base[1], target_base[2]};
        const hk::GraspPlan plan =
            hk::grasp_plan(target, rpy, safety_margin, enclose_offset);
        nlohmann::ordered_json j;
        j["target"] = point_json(plan.target);
        j["approach_axis"] = point_json(plan.approach_axis);
        j["grasp"] = point_json(plan.grasp);
        j["pre_grasp"] = point_json(plan.pre_grasp);
        j["orientation_rpy"] = {plan.orientation.roll, plan.orientation.pitch,
                                plan.orientation.yaw};
        j["safety_margin"] = plan.safety_margin;
        j["enclose_offset"] = plan.enclose_offset;
        nlohmann::ordered_json samples = nlohmann::ordered_json::array();
        for (int k = 0; k <= 10; ++k) {
            const double t = duration_seconds * k / 10.0;
            const hk::QuinticSample s = hk::quintic_profile(t, duration_seconds);
            samples.push_back({{"t", t}, {"s", s.s}, {"s_dot", s.s_dot}, {"s_ddot", s.s_ddot}});
        }
        j["schedule"] = {{"duration", duration_seconds}, {"samples", std::move(samples)}};
        *out_json = alloc_string(j.dump() + "\n");
    });
}

hk_status hk_evaluate_files(const char* annotations_path, const char* predictions_path,
                            int by_occlusion, int workers, char** out_json) {
    if (!annotations_path || !predictions_path) return fail_null("paths");
    if (!out_json) return fail_null("out_json");
    return guarded([&] {
        const hk::AnnotationSet set = hk::load_annotations(annotations_path);
        const auto preds = hk::load_predictions(predictions_path);
        const hk::EvalInputs inputs = hk::build_eval_inputs(set, preds, workers);
        hk::EvalOptions opts;
        opts.by_occlusion = by_occlusion != 0;
        opts.workers = workers;
        const hk::EvalReport report = hk::evaluate(inputs.dets, inputs.gts, opts);
        *out_json = alloc_string(hk::eval_report_to_json(report));
    });
}

hk_status hk_harvest_report_json(const char* log_json_text, char** out_json) {
    if (!log_json_text) return fail_null("log_json_text");
    if (!out_json) return fail_null("out_json");
    return guarded([&] {
        const hk::HarvestLog log = hk::parse_harvest_log(log_json_text, "harvest log");
        *out_json = alloc_string(hk::harvest_report_to_json(hk::harvest_success(log)));
    });
}

hk_status hk_correlate(const double* x, const double* y, size_t n, double* r2) {
    if (!x || !y) return fail_null("x/y");
    if (!r2) return fail_null("r2");
    return guarded([&] {
        const std::vector<double> vx(x, x + n);
        const std::vector<double> vy(y, y + n);
        *r2 = hk::correlate(vx, vy);
    });
}

hk_status hk_synth(const char* out_dir, const double* target_ratios, size_t n_ratios,
                   int width, int height, unsigned long long seed, char** out_json) {
    if (!out_dir) return fail_null("out_dir");
    if (!target_ratios && n_ratios > 0) return fail_null("target_ratios");
    if (!out_json) return fail_null("out_json");
    return guarded([&] {
        hk::SynthParams params;
        params.width = width;
        params.height = height;
        params.target_ratios.assign(target_ratios, target_ratios + n_ratios);
        const hk::SyntheticScene scene = hk::synth_scene(params, seed);

        namespace fs = std::filesystem;
        const fs::path dir(out_dir);
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) {
            hk::raise(hk::ErrorCode::IoError,
                      "cannot create directory " + dir.string() + ": " + ec.message());
        }

        hk::save_pgm8(scene.image, (dir / "scene.pgm").string());
        nlohmann::ordered_json j;
        j["seed"] = static_cast<std::uint64_t>(seed);
        j["width"] = scene.width;
        j["height"] = scene.height;
        j["scene"] = "scene.pgm";
        j["fruits"] = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < scene.fruits.size(); ++i) {
            const hk::SynthFruit& fruit = scene.fruits[i];
            const std::string amodal_name = "fruit_" + std::to_string(i) + "_amodal.pgm";
            const std::string visible_name = "fruit_" + std::to_string(i) + "_visible.pgm";
            hk::save_mask_pgm(fruit.amodal, (dir / amodal_name).string());
            hk::save_mask_pgm(fruit.visible, (dir / visible_name).string());
            j["fruits"].push_back({{"index", i},
                                   {"target", fruit.target_ratio},
                                   {"achieved", fruit.achieved_ratio},
                                   {"level", hk::occlusion_level_name(fruit.level)},
                                   {"amodal", amodal_name},
                                   {"visible", visible_name},
                                   {"amodal_area", fruit.amodal.area()},
                                   {"visible_area", fruit.visible.area()}});
        }
        const std::string manifest = j.dump(2) + "\n";
        hk::atomic_write_file((dir / "scene.json").string(), manifest);
        *out_json = alloc_string(manifest);
    });
}

hk_status hk_augment_files(const char* image_path, const char* annotations_path,
                           int image_id, const char* out_dir, int variants,
                           unsigned long long seed, char** out_json) {
    if (!image_path || !annotations_path || !out_dir) return fail_null("paths");
    if (!out_json) return fail_null("out_json");
    return guarded([&] {
        const hk::Image8 image = hk::load_pgm8(image_path);
        const hk::AnnotationSet set = hk::load_annotations(annotations_path);
        const hk::ImageInfo* info = set.find_image(image_id);
        if (!info) {
            hk::raise(hk::ErrorCode::ConsistencyError,
                      "annotations have no image id " + std::to_string(image_id));
        }
        if (info->width != image.width || info->height != image.height) {
            hk::raise(hk::ErrorCode::ConsistencyError,
                      "annotation dimensions disagree with the image file");
        }
        hk::DataEntry entry;
        entry.image = image;
        for (const auto& inst : set.instances) {
            if (inst.image_id == image_id) entry.instances.push_back(inst);
        }
        hk::AugmentSpec spec;
        spec.variants_per_image = variants;
        spec.seed = seed;
        const std::vector<hk::DataEntry> entries = hk::augment(entry, spec);

        namespace fs = std::filesystem;
        const fs::path dir(out_dir);
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) {
            hk::raise(hk::ErrorCode::IoError,
                      "cannot create directory " + dir.string() + ": " + ec.message());
        }

        hk::AnnotationSet out_set;
        nlohmann::ordered_json j;
        j["count"] = entries.size();
        j["images"] = nlohmann::ordered_json::array();
        for (std::size_t k = 0; k < entries.size(); ++k) {
            const std::string name = "aug_" + std::to_string(k) + ".pgm";
            hk::save_pgm8(entries[k].image, (dir / name).string());
            hk::ImageInfo out_img;
            out_img.id = static_cast<int>(k);
            out_img.width = entries[k].image.width;
            out_img.height = entries[k].image.height;
            out_img.file = name;
            out_set.images.push_back(out_img);
            for (const auto& inst : entries[k].instances) {
                hk::AnnotatedInstance moved = inst;
                moved.image_id = static_cast<int>(k);
                out_set.instances.push_back(std::move(moved));
            }
            j["images"].push_back(name);
        }
        hk::save_annotations(out_set, (dir / "aug_annotations.json").string());
        j["annotations"] = "aug_annotations.json";
        *out_json = alloc_string(j.dump(2) + "\n");
    });
}

hk_status hk_nn_check(unsigned long long seed, int* all_passed, char** out_json) {
    if (!all_passed) return fail_null("all_passed");
    if (!out_json) return fail_null("out_json");
    return guarded([&] {
        const auto results = hk::run_nn_checks(seed);
        *all_passed = hk::all_passed(results) ? 1 : 0;
        *out_json = alloc_string(hk::checks_to_json(results));
    });
}

hk_status hk_write_text_file(const char* path, const char* text) {
    if (!path) return fail_null("path");
    if (!text) return fail_null("text");
    return guarded([&] { hk::atomic_write_file(path, text); });
}

}  // extern "C"
