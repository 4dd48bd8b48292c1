#include "harvestkit/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "harvestkit/io_util.hpp"
#include "harvestkit/parallel.hpp"
#include "harvestkit/rng.hpp"

namespace hk {

const ImageInfo* AnnotationSet::find_image(int id) const {
    for (const auto& img : images) {
        if (img.id == id) return &img;
    }
    return nullptr;
}

// ---- annotation JSON -----------------------------------------------------------

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void parse_fail(const std::string& origin, const std::string& what) {
    raise(ErrorCode::ParseError, origin + ": " + what);
}

const json& require_field(const json& obj, const char* key, const std::string& origin,
                          const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        parse_fail(origin, where + ": missing field \"" + key + "\"");
    }
    return *it;
}

int require_int(const json& obj, const char* key, const std::string& origin,
                const std::string& where) {
    const json& v = require_field(obj, key, origin, where);
    if (!v.is_number_integer()) {
        parse_fail(origin, where + ": field \"" + key + "\" must be an integer");
    }
    return v.get<int>();
}

Polygon parse_polygon_json(const json& arr, const std::string& origin,
                           const std::string& where) {
    if (!arr.is_array() || arr.size() < 3) {
        parse_fail(origin, where + ": polygon needs at least 3 [x,y] pairs");
    }
    Polygon poly;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const json& pt = arr[i];
        if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number()) {
            parse_fail(origin, where + "[" + std::to_string(i) + "]: expected an [x,y] pair");
        }
        const double x = pt[0].get<double>();
        const double y = pt[1].get<double>();
        if (!std::isfinite(x) || !std::isfinite(y)) {
            parse_fail(origin, where + "[" + std::to_string(i) + "]: coordinates must be finite");
        }
        poly.vertices.push_back({x, y});
    }
    return poly;
}

ordered_json polygon_to_json(const Polygon& poly) {
    ordered_json arr = ordered_json::array();
    for (const auto& v : poly.vertices) arr.push_back({v[0], v[1]});
    return arr;
}

json parse_document(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        parse_fail(origin, e.what());
    }
}

}  // namespace

AnnotationSet parse_annotations(const std::string& json_text, const std::string& origin) {
    const json doc = parse_document(json_text, origin);
    if (!doc.is_object()) parse_fail(origin, "top level must be an object");

    AnnotationSet set;
    const json& images = require_field(doc, "images", origin, "document");
    if (!images.is_array()) parse_fail(origin, "\"images\" must be an array");
    std::set<int> seen_ids;
    for (std::size_t i = 0; i < images.size(); ++i) {
        const std::string where = "images[" + std::to_string(i) + "]";
        const json& item = images[i];
        if (!item.is_object()) parse_fail(origin, where + ": expected an object");
        ImageInfo info;
        info.id = require_int(item, "id", origin, where);
        info.width = require_int(item, "w", origin, where);
        info.height = require_int(item, "h", origin, where);
        if (info.width < 1 || info.height < 1) {
            parse_fail(origin, where + ": image dimensions must be positive");
        }
        const json& file = require_field(item, "file", origin, where);
        if (!file.is_string()) parse_fail(origin, where + ": \"file\" must be a string");
        info.file = file.get<std::string>();
        if (!seen_ids.insert(info.id).second) {
            raise(ErrorCode::ConsistencyError,
                  origin + ": " + where + ": duplicate image id " + std::to_string(info.id));
        }
        set.images.push_back(std::move(info));
    }

    const json& instances = require_field(doc, "instances", origin, "document");
    if (!instances.is_array()) parse_fail(origin, "\"instances\" must be an array");
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const std::string where = "instances[" + std::to_string(i) + "]";
        const json& item = instances[i];
        if (!item.is_object()) parse_fail(origin, where + ": expected an object");
        AnnotatedInstance inst;
        inst.image_id = require_int(item, "image", origin, where);
        inst.class_id = require_int(item, "class", origin, where);
        if (inst.class_id < 0) parse_fail(origin, where + ": class id must be non-negative");
        inst.amodal = parse_polygon_json(require_field(item, "amodal", origin, where), origin,
                                         where + ".amodal");
        if (auto it = item.find("visible"); it != item.end() && !it->is_null()) {
            inst.visible = parse_polygon_json(*it, origin, where + ".visible");
        }
        if (auto it = item.find("occlusion"); it != item.end() && !it->is_null()) {
            if (!it->is_string()) parse_fail(origin, where + ": \"occlusion\" must be a string");
            const auto lvl = occlusion_level_from_name(it->get<std::string>());
            if (!lvl) {
                parse_fail(origin,
                           where + ": unknown occlusion level \"" + it->get<std::string>() + "\"");
            }
            inst.occlusion = *lvl;
        }
        if (seen_ids.find(inst.image_id) == seen_ids.end()) {
            raise(ErrorCode::ConsistencyError,
                  origin + ": " + where + ": references unknown image id " +
                      std::to_string(inst.image_id));
        }
        set.instances.push_back(std::move(inst));
    }
    return set;
}

AnnotationSet load_annotations(const std::string& path) {
    return parse_annotations(read_file(path), path);
}

std::string annotations_to_json(const AnnotationSet& set) {
    ordered_json doc;
    doc["images"] = ordered_json::array();
    for (const auto& img : set.images) {
        doc["images"].push_back(
            {{"id", img.id}, {"w", img.width}, {"h", img.height}, {"file", img.file}});
    }
    doc["instances"] = ordered_json::array();
    for (const auto& inst : set.instances) {
        ordered_json item;
        item["image"] = inst.image_id;
        item["class"] = inst.class_id;
        item["amodal"] = polygon_to_json(inst.amodal);
        if (inst.visible) item["visible"] = polygon_to_json(*inst.visible);
        if (inst.occlusion) item["occlusion"] = occlusion_level_name(*inst.occlusion);
        doc["instances"].push_back(std::move(item));
    }
    return doc.dump(2) + "\n";
}

void save_annotations(const AnnotationSet& set, const std::string& path) {
    atomic_write_file(path, annotations_to_json(set));
}

std::vector<PredictedInstance> parse_predictions(const std::string& json_text,
                                                 const std::string& origin) {
    const json doc = parse_document(json_text, origin);
    if (!doc.is_object()) parse_fail(origin, "top level must be an object");
    const json& preds = require_field(doc, "predictions", origin, "document");
    if (!preds.is_array()) parse_fail(origin, "\"predictions\" must be an array");

    std::vector<PredictedInstance> out;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const std::string where = "predictions[" + std::to_string(i) + "]";
        const json& item = preds[i];
        if (!item.is_object()) parse_fail(origin, where + ": expected an object");
        PredictedInstance p;
        p.image_id = require_int(item, "image", origin, where);
        p.class_id = require_int(item, "class", origin, where);
        if (p.class_id < 0) parse_fail(origin, where + ": class id must be non-negative");
        const json& conf = require_field(item, "confidence", origin, where);
        if (!conf.is_number()) parse_fail(origin, where + ": \"confidence\" must be a number");
        p.confidence = conf.get<double>();
        if (!(p.confidence >= 0.0) || p.confidence > 1.0) {
            parse_fail(origin, where + ": confidence must lie in [0,1]");
        }
        p.mask = parse_polygon_json(require_field(item, "mask", origin, where), origin,
                                    where + ".mask");
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<PredictedInstance> load_predictions(const std::string& path) {
    return parse_predictions(read_file(path), path);
}

std::string predictions_to_json(const std::vector<PredictedInstance>& preds) {
    ordered_json doc;
    doc["predictions"] = ordered_json::array();
    for (const auto& p : preds) {
        doc["predictions"].push_back({{"image", p.image_id},
                                      {"class", p.class_id},
                                      {"confidence", p.confidence},
                                      {"mask", polygon_to_json(p.mask)}});
    }
    return doc.dump(2) + "\n";
}

EvalInputs build_eval_inputs(const AnnotationSet& set,
                             const std::vector<PredictedInstance>& preds, int workers) {
    std::unordered_map<int, const ImageInfo*> by_id;
    for (const auto& img : set.images) {
        if (!by_id.emplace(img.id, &img).second) {
            raise(ErrorCode::ConsistencyError,
                  "duplicate image id " + std::to_string(img.id));
        }
    }
    auto image_for = [&](int id, const std::string& what) -> const ImageInfo& {
        auto it = by_id.find(id);
        if (it == by_id.end()) {
            raise(ErrorCode::ConsistencyError,
                  what + " references unknown image id " + std::to_string(id));
        }
        return *it->second;
    };

    EvalInputs out;
    out.gts.resize(set.instances.size());
    out.dets.resize(preds.size());

    parallel_for(set.instances.size(), workers, [&](std::size_t i) {
        const AnnotatedInstance& inst = set.instances[i];
        const ImageInfo& img = image_for(inst.image_id, "instance " + std::to_string(i));
        GroundTruthInstance gt;
        gt.image_id = inst.image_id;
        gt.class_id = inst.class_id;
        gt.occlusion = inst.occlusion;
        gt.amodal_mask = rasterize_polygon(inst.amodal, img.width, img.height);
        if (inst.visible) {
            BinaryMask vis = rasterize_polygon(*inst.visible, img.width, img.height);
            for (int y = 0; y < img.height; ++y) {
                for (int x = 0; x < img.width; ++x) {
                    if (vis.at(x, y) && !gt.amodal_mask.at(x, y)) {
                        raise(ErrorCode::ConsistencyError,
                              "instance " + std::to_string(i) +
                                  ": visible mask escapes the amodal mask");
                    }
                }
            }
            gt.visible_mask = std::move(vis);
        }
        out.gts[i] = std::move(gt);
    });

    parallel_for(preds.size(), workers, [&](std::size_t i) {
        const PredictedInstance& p = preds[i];
        const ImageInfo& img = image_for(p.image_id, "prediction " + std::to_string(i));
        Detection det;
        det.image_id = p.image_id;
        det.class_id = p.class_id;
        det.confidence = p.confidence;
        det.mask = rasterize_polygon(p.mask, img.width, img.height);
        out.dets[i] = std::move(det);
    });

    return out;
}

// ---- cropping ------------------------------------------------------------------

namespace {

// One Sutherland-Hodgman pass against an axis-aligned half-plane.
std::vector<std::array<double, 2>> clip_axis(const std::vector<std::array<double, 2>>& pts,
                                             int axis, double bound, bool keep_below) {
    std::vector<std::array<double, 2>> out;
    const std::size_t n = pts.size();
    auto inside = [&](const std::array<double, 2>& p) {
        return keep_below ? p[axis] <= bound : p[axis] >= bound;
    };
    auto cross = [&](const std::array<double, 2>& a, const std::array<double, 2>& b) {
        const double t = (bound - a[axis]) / (b[axis] - a[axis]);
        std::array<double, 2> p{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
        p[axis] = bound;
        return p;
    };
    for (std::size_t i = 0; i < n; ++i) {
        const auto& prev = pts[(i + n - 1) % n];
        const auto& cur = pts[i];
        const bool in_cur = inside(cur);
        const bool in_prev = inside(prev);
        if (in_cur) {
            if (!in_prev) out.push_back(cross(prev, cur));
            out.push_back(cur);
        } else if (in_prev) {
            out.push_back(cross(prev, cur));
        }
    }
    return out;
}

double shoelace_area(const std::vector<std::array<double, 2>>& pts) {
    double acc = 0.0;
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = pts[i];
        const auto& b = pts[(i + 1) % n];
        acc += a[0] * b[1] - b[0] * a[1];
    }
    return std::abs(acc) * 0.5;
}

// Clips to [x0,x1]x[y0,y1]; empty result means no interior overlap.
std::optional<Polygon> clip_to_rect(const Polygon& poly, double x0, double y0, double x1,
                                    double y1) {
    std::vector<std::array<double, 2>> pts = poly.vertices;
    pts = clip_axis(pts, 0, x0, false);
    pts = clip_axis(pts, 0, x1, true);
    pts = clip_axis(pts, 1, y0, false);
    pts = clip_axis(pts, 1, y1, true);
    if (pts.size() < 3 || shoelace_area(pts) <= 0.0) return std::nullopt;
    Polygon out;
    out.vertices = std::move(pts);
    return out;
}

Polygon translate_polygon(const Polygon& poly, double dx, double dy) {
    Polygon out = poly;
    for (auto& v : out.vertices) {
        v[0] += dx;
        v[1] += dy;
    }
    return out;
}

}  // namespace

std::optional<AnnotatedInstance> crop_instance(const AnnotatedInstance& inst,
                                               const ImageInfo& image, const CropWindow& crop) {
    if (crop.width < 1 || crop.height < 1) {
        raise(ErrorCode::InvalidArgument, "crop window must be at least 1x1");
    }
    if (crop.x0 < 0 || crop.y0 < 0 || crop.x0 + crop.width > image.width ||
        crop.y0 + crop.height > image.height) {
        raise(ErrorCode::RangeError, "crop window exceeds the image");
    }
    validate_polygon(inst.amodal);
    const double x0 = crop.x0, y0 = crop.y0;
    const double x1 = crop.x0 + crop.width, y1 = crop.y0 + crop.height;

    auto clipped_amodal = clip_to_rect(inst.amodal, x0, y0, x1, y1);
    if (!clipped_amodal) return std::nullopt;

    AnnotatedInstance out;
    out.image_id = inst.image_id;
    out.class_id = inst.class_id;
    out.occlusion = inst.occlusion;
    out.amodal = translate_polygon(*clipped_amodal, -x0, -y0);
    if (inst.visible) {
        validate_polygon(*inst.visible);
        if (auto clipped_visible = clip_to_rect(*inst.visible, x0, y0, x1, y1)) {
            out.visible = translate_polygon(*clipped_visible, -x0, -y0);
        }
    }
    return out;
}

std::vector<AnnotatedInstance> crop_subset(const std::vector<AnnotatedInstance>& instances,
                                           const ImageInfo& image, const CropWindow& crop) {
    std::vector<AnnotatedInstance> out;
    for (const auto& inst : instances) {
        if (auto cropped = crop_instance(inst, image, crop)) {
            out.push_back(std::move(*cropped));
        }
    }
    return out;
}

// ---- planar affine maps ----------------------------------------------------------

std::array<double, 2> Affine2::apply(const std::array<double, 2>& p) const {
    return {a * p[0] + b * p[1] + tx, c * p[0] + d * p[1] + ty};
}

Affine2 Affine2::then(const Affine2& next) const {
    Affine2 m;
    m.a = next.a * a + next.b * c;
    m.b = next.a * b + next.b * d;
    m.tx = next.a * tx + next.b * ty + next.tx;
    m.c = next.c * a + next.d * c;
    m.d = next.c * b + next.d * d;
    m.ty = next.c * tx + next.d * ty + next.ty;
    return m;
}

Affine2 Affine2::inverse() const {
    const double det = a * d - b * c;
    if (det == 0.0 || !std::isfinite(det)) {
        raise(ErrorCode::DegenerateInput, "affine map is not invertible");
    }
    Affine2 m;
    m.a = d / det;
    m.b = -b / det;
    m.c = -c / det;
    m.d = a / det;
    m.tx = -(m.a * tx + m.b * ty);
    m.ty = -(m.c * tx + m.d * ty);
    return m;
}

Affine2 Affine2::identity() { return {}; }

Affine2 Affine2::translation(double dx, double dy) {
    Affine2 m;
    m.tx = dx;
    m.ty = dy;
    return m;
}

Affine2 Affine2::rotation_deg_about(double degrees, double cx, double cy) {
    const double rad = degrees * std::acos(-1.0) / 180.0;
    Affine2 rot;
    rot.a = std::cos(rad);
    rot.b = -std::sin(rad);
    rot.c = std::sin(rad);
    rot.d = std::cos(rad);
    return translation(-cx, -cy).then(rot).then(translation(cx, cy));
}

Affine2 Affine2::shear_x_deg_about(double degrees, double cx, double cy) {
    Affine2 sh;
    sh.b = std::tan(degrees * std::acos(-1.0) / 180.0);
    return translation(-cx, -cy).then(sh).then(translation(cx, cy));
}

Affine2 Affine2::hflip_about(double cx) {
    Affine2 m;
    m.a = -1.0;
    m.tx = 2.0 * cx;
    return m;
}

Affine2 Affine2::vflip_about(double cy) {
    Affine2 m;
    m.d = -1.0;
    m.ty = 2.0 * cy;
    return m;
}

Polygon transform_polygon(const Polygon& poly, const Affine2& m) {
    validate_polygon(poly);
    Polygon out;
    out.vertices.reserve(poly.vertices.size());
    for (const auto& v : poly.vertices) out.vertices.push_back(m.apply(v));
    return out;
}

Image8 warp_image_nearest(const Image8& src, const Affine2& m) {
    if (src.width < 1 || src.height < 1) {
        raise(ErrorCode::InvalidArgument, "source image is empty");
    }
    const Affine2 inv = m.inverse();
    Image8 dst;
    dst.width = src.width;
    dst.height = src.height;
    dst.pixels.assign(static_cast<std::size_t>(src.width) * src.height, 0);
    for (int y = 0; y < dst.height; ++y) {
        for (int x = 0; x < dst.width; ++x) {
            const auto s = inv.apply({x + 0.5, y + 0.5});
            const int sx = static_cast<int>(std::floor(s[0]));
            const int sy = static_cast<int>(std::floor(s[1]));
            if (sx >= 0 && sx < src.width && sy >= 0 && sy < src.height) {
                dst.at(x, y) = src.at(sx, sy);
            }
        }
    }
    return dst;
}

// ---- augmentation -----------------------------------------------------------------

void AugmentSpec::validate() const {
    auto in_range = [](double v, double hi) { return std::isfinite(v) && v >= 0.0 && v <= hi; };
    if (!in_range(rotation_deg, 15.0)) {
        raise(ErrorCode::InvalidArgument, "rotation magnitude must lie in [0, 15] degrees");
    }
    if (!in_range(shear_deg, 10.0)) {
        raise(ErrorCode::InvalidArgument, "shear magnitude must lie in [0, 10] degrees");
    }
    if (!in_range(exposure, 0.15)) {
        raise(ErrorCode::InvalidArgument, "exposure magnitude must lie in [0, 0.15]");
    }
    if (!in_range(noise_fraction, 0.0145)) {
        raise(ErrorCode::InvalidArgument, "noise fraction must lie in [0, 0.0145]");
    }
    if (variants_per_image < 0) {
        raise(ErrorCode::InvalidArgument, "variants_per_image must be non-negative");
    }
}

namespace {

void apply_exposure(Image8& img, double delta) {
    const double gain = 1.0 + delta;
    for (auto& px : img.pixels) {
        const double v = std::round(px * gain);
        px = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
}

void apply_salt_pepper(Image8& img, double fraction, Rng& rng) {
    const std::size_t n = img.pixels.size();
    const std::size_t count = static_cast<std::size_t>(fraction * static_cast<double>(n));
    if (count == 0) return;
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_below(
                                      static_cast<std::uint64_t>(n - i)));
        std::swap(idx[i], idx[j]);
        img.pixels[idx[i]] = rng.coin() ? 255 : 0;
    }
}

}  // namespace

std::vector<DataEntry> augment(const DataEntry& entry, const AugmentSpec& spec) {
    spec.validate();
    if (entry.image.width < 1 || entry.image.height < 1) {
        raise(ErrorCode::InvalidArgument, "entry image is empty");
    }
    std::vector<DataEntry> out;
    out.push_back(entry);

    Rng rng(spec.seed);
    const double cx = entry.image.width / 2.0;
    const double cy = entry.image.height / 2.0;

    for (int v = 0; v < spec.variants_per_image; ++v) {
        // Fixed draw order keeps a (spec, seed) pair reproducible.
        const bool fh = rng.coin() && spec.hflip;
        const bool fv = rng.coin() && spec.vflip;
        const double rot = rng.uniform(-spec.rotation_deg, spec.rotation_deg);
        const double shear = rng.uniform(-spec.shear_deg, spec.shear_deg);
        const double exposure = rng.uniform(-spec.exposure, spec.exposure);
        const double noise = rng.uniform(0.0, spec.noise_fraction);

        Affine2 m = Affine2::identity();
        if (fh) m = m.then(Affine2::hflip_about(cx));
        if (fv) m = m.then(Affine2::vflip_about(cy));
        m = m.then(Affine2::rotation_deg_about(rot, cx, cy));
        m = m.then(Affine2::shear_x_deg_about(shear, cx, cy));

        DataEntry variant;
        variant.image = warp_image_nearest(entry.image, m);
        apply_exposure(variant.image, exposure);
        apply_salt_pepper(variant.image, noise, rng);
        for (const auto& inst : entry.instances) {
            AnnotatedInstance moved = inst;
            moved.amodal = transform_polygon(inst.amodal, m);
            if (inst.visible) moved.visible = transform_polygon(*inst.visible, m);
            variant.instances.push_back(std::move(moved));
        }
        out.push_back(std::move(variant));
    }
    return out;
}

// ---- synthetic occlusion scenes ------------------------------------------------------

namespace {

struct Ellipse {
    double cx, cy, ax, ay, phi;
};

BinaryMask rasterize_ellipse(const Ellipse& e, int width, int height) {
    BinaryMask mask(width, height);
    const double cphi = std::cos(e.phi);
    const double sphi = std::sin(e.phi);
    const double r = std::max(e.ax, e.ay) + 1.0;
    const int x_lo = std::max(0, static_cast<int>(std::floor(e.cx - r)));
    const int x_hi = std::min(width - 1, static_cast<int>(std::ceil(e.cx + r)));
    const int y_lo = std::max(0, static_cast<int>(std::floor(e.cy - r)));
    const int y_hi = std::min(height - 1, static_cast<int>(std::ceil(e.cy + r)));
    for (int y = y_lo; y <= y_hi; ++y) {
        for (int x = x_lo; x <= x_hi; ++x) {
            const double dx = (x + 0.5) - e.cx;
            const double dy = (y + 0.5) - e.cy;
            const double u = (dx * cphi + dy * sphi) / e.ax;
            const double v = (-dx * sphi + dy * cphi) / e.ay;
            if (u * u + v * v <= 1.0) mask.set(x, y, true);
        }
    }
    return mask;
}

// Signed offsets of the fruit's pixels along the occluder normal; cutting at
// threshold delta hides exactly the pixels with offset > delta.
struct CutPlan {
    std::vector<double> offsets_desc;  // sorted descending
    double delta = 0.0;
    std::size_t hidden = 0;
};

bool plan_cut(const std::vector<double>& offsets_sorted_desc, double target,
              double tolerance, CutPlan* plan) {
    const std::size_t n = offsets_sorted_desc.size();
    const auto k_target = static_cast<std::size_t>(
        std::llround(target * static_cast<double>(n)));
    for (std::size_t k : {k_target, k_target > 0 ? k_target - 1 : k_target, k_target + 1}) {
        if (k > n) continue;
        double delta;
        if (k == 0) {
            delta = offsets_sorted_desc.front() + 1.0;
        } else if (k == n) {
            delta = offsets_sorted_desc.back() - 1.0;
        } else {
            delta = 0.5 * (offsets_sorted_desc[k - 1] + offsets_sorted_desc[k]);
        }
        const std::size_t hidden = static_cast<std::size_t>(
            std::upper_bound(offsets_sorted_desc.begin(), offsets_sorted_desc.end(), delta,
                             std::greater<double>()) -
            offsets_sorted_desc.begin());
        const double achieved = static_cast<double>(hidden) / static_cast<double>(n);
        if (std::abs(achieved - target) <= tolerance) {
            plan->delta = delta;
            plan->hidden = hidden;
            return true;
        }
    }
    return false;
}

}  // namespace

SyntheticScene synth_scene(const SynthParams& params, std::uint64_t seed) {
    if (params.width < 16 || params.height < 16) {
        raise(ErrorCode::InvalidArgument, "canvas must be at least 16x16");
    }
    if (!(params.tolerance > 0.0)) {
        raise(ErrorCode::InvalidArgument, "tolerance must be positive");
    }
    for (double t : params.target_ratios) {
        if (!(t >= 0.0) || t >= 1.0) {
            raise(ErrorCode::InvalidArgument, "target ratios must lie in [0,1)");
        }
    }

    SyntheticScene scene;
    scene.width = params.width;
    scene.height = params.height;
    scene.seed = seed;
    scene.image.width = params.width;
    scene.image.height = params.height;
    scene.image.pixels.assign(static_cast<std::size_t>(params.width) * params.height, 30);

    const std::size_t n = params.target_ratios.size();
    if (n == 0) return scene;

    const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    const int rows = static_cast<int>((n + cols - 1) / cols);
    const double cell_w = static_cast<double>(params.width) / cols;
    const double cell_h = static_cast<double>(params.height) / rows;
    const double cell_min = std::min(cell_w, cell_h);

    Rng rng(seed);
    const double golden = 2.399963229728653;

    for (std::size_t i = 0; i < n; ++i) {
        const double target = params.target_ratios[i];
        const int gx = static_cast<int>(i) % cols;
        const int gy = static_cast<int>(i) / cols;

        SynthFruit fruit;
        fruit.target_ratio = target;
        fruit.class_id = 0;

        bool placed = false;
        for (int attempt = 0; attempt < 8 && !placed; ++attempt) {
            Ellipse e;
            e.cx = (gx + 0.5) * cell_w + rng.uniform(-0.05, 0.05) * cell_min;
            e.cy = (gy + 0.5) * cell_h + rng.uniform(-0.05, 0.05) * cell_min;
            e.ax = rng.uniform(0.22, 0.30) * cell_min;
            e.ay = rng.uniform(0.22, 0.30) * cell_min;
            e.phi = rng.uniform(0.0, std::acos(-1.0));
            BinaryMask amodal = rasterize_ellipse(e, params.width, params.height);
            if (amodal.area() < 32) continue;

            if (target == 0.0) {
                fruit.amodal = amodal;
                fruit.visible = amodal;
                fruit.achieved_ratio = 0.0;
                placed = true;
                break;
            }

            double theta = rng.uniform(0.0, 2.0 * std::acos(-1.0));
            for (int angle_try = 0; angle_try < 8; ++angle_try, theta += golden) {
                const double nx = std::cos(theta);
                const double ny = std::sin(theta);
                std::vector<double> offsets;
                offsets.reserve(amodal.area());
                for (int y = 0; y < params.height; ++y) {
                    for (int x = 0; x < params.width; ++x) {
                        if (!amodal.at(x, y)) continue;
                        offsets.push_back(((x + 0.5) - e.cx) * nx + ((y + 0.5) - e.cy) * ny);
                    }
                }
                std::sort(offsets.begin(), offsets.end(), std::greater<double>());
                CutPlan plan;
                if (!plan_cut(offsets, target, params.tolerance * 0.75, &plan)) continue;

                BinaryMask visible = amodal;
                for (int y = 0; y < params.height; ++y) {
                    for (int x = 0; x < params.width; ++x) {
                        if (!amodal.at(x, y)) continue;
                        const double off =
                            ((x + 0.5) - e.cx) * nx + ((y + 0.5) - e.cy) * ny;
                        if (off > plan.delta) visible.set(x, y, false);
                    }
                }
                fruit.amodal = amodal;
                fruit.visible = visible;
                fruit.achieved_ratio = 1.0 - static_cast<double>(visible.area()) /
                                                 static_cast<double>(amodal.area());
                placed = true;
                break;
            }
        }
        if (!placed) {
            raise(ErrorCode::GenerationError,
                  "could not satisfy target ratio " + std::to_string(target) +
                      " on the given canvas");
        }
        fruit.level = occlusion_level_for_ratio(fruit.achieved_ratio);

        for (int y = 0; y < params.height; ++y) {
            for (int x = 0; x < params.width; ++x) {
                if (fruit.visible.at(x, y)) {
                    scene.image.at(x, y) = 205;
                } else if (fruit.amodal.at(x, y)) {
                    scene.image.at(x, y) = 90;  // hidden by the occluder
                }
            }
        }
        scene.fruits.push_back(std::move(fruit));
    }
    return scene;
}

// ---- partitioning ---------------------------------------------------------------------

SplitResult split_dataset(int n_items, const SplitCounts& counts, std::uint64_t seed) {
    if (n_items < 0) raise(ErrorCode::InvalidArgument, "item count must be non-negative");
    if (counts.train < 0 || counts.val < 0 || counts.test < 0 ||
        counts.train + counts.val + counts.test <= 0) {
        raise(ErrorCode::InvalidArgument, "split counts must be non-negative and not all zero");
    }

    std::vector<int> idx(static_cast<std::size_t>(n_items));
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    for (std::size_t i = idx.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(idx[i - 1], idx[j]);
    }

    const double total = counts.train + counts.val + counts.test;
    const double shares[3] = {counts.train / total, counts.val / total, counts.test / total};
    std::size_t take[3];
    double frac[3];
    std::size_t assigned = 0;
    for (int s = 0; s < 3; ++s) {
        const double exact = shares[s] * n_items;
        take[s] = static_cast<std::size_t>(std::floor(exact));
        frac[s] = exact - std::floor(exact);
        assigned += take[s];
    }
    // Largest remainder; ties resolve train, then val, then test.
    while (assigned < static_cast<std::size_t>(n_items)) {
        int best = 0;
        for (int s = 1; s < 3; ++s) {
            if (frac[s] > frac[best]) best = s;
        }
        ++take[best];
        frac[best] = -1.0;
        ++assigned;
    }

    SplitResult result;
    std::size_t pos = 0;
    auto slice = [&](std::size_t count) {
        std::vector<int> part(idx.begin() + pos, idx.begin() + pos + count);
        pos += count;
        return part;
    };
    result.train = slice(take[0]);
    result.val = slice(take[1]);
    result.test = slice(take[2]);
    return result;
}

}  // namespace hk
