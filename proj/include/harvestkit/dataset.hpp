#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "harvestkit/evaluation.hpp"
#include "harvestkit/mask.hpp"
#include "harvestkit/pgm.hpp"

namespace hk {

struct ImageInfo {
    int id = 0;
    int width = 0;
    int height = 0;
    std::string file;
};

struct AnnotatedInstance {
    int image_id = 0;
    int class_id = 0;
    Polygon amodal;
    std::optional<Polygon> visible;
    std::optional<OcclusionLevel> occlusion;
};

struct AnnotationSet {
    std::vector<ImageInfo> images;
    std::vector<AnnotatedInstance> instances;

    const ImageInfo* find_image(int id) const;
};

// One JSON document: images: [{id, w, h, file}],
// instances: [{image, class, amodal: [[x,y]...], visible?, occlusion?}].
AnnotationSet parse_annotations(const std::string& json_text, const std::string& origin);
AnnotationSet load_annotations(const std::string& path);
std::string annotations_to_json(const AnnotationSet& set);
void save_annotations(const AnnotationSet& set, const std::string& path);

struct PredictedInstance {
    int image_id = 0;
    int class_id = 0;
    double confidence = 1.0;
    Polygon mask;
};

// {"predictions": [{image, class, confidence, mask: [[x,y]...]}]}
std::vector<PredictedInstance> parse_predictions(const std::string& json_text,
                                                 const std::string& origin);
std::vector<PredictedInstance> load_predictions(const std::string& path);
std::string predictions_to_json(const std::vector<PredictedInstance>& preds);

// Rasterizes annotations and predictions into evaluator inputs. Enforces
// visible subset-of amodal pixelwise and rejects dangling image references.
struct EvalInputs {
    std::vector<Detection> dets;
    std::vector<GroundTruthInstance> gts;
};
EvalInputs build_eval_inputs(const AnnotationSet& set,
                             const std::vector<PredictedInstance>& preds, int workers = 1);

// ---- cropping ----------------------------------------------------------------

struct CropWindow {
    int x0 = 0;
    int y0 = 0;
    int width = 256;
    int height = 256;
};

// Polygons translated into crop coordinates and clipped to the window.
// Returns nullopt when the instance lies fully outside the crop.
std::optional<AnnotatedInstance> crop_instance(const AnnotatedInstance& inst,
                                               const ImageInfo& image, const CropWindow& crop);
std::vector<AnnotatedInstance> crop_subset(const std::vector<AnnotatedInstance>& instances,
                                           const ImageInfo& image, const CropWindow& crop);

// ---- planar affine maps --------------------------------------------------------

// Row-major 2x3 matrix [a b tx; c d ty] acting on column points.
struct Affine2 {
    double a = 1.0, b = 0.0, tx = 0.0;
    double c = 0.0, d = 1.0, ty = 0.0;

    std::array<double, 2> apply(const std::array<double, 2>& p) const;
    // Composition: (next.then_after(*this)) — returns next ∘ this.
    Affine2 then(const Affine2& next) const;
    Affine2 inverse() const;

    static Affine2 identity();
    static Affine2 translation(double dx, double dy);
    static Affine2 rotation_deg_about(double degrees, double cx, double cy);
    static Affine2 shear_x_deg_about(double degrees, double cx, double cy);
    static Affine2 hflip_about(double cx);
    static Affine2 vflip_about(double cy);
};

Polygon transform_polygon(const Polygon& poly, const Affine2& m);
// Inverse-mapped nearest-neighbour warp; samples outside the source read 0.
Image8 warp_image_nearest(const Image8& src, const Affine2& m);

// ---- augmentation --------------------------------------------------------------

struct DataEntry {
    Image8 image;
    std::vector<AnnotatedInstance> instances;
};

struct AugmentSpec {
    bool hflip = true;
    bool vflip = true;
    double rotation_deg = 15.0;     // sampled in [-rotation_deg, +rotation_deg]
    double shear_deg = 10.0;        // sampled in [-shear_deg, +shear_deg]
    double exposure = 0.15;         // multiplicative delta in [-exposure, +exposure]
    double noise_fraction = 0.0145; // salt-and-pepper on up to this pixel fraction
    int variants_per_image = 2;
    std::uint64_t seed = 0;

    void validate() const;
};

// Original entry first, then variants_per_image transformed copies. Geometric
// transforms act on the pixel grid and polygon vertices identically;
// photometric ones touch pixels only.
std::vector<DataEntry> augment(const DataEntry& entry, const AugmentSpec& spec);

// ---- synthetic occlusion scenes -------------------------------------------------

struct SynthParams {
    int width = 256;
    int height = 256;
    std::vector<double> target_ratios;  // one fruit per entry, each in [0,1)
    double tolerance = 0.02;
};

struct SynthFruit {
    BinaryMask amodal;
    BinaryMask visible;
    double target_ratio = 0.0;
    double achieved_ratio = 0.0;
    OcclusionLevel level = OcclusionLevel::Zero;
    int class_id = 0;
};

struct SyntheticScene {
    int width = 0;
    int height = 0;
    std::uint64_t seed = 0;
    std::vector<SynthFruit> fruits;
    Image8 image;
};

// Ellipse fruits in disjoint grid cells; a straight occluder edge is swept
// across each fruit until the occluded fraction sits within tolerance of the
// target. Deterministic per seed.
SyntheticScene synth_scene(const SynthParams& params, std::uint64_t seed);

// ---- partitioning ---------------------------------------------------------------

struct SplitCounts {
    int train = 700;
    int val = 200;
    int test = 100;
};

struct SplitResult {
    std::vector<int> train;
    std::vector<int> val;
    std::vector<int> test;
};

// Seeded shuffle, then a largest-remainder allocation of the count ratios.
SplitResult split_dataset(int n_items, const SplitCounts& counts, std::uint64_t seed);

}  // namespace hk
