#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "harvestkit/autodiff.hpp"
#include "harvestkit/tensor.hpp"

namespace hk {

// ---- global attention block ----------------------------------------------

// Channel branch: shared two-layer MLP over pooled channel vectors.
// Spatial branch: 7x7 convolution over the 2-channel stack of per-pixel
// channel-average and channel-max maps.
struct GamParams {
    int channels = 0;
    int reduction_ratio = 16;
    ChannelMlp mlp;
    Tensor spatial_kernel;  // {1,2,7,7}
    double spatial_bias = 0.0;

    static GamParams zeros(int channels, int reduction = 16);
    static GamParams seeded(int channels, int reduction, std::uint64_t seed);
    void validate() const;
};

// Per-channel weights in (0,1): sigmoid(MLP(avg pooled) + MLP(max pooled)).
Tensor gam_channel_attention(const Tensor& f1, const GamParams& params);
// Per-pixel weights in (0,1): sigmoid(conv7x7(concat(avg map, max map))).
Tensor gam_spatial_attention(const Tensor& f2, const GamParams& params);
// Channel attention applied multiplicatively, then spatial attention.
Tensor gam_forward(const Tensor& f1, const GamParams& params);

Var gam_channel_attention(Tape& tape, Var f1, const GamParams& params);
Var gam_spatial_attention(Tape& tape, Var f2, const GamParams& params);
Var gam_forward(Tape& tape, Var f1, const GamParams& params);

// ---- pyramid pooling block -------------------------------------------------

struct SppfConfig {
    int kernel = 7;
    int in_channels = 0;
    int hidden_channels = 0;
    int out_channels = 0;
    Tensor entry_weights;  // {hidden, in, 1, 1}
    std::vector<double> entry_bias;
    Tensor exit_weights;  // {out, 4*hidden, 1, 1}
    std::vector<double> exit_bias;

    static SppfConfig seeded(int in, int hidden, int out, int kernel, std::uint64_t seed);
    void validate() const;
};

struct SppfTrace {
    Tensor entry;  // after the 1x1 entry conv
    Tensor pool1, pool2, pool3;
};

// Entry 1x1 conv, three sequential same-shape window max-pools, channel
// concat of the four stages, exit 1x1 conv. Spatial dims are preserved.
Tensor sppf_forward(const Tensor& f, const SppfConfig& cfg, SppfTrace* trace = nullptr);
Var sppf_forward(Tape& tape, Var f, const SppfConfig& cfg);

// ---- segmentation head prototype stack --------------------------------------

struct DeepHeadConfig {
    int in_channels = 512;
    int mid_channels = 64;
    int proto_channels = 32;
    Tensor w1;  // {mid, in, 3, 3}
    std::vector<double> b1;
    Tensor w2;  // {mid, mid, 3, 3}
    std::vector<double> b2;
    Tensor w3;  // {proto, mid, 1, 1}
    std::vector<double> b3;

    static DeepHeadConfig seeded(int in, int mid, int proto, std::uint64_t seed);
    void validate() const;
};

// conv3x3 -> rectifier -> conv3x3 -> rectifier -> conv1x1. When
// shape_trace is given it receives the shape after every stage.
Tensor deep_head_proto_forward(const Tensor& f, const DeepHeadConfig& cfg,
                               std::vector<std::vector<int>>* shape_trace = nullptr);
Var deep_head_proto_forward(Tape& tape, Var f, const DeepHeadConfig& cfg);

// ---- losses -----------------------------------------------------------------

struct AsymConfig {
    double alpha_fn = 1.1;  // weight on foreground (miss) errors
    double alpha_fp = 0.9;  // weight on background (false alarm) errors
};

struct LossWeights {
    double lambda_box = 1.0;
    double lambda_mask = 1.0;
    double lambda_cls = 1.0;
};

inline constexpr double kBceEps = 1e-7;  // probability clamp bound

// Mean over elements of -[a_fn*y*log p + a_fp*(1-y)*log(1-p)], with p
// clamped to [kBceEps, 1-kBceEps]. y is expected in [0,1].
double asym_bce(const Tensor& p, const Tensor& y, const AsymConfig& cfg = {});
double bce(const Tensor& p, const Tensor& y);
Var asym_bce(Tape& tape, Var p, const Tensor& y, const AsymConfig& cfg = {});

struct Box {
    double cx = 0.0, cy = 0.0, w = 0.0, h = 0.0;
};

// Complete-IoU loss: 1 - IoU + center-distance/enclosing-diagonal ratio
// + aspect-consistency term. Zero for identical boxes.
double ciou_loss(const Box& pred, const Box& gt);
double box_iou(const Box& a, const Box& b);

double total_loss(double box, double mask, double cls, const LossWeights& w);

// ---- parameter bundle serialization -----------------------------------------

// Bundles serialize as a small JSON manifest naming flat text tensor files.
void save_gam_params(const GamParams& p, const std::string& dir, const std::string& stem);
GamParams load_gam_params(const std::string& dir, const std::string& stem);

}  // namespace hk
