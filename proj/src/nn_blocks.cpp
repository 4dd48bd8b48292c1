#include "harvestkit/nn_blocks.hpp"

#include <cmath>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "harvestkit/io_util.hpp"

namespace hk {

// ---- global attention block ----------------------------------------------

GamParams GamParams::zeros(int channels, int reduction) {
    GamParams p;
    p.channels = channels;
    p.reduction_ratio = reduction;
    p.mlp = ChannelMlp::zeros(channels, reduction);
    p.spatial_kernel = Tensor({1, 2, 7, 7});
    p.spatial_bias = 0.0;
    return p;
}

GamParams GamParams::seeded(int channels, int reduction, std::uint64_t seed) {
    GamParams p = zeros(channels, reduction);
    Rng rng(seed);
    p.mlp = ChannelMlp::seeded(channels, reduction, rng.split());
    p.spatial_kernel = Tensor::random_uniform({1, 2, 7, 7}, rng, -0.2, 0.2);
    p.spatial_bias = rng.uniform(-0.1, 0.1);
    return p;
}

void GamParams::validate() const {
    if (channels <= 0) raise(ErrorCode::InvalidArgument, "attention block needs channels >= 1");
    if (reduction_ratio < 1) raise(ErrorCode::InvalidArgument, "reduction ratio must be >= 1");
    mlp.validate();
    if (mlp.in_channels != channels) {
        raise(ErrorCode::ShapeMismatch, "MLP width disagrees with block channel count");
    }
    const std::vector<int> want{1, 2, 7, 7};
    if (spatial_kernel.shape() != want) {
        raise(ErrorCode::ShapeMismatch, "spatial kernel must be {1,2,7,7}");
    }
}

Tensor gam_channel_attention(const Tensor& f1, const GamParams& params) {
    params.validate();
    if (f1.rank() != 3 || f1.dim(0) != params.channels) {
        raise(ErrorCode::ShapeMismatch, "channel attention input must be {C,H,W} with matching C");
    }
    const Tensor z_avg = pool(f1, PoolMode::Avg, PoolScope::global_spatial());
    const Tensor z_max = pool(f1, PoolMode::Max, PoolScope::global_spatial());
    const std::vector<double> a = mlp_channel(z_avg.data(), params.mlp);
    const std::vector<double> b = mlp_channel(z_max.data(), params.mlp);
    Tensor sum_t({params.channels});
    for (std::size_t i = 0; i < sum_t.size(); ++i) sum_t[i] = a[i] + b[i];
    return sigmoid_map(sum_t);
}

Tensor gam_spatial_attention(const Tensor& f2, const GamParams& params) {
    params.validate();
    if (f2.rank() != 3) raise(ErrorCode::ShapeMismatch, "spatial attention input must be {C,H,W}");
    const Tensor avg = pool(f2, PoolMode::Avg, PoolScope::per_pixel_over_channels());
    const Tensor mx = pool(f2, PoolMode::Max, PoolScope::per_pixel_over_channels());
    const Tensor d = combine(avg, mx, CombineOp::ConcatChannels);
    const Tensor c = conv2d(d, params.spatial_kernel, {params.spatial_bias}, 3);
    return sigmoid_map(c);
}

Tensor gam_forward(const Tensor& f1, const GamParams& params) {
    const Tensor mc = gam_channel_attention(f1, params);
    const Tensor f2 = combine(mc, f1, CombineOp::Mul);
    const Tensor ms = gam_spatial_attention(f2, params);
    return combine(ms, f2, CombineOp::Mul);
}

Var gam_channel_attention(Tape& tape, Var f1, const GamParams& params) {
    params.validate();
    Var za = tape.pool(f1, PoolMode::Avg, PoolScope::global_spatial());
    Var zm = tape.pool(f1, PoolMode::Max, PoolScope::global_spatial());
    Var ma = tape.mlp(za, params.mlp);
    Var mb = tape.mlp(zm, params.mlp);
    Var s = tape.combine(ma, mb, CombineOp::Add);
    return tape.sigmoid(s);
}

Var gam_spatial_attention(Tape& tape, Var f2, const GamParams& params) {
    params.validate();
    Var avg = tape.pool(f2, PoolMode::Avg, PoolScope::per_pixel_over_channels());
    Var mx = tape.pool(f2, PoolMode::Max, PoolScope::per_pixel_over_channels());
    Var d = tape.combine(avg, mx, CombineOp::ConcatChannels);
    Var c = tape.conv2d(d, params.spatial_kernel, {params.spatial_bias}, 3);
    return tape.sigmoid(c);
}

Var gam_forward(Tape& tape, Var f1, const GamParams& params) {
    Var mc = gam_channel_attention(tape, f1, params);
    Var f2 = tape.combine(mc, f1, CombineOp::Mul);
    Var ms = gam_spatial_attention(tape, f2, params);
    return tape.combine(ms, f2, CombineOp::Mul);
}

// ---- pyramid pooling block -------------------------------------------------

SppfConfig SppfConfig::seeded(int in, int hidden, int out, int kernel, std::uint64_t seed) {
    SppfConfig c;
    c.kernel = kernel;
    c.in_channels = in;
    c.hidden_channels = hidden;
    c.out_channels = out;
    Rng rng(seed);
    c.entry_weights = Tensor::random_uniform({hidden, in, 1, 1}, rng, -0.5, 0.5);
    c.entry_bias.resize(static_cast<std::size_t>(hidden));
    for (double& v : c.entry_bias) v = rng.uniform(-0.1, 0.1);
    c.exit_weights = Tensor::random_uniform({out, 4 * hidden, 1, 1}, rng, -0.5, 0.5);
    c.exit_bias.resize(static_cast<std::size_t>(out));
    for (double& v : c.exit_bias) v = rng.uniform(-0.1, 0.1);
    c.validate();
    return c;
}

void SppfConfig::validate() const {
    if (kernel <= 0 || kernel % 2 == 0) {
        raise(ErrorCode::InvalidArgument, "pooling kernel must be odd, got " + std::to_string(kernel));
    }
    if (in_channels < 1 || hidden_channels < 1 || out_channels < 1) {
        raise(ErrorCode::InvalidArgument, "channel counts must be >= 1");
    }
    const std::vector<int> we{hidden_channels, in_channels, 1, 1};
    const std::vector<int> wx{out_channels, 4 * hidden_channels, 1, 1};
    if (entry_weights.shape() != we || exit_weights.shape() != wx) {
        raise(ErrorCode::ShapeMismatch, "pyramid block conv weight shapes disagree with channel counts");
    }
    if (static_cast<int>(entry_bias.size()) != hidden_channels ||
        static_cast<int>(exit_bias.size()) != out_channels) {
        raise(ErrorCode::ShapeMismatch, "pyramid block bias lengths disagree with channel counts");
    }
}

Tensor sppf_forward(const Tensor& f, const SppfConfig& cfg, SppfTrace* trace) {
    cfg.validate();
    if (f.rank() != 3 || f.dim(0) != cfg.in_channels) {
        raise(ErrorCode::ShapeMismatch, "pyramid block input must be {C,H,W} with matching C");
    }
    const PoolScope win = PoolScope::window_same(cfg.kernel);
    const Tensor entry = conv2d(f, cfg.entry_weights, cfg.entry_bias, 0);
    const Tensor p1 = pool(entry, PoolMode::Max, win);
    const Tensor p2 = pool(p1, PoolMode::Max, win);
    const Tensor p3 = pool(p2, PoolMode::Max, win);
    Tensor cat = combine(entry, p1, CombineOp::ConcatChannels);
    cat = combine(cat, p2, CombineOp::ConcatChannels);
    cat = combine(cat, p3, CombineOp::ConcatChannels);
    if (trace) {
        trace->entry = entry;
        trace->pool1 = p1;
        trace->pool2 = p2;
        trace->pool3 = p3;
    }
    return conv2d(cat, cfg.exit_weights, cfg.exit_bias, 0);
}

Var sppf_forward(Tape& tape, Var f, const SppfConfig& cfg) {
    cfg.validate();
    const PoolScope win = PoolScope::window_same(cfg.kernel);
    Var entry = tape.conv2d(f, cfg.entry_weights, cfg.entry_bias, 0);
    Var p1 = tape.pool(entry, PoolMode::Max, win);
    Var p2 = tape.pool(p1, PoolMode::Max, win);
    Var p3 = tape.pool(p2, PoolMode::Max, win);
    Var cat = tape.combine(entry, p1, CombineOp::ConcatChannels);
    cat = tape.combine(cat, p2, CombineOp::ConcatChannels);
    cat = tape.combine(cat, p3, CombineOp::ConcatChannels);
    return tape.conv2d(cat, cfg.exit_weights, cfg.exit_bias, 0);
}

// ---- segmentation head prototype stack --------------------------------------

DeepHeadConfig DeepHeadConfig::seeded(int in, int mid, int proto, std::uint64_t seed) {
    DeepHeadConfig c;
    c.in_channels = in;
    c.mid_channels = mid;
    c.proto_channels = proto;
    Rng rng(seed);
    // Scale keeps activations O(1) through the 3x3 stacks.
    const double s1 = 1.0 / std::sqrt(9.0 * in);
    const double s2 = 1.0 / std::sqrt(9.0 * mid);
    const double s3 = 1.0 / std::sqrt(static_cast<double>(mid));
    c.w1 = Tensor::random_uniform({mid, in, 3, 3}, rng, -s1, s1);
    c.b1.resize(static_cast<std::size_t>(mid));
    for (double& v : c.b1) v = rng.uniform(-0.05, 0.05);
    c.w2 = Tensor::random_uniform({mid, mid, 3, 3}, rng, -s2, s2);
    c.b2.resize(static_cast<std::size_t>(mid));
    for (double& v : c.b2) v = rng.uniform(-0.05, 0.05);
    c.w3 = Tensor::random_uniform({proto, mid, 1, 1}, rng, -s3, s3);
    c.b3.resize(static_cast<std::size_t>(proto));
    for (double& v : c.b3) v = rng.uniform(-0.05, 0.05);
    c.validate();
    return c;
}

void DeepHeadConfig::validate() const {
    if (in_channels < 1 || mid_channels < 1 || proto_channels < 1) {
        raise(ErrorCode::InvalidArgument, "head channel counts must be >= 1");
    }
    const std::vector<int> s1{mid_channels, in_channels, 3, 3};
    const std::vector<int> s2{mid_channels, mid_channels, 3, 3};
    const std::vector<int> s3{proto_channels, mid_channels, 1, 1};
    if (w1.shape() != s1 || w2.shape() != s2 || w3.shape() != s3) {
        raise(ErrorCode::ShapeMismatch, "head conv weight shapes disagree with channel counts");
    }
    if (static_cast<int>(b1.size()) != mid_channels ||
        static_cast<int>(b2.size()) != mid_channels ||
        static_cast<int>(b3.size()) != proto_channels) {
        raise(ErrorCode::ShapeMismatch, "head bias lengths disagree with channel counts");
    }
}

Tensor deep_head_proto_forward(const Tensor& f, const DeepHeadConfig& cfg,
                               std::vector<std::vector<int>>* shape_trace) {
    cfg.validate();
    if (f.rank() != 3 || f.dim(0) != cfg.in_channels) {
        raise(ErrorCode::ShapeMismatch,
              "head input channels " + std::to_string(f.rank() == 3 ? f.dim(0) : -1) +
                  " != configured " + std::to_string(cfg.in_channels));
    }
    if (shape_trace) shape_trace->clear();
    auto note = [&](const Tensor& t) {
        if (shape_trace) shape_trace->push_back(t.shape());
    };
    Tensor h1 = relu_map(conv2d(f, cfg.w1, cfg.b1, 1));
    note(h1);
    Tensor h2 = relu_map(conv2d(h1, cfg.w2, cfg.b2, 1));
    note(h2);
    Tensor out = conv2d(h2, cfg.w3, cfg.b3, 0);
    note(out);
    return out;
}

Var deep_head_proto_forward(Tape& tape, Var f, const DeepHeadConfig& cfg) {
    cfg.validate();
    Var h1 = tape.relu(tape.conv2d(f, cfg.w1, cfg.b1, 1));
    Var h2 = tape.relu(tape.conv2d(h1, cfg.w2, cfg.b2, 1));
    return tape.conv2d(h2, cfg.w3, cfg.b3, 0);
}

// ---- losses -----------------------------------------------------------------

namespace {

void validate_bce_inputs(const Tensor& p, const Tensor& y, const AsymConfig& cfg) {
    if (!p.same_shape(y)) raise(ErrorCode::ShapeMismatch, "prediction and target shapes differ");
    if (!(cfg.alpha_fn > 0.0) || !(cfg.alpha_fp > 0.0)) {
        raise(ErrorCode::InvalidArgument, "loss asymmetry factors must be > 0");
    }
    for (double v : y.data()) {
        if (v < 0.0 || v > 1.0) raise(ErrorCode::RangeError, "targets must lie in [0,1]");
    }
}

double clamp_prob(double v) {
    if (v < kBceEps) return kBceEps;
    if (v > 1.0 - kBceEps) return 1.0 - kBceEps;
    return v;
}

}  // namespace

double asym_bce(const Tensor& p, const Tensor& y, const AsymConfig& cfg) {
    validate_bce_inputs(p, y, cfg);
    // The asymmetry factors multiply the reduced sums, so the ratio law
    // asym/standard = alpha holds to rounding on single-part targets.
    double fg = 0.0, bg = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double pc = clamp_prob(p[i]);
        const double yi = y[i];
        fg += yi * -std::log(pc);
        bg += (1.0 - yi) * -std::log(1.0 - pc);
    }
    const double n = static_cast<double>(p.size());
    return cfg.alpha_fn * (fg / n) + cfg.alpha_fp * (bg / n);
}

double bce(const Tensor& p, const Tensor& y) { return asym_bce(p, y, AsymConfig{1.0, 1.0}); }

Var asym_bce(Tape& tape, Var p, const Tensor& y, const AsymConfig& cfg) {
    const Tensor& pv = tape.value(p);
    const double loss = asym_bce(pv, y, cfg);
    Tensor target = y;
    return tape.make_node(
        {p}, Tensor({1}, {loss}),
        [target, cfg](const Tensor& g, const std::vector<const Tensor*>& pvals,
                      const std::vector<Tensor*>& pgrads) {
            const Tensor& pin = *pvals[0];
            Tensor& gp = *pgrads[0];
            const double n = static_cast<double>(pin.size());
            for (std::size_t i = 0; i < pin.size(); ++i) {
                const double raw = pin[i];
                if (raw < kBceEps || raw > 1.0 - kBceEps) continue;  // clamp is flat
                const double yi = target[i];
                const double d =
                    (cfg.alpha_fn * (yi * -1.0 / raw) + cfg.alpha_fp * ((1.0 - yi) / (1.0 - raw))) / n;
                gp[i] += g[0] * d;
            }
        });
}

double box_iou(const Box& a, const Box& b) {
    const double ax1 = a.cx - a.w / 2.0, ax2 = a.cx + a.w / 2.0;
    const double ay1 = a.cy - a.h / 2.0, ay2 = a.cy + a.h / 2.0;
    const double bx1 = b.cx - b.w / 2.0, bx2 = b.cx + b.w / 2.0;
    const double by1 = b.cy - b.h / 2.0, by2 = b.cy + b.h / 2.0;
    const double iw = std::max(0.0, std::min(ax2, bx2) - std::max(ax1, bx1));
    const double ih = std::max(0.0, std::min(ay2, by2) - std::max(ay1, by1));
    const double inter = iw * ih;
    const double uni = a.w * a.h + b.w * b.h - inter;
    return inter / uni;
}

double ciou_loss(const Box& pred, const Box& gt) {
    if (!(pred.w > 0.0) || !(pred.h > 0.0) || !(gt.w > 0.0) || !(gt.h > 0.0)) {
        raise(ErrorCode::DegenerateInput, "boxes must have positive width and height");
    }
    const double iou = box_iou(pred, gt);
    const double rho2 = (pred.cx - gt.cx) * (pred.cx - gt.cx) +
                        (pred.cy - gt.cy) * (pred.cy - gt.cy);
    const double ex1 = std::min(pred.cx - pred.w / 2.0, gt.cx - gt.w / 2.0);
    const double ex2 = std::max(pred.cx + pred.w / 2.0, gt.cx + gt.w / 2.0);
    const double ey1 = std::min(pred.cy - pred.h / 2.0, gt.cy - gt.h / 2.0);
    const double ey2 = std::max(pred.cy + pred.h / 2.0, gt.cy + gt.h / 2.0);
    const double c2 = (ex2 - ex1) * (ex2 - ex1) + (ey2 - ey1) * (ey2 - ey1);
    const double pi = 3.14159265358979323846;
    const double dt = std::atan(gt.w / gt.h) - std::atan(pred.w / pred.h);
    const double v = 4.0 / (pi * pi) * dt * dt;
    double aspect = 0.0;
    if (v > 0.0) {
        const double alpha = v / ((1.0 - iou) + v);
        aspect = alpha * v;
    }
    return 1.0 - iou + rho2 / c2 + aspect;
}

double total_loss(double box, double mask, double cls, const LossWeights& w) {
    if (w.lambda_box < 0.0 || w.lambda_mask < 0.0 || w.lambda_cls < 0.0) {
        raise(ErrorCode::InvalidArgument, "loss weights must be non-negative");
    }
    if (!std::isfinite(box) || !std::isfinite(mask) || !std::isfinite(cls)) {
        raise(ErrorCode::InvalidArgument, "loss components must be finite");
    }
    return w.lambda_box * box + w.lambda_mask * mask + w.lambda_cls * cls;
}

// ---- parameter bundle serialization -----------------------------------------

void save_gam_params(const GamParams& p, const std::string& dir, const std::string& stem) {
    p.validate();
    namespace fs = std::filesystem;
    const fs::path base(dir);
    std::error_code ec;
    fs::create_directories(base, ec);

    Tensor w1({p.mlp.hidden, p.mlp.in_channels}, p.mlp.w1);
    Tensor b1({p.mlp.hidden}, p.mlp.b1);
    Tensor w2({p.mlp.in_channels, p.mlp.hidden}, p.mlp.w2);
    Tensor b2({p.mlp.in_channels}, p.mlp.b2);
    Tensor sb({1}, {p.spatial_bias});
    save_tensor(w1, (base / (stem + ".mlp_w1.txt")).string());
    save_tensor(b1, (base / (stem + ".mlp_b1.txt")).string());
    save_tensor(w2, (base / (stem + ".mlp_w2.txt")).string());
    save_tensor(b2, (base / (stem + ".mlp_b2.txt")).string());
    save_tensor(p.spatial_kernel, (base / (stem + ".spatial_w.txt")).string());
    save_tensor(sb, (base / (stem + ".spatial_b.txt")).string());

    nlohmann::json manifest;
    manifest["block"] = "gam";
    manifest["channels"] = p.channels;
    manifest["reduction_ratio"] = p.reduction_ratio;
    manifest["tensors"] = {
        {"mlp_w1", stem + ".mlp_w1.txt"}, {"mlp_b1", stem + ".mlp_b1.txt"},
        {"mlp_w2", stem + ".mlp_w2.txt"}, {"mlp_b2", stem + ".mlp_b2.txt"},
        {"spatial_w", stem + ".spatial_w.txt"}, {"spatial_b", stem + ".spatial_b.txt"},
    };
    atomic_write_file((base / (stem + ".manifest.json")).string(), manifest.dump(2) + "\n");
}

GamParams load_gam_params(const std::string& dir, const std::string& stem) {
    namespace fs = std::filesystem;
    const fs::path base(dir);
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(read_file((base / (stem + ".manifest.json")).string()));
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::ParseError, std::string("bad parameter manifest: ") + e.what());
    }
    if (manifest.value("block", "") != "gam") {
        raise(ErrorCode::ParseError, "manifest does not describe an attention block");
    }
    GamParams p;
    p.channels = manifest.at("channels").get<int>();
    p.reduction_ratio = manifest.at("reduction_ratio").get<int>();
    const auto& files = manifest.at("tensors");
    auto load = [&](const char* key) {
        return load_tensor((base / files.at(key).get<std::string>()).string());
    };
    Tensor w1 = load("mlp_w1"), b1 = load("mlp_b1"), w2 = load("mlp_w2"), b2 = load("mlp_b2");
    p.mlp.in_channels = p.channels;
    p.mlp.hidden = w1.dim(0);
    p.mlp.w1 = w1.data();
    p.mlp.b1 = b1.data();
    p.mlp.w2 = w2.data();
    p.mlp.b2 = b2.data();
    p.spatial_kernel = load("spatial_w");
    p.spatial_bias = load("spatial_b")[0];
    p.validate();
    return p;
}

}  // namespace hk
