#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "harvestkit/error.hpp"
#include "harvestkit/rng.hpp"

namespace hk {

// Dense row-major tensor of doubles, rank 1..4. Constructors reject
// non-finite values and non-positive dimensions, so a Tensor in hand
// always holds finite data.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape);  // zero-filled
    Tensor(std::vector<int> shape, std::vector<double> values);

    static Tensor full(std::vector<int> shape, double value);
    static Tensor random_uniform(std::vector<int> shape, Rng& rng,
                                 double lo = -1.0, double hi = 1.0);

    const std::vector<int>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    std::size_t size() const { return data_.size(); }
    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    int dim(int axis) const { return shape_[static_cast<std::size_t>(axis)]; }

    double operator[](std::size_t i) const { return data_[i]; }
    double& operator[](std::size_t i) { return data_[i]; }

    // Rank-specific accessors; index arithmetic is the caller's contract.
    double at3(int c, int y, int x) const {
        return data_[flat3(c, y, x)];
    }
    double& at3(int c, int y, int x) { return data_[flat3(c, y, x)]; }
    double at4(int o, int i, int y, int x) const { return data_[flat4(o, i, y, x)]; }
    double& at4(int o, int i, int y, int x) { return data_[flat4(o, i, y, x)]; }

    std::size_t flat3(int c, int y, int x) const {
        return (static_cast<std::size_t>(c) * shape_[1] + y) * shape_[2] + x;
    }
    std::size_t flat4(int o, int i, int y, int x) const {
        return ((static_cast<std::size_t>(o) * shape_[1] + i) * shape_[2] + y) * shape_[3] + x;
    }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool all_finite() const;
    void require_finite(const char* context) const;

    bool operator==(const Tensor& other) const {
        return shape_ == other.shape_ && data_ == other.data_;
    }

private:
    std::vector<int> shape_;
    std::vector<double> data_;
};

// ---- pooling ----------------------------------------------------------

enum class PoolMode { Avg, Max };

// Where a pool reduces: over all spatial positions per channel, across
// channels per pixel, or over a square window at stride 1 with zero
// padding (output keeps the input's height and width).
struct PoolScope {
    enum class Kind { GlobalSpatial, AcrossChannels, Window };
    Kind kind = Kind::GlobalSpatial;
    int window = 0;

    static PoolScope global_spatial() { return {Kind::GlobalSpatial, 0}; }
    static PoolScope per_pixel_over_channels() { return {Kind::AcrossChannels, 0}; }
    static PoolScope window_same(int k) { return {Kind::Window, k}; }
};

// x is {C,H,W}. GlobalSpatial -> {C}; AcrossChannels -> {1,H,W};
// Window(k) -> {C,H,W}. Window pooling zero-pads, and the padding
// participates in the reduction (a max over an all-negative window is
// therefore 0).
Tensor pool(const Tensor& x, PoolMode mode, const PoolScope& scope);

// ---- convolution -------------------------------------------------------

// x {Cin,H,W}, weights {Cout,Cin,Kh,Kw}, bias length Cout (may be empty
// for no bias). Stride 1, symmetric zero padding. Kernel dims must be odd
// so that padding = k/2 preserves H and W when requested.
Tensor conv2d(const Tensor& x, const Tensor& weights,
              const std::vector<double>& bias, int padding);

// ---- pointwise ---------------------------------------------------------

Tensor sigmoid_map(const Tensor& x);
Tensor relu_map(const Tensor& x);
double sigmoid(double v);

// ---- channel MLP -------------------------------------------------------

// Two dense layers over a per-channel vector: C -> max(1, C/r) -> C with
// ReLU between them. Weights are row-major (rows = outputs).
struct ChannelMlp {
    int in_channels = 0;
    int hidden = 0;
    std::vector<double> w1, b1;  // w1: hidden x in
    std::vector<double> w2, b2;  // w2: in x hidden

    static int bottleneck_width(int channels, int reduction);
    static ChannelMlp zeros(int channels, int reduction);
    static ChannelMlp seeded(int channels, int reduction, std::uint64_t seed);

    void validate() const;
};

std::vector<double> mlp_channel(const std::vector<double>& z, const ChannelMlp& mlp);

// ---- combine -----------------------------------------------------------

enum class CombineOp { Mul, Add, ConcatChannels };

// Elementwise ops accept equal shapes plus two broadcast forms:
// {C} against {C,H,W} (per-channel scale) and {1,H,W} against {C,H,W}
// (per-pixel scale). ConcatChannels stacks {Ca,H,W} and {Cb,H,W}.
Tensor combine(const Tensor& a, const Tensor& b, CombineOp op);

// ---- text serialization --------------------------------------------------

// Format: first line "d0 d1 ... dn", then one %.17g value per line in
// row-major order. Round-trips exactly.
std::string tensor_to_text(const Tensor& t);
Tensor tensor_from_text(const std::string& text);
void save_tensor(const Tensor& t, const std::string& path);
Tensor load_tensor(const std::string& path);

}  // namespace hk
