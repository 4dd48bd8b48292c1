#include "harvestkit/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "harvestkit/io_util.hpp"

namespace hk {

namespace {

std::size_t checked_size(const std::vector<int>& shape) {
    if (shape.empty() || shape.size() > 4) {
        raise(ErrorCode::InvalidArgument,
              "tensor rank must be between 1 and 4, got " + std::to_string(shape.size()));
    }
    std::size_t n = 1;
    for (int d : shape) {
        if (d <= 0) {
            raise(ErrorCode::InvalidArgument,
                  "tensor dimensions must be positive, got " + std::to_string(d));
        }
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

}  // namespace

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    data_.assign(checked_size(shape_), 0.0);
}

Tensor::Tensor(std::vector<int> shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
    const std::size_t n = checked_size(shape_);
    if (n != data_.size()) {
        raise(ErrorCode::ShapeMismatch,
              "tensor shape wants " + std::to_string(n) + " values, got " +
                  std::to_string(data_.size()));
    }
    require_finite("tensor constructor");
}

Tensor Tensor::full(std::vector<int> shape, double value) {
    Tensor t(std::move(shape));
    if (!std::isfinite(value)) raise(ErrorCode::InvalidArgument, "fill value must be finite");
    std::fill(t.data_.begin(), t.data_.end(), value);
    return t;
}

Tensor Tensor::random_uniform(std::vector<int> shape, Rng& rng, double lo, double hi) {
    Tensor t(std::move(shape));
    for (double& v : t.data_) v = rng.uniform(lo, hi);
    return t;
}

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void Tensor::require_finite(const char* context) const {
    if (!all_finite()) {
        raise(ErrorCode::ValidationError, std::string(context) + ": non-finite value in tensor");
    }
}

// ---- pooling ----------------------------------------------------------

Tensor pool(const Tensor& x, PoolMode mode, const PoolScope& scope) {
    if (x.rank() != 3) {
        raise(ErrorCode::ShapeMismatch, "pool expects a rank-3 {C,H,W} tensor");
    }
    const int C = x.dim(0), H = x.dim(1), W = x.dim(2);

    switch (scope.kind) {
        case PoolScope::Kind::GlobalSpatial: {
            Tensor out({C});
            for (int c = 0; c < C; ++c) {
                double acc = (mode == PoolMode::Avg) ? 0.0 : -std::numeric_limits<double>::infinity();
                for (int y = 0; y < H; ++y) {
                    for (int xx = 0; xx < W; ++xx) {
                        const double v = x.at3(c, y, xx);
                        if (mode == PoolMode::Avg) acc += v;
                        else acc = std::max(acc, v);
                    }
                }
                out[static_cast<std::size_t>(c)] =
                    (mode == PoolMode::Avg) ? acc / (static_cast<double>(H) * W) : acc;
            }
            return out;
        }
        case PoolScope::Kind::AcrossChannels: {
            Tensor out({1, H, W});
            for (int y = 0; y < H; ++y) {
                for (int xx = 0; xx < W; ++xx) {
                    double acc = (mode == PoolMode::Avg) ? 0.0 : -std::numeric_limits<double>::infinity();
                    for (int c = 0; c < C; ++c) {
                        const double v = x.at3(c, y, xx);
                        if (mode == PoolMode::Avg) acc += v;
                        else acc = std::max(acc, v);
                    }
                    out.at3(0, y, xx) = (mode == PoolMode::Avg) ? acc / C : acc;
                }
            }
            return out;
        }
        case PoolScope::Kind::Window: {
            const int k = scope.window;
            if (k <= 0 || k % 2 == 0) {
                raise(ErrorCode::InvalidArgument,
                      "window pool needs a positive odd kernel, got " + std::to_string(k));
            }
            const int pad = k / 2;
            Tensor out({C, H, W});
            for (int c = 0; c < C; ++c) {
                for (int y = 0; y < H; ++y) {
                    for (int xx = 0; xx < W; ++xx) {
                        double acc = (mode == PoolMode::Avg) ? 0.0 : 0.0;
                        if (mode == PoolMode::Max) acc = 0.0;  // zero padding joins the max
                        bool first = true;
                        double mx = 0.0;
                        for (int dy = -pad; dy <= pad; ++dy) {
                            for (int dx = -pad; dx <= pad; ++dx) {
                                const int yy = y + dy, xs = xx + dx;
                                const bool inside = yy >= 0 && yy < H && xs >= 0 && xs < W;
                                const double v = inside ? x.at3(c, yy, xs) : 0.0;
                                if (mode == PoolMode::Avg) {
                                    acc += v;
                                } else {
                                    mx = first ? v : std::max(mx, v);
                                    first = false;
                                }
                            }
                        }
                        out.at3(c, y, xx) = (mode == PoolMode::Avg)
                                                ? acc / (static_cast<double>(k) * k)
                                                : mx;
                    }
                }
            }
            return out;
        }
    }
    raise(ErrorCode::InvalidArgument, "unknown pool scope");
}

// ---- convolution -------------------------------------------------------

Tensor conv2d(const Tensor& x, const Tensor& weights,
              const std::vector<double>& bias, int padding) {
    if (x.rank() != 3) raise(ErrorCode::ShapeMismatch, "conv2d input must be {C,H,W}");
    if (weights.rank() != 4) raise(ErrorCode::ShapeMismatch, "conv2d weights must be {O,I,Kh,Kw}");
    const int Cin = x.dim(0), H = x.dim(1), W = x.dim(2);
    const int Cout = weights.dim(0), Win = weights.dim(1);
    const int Kh = weights.dim(2), Kw = weights.dim(3);
    if (Win != Cin) {
        raise(ErrorCode::ShapeMismatch,
              "conv2d weight input channels " + std::to_string(Win) + " != input channels " +
                  std::to_string(Cin));
    }
    if (Kh % 2 == 0 || Kw % 2 == 0) {
        raise(ErrorCode::InvalidArgument, "conv2d kernel dims must be odd");
    }
    if (!bias.empty() && static_cast<int>(bias.size()) != Cout) {
        raise(ErrorCode::ShapeMismatch, "conv2d bias length must match output channels");
    }
    if (padding < 0) raise(ErrorCode::InvalidArgument, "conv2d padding must be >= 0");

    const int Ho = H + 2 * padding - Kh + 1;
    const int Wo = W + 2 * padding - Kw + 1;
    if (Ho <= 0 || Wo <= 0) {
        raise(ErrorCode::InvalidArgument, "conv2d output would be empty");
    }

    Tensor out({Cout, Ho, Wo});
    for (int o = 0; o < Cout; ++o) {
        const double b = bias.empty() ? 0.0 : bias[static_cast<std::size_t>(o)];
        for (int y = 0; y < Ho; ++y) {
            for (int xx = 0; xx < Wo; ++xx) {
                double acc = b;
                for (int i = 0; i < Cin; ++i) {
                    for (int ky = 0; ky < Kh; ++ky) {
                        const int sy = y - padding + ky;
                        if (sy < 0 || sy >= H) continue;
                        for (int kx = 0; kx < Kw; ++kx) {
                            const int sx = xx - padding + kx;
                            if (sx < 0 || sx >= W) continue;
                            acc += x.at3(i, sy, sx) * weights.at4(o, i, ky, kx);
                        }
                    }
                }
                out.at3(o, y, xx) = acc;
            }
        }
    }
    return out;
}

// ---- pointwise ---------------------------------------------------------

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

Tensor sigmoid_map(const Tensor& x) {
    Tensor out = x;
    for (double& v : out.data()) v = sigmoid(v);
    return out;
}

Tensor relu_map(const Tensor& x) {
    Tensor out = x;
    for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
    return out;
}

// ---- channel MLP -------------------------------------------------------

int ChannelMlp::bottleneck_width(int channels, int reduction) {
    if (channels <= 0) raise(ErrorCode::InvalidArgument, "channel count must be positive");
    if (reduction < 1) raise(ErrorCode::InvalidArgument, "reduction ratio must be >= 1");
    return std::max(1, channels / reduction);
}

ChannelMlp ChannelMlp::zeros(int channels, int reduction) {
    ChannelMlp m;
    m.in_channels = channels;
    m.hidden = bottleneck_width(channels, reduction);
    m.w1.assign(static_cast<std::size_t>(m.hidden) * channels, 0.0);
    m.b1.assign(static_cast<std::size_t>(m.hidden), 0.0);
    m.w2.assign(static_cast<std::size_t>(channels) * m.hidden, 0.0);
    m.b2.assign(static_cast<std::size_t>(channels), 0.0);
    return m;
}

ChannelMlp ChannelMlp::seeded(int channels, int reduction, std::uint64_t seed) {
    ChannelMlp m = zeros(channels, reduction);
    Rng rng(seed);
    for (double& v : m.w1) v = rng.uniform(-0.5, 0.5);
    for (double& v : m.b1) v = rng.uniform(-0.1, 0.1);
    for (double& v : m.w2) v = rng.uniform(-0.5, 0.5);
    for (double& v : m.b2) v = rng.uniform(-0.1, 0.1);
    return m;
}

void ChannelMlp::validate() const {
    if (in_channels <= 0 || hidden <= 0) {
        raise(ErrorCode::InvalidArgument, "channel MLP has empty layers");
    }
    const std::size_t c = static_cast<std::size_t>(in_channels);
    const std::size_t h = static_cast<std::size_t>(hidden);
    if (w1.size() != h * c || b1.size() != h || w2.size() != c * h || b2.size() != c) {
        raise(ErrorCode::ShapeMismatch, "channel MLP weight sizes disagree with layer widths");
    }
}

std::vector<double> mlp_channel(const std::vector<double>& z, const ChannelMlp& mlp) {
    mlp.validate();
    if (static_cast<int>(z.size()) != mlp.in_channels) {
        raise(ErrorCode::ShapeMismatch,
              "channel vector length " + std::to_string(z.size()) + " != MLP width " +
                  std::to_string(mlp.in_channels));
    }
    const int C = mlp.in_channels, Hd = mlp.hidden;
    std::vector<double> h(static_cast<std::size_t>(Hd));
    for (int j = 0; j < Hd; ++j) {
        double acc = mlp.b1[static_cast<std::size_t>(j)];
        for (int i = 0; i < C; ++i) {
            acc += mlp.w1[static_cast<std::size_t>(j) * C + i] * z[static_cast<std::size_t>(i)];
        }
        h[static_cast<std::size_t>(j)] = acc > 0.0 ? acc : 0.0;
    }
    std::vector<double> out(static_cast<std::size_t>(C));
    for (int i = 0; i < C; ++i) {
        double acc = mlp.b2[static_cast<std::size_t>(i)];
        for (int j = 0; j < Hd; ++j) {
            acc += mlp.w2[static_cast<std::size_t>(i) * Hd + j] * h[static_cast<std::size_t>(j)];
        }
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

// ---- combine -----------------------------------------------------------

namespace {

enum class BroadcastForm { None, ChannelVector, SpatialMap };

// Returns which side (if any) is the broadcast operand. full receives the
// {C,H,W} tensor, small the broadcast one.
BroadcastForm classify(const Tensor& a, const Tensor& b,
                       const Tensor** full, const Tensor** small, bool* small_is_a) {
    if (a.same_shape(b)) {
        *full = &a;
        *small = &b;
        *small_is_a = false;
        return BroadcastForm::None;
    }
    const Tensor* f = nullptr;
    const Tensor* s = nullptr;
    bool sa = false;
    if (a.rank() == 3 && b.rank() != 3) {
        f = &a; s = &b; sa = true;
    } else if (b.rank() == 3 && a.rank() != 3) {
        f = &b; s = &a; sa = false;
    } else if (a.rank() == 3 && b.rank() == 3) {
        if (a.dim(0) == 1 && b.dim(0) != 1) { f = &b; s = &a; sa = true; }
        else if (b.dim(0) == 1 && a.dim(0) != 1) { f = &a; s = &b; sa = false; }
    }
    if (f && s) {
        *full = f;
        *small = s;
        *small_is_a = sa;
        if (s->rank() == 1 && s->dim(0) == f->dim(0)) return BroadcastForm::ChannelVector;
        if (s->rank() == 3 && s->dim(0) == 1 && s->dim(1) == f->dim(1) && s->dim(2) == f->dim(2)) {
            return BroadcastForm::SpatialMap;
        }
    }
    raise(ErrorCode::ShapeMismatch, "combine: shapes are neither equal nor broadcastable");
}

}  // namespace

Tensor combine(const Tensor& a, const Tensor& b, CombineOp op) {
    if (op == CombineOp::ConcatChannels) {
        if (a.rank() != 3 || b.rank() != 3 || a.dim(1) != b.dim(1) || a.dim(2) != b.dim(2)) {
            raise(ErrorCode::ShapeMismatch,
                  "concat needs two {C,H,W} tensors with equal spatial dims");
        }
        const int Ca = a.dim(0), Cb = b.dim(0), H = a.dim(1), W = a.dim(2);
        Tensor out({Ca + Cb, H, W});
        std::copy(a.data().begin(), a.data().end(), out.data().begin());
        std::copy(b.data().begin(), b.data().end(), out.data().begin() + a.data().size());
        return out;
    }

    const Tensor* full = nullptr;
    const Tensor* small = nullptr;
    bool small_is_a = false;
    const BroadcastForm form = classify(a, b, &full, &small, &small_is_a);

    auto apply = [op](double lhs, double rhs) {
        return op == CombineOp::Mul ? lhs * rhs : lhs + rhs;
    };

    if (form == BroadcastForm::None) {
        Tensor out = a;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = apply(a[i], b[i]);
        return out;
    }

    const int C = full->dim(0), H = full->dim(1), W = full->dim(2);
    Tensor out({C, H, W});
    for (int c = 0; c < C; ++c) {
        for (int y = 0; y < H; ++y) {
            for (int xx = 0; xx < W; ++xx) {
                const double fv = full->at3(c, y, xx);
                const double sv = (form == BroadcastForm::ChannelVector)
                                      ? (*small)[static_cast<std::size_t>(c)]
                                      : small->at3(0, y, xx);
                // Mul and Add are commutative, so operand order is moot.
                out.at3(c, y, xx) = small_is_a ? apply(sv, fv) : apply(fv, sv);
            }
        }
    }
    return out;
}

// ---- text serialization --------------------------------------------------

std::string tensor_to_text(const Tensor& t) {
    std::ostringstream os;
    for (int i = 0; i < t.rank(); ++i) {
        if (i) os << ' ';
        os << t.shape()[static_cast<std::size_t>(i)];
    }
    os << '\n';
    char buf[40];
    for (double v : t.data()) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf << '\n';
    }
    return os.str();
}

Tensor tensor_from_text(const std::string& text) {
    std::istringstream is(text);
    std::string header;
    if (!std::getline(is, header)) {
        raise(ErrorCode::ParseError, "tensor text: missing shape line");
    }
    std::istringstream hs(header);
    std::vector<int> shape;
    int d = 0;
    while (hs >> d) shape.push_back(d);
    if (!hs.eof()) raise(ErrorCode::ParseError, "tensor text: bad shape line");
    if (shape.empty() || shape.size() > 4) {
        raise(ErrorCode::ParseError, "tensor text: shape rank out of range");
    }
    std::size_t n = 1;
    for (int dd : shape) {
        if (dd <= 0) raise(ErrorCode::ParseError, "tensor text: non-positive dimension");
        n *= static_cast<std::size_t>(dd);
    }
    std::vector<double> values;
    values.reserve(n);
    double v = 0.0;
    while (is >> v) values.push_back(v);
    if (!is.eof()) raise(ErrorCode::ParseError, "tensor text: bad value token");
    if (values.size() != n) {
        raise(ErrorCode::ParseError,
              "tensor text: expected " + std::to_string(n) + " values, got " +
                  std::to_string(values.size()));
    }
    return Tensor(std::move(shape), std::move(values));
}

void save_tensor(const Tensor& t, const std::string& path) {
    atomic_write_file(path, tensor_to_text(t));
}

Tensor load_tensor(const std::string& path) {
    return tensor_from_text(read_file(path));
}

}  // namespace hk
