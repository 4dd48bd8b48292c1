#include "harvestkit/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hk {

Var Tape::input(Tensor value) {
    nodes_.push_back(Node{std::move(value), {}, nullptr});
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(Tensor value) { return input(std::move(value)); }

Var Tape::make_node(std::vector<Var> parents, Tensor value, BackwardFn backward) {
    std::vector<int> ids;
    ids.reserve(parents.size());
    for (Var p : parents) {
        node(p);  // bounds check
        ids.push_back(p.id);
    }
    nodes_.push_back(Node{std::move(value), std::move(ids), std::move(backward)});
    return Var{static_cast<int>(nodes_.size()) - 1};
}

const Tape::Node& Tape::node(Var v) const {
    if (v.id < 0 || v.id >= static_cast<int>(nodes_.size())) {
        raise(ErrorCode::InvalidArgument, "variable does not belong to this tape");
    }
    return nodes_[static_cast<std::size_t>(v.id)];
}

const Tensor& Tape::value(Var v) const { return node(v).value; }

Tensor Tape::backward(Var output, Var wrt) {
    const Node& out_node = node(output);
    node(wrt);
    if (out_node.value.size() != 1) {
        raise(ErrorCode::InvalidArgument, "backward needs a scalar output");
    }

    std::vector<Tensor> grads(nodes_.size());
    for (std::size_t i = 0; i <= static_cast<std::size_t>(output.id); ++i) {
        grads[i] = Tensor(nodes_[i].value.shape());
    }
    grads[static_cast<std::size_t>(output.id)][0] = 1.0;

    for (int id = output.id; id >= 0; --id) {
        const Node& n = nodes_[static_cast<std::size_t>(id)];
        if (!n.backward || n.parents.empty()) continue;
        std::vector<const Tensor*> pv;
        std::vector<Tensor*> pg;
        pv.reserve(n.parents.size());
        pg.reserve(n.parents.size());
        for (int pid : n.parents) {
            pv.push_back(&nodes_[static_cast<std::size_t>(pid)].value);
            pg.push_back(&grads[static_cast<std::size_t>(pid)]);
        }
        n.backward(grads[static_cast<std::size_t>(id)], pv, pg);
    }
    return grads[static_cast<std::size_t>(wrt.id)];
}

// ---- built-in ops -------------------------------------------------------

Var Tape::conv2d(Var x, const Tensor& weights, const std::vector<double>& bias, int padding) {
    Tensor out = hk::conv2d(value(x), weights, bias, padding);
    Tensor w = weights;  // captured by the pullback
    return make_node(
        {x}, std::move(out),
        [w, padding](const Tensor& g, const std::vector<const Tensor*>& pv,
                     const std::vector<Tensor*>& pg) {
            const Tensor& xin = *pv[0];
            Tensor& gx = *pg[0];
            const int Cin = xin.dim(0), H = xin.dim(1), W = xin.dim(2);
            const int Cout = w.dim(0), Kh = w.dim(2), Kw = w.dim(3);
            const int Ho = g.dim(1), Wo = g.dim(2);
            for (int o = 0; o < Cout; ++o) {
                for (int y = 0; y < Ho; ++y) {
                    for (int xx = 0; xx < Wo; ++xx) {
                        const double go = g.at3(o, y, xx);
                        if (go == 0.0) continue;
                        for (int i = 0; i < Cin; ++i) {
                            for (int ky = 0; ky < Kh; ++ky) {
                                const int sy = y - padding + ky;
                                if (sy < 0 || sy >= H) continue;
                                for (int kx = 0; kx < Kw; ++kx) {
                                    const int sx = xx - padding + kx;
                                    if (sx < 0 || sx >= W) continue;
                                    gx.at3(i, sy, sx) += go * w.at4(o, i, ky, kx);
                                }
                            }
                        }
                    }
                }
            }
        });
}

Var Tape::pool(Var x, PoolMode mode, const PoolScope& scope) {
    Tensor out = hk::pool(value(x), mode, scope);
    return make_node(
        {x}, std::move(out),
        [mode, scope](const Tensor& g, const std::vector<const Tensor*>& pv,
                      const std::vector<Tensor*>& pg) {
            const Tensor& xin = *pv[0];
            Tensor& gx = *pg[0];
            const int C = xin.dim(0), H = xin.dim(1), W = xin.dim(2);
            switch (scope.kind) {
                case PoolScope::Kind::GlobalSpatial: {
                    for (int c = 0; c < C; ++c) {
                        const double go = g[static_cast<std::size_t>(c)];
                        if (mode == PoolMode::Avg) {
                            const double share = go / (static_cast<double>(H) * W);
                            for (int y = 0; y < H; ++y)
                                for (int xx = 0; xx < W; ++xx) gx.at3(c, y, xx) += share;
                        } else {
                            int by = 0, bx = 0;
                            double best = xin.at3(c, 0, 0);
                            for (int y = 0; y < H; ++y) {
                                for (int xx = 0; xx < W; ++xx) {
                                    const double v = xin.at3(c, y, xx);
                                    if (v > best) { best = v; by = y; bx = xx; }
                                }
                            }
                            gx.at3(c, by, bx) += go;
                        }
                    }
                    break;
                }
                case PoolScope::Kind::AcrossChannels: {
                    for (int y = 0; y < H; ++y) {
                        for (int xx = 0; xx < W; ++xx) {
                            const double go = g.at3(0, y, xx);
                            if (mode == PoolMode::Avg) {
                                const double share = go / C;
                                for (int c = 0; c < C; ++c) gx.at3(c, y, xx) += share;
                            } else {
                                int bc = 0;
                                double best = xin.at3(0, y, xx);
                                for (int c = 1; c < C; ++c) {
                                    const double v = xin.at3(c, y, xx);
                                    if (v > best) { best = v; bc = c; }
                                }
                                gx.at3(bc, y, xx) += go;
                            }
                        }
                    }
                    break;
                }
                case PoolScope::Kind::Window: {
                    const int k = scope.window;
                    const int pad = k / 2;
                    for (int c = 0; c < C; ++c) {
                        for (int y = 0; y < H; ++y) {
                            for (int xx = 0; xx < W; ++xx) {
                                const double go = g.at3(c, y, xx);
                                if (go == 0.0) continue;
                                if (mode == PoolMode::Avg) {
                                    const double share = go / (static_cast<double>(k) * k);
                                    for (int dy = -pad; dy <= pad; ++dy) {
                                        const int yy = y + dy;
                                        if (yy < 0 || yy >= H) continue;
                                        for (int dx = -pad; dx <= pad; ++dx) {
                                            const int xs = xx + dx;
                                            if (xs < 0 || xs >= W) continue;
                                            gx.at3(c, yy, xs) += share;
                                        }
                                    }
                                } else {
                                    // Mirror the forward scan: padding cells
                                    // contribute zeros and can win the max, in
                                    // which case no input cell gets gradient.
                                    bool first = true;
                                    double best = 0.0;
                                    int by = -1, bx = -1;
                                    for (int dy = -pad; dy <= pad; ++dy) {
                                        for (int dx = -pad; dx <= pad; ++dx) {
                                            const int yy = y + dy, xs = xx + dx;
                                            const bool inside =
                                                yy >= 0 && yy < H && xs >= 0 && xs < W;
                                            const double v = inside ? xin.at3(c, yy, xs) : 0.0;
                                            if (first || v > best) {
                                                best = v;
                                                by = inside ? yy : -1;
                                                bx = inside ? xs : -1;
                                                first = false;
                                            }
                                        }
                                    }
                                    if (by >= 0) gx.at3(c, by, bx) += go;
                                }
                            }
                        }
                    }
                    break;
                }
            }
        });
}

Var Tape::sigmoid(Var x) {
    Tensor out = sigmoid_map(value(x));
    Tensor saved = out;
    return make_node(
        {x}, std::move(out),
        [saved](const Tensor& g, const std::vector<const Tensor*>&,
                const std::vector<Tensor*>& pg) {
            Tensor& gx = *pg[0];
            for (std::size_t i = 0; i < gx.size(); ++i) {
                const double s = saved[i];
                gx[i] += g[i] * s * (1.0 - s);
            }
        });
}

Var Tape::relu(Var x) {
    Tensor out = relu_map(value(x));
    return make_node(
        {x}, std::move(out),
        [](const Tensor& g, const std::vector<const Tensor*>& pv,
           const std::vector<Tensor*>& pg) {
            const Tensor& xin = *pv[0];
            Tensor& gx = *pg[0];
            for (std::size_t i = 0; i < gx.size(); ++i) {
                if (xin[i] > 0.0) gx[i] += g[i];
            }
        });
}

Var Tape::mlp(Var z, const ChannelMlp& m) {
    const Tensor& zin = value(z);
    if (zin.rank() != 1) raise(ErrorCode::ShapeMismatch, "mlp tape op expects a rank-1 input");
    std::vector<double> out = mlp_channel(zin.data(), m);
    const int out_width = static_cast<int>(out.size());
    ChannelMlp mm = m;
    return make_node(
        {z}, Tensor({out_width}, std::move(out)),
        [mm](const Tensor& g, const std::vector<const Tensor*>& pv,
             const std::vector<Tensor*>& pg) {
            const Tensor& zin2 = *pv[0];
            Tensor& gz = *pg[0];
            const int C = mm.in_channels, Hd = mm.hidden;
            std::vector<double> pre(static_cast<std::size_t>(Hd));
            for (int j = 0; j < Hd; ++j) {
                double acc = mm.b1[static_cast<std::size_t>(j)];
                for (int i = 0; i < C; ++i) {
                    acc += mm.w1[static_cast<std::size_t>(j) * C + i] *
                           zin2[static_cast<std::size_t>(i)];
                }
                pre[static_cast<std::size_t>(j)] = acc;
            }
            std::vector<double> gh(static_cast<std::size_t>(Hd), 0.0);
            for (int j = 0; j < Hd; ++j) {
                if (pre[static_cast<std::size_t>(j)] <= 0.0) continue;
                double acc = 0.0;
                for (int i = 0; i < C; ++i) {
                    acc += mm.w2[static_cast<std::size_t>(i) * Hd + j] *
                           g[static_cast<std::size_t>(i)];
                }
                gh[static_cast<std::size_t>(j)] = acc;
            }
            for (int i = 0; i < C; ++i) {
                double acc = 0.0;
                for (int j = 0; j < Hd; ++j) {
                    acc += mm.w1[static_cast<std::size_t>(j) * C + i] *
                           gh[static_cast<std::size_t>(j)];
                }
                gz[static_cast<std::size_t>(i)] += acc;
            }
        });
}

namespace {

// Adds grad contributions for one side of an elementwise combine, reducing
// over broadcast positions when that side is the small operand.
void accumulate_combine_grad(const Tensor& g, const Tensor& self, const Tensor& other,
                             CombineOp op, Tensor& gself) {
    const bool self_small = !self.same_shape(g);
    if (!self_small) {
        if (other.same_shape(g)) {
            for (std::size_t i = 0; i < g.size(); ++i) {
                gself[i] += (op == CombineOp::Mul) ? g[i] * other[i] : g[i];
            }
        } else {
            const int C = g.dim(0), H = g.dim(1), W = g.dim(2);
            const bool other_channel = other.rank() == 1;
            for (int c = 0; c < C; ++c) {
                for (int y = 0; y < H; ++y) {
                    for (int xx = 0; xx < W; ++xx) {
                        const double ov = other_channel ? other[static_cast<std::size_t>(c)]
                                                        : other.at3(0, y, xx);
                        gself.at3(c, y, xx) +=
                            (op == CombineOp::Mul) ? g.at3(c, y, xx) * ov : g.at3(c, y, xx);
                    }
                }
            }
        }
        return;
    }
    const int C = g.dim(0), H = g.dim(1), W = g.dim(2);
    const bool self_channel = self.rank() == 1;
    for (int c = 0; c < C; ++c) {
        for (int y = 0; y < H; ++y) {
            for (int xx = 0; xx < W; ++xx) {
                const double gv = g.at3(c, y, xx);
                const double contrib = (op == CombineOp::Mul) ? gv * other.at3(c, y, xx) : gv;
                if (self_channel) gself[static_cast<std::size_t>(c)] += contrib;
                else gself.at3(0, y, xx) += contrib;
            }
        }
    }
}

}  // namespace

Var Tape::combine(Var a, Var b, CombineOp op) {
    Tensor out = hk::combine(value(a), value(b), op);
    if (op == CombineOp::ConcatChannels) {
        return make_node(
            {a, b}, std::move(out),
            [](const Tensor& g, const std::vector<const Tensor*>& pv,
               const std::vector<Tensor*>& pg) {
                const int Ca = pv[0]->dim(0);
                const std::size_t na = pv[0]->size();
                Tensor& ga = *pg[0];
                Tensor& gb = *pg[1];
                (void)Ca;
                for (std::size_t i = 0; i < na; ++i) ga[i] += g[i];
                for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[na + i];
            });
    }
    return make_node(
        {a, b}, std::move(out),
        [op](const Tensor& g, const std::vector<const Tensor*>& pv,
             const std::vector<Tensor*>& pg) {
            accumulate_combine_grad(g, *pv[0], *pv[1], op, *pg[0]);
            accumulate_combine_grad(g, *pv[1], *pv[0], op, *pg[1]);
        });
}

Var Tape::sum(Var x) {
    const Tensor& xin = value(x);
    double total = 0.0;
    for (double v : xin.data()) total += v;
    return make_node(
        {x}, Tensor({1}, {total}),
        [](const Tensor& g, const std::vector<const Tensor*>&,
           const std::vector<Tensor*>& pg) {
            Tensor& gx = *pg[0];
            for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[0];
        });
}

// ---- gradient checking ----------------------------------------------------

GradCheckReport grad_check(const ScalarFn& f, const Tensor& x, double eps,
                           double tolerance, std::size_t max_probes,
                           std::uint64_t probe_seed) {
    if (!(eps > 0.0)) raise(ErrorCode::InvalidArgument, "grad_check eps must be positive");
    if (!(tolerance > 0.0)) raise(ErrorCode::InvalidArgument, "grad_check tolerance must be positive");
    if (!f.value || !f.gradient) raise(ErrorCode::InvalidArgument, "grad_check needs value and gradient");

    const double f0 = f.value(x);
    if (!std::isfinite(f0)) raise(ErrorCode::EvaluationError, "function value is not finite");
    Tensor analytic = f.gradient(x);
    if (!analytic.same_shape(x)) {
        raise(ErrorCode::ShapeMismatch, "gradient shape does not match input shape");
    }
    analytic.require_finite("grad_check gradient");

    const std::size_t n = x.size();
    std::vector<std::size_t> probes;
    if (max_probes == 0 || max_probes >= n) {
        probes.resize(n);
        std::iota(probes.begin(), probes.end(), std::size_t{0});
    } else {
        // Partial Fisher-Yates over the index range.
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        Rng rng(probe_seed);
        for (std::size_t i = 0; i < max_probes; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.next_below(n - i));
            std::swap(idx[i], idx[j]);
        }
        probes.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(max_probes));
    }

    GradCheckReport report;
    report.tolerance = tolerance;
    report.n_elements = probes.size();
    Tensor xp = x;
    for (std::size_t i : probes) {
        const double orig = xp[i];
        xp[i] = orig + eps;
        const double fp = f.value(xp);
        xp[i] = orig - eps;
        const double fm = f.value(xp);
        xp[i] = orig;
        if (!std::isfinite(fp) || !std::isfinite(fm)) {
            raise(ErrorCode::EvaluationError, "function value is not finite near probe point");
        }
        const double numeric = (fp - fm) / (2.0 * eps);
        const double a = analytic[i];
        const double abs_err = std::fabs(a - numeric);
        const double denom = std::max(std::fabs(a), std::fabs(numeric));
        const double rel_err = (denom >= 1e-4) ? abs_err / denom : abs_err;
        report.max_abs_err = std::max(report.max_abs_err, abs_err);
        report.max_rel_err = std::max(report.max_rel_err, rel_err);
    }
    report.pass = report.max_rel_err <= tolerance;
    return report;
}

}  // namespace hk
