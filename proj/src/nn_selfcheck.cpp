#include "harvestkit/nn_selfcheck.hpp"

#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "harvestkit/autodiff.hpp"
#include "harvestkit/nn_blocks.hpp"
#include "harvestkit/rng.hpp"
#include "harvestkit/tensor.hpp"

namespace hk {

namespace {

double sum_all(const Tensor& t) {
    double s = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) s += t[i];
    return s;
}

CheckResult from_report(const std::string& name, const GradCheckReport& report) {
    CheckResult r;
    r.name = name;
    r.pass = report.pass;
    r.measure = report.max_rel_err;
    r.threshold = report.tolerance;
    char buf[96];
    std::snprintf(buf, sizeof buf, "%zu coordinates, max abs err %.3e", report.n_elements,
                  report.max_abs_err);
    r.detail = buf;
    return r;
}

CheckResult shape_check(const std::string& name, bool ok, const std::string& detail) {
    CheckResult r;
    r.name = name;
    r.pass = ok;
    r.measure = ok ? 0.0 : 1.0;
    r.threshold = 0.0;
    r.detail = detail;
    return r;
}

std::string shape_str(const std::vector<int>& s) {
    std::string out = "{";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + "}";
}

}  // namespace

std::vector<CheckResult> run_nn_checks(std::uint64_t seed) {
    std::vector<CheckResult> out;

    {
        const GamParams gam = GamParams::seeded(16, 4, seed);
        Rng rng(seed + 1);
        const Tensor x = Tensor::random_uniform({16, 6, 6}, rng);
        ScalarFn f{
            [gam](const Tensor& t) { return sum_all(gam_forward(t, gam)); },
            [gam](const Tensor& t) {
                Tape tape;
                const Var v = tape.input(t);
                return tape.backward(tape.sum(gam_forward(tape, v, gam)), v);
            }};
        out.push_back(from_report("gradient: attention block 16x6x6", grad_check(f, x, 1e-5)));
    }

    {
        const SppfConfig sppf = SppfConfig::seeded(8, 4, 8, 7, seed + 2);
        Rng rng(seed + 3);
        const Tensor x = Tensor::random_uniform({8, 6, 6}, rng);
        ScalarFn f{
            [sppf](const Tensor& t) { return sum_all(sppf_forward(t, sppf)); },
            [sppf](const Tensor& t) {
                Tape tape;
                const Var v = tape.input(t);
                return tape.backward(tape.sum(sppf_forward(tape, v, sppf)), v);
            }};
        out.push_back(
            from_report("gradient: pyramid pooling block 8x6x6 k7", grad_check(f, x, 1e-5)));
    }

    {
        const DeepHeadConfig head = DeepHeadConfig::seeded(32, 8, 4, seed + 4);
        Rng rng(seed + 5);
        const Tensor x = Tensor::random_uniform({32, 5, 5}, rng);
        ScalarFn f{
            [head](const Tensor& t) { return sum_all(deep_head_proto_forward(t, head)); },
            [head](const Tensor& t) {
                Tape tape;
                const Var v = tape.input(t);
                return tape.backward(tape.sum(deep_head_proto_forward(tape, v, head)), v);
            }};
        out.push_back(
            from_report("gradient: prototype head 32-in 8-mid", grad_check(f, x, 1e-5)));
    }

    {
        const DeepHeadConfig head = DeepHeadConfig::seeded(512, 64, 32, seed + 6);
        Rng rng(seed + 7);
        const Tensor x = Tensor::random_uniform({512, 4, 4}, rng);
        ScalarFn f{
            [head](const Tensor& t) { return sum_all(deep_head_proto_forward(t, head)); },
            [head](const Tensor& t) {
                Tape tape;
                const Var v = tape.input(t);
                return tape.backward(tape.sum(deep_head_proto_forward(tape, v, head)), v);
            }};
        out.push_back(from_report("gradient: prototype head 512-in 64-mid (sampled)",
                                  grad_check(f, x, 1e-5, 1e-5, 96, seed + 8)));
    }

    {
        // Attention block into sigmoid probabilities into the asymmetric loss.
        const GamParams gam = GamParams::seeded(4, 2, seed + 9);
        Rng rng(seed + 10);
        const Tensor x = Tensor::random_uniform({4, 5, 5}, rng);
        Tensor y({4, 5, 5});
        Rng yrng(seed + 11);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = yrng.coin() ? 1.0 : 0.0;
        const AsymConfig cfg;
        ScalarFn f{
            [gam, y, cfg](const Tensor& t) {
                return asym_bce(sigmoid_map(gam_forward(t, gam)), y, cfg);
            },
            [gam, y, cfg](const Tensor& t) {
                Tape tape;
                const Var v = tape.input(t);
                const Var p = tape.sigmoid(gam_forward(tape, v, gam));
                return tape.backward(asym_bce(tape, p, y, cfg), v);
            }};
        out.push_back(
            from_report("gradient: asymmetric loss end-to-end", grad_check(f, x, 1e-5)));
    }

    {
        // Foreground/background weighting must scale the plain loss exactly.
        Rng rng(seed + 12);
        Tensor p({64});
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = rng.uniform(0.001, 0.999);
        const Tensor ones = Tensor::full({64}, 1.0);
        const Tensor zeros({64});
        const AsymConfig cfg;
        const double r_fg = asym_bce(p, ones, cfg) / bce(p, ones);
        const double r_bg = asym_bce(p, zeros, cfg) / bce(p, zeros);
        const double err =
            std::max(std::abs(r_fg - cfg.alpha_fn), std::abs(r_bg - cfg.alpha_fp));
        CheckResult r;
        r.name = "loss: weighting ratio law";
        r.measure = err;
        r.threshold = 1e-12;
        r.pass = err <= r.threshold;
        char buf[96];
        std::snprintf(buf, sizeof buf, "fg ratio %.15f, bg ratio %.15f", r_fg, r_bg);
        r.detail = buf;
        out.push_back(r);
    }

    {
        const SppfConfig sppf = SppfConfig::seeded(8, 4, 8, 7, seed + 13);
        Rng rng(seed + 14);
        const Tensor x = Tensor::random_uniform({8, 6, 6}, rng);
        SppfTrace trace;
        const Tensor y = sppf_forward(x, sppf, &trace);
        const bool ok = y.shape() == std::vector<int>{8, 6, 6} &&
                        trace.entry.shape() == std::vector<int>{4, 6, 6} &&
                        trace.pool1.shape() == trace.entry.shape() &&
                        trace.pool2.shape() == trace.entry.shape() &&
                        trace.pool3.shape() == trace.entry.shape();
        out.push_back(shape_check("shape: pyramid pooling preserves the grid", ok,
                                  "out " + shape_str(y.shape())));
    }

    {
        const DeepHeadConfig head = DeepHeadConfig::seeded(512, 64, 32, seed + 15);
        Rng rng(seed + 16);
        const Tensor x = Tensor::random_uniform({512, 4, 4}, rng);
        std::vector<std::vector<int>> stages;
        const Tensor y = deep_head_proto_forward(x, head, &stages);
        const bool ok = y.shape() == std::vector<int>{32, 4, 4} && !stages.empty() &&
                        stages.front() == std::vector<int>{64, 4, 4} &&
                        stages.back() == std::vector<int>{32, 4, 4};
        out.push_back(shape_check("shape: prototype head 512 to 32 channels", ok,
                                  "out " + shape_str(y.shape())));
    }

    {
        Rng rng(seed + 17);
        const Tensor x = Tensor::random_uniform({3, 4, 5}, rng);
        const Tensor g = pool(x, PoolMode::Avg, PoolScope::global_spatial());
        const Tensor a = pool(x, PoolMode::Max, PoolScope::per_pixel_over_channels());
        const Tensor w = pool(x, PoolMode::Max, PoolScope::window_same(3));
        const bool ok = g.shape() == std::vector<int>{3} &&
                        a.shape() == std::vector<int>{1, 4, 5} && w.shape() == x.shape();
        out.push_back(shape_check("shape: pooling scopes", ok,
                                  "global " + shape_str(g.shape()) + ", across " +
                                      shape_str(a.shape()) + ", window " +
                                      shape_str(w.shape())));
    }

    return out;
}

bool all_passed(const std::vector<CheckResult>& results) {
    for (const auto& r : results) {
        if (!r.pass) return false;
    }
    return true;
}

std::string checks_to_json(const std::vector<CheckResult>& results) {
    nlohmann::ordered_json j;
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& r : results) {
        j["checks"].push_back({{"name", r.name},
                               {"pass", r.pass},
                               {"measure", r.measure},
                               {"threshold", r.threshold},
                               {"detail", r.detail}});
    }
    j["all_passed"] = all_passed(results);
    return j.dump(2) + "\n";
}

std::string checks_to_text(const std::vector<CheckResult>& results) {
    std::string out;
    char buf[256];
    for (const auto& r : results) {
        std::snprintf(buf, sizeof buf, "[%s] %-44s %.3e (limit %.0e) %s\n",
                      r.pass ? "ok" : "FAIL", r.name.c_str(), r.measure, r.threshold,
                      r.detail.c_str());
        out += buf;
    }
    return out;
}

}  // namespace hk
