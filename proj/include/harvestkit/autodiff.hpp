#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "harvestkit/tensor.hpp"

namespace hk {

class Tape;

// Handle into a Tape. Cheap to copy; valid only for the tape that made it.
struct Var {
    int id = -1;
};

// Accumulates into parent_grads[i] (already allocated, zero-initialized on
// first touch). parent_values[i] is the forward value of parent i.
using BackwardFn = std::function<void(
    const Tensor& grad_out,
    const std::vector<const Tensor*>& parent_values,
    const std::vector<Tensor*>& parent_grads)>;

// Reverse-mode tape. Records each op's output and a pullback; backward()
// walks the record once in reverse. Extend with custom ops via make_node.
class Tape {
public:
    Var input(Tensor value);
    Var constant(Tensor value);

    Var make_node(std::vector<Var> parents, Tensor value, BackwardFn backward);

    const Tensor& value(Var v) const;

    // Runs reverse accumulation from a scalar output (size-1 tensor) and
    // returns the gradient with respect to `wrt`.
    Tensor backward(Var output, Var wrt);

    // Built-in ops (mirror the pure tensor functions).
    Var conv2d(Var x, const Tensor& weights, const std::vector<double>& bias, int padding);
    Var pool(Var x, PoolMode mode, const PoolScope& scope);
    Var sigmoid(Var x);
    Var relu(Var x);
    Var mlp(Var z, const ChannelMlp& m);  // z is rank-1 {C}
    Var combine(Var a, Var b, CombineOp op);
    Var sum(Var x);  // -> {1}

    std::size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        std::vector<int> parents;
        BackwardFn backward;
    };
    std::vector<Node> nodes_;

    const Node& node(Var v) const;
};

// A scalar-valued differentiable function: value plus analytic gradient.
struct ScalarFn {
    std::function<double(const Tensor&)> value;
    std::function<Tensor(const Tensor&)> gradient;
};

struct GradCheckReport {
    double max_abs_err = 0.0;
    double max_rel_err = 0.0;
    std::size_t n_elements = 0;
    double tolerance = 0.0;
    bool pass = false;  // max_rel_err <= tolerance
};

// Central-difference check of f.gradient against (f(x+eps e_i)-f(x-eps e_i))/2eps.
// Relative error uses max(|analytic|,|numeric|) as denominator when that is
// at least 1e-4; below it the absolute error stands in. max_probes = 0
// checks every element; otherwise a seeded subset of that many coordinates.
GradCheckReport grad_check(const ScalarFn& f, const Tensor& x, double eps,
                           double tolerance = 1e-5, std::size_t max_probes = 0,
                           std::uint64_t probe_seed = 20240901);

}  // namespace hk
