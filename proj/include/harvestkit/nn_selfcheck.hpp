#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hk {

struct CheckResult {
    std::string name;
    bool pass = false;
    double measure = 0.0;  // worst observed error for the check
    double threshold = 0.0;
    std::string detail;
};

// Gradient and shape self-verification for the attention block, the pyramid
// pooling block, the prototype head, and the asymmetric loss. Deterministic
// per seed; the whole suite runs in seconds.
std::vector<CheckResult> run_nn_checks(std::uint64_t seed = 7);

bool all_passed(const std::vector<CheckResult>& results);
std::string checks_to_json(const std::vector<CheckResult>& results);
std::string checks_to_text(const std::vector<CheckResult>& results);

}  // namespace hk
