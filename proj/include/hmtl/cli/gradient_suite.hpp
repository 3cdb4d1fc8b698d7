#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hmtl::cli {

struct GradCheckResult {
    std::string name;
    double max_rel_error = 0.0;
    double tolerance = 0.0;
    bool passed() const { return max_rel_error < tolerance; }
};

// Central-difference checks of every differentiable primitive (tolerance
// 1e-4) and of both task losses on a 3-word sentence through a small full
// model (tolerance 1e-3). Each primitive is read out as sum(R .* op(x)) with
// a random R. Layer and model checks take the best of steps 1e-5, 1e-4, 1e-3
// per entry.
std::vector<GradCheckResult> run_gradient_suite(std::uint64_t seed);

}  // namespace hmtl::cli
