#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace p2dyn {

struct IdentityCheck {
    std::string name;
    double residual = 0.0;  // worst relative residual over the sampled points
    double tolerance = 1e-9;
    long points = 0;
    bool pass() const { return residual < tolerance; }
};

// Suites: "all", "desboves", "degree3", "cassini", "symmetric".  Each check
// samples n_points random points (and random parameters where they are free).
// degree3_first_integral tests the factor 3 y^3 z^3 as usually quoted;
// degree3_first_integral_k3 tests k^3 y^3 z^3, which is what H0 satisfies.
std::vector<IdentityCheck> identity_suite(const std::string& suite, long n_points, std::uint64_t seed);

}  // namespace p2dyn
