#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>

#include "p2dyn/families.hpp"

namespace p2dyn {

struct CassiniConfig {
    double k = 0.125;
    double a = 0.0;
};

// |Phi_k(p)| / (x^2 + y^2)^2 at the unit representative; +infinity at (0:0:1).
double r_ratio(const Vec3<double>& p, double k);

// Sampling region: unit sphere minus a Fubini-Study ball about (0:0:1),
// optionally restricted to r_ratio < r_max.
struct CassiniRegion {
    double exclude_radius = 0.1;
    double r_max = std::numeric_limits<double>::infinity();
};

struct ContractionReport {
    double sup_ratio = 0.0;
    double bound_4k = 0.0;
    long samples = 0;
    Vec3<double> argmax{};
};

// Sampled sup of r(f(p)) / r(p); samples on the curve itself are skipped.
ContractionReport contraction_check(const CassiniConfig& cfg, long n_samples, std::uint64_t seed,
                                    const CassiniRegion& region = {});

// Largest relative residual of Phi(F) = 16 k x^2 y^2 (x^2 - y^2)^4 Phi at a = 0.
double cassini_identity_residual(double k, long n_points, std::uint64_t seed);

// Largest |F(-x,-y,z) - F(x,y,z)| and |F(F(-y,x,z)) - F(F(x,y,z))| relative to
// the size of the values, over random points.
double quarter_turn_residual(const CassiniConfig& cfg, long n_points, std::uint64_t seed);

// True when p (on or near the real curve) lies on the component through the
// singular fixed point (0:1:0).  For k > 0 the real curve in the chart z = 1
// has the inner oval rho^2 = r_s(theta) and the unbounded branch
// rho^2 = r_L(theta); for k < 0 it is connected.
bool on_fixed_component(const Vec3<double>& p, double k);

// Point of the inner oval (k > 0) at polar angle theta in the chart z = 1.
Vec3<double> inner_oval_point(double k, double theta);

struct TrappingReport {
    CassiniConfig cfg;
    double sup_ratio = 0.0;
    double bound_4k = 0.0;
    long to_curve = 0, to_origin_fp = 0, to_other_fp = 0, undecided = 0;

    void write_json(std::ostream& os) const;
};

// Random real starts outside the excluded ball about (0:0:1).  An orbit counts
// as captured by the curve once its distance estimate |Phi|/|grad Phi| is below
// 1e-8 on the fixed component.
TrappingReport trapping_demo(const CassiniConfig& cfg, long n_orbits, long budget, std::uint64_t seed,
                             long contraction_samples = 100000);

}  // namespace p2dyn
