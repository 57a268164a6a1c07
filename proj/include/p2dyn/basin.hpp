#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "p2dyn/families.hpp"

namespace p2dyn {

enum class BasinLabel { fermat_curve, line_x0, line_y0, line_z0, point_fixed, circle_pair, undecided };

const char* basin_label_name(BasinLabel l);

struct Thresholds {
    long budget = 50000;
    double curve_tol = 1e-12;
    double line_tol = 1e-12;
    double point_tol = 1e-10;
    int window = 100;  // consecutive confirming iterates
    bool escalate = true;
    double escalate_below = 1e-8;  // |phi| that switches the orbit to escalation_bits
    int escalation_bits = 128;
    int circle_tail = 2000;
    double circle_fit_tol = 1e-2;  // trig-fit residual relative to the mean radius
    long circle_check_every = 5000;
    double composite_eps = 1e-3;
};

struct NamedPoint {
    std::string name;
    Vec3<cplx> point;
};

// Everything needed to classify orbits of one map: the exact spec (so the
// orbit can be recomputed at higher precision), the invariant curve and the
// attracting fixed points that count as terminal labels.
struct BasinProblem {
    MapSpec spec;
    Field field = Field::real;
    HomogPoly<cplx> curve;
    std::vector<NamedPoint> attractors;
};

// Invariant curve of the family (Fermat cubic, or the Cassini quartic) plus
// those coordinate points that are attracting fixed points of the map.
BasinProblem make_basin_problem(const MapSpec& spec, Field field);

struct Classification {
    BasinLabel label = BasinLabel::undecided;
    int point_index = -1;        // into BasinProblem::attractors for point_fixed
    long first_hit = -1;         // first iterate of the confirming window
    long iterations = 0;
    double composite_fraction = 0.0;  // iterates near xyz*phi = 0
    bool escalated = false;
    int circle_period = 0;
    std::string diagnostic;      // error name when the orbit was cut short
};

// Star-shaped closed-curve model of a point cloud on P^2(R): gnomonic chart at
// the centroid, whitened by the point covariance, polar angle about the mean,
// and a least-squares trigonometric polynomial r(theta).  residual is the
// largest radial misfit, in chart units.
struct ClosedCurveFit {
    Vec3<double> centroid{}, e1{}, e2{};
    double cu = 0.0, cv = 0.0;
    std::array<double, 4> whiten{1, 0, 0, 1};  // row-major map from chart offsets to round coordinates
    std::vector<double> theta;  // per input point
    std::vector<double> coeffs;
    double mean_radius = 0.0;
    double residual = 0.0;
    long distinct = 0;  // points more than 1e-7 apart in the chart
};

ClosedCurveFit fit_closed_curve(const std::vector<Vec3<double>>& pts, int harmonics = 16);
std::array<double, 2> chart_coords(const ClosedCurveFit& fit, const Vec3<double>& p);

// Period (1 or 2) of a cycle of closed curves traced by the tail, or 0.
int circle_tail_period(const std::vector<Vec3<double>>& tail, double fit_tol);

std::string label_key(const BasinProblem& prob, const Classification& c);

// Real orbits are canonicalized (largest coordinate positive) every step, so
// p and -p give bitwise identical orbits.
Classification classify_orbit(const BasinProblem& prob, const Vec3<cplx>& p0, const Thresholds& thr = {});

struct BasinReport {
    std::string family;
    std::string params;
    Field field = Field::real;
    std::uint64_t seed = 0;
    long n = 0;
    long budget = 0;
    Thresholds thresholds;
    std::map<std::string, long> counts;
    double composite_fraction = 0.0;

    double fraction(const std::string& label) const;
    // Wilson 95% interval for the label fraction.
    std::array<double, 2> wilson(const std::string& label) const;
    void write_json(std::ostream& os) const;
};

// Gaussian lift, so the direction is uniform on the sphere (real) or
// Fubini-Study distributed (complex); the lift is not normalized.
Vec3<cplx> sample_start(Field field, std::uint64_t seed, std::uint64_t index);

BasinReport basin_fractions(const BasinProblem& prob, long n_samples, std::uint64_t seed, const Thresholds& thr = {});

struct TraceRow {
    long iter;
    double x2, y2, z2, absphi;
};

struct OrbitTrace {
    std::vector<TraceRow> rows;
    std::string terminated;  // error name if an indeterminacy point cut the trace short

    void write_csv(std::ostream& os) const;
};

OrbitTrace orbit_trace(const PolyMap<cplx>& f, const HomogPoly<cplx>& phi, const Vec3<cplx>& p0, long n);
OrbitTrace orbit_trace(const PolyMap<double>& f, const HomogPoly<double>& phi, const Vec3<double>& p0, long n);

// Fraction of the first n iterates with min(|x|,|y|,|z|,|phi|^(1/3)) < eps.
template <class S>
double near_variety_fraction(const PolyMap<S>& f, const HomogPoly<S>& phi, const Vec3<S>& p0, long n, double eps);

struct RenderView {
    std::array<std::array<double, 3>, 3> rotation{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    int resolution = 256;
    long budget = 2000;
    double curve_overlay = 0.0;  // |phi| below this paints white; 0 picks one pixel width
};

struct Image {
    int width = 0, height = 0;
    std::vector<std::uint8_t> rgb;
    void write_ppm(const std::string& path) const;
};

// Orthographic view of the visible hemisphere of the real projective plane;
// hue encodes the label and brightness the convergence time.
Image render_basin(const BasinProblem& prob, const RenderView& view, const Thresholds& thr = {});
void render_basin(const BasinProblem& prob, const RenderView& view, const std::string& out_path,
                  const Thresholds& thr = {});

}  // namespace p2dyn
