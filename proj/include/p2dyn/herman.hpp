#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "p2dyn/basin.hpp"
#include "p2dyn/transverse.hpp"

namespace p2dyn {

struct RotationEstimate {
    double value = 0.0;  // in [0, 1)
    double error = 0.0;  // spread of the nested-window estimates
};

// Rotation number from time-ordered angles (radians) of an orbit on a closed
// curve.  Increments are wrapped to (-pi, pi] and the orientation is flipped
// so the first increment is positive, which identifies rho with 1 - rho.
// Uses weighted Birkhoff averages on nested windows N/4, N/2, N.
// Throws InsufficientData below 1000 angles.
RotationEstimate rotation_number(const std::vector<double>& angles);

struct CircleModel {
    std::vector<Vec3<double>> points;   // one circle, ordered by angle
    std::vector<Vec3<double>> partner;  // the other circle when period_of_cycle = 2
    std::vector<Vec3<double>> orbit;    // f-orbit tail in time order (both circles)
    double rotation_number = 0.0;       // of f^period on one circle
    double rotation_error = 0.0;
    double fit_residual = 0.0;
    double mean_radius = 0.0;
    int period_of_cycle = 1;
    int periodic_q = 0;  // > 0 when the orbit converged to a periodic cycle on the circle
};

enum class CircleStatus { circle, shrunk_to_point, broke_up, escaped };
const char* circle_status_name(CircleStatus s);

struct CircleProbe {
    CircleStatus status = CircleStatus::escaped;
    CircleModel model;
    bool has_rotation = false;  // rotation_number converged, even if the orbit is not a curve
    std::string detail;
};

// Iterates a real map from seed, discards n_transient iterates and models
// the next n_collect as a cycle of invariant circles.  An orbit converging to
// curve = 0 (when curve is non-empty) counts as escaped.
CircleProbe probe_circle(const PolyMap<double>& f, const Vec3<double>& seed, long n_transient, long n_collect,
                         const HomogPoly<double>& curve = {}, double fit_tol = 1e-2);
// Same, but throws Escaped or NotACircle unless a circle was found.
CircleModel find_attracting_circle(const PolyMap<double>& f, const Vec3<double>& seed, long n_transient,
                                   long n_collect, const HomogPoly<double>& curve = {});

// Newton solve of f^(period*q)(x) = x in a chart near x0.
struct PeriodicOrbit {
    bool converged = false;
    Vec3<double> point{};
    int q = 0;
    double residual = 0.0;
    double multiplier = 0.0;  // spectral radius of the return map
};
PeriodicOrbit verify_periodic_orbit(const PolyMap<double>& f, int period, const Vec3<double>& x0, int q);

// Birkhoff average of the log quotient derivative normal to the circle along
// its orbit, per step of f.  The circle tangent is propagated by the
// derivative.  Throws InsufficientData when the circle is not resolved.
ExponentEstimate circle_transverse_exponent(const PolyMap<double>& f, const CircleModel& circle, long n_iter = 20000);

struct RotationRow {
    double c = 0.0;
    double rotation = 0.0;
    CircleStatus status = CircleStatus::escaped;
    double fit_residual = 0.0;
    double lyap = 0.0;
    double stderr_ = 0.0;
    int periodic_q = 0;
    bool newton_verified = false;
};

struct SweepOptions {
    long n_transient = 20000;
    long n_collect = 8000;
    long lyap_iter = 4000;
    std::uint64_t seed = 1;
};

// Circle pair of the real Desboves map (a, b, c) for each c, continuing the
// seed from the previous grid point.
std::vector<RotationRow> rotation_sweep(double a, double b, const std::vector<double>& c_grid,
                                        const SweepOptions& opt = {});
void write_rotation_csv(std::ostream& os, const std::vector<RotationRow>& rows);

struct Plateau {
    int p = 0, q = 1;
    double c_lo = 0.0, c_hi = 0.0;
    int count = 0;
    bool newton_verified = false;
};

// Maximal runs of at least min_points rows with |rho - p/q| < tol, q <= max_q.
// Rows count whatever their status as long as a rotation number was measured.
std::vector<Plateau> find_plateaus(const std::vector<RotationRow>& rows, double tol = 1e-4, int max_q = 24,
                                   int min_points = 3);

// ------------------------------------------------------- synthetic ring map

// Transverse multiplier of a synthetic ring map along z2 = 0 at (X:1:0), in
// the chart u = z2/z1.
cplx ring_chart_multiplier(const PolyMap<cplx>& f, const cplx& X);

// Birkhoff average of the Fubini-Study transverse norm (phi = z2) along the
// rotation orbit on |X| = rho.
ExponentEstimate ring_transverse_exponent(const PolyMap<cplx>& f, double rho, long n_iter = 100000);

struct ProfileSegment {
    double h_lo = 0.0, h_hi = 0.0;
    double slope_h = 0.0;     // dLyap/dh with h = -log(rho)/(2 pi)
    double slope_logr = 0.0;  // dLyap/dlog(rho)
    int zeros_inside = 0;     // winding number of the multiplier on the segment's circles
};

struct RingProfile {
    std::vector<double> rho, h, lyap, stderr_;
    std::vector<ProfileSegment> segments;
    std::vector<double> breakpoints;  // h values between consecutive segments
    std::vector<double> slope_jumps;  // in h units, one per breakpoint
    std::vector<int> zero_jumps;      // zeros crossed at each breakpoint
    double min_second_difference = 0.0;
    bool convex = true;
};

// Number of zeros of the chart multiplier inside |X| < rho (argument principle).
int multiplier_zero_count(const PolyMap<cplx>& f, double rho, int samples = 4096);

RingProfile ring_profile(const PolyMap<cplx>& f, const std::vector<double>& rho_grid, int samples_per_circle = 4096);
void write_profile_csv(std::ostream& os, const RingProfile& p);

// ------------------------------------------------------------ persistence

struct PersistenceRow {
    double dc = 0.0;
    bool persisted = false;
    CircleStatus status = CircleStatus::escaped;
    double hausdorff = 0.0;
    double rotation = 0.0;
    double drho = 0.0;
};

struct PersistenceReport {
    double a = 0.0, b = 0.0, c = 0.0, delta = 0.0;
    double rotation0 = 0.0;
    std::vector<PersistenceRow> rows;
    bool all_persisted = true;
    double max_hausdorff = 0.0;
    double max_drho = 0.0;

    void write_json(std::ostream& os) const;
};

double hausdorff_distance(const std::vector<Vec3<double>>& A, const std::vector<Vec3<double>>& B);

// Perturbs c over `probes` evenly spaced offsets in [-delta, delta] and
// re-finds the circle pair seeded from the unperturbed one.
PersistenceReport persistence_probe(double a, double b, double c, double delta, int probes,
                                    const SweepOptions& opt = {});

}  // namespace p2dyn
