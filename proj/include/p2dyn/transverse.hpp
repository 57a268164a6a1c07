#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "p2dyn/fermat.hpp"

namespace p2dyn {

enum class MetricChoice { orthogonal_complement, fiber_vertical };
enum class Method { torus_quadrature, birkhoff_orbit };

const char* metric_name(MetricChoice m);
const char* method_name(Method m);
MetricChoice parse_metric(const std::string& s);
Method parse_method(const std::string& s);

struct ExponentEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    long samples = 0;
    Method method = Method::torus_quadrature;
    MetricChoice metric = MetricChoice::orthogonal_complement;
    long rejected = 0;
};

// Samples whose transverse norm falls below this are dropped and counted.
inline constexpr double kRejectNorm = 1e-300;

// Norm of the derivative of f on the normal bundle of the invariant curve
// phi = 0 at p.  orthogonal_complement uses the Fubini-Study metric restricted
// to the orthogonal complement of the curve tangent; fiber_vertical uses
// |dy| / sqrt(|dx|^2 + |dz|^2) on the fibers (x:z) = const of an elementary
// map with center (0:1:0).  Throws OffCurve if |phi(p)| > offcurve_tol.
template <class S>
real_of<S> transverse_norm(const PolyMap<S>& f, const FormWithGradient<S>& phi, const ProjPoint<S>& p,
                           MetricChoice m = MetricChoice::orthogonal_complement, double offcurve_tol = 1e-8);
template <class S>
real_of<S> transverse_norm(const PolyMap<S>& f, const CurveModel<S>& curve, const ProjPoint<S>& p,
                           MetricChoice m = MetricChoice::orthogonal_complement) {
    return transverse_norm(f, curve.phi, p, m);
}

// Norm of the n-step quotient derivative, propagated along the orbit.
template <class S>
real_of<S> transverse_norm_n(const PolyMap<S>& f, const FormWithGradient<S>& phi, const ProjPoint<S>& p, int n);

// Curve exponent in P^2(C).  torus_quadrature averages over a randomly
// shifted rank-1 lattice rule on C/Omega (16 independent shifts give the
// standard error); birkhoff_orbit follows t -> multiplier * t on the torus with
// 2^-40 noise injected per step so floating point cannot collapse the orbit.
ExponentEstimate lyap_complex(const PolyMap<cplx>& f, const CurveModel<cplx>& curve, long n_samples,
                              std::uint64_t seed, Method method = Method::torus_quadrature,
                              MetricChoice metric = MetricChoice::orthogonal_complement);

// Curve exponent in P^2(R) by a Birkhoff average along a real orbit computed
// at precision_bits with Newton reprojection each step.
ExponentEstimate lyap_real(const MapSpec& spec, long n_iter, std::uint64_t seed, int precision_bits = 192,
                           long burn_in = 1000, MetricChoice metric = MetricChoice::orthogonal_complement);
// Same exponent by shifted uniform quadrature over the real parametrization.
// Norms below 1e-10 are recomputed at 256 bits from the exact parameters.
ExponentEstimate lyap_real_quadrature(const MapSpec& spec, long n_samples, std::uint64_t seed,
                                      MetricChoice metric = MetricChoice::orthogonal_complement);

// Elementary maps (-1, b, 1): exponent along the line y = 0, whose base map is
// the Lattes map.  Birkhoff along a base orbit (Method::birkhoff_orbit) or
// quadrature over the projection of the Fermat curve (Method::torus_quadrature).
ExponentEstimate lyap_line_elementary(double b, Field field, long n_iter, std::uint64_t seed,
                                      Method method = Method::birkhoff_orbit);
// Fiber-metric norm at a point (x:0:z) of the line y = 0.
double line_fiber_norm(double b, const cplx& x, const cplx& z);

// ------------------------------------------------------------------ sweeps

struct FamilyDescriptor {
    std::string name;
    std::function<MapSpec(const Rational&)> spec_at;
};

FamilyDescriptor two_thirds_family();
FamilyDescriptor elementary_family();

struct SweepRow {
    std::string family;
    MapSpec spec;
    Field field = Field::complex;
    ExponentEstimate est;
    std::string error;
};

std::vector<SweepRow> sweep(const FamilyDescriptor& fam, const std::vector<Rational>& grid,
                            const std::vector<Field>& fields, long samples, std::uint64_t seed);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

// Quadrature estimate for one family member in one field.
ExponentEstimate family_exponent(const MapSpec& spec, Field field, long samples, std::uint64_t seed);

// Bisection for the sign change of the exponent in [lo, hi], using common
// random numbers so that the estimate is a smooth function of the parameter.
// Throws NoSignChange unless the endpoint signs differ at 3 sigma.
double threshold_find(const FamilyDescriptor& fam, double lo, double hi, double tol, Field field, long samples,
                      std::uint64_t seed);

}  // namespace p2dyn
