#include "p2dyn/transverse.hpp"

#include <cmath>
#include <iomanip>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>

#include "p2dyn/parallel.hpp"

namespace p2dyn {

const char* metric_name(MetricChoice m) {
    return m == MetricChoice::orthogonal_complement ? "orthogonal_complement" : "fiber_vertical";
}

const char* method_name(Method m) { return m == Method::torus_quadrature ? "torus_quadrature" : "birkhoff_orbit"; }

MetricChoice parse_metric(const std::string& s) {
    if (s == "orthogonal_complement" || s == "orthogonal") return MetricChoice::orthogonal_complement;
    if (s == "fiber_vertical" || s == "fiber") return MetricChoice::fiber_vertical;
    fail(Errc::BadParameter, "unknown metric '" + s + "'");
}

Method parse_method(const std::string& s) {
    if (s == "torus_quadrature" || s == "quadrature") return Method::torus_quadrature;
    if (s == "birkhoff_orbit" || s == "birkhoff") return Method::birkhoff_orbit;
    fail(Errc::BadParameter, "unknown method '" + s + "'");
}

namespace {

// In double precision the transverse norm bottoms out near 1e-16 close to a
// high-order zero, which biases the log average upward; values below 1e-10 are
// recomputed from the exact map at kRefineBits.
constexpr double kRefineBelow = 1e-10;
constexpr int kRefineBits = 256;

// Unit normal direction to the curve inside the tangent plane p^perp.
template <class S> Vec3<S> normal_direction(const FormWithGradient<S>& phi, const Vec3<S>& p) {
    const Vec3<S> tau = cross(vconj(p), phi.gradient(p));
    Vec3<S> nu = vconj(cross(p, tau));
    const real_of<S> n = vnorm(nu);
    if (!(n > real_of<S>(0))) fail(Errc::OffCurve, "curve is singular at the sample point");
    return vscale(nu, S(real_of<S>(1) / n));
}

// Derivative of the projective map at unit p applied to v in p^perp,
// expressed in (F/|F|)^perp.
template <class S> Vec3<S> push_tangent(const Mat3<S>& J, const Vec3<S>& q, const real_of<S>& fnorm, const Vec3<S>& v) {
    Vec3<S> w = vscale(matvec(J, v), S(real_of<S>(1) / fnorm));
    return vsub(w, vscale(q, hdot(q, w)));
}

}  // namespace

template <class S>
real_of<S> transverse_norm(const PolyMap<S>& f, const FormWithGradient<S>& phi, const ProjPoint<S>& p, MetricChoice m,
                           double offcurve_tol) {
    using R = real_of<S>;
    if (mag(phi(p.v)) > R(offcurve_tol) * phi.scale()) fail(Errc::OffCurve, "point is not on the invariant curve");
    const Vec3<S> F = eval_lift(f, p.v);
    if (is_indeterminate_at(f, F)) fail(Errc::Indeterminate, "map is indeterminate at the sample point");
    const Mat3<S> J = jacobian(f, p.v);
    if (m == MetricChoice::fiber_vertical) {
        // |dy| / |(dx, dz)| is scale invariant, so the ratio needs no normalization
        using std::sqrt;
        const R base = sqrt(mag2(p.v[0]) + mag2(p.v[2]));
        const R image = sqrt(mag2(F[0]) + mag2(F[2]));
        if (!(image > R(0))) fail(Errc::Indeterminate, "image fiber is undefined");
        return mag(J[1][1]) * base / image;
    }
    const R fnorm = vnorm(F);
    const Vec3<S> q = vscale(F, S(R(1) / fnorm));
    const Vec3<S> nu = normal_direction(phi, p.v);
    const Vec3<S> w = push_tangent(J, q, fnorm, nu);
    return mag(hdot(normal_direction(phi, q), w));
}

template <class S>
real_of<S> transverse_norm_n(const PolyMap<S>& f, const FormWithGradient<S>& phi, const ProjPoint<S>& p, int n) {
    using R = real_of<S>;
    Vec3<S> x = p.v;
    Vec3<S> v = normal_direction(phi, x);
    for (int k = 0; k < n; ++k) {
        const Vec3<S> F = eval_lift(f, x);
        if (is_indeterminate_at(f, F)) fail(Errc::Indeterminate, "map is indeterminate along the orbit");
        const R fnorm = vnorm(F);
        const Vec3<S> q = vscale(F, S(R(1) / fnorm));
        v = push_tangent(jacobian(f, x), q, fnorm, v);
        x = q;
    }
    return mag(hdot(normal_direction(phi, x), v));
}

#define P2DYN_INST_TRANSVERSE(S)                                                                                \
    template real_of<S> transverse_norm<S>(const PolyMap<S>&, const FormWithGradient<S>&, const ProjPoint<S>&, \
                                           MetricChoice, double);                                              \
    template real_of<S> transverse_norm_n<S>(const PolyMap<S>&, const FormWithGradient<S>&, const ProjPoint<S>&, int);

P2DYN_EXTERN_ALL(P2DYN_INST_TRANSVERSE)

// ------------------------------------------------------------ complex curve

namespace {

constexpr int kShifts = 16;
constexpr int kChains = 8;
constexpr int kBatchesPerChain = 25;
constexpr double kTorusNoise = 0x1p-40;

// Largest Fibonacci pair (N, g) with N <= n; the Fibonacci lattice is the
// optimal 2-D rank-1 rule.
std::pair<long, long> fibonacci_rule(long n) {
    long a = 1, b = 2;
    while (a + b <= n) {
        const long c = a + b;
        a = b;
        b = c;
    }
    return {b, a};
}

struct SampleAccumulator {
    CompensatedSum sum;
    long count = 0;
    long rejected = 0;

    template <class Fn> void add(Fn&& fn) {
        double v;
        try {
            v = fn();
        } catch (const Error&) {
            ++rejected;
            return;
        }
        if (!std::isfinite(v) || v < kRejectNorm) {
            ++rejected;
            return;
        }
        sum.add(std::log(v));
        ++count;
    }
    double mean() const { return count ? sum.value() / static_cast<double>(count) : 0.0; }
};

// Shifted lattice rule over the unit square; g(u, v) returns the norm.
template <class Fn> ExponentEstimate shifted_lattice_rule(long n_samples, std::uint64_t seed, Fn&& g) {
    const auto [N, step] = fibonacci_rule(std::max<long>(2, n_samples / kShifts));
    std::vector<SampleAccumulator> acc(kShifts);
    parallel_for(kShifts, [&](std::size_t m) {
        auto rng = stream_rng(seed, m);
        const double d1 = uniform01(rng), d2 = uniform01(rng);
        for (long k = 0; k < N; ++k) {
            double u = static_cast<double>(k) / N + d1;
            double v = static_cast<double>((k * step) % N) / N + d2;
            u -= std::floor(u);
            v -= std::floor(v);
            acc[m].add([&] { return g(u, v); });
        }
    });
    std::vector<double> means;
    ExponentEstimate e;
    for (const auto& a : acc) {
        means.push_back(a.mean());
        e.samples += a.count;
        e.rejected += a.rejected;
    }
    const MeanStats st = replicate_stats(means);
    e.value = st.mean;
    e.stderr_ = st.stderr_;
    e.method = Method::torus_quadrature;
    return e;
}

// One-dimensional analogue: shifted uniform grids on [0, 1).
template <class Fn> ExponentEstimate shifted_grid_rule(long n_samples, std::uint64_t seed, Fn&& g) {
    const long N = std::max<long>(2, n_samples / kShifts);
    std::vector<SampleAccumulator> acc(kShifts);
    parallel_for(kShifts, [&](std::size_t m) {
        auto rng = stream_rng(seed, m);
        const double d = uniform01(rng);
        for (long k = 0; k < N; ++k) {
            double s = (static_cast<double>(k) + d) / N;
            acc[m].add([&] { return g(s); });
        }
    });
    std::vector<double> means;
    ExponentEstimate e;
    for (const auto& a : acc) {
        means.push_back(a.mean());
        e.samples += a.count;
        e.rejected += a.rejected;
    }
    const MeanStats st = replicate_stats(means);
    e.value = st.mean;
    e.stderr_ = st.stderr_;
    e.method = Method::torus_quadrature;
    return e;
}

// Batch means pooled over independent chains.
ExponentEstimate pool_chains(const std::vector<std::vector<double>>& chains, long rejected) {
    std::vector<double> batches;
    ExponentEstimate e;
    for (const auto& c : chains) {
        e.samples += static_cast<long>(c.size());
        const std::size_t per = c.size() / kBatchesPerChain;
        if (per == 0) continue;
        for (int b = 0; b < kBatchesPerChain; ++b) {
            CompensatedSum s;
            for (std::size_t i = b * per; i < (b + 1) * per; ++i) s.add(c[i]);
            batches.push_back(s.value() / static_cast<double>(per));
        }
    }
    if (batches.size() < 2) fail(Errc::InsufficientData, "too few samples for batch means");
    const MeanStats st = replicate_stats(batches);
    e.value = st.mean;
    e.stderr_ = st.stderr_;
    e.rejected = rejected;
    e.method = Method::birkhoff_orbit;
    return e;
}

// Integer matrix of t -> mu t in the lattice basis; throws unless mu maps
// the lattice into itself.
std::array<std::array<long, 2>, 2> multiplier_matrix(const Lattice& lat, cplx mu) {
    std::array<std::array<long, 2>, 2> M{};
    const double a = lat.omega1.real(), b = lat.omega2.real(), c = lat.omega1.imag(), d = lat.omega2.imag();
    const double det = a * d - b * c;
    const cplx img[2] = {mu * lat.omega1, mu * lat.omega2};
    for (int j = 0; j < 2; ++j) {
        const double u = (d * img[j].real() - b * img[j].imag()) / det;
        const double v = (-c * img[j].real() + a * img[j].imag()) / det;
        if (std::abs(u - std::round(u)) > 1e-9 || std::abs(v - std::round(v)) > 1e-9)
            fail(Errc::BadParameter, "multiplier does not preserve the period lattice");
        M[0][j] = std::lround(u);
        M[1][j] = std::lround(v);
    }
    return M;
}

}  // namespace

ExponentEstimate lyap_complex(const PolyMap<cplx>& f, const CurveModel<cplx>& curve, long n_samples,
                              std::uint64_t seed, Method method, MetricChoice metric) {
    const Lattice& lat = curve.lattice;
    auto norm_at = [&](double u, double v) {
        const ProjPoint<cplx> p = fermat_embed<cplx>(lat.omega1 * u + lat.omega2 * v);
        return transverse_norm(f, curve.phi, p, metric);
    };
    ExponentEstimate e;
    if (method == Method::torus_quadrature) {
        e = shifted_lattice_rule(n_samples, seed, norm_at);
    } else {
        const auto M = multiplier_matrix(lat, curve.multiplier);
        const long per = std::max<long>(kBatchesPerChain * 2, n_samples / kChains);
        std::vector<std::vector<double>> chains(kChains);
        std::vector<long> rejected(kChains, 0);
        parallel_for(kChains, [&](std::size_t c) {
            auto rng = stream_rng(seed ^ 0xb1a4c0ffeeULL, c);
            double u = uniform01(rng), v = uniform01(rng);
            chains[c].reserve(per);
            while (static_cast<long>(chains[c].size()) < per) {
                SampleAccumulator one;
                one.add([&] { return norm_at(u, v); });
                if (one.count)
                    chains[c].push_back(one.sum.value());
                else
                    ++rejected[c];
                const double nu = M[0][0] * u + M[0][1] * v + kTorusNoise * gaussian(rng);
                const double nv = M[1][0] * u + M[1][1] * v + kTorusNoise * gaussian(rng);
                u = nu - std::floor(nu);
                v = nv - std::floor(nv);
            }
        });
        long rej = 0;
        for (long r : rejected) rej += r;
        e = pool_chains(chains, rej);
    }
    e.metric = metric;
    return e;
}

// --------------------------------------------------------------- real curve

ExponentEstimate lyap_real(const MapSpec& spec, long n_iter, std::uint64_t seed, int precision_bits, long burn_in,
                           MetricChoice metric) {
    if (precision_bits < 53) fail(Errc::BadParameter, "precision_bits must be at least 53");
    const PolyMap<double> fd = build_map<double>(spec);
    const FormWithGradient<double> phid(fermat_phi<double>());
    std::vector<std::vector<double>> chains(kChains);
    long rejected = 0;
    {
        // mpfr precision is process global, so chains run one after another
        PrecisionScope scope(precision_bits);
        const PolyMap<mpreal> f = build_map<mpreal>(spec);
        const FormWithGradient<mpreal> phi(fermat_phi<mpreal>());
        const long per = std::max<long>(kBatchesPerChain * 2, n_iter / kChains);
        for (int c = 0; c < kChains; ++c) {
            auto rng = stream_rng(seed ^ 0x5eed7ea1ULL, static_cast<std::uint64_t>(c));
            auto fresh = [&] { return real_embed<mpreal>(mpreal(uniform01(rng))); };
            ProjPoint<mpreal> p = fresh();
            long step = 0, restarts = 0;
            while (static_cast<long>(chains[c].size()) < per) {
                try {
                    if (step >= burn_in) {
                        const ProjPoint<double> pd = convert_point<double>(p);
                        double v = transverse_norm(fd, phid, pd, metric);
                        if (v < kRefineBelow) v = static_cast<double>(transverse_norm(f, phi, p, metric));
                        if (!std::isfinite(v) || v < kRejectNorm)
                            ++rejected;
                        else
                            chains[c].push_back(std::log(v));
                    }
                    p = newton_reproject(eval_map(f, p), phi);
                    ++step;
                } catch (const Error&) {
                    // orbit hit an indeterminacy point or left the curve; restart
                    ++rejected;
                    if (++restarts > 1000) fail(Errc::NoConvergence, "real orbit keeps failing to stay on the curve");
                    p = fresh();
                    step = 0;
                }
            }
        }
    }
    ExponentEstimate e = pool_chains(chains, rejected);
    e.metric = metric;
    return e;
}

ExponentEstimate lyap_real_quadrature(const MapSpec& spec, long n_samples, std::uint64_t seed,
                                      MetricChoice metric) {
    const PolyMap<double> f = build_map<double>(spec);
    const FormWithGradient<double> phi(fermat_phi<double>());
    std::optional<PrecisionScope> scope(std::in_place, kRefineBits);
    const PolyMap<mpreal> fm = build_map<mpreal>(spec);
    const FormWithGradient<mpreal> phim(fermat_phi<mpreal>());
    scope.reset();
    std::mutex mp_lock;
    ExponentEstimate e = shifted_grid_rule(n_samples, seed, [&](double s) {
        const double v = transverse_norm(f, phi, real_embed<double>(s), metric);
        if (v >= kRefineBelow) return v;
        std::lock_guard<std::mutex> hold(mp_lock);
        PrecisionScope inner(kRefineBits);
        return static_cast<double>(transverse_norm(fm, phim, real_embed<mpreal>(mpreal(s)), metric));
    });
    e.metric = metric;
    return e;
}

// ------------------------------------------------------------ invariant line

double line_fiber_norm(double b, const cplx& x, const cplx& z) {
    const cplx x3 = x * x * x, z3 = z * z * z;
    const cplx dy = (b - 1.0) * x3 + (b + 1.0) * z3;
    const cplx X = x * (-x3 - 2.0 * z3), Z = z * (2.0 * x3 + z3);
    const double image = std::sqrt(std::norm(X) + std::norm(Z));
    if (!(image > 0)) fail(Errc::Indeterminate, "image fiber is undefined");
    return std::abs(dy) * std::sqrt(std::norm(x) + std::norm(z)) / image;
}

ExponentEstimate lyap_line_elementary(double b, Field field, long n_iter, std::uint64_t seed, Method method) {
    if (b == 0.0) fail(Errc::BadParameter, "b = 0 is degenerate for the elementary family");
    ExponentEstimate e;
    if (method == Method::torus_quadrature) {
        if (field == Field::complex) {
            const Lattice& lat = fermat_lattice<cplx>();
            e = shifted_lattice_rule(n_iter, seed, [&](double u, double v) {
                const ProjPoint<cplx> p = fermat_embed<cplx>(lat.omega1 * u + lat.omega2 * v);
                return line_fiber_norm(b, p.v[0], p.v[2]);
            });
        } else {
            e = shifted_grid_rule(n_iter, seed, [&](double s) {
                const ProjPoint<double> p = real_embed<double>(s);
                return line_fiber_norm(b, p.v[0], p.v[2]);
            });
        }
    } else {
        const long per = std::max<long>(kBatchesPerChain * 2, n_iter / kChains);
        const long burn = 1000;
        std::vector<std::vector<double>> chains(kChains);
        std::vector<long> restarts(kChains, 0);
        parallel_for(kChains, [&](std::size_t c) {
            auto rng = stream_rng(seed ^ 0x11e5ULL, c);
            auto fresh = [&] {
                if (field == Field::complex) return P1<cplx>{cplx(gaussian(rng), gaussian(rng)), cplx(gaussian(rng), gaussian(rng))};
                const double th = 2.0 * pi_r<double>() * uniform01(rng);
                return P1<cplx>{cplx(std::cos(th)), cplx(std::sin(th))};
            };
            P1<cplx> xz = fresh();
            long step = 0;
            while (static_cast<long>(chains[c].size()) < per) {
                const double s = std::sqrt(std::norm(xz[0]) + std::norm(xz[1]));
                xz = {xz[0] / s, xz[1] / s};
                const double mx = std::max(std::abs(xz[0]), std::abs(xz[1]));
                if (std::abs(xz[0] * xz[0] * xz[0] + xz[1] * xz[1] * xz[1]) < 1e-12 * mx * mx * mx) {
                    // landed on a critical value; a fresh generic orbit replaces it
                    if (++restarts[c] > 100) fail(Errc::CriticalOrbitHit, "base orbit keeps hitting critical values");
                    xz = fresh();
                    step = 0;
                    continue;
                }
                if (step >= burn) chains[c].push_back(std::log(line_fiber_norm(b, xz[0], xz[1])));
                xz = lattes_p1_step<cplx>(xz);
                ++step;
            }
        });
        e = pool_chains(chains, 0);
    }
    e.metric = MetricChoice::fiber_vertical;
    return e;
}

// ------------------------------------------------------------------- sweeps

FamilyDescriptor two_thirds_family() {
    return {"two_thirds", [](const Rational& b) { return two_thirds_spec(b); }};
}

FamilyDescriptor elementary_family() {
    return {"elementary", [](const Rational& b) { return desboves_spec(Rational(-1), b, Rational(1)); }};
}

ExponentEstimate family_exponent(const MapSpec& spec, Field field, long samples, std::uint64_t seed) {
    if (field == Field::real) return lyap_real_quadrature(spec, samples, seed);
    cplx mu(-2.0, 0.0);
    if (spec.family == Family::degree3) mu = degree3_multiplier();
    return lyap_complex(build_map<cplx>(spec), fermat_curve_model<cplx>(mu), samples, seed);
}

std::vector<SweepRow> sweep(const FamilyDescriptor& fam, const std::vector<Rational>& grid,
                            const std::vector<Field>& fields, long samples, std::uint64_t seed) {
    std::vector<SweepRow> rows;
    for (const Rational& x : grid)
        for (Field fld : fields) {
            SweepRow r;
            r.family = fam.name;
            r.field = fld;
            try {
                r.spec = fam.spec_at(x);
                r.est = family_exponent(r.spec, fld, samples, seed);
            } catch (const Error& err) {
                r.error = err.name();
            }
            rows.push_back(r);
        }
    return rows;
}

namespace {

std::string csv_param(const Exact& e) {
    if (!e.is_real()) return e.str();
    std::ostringstream os;
    os << std::setprecision(12) << e.to_real_double();
    return os.str();
}

}  // namespace

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "family,a,b,c,field,method,metric,samples,lyap,stderr,rejected\n";
    for (const SweepRow& r : rows) {
        os << r.family;
        for (std::size_t i = 0; i < 3; ++i) os << ',' << (i < r.spec.params.size() ? csv_param(r.spec.params[i]) : "");
        os << ',' << field_name(r.field);
        if (!r.error.empty()) {
            os << ",error," << r.error << ",0,nan,nan,0\n";
            continue;
        }
        os << ',' << method_name(r.est.method) << ',' << metric_name(r.est.metric) << ',' << r.est.samples << ','
           << std::setprecision(10) << r.est.value << ',' << std::setprecision(4) << r.est.stderr_ << ','
           << r.est.rejected << '\n';
    }
}

double threshold_find(const FamilyDescriptor& fam, double lo, double hi, double tol, Field field, long samples,
                      std::uint64_t seed) {
    if (!(lo < hi) || !(tol > 0)) fail(Errc::BadParameter, "threshold bracket must satisfy lo < hi and tol > 0");
    // the same seed at every parameter makes the estimate a smooth function of it
    auto at = [&](double x) { return family_exponent(fam.spec_at(Rational(x)), field, samples, seed); };
    const ExponentEstimate elo = at(lo), ehi = at(hi);
    const bool lo_neg = elo.value < 0, hi_neg = ehi.value < 0;
    if (lo_neg == hi_neg || std::abs(elo.value) < 3 * elo.stderr_ || std::abs(ehi.value) < 3 * ehi.stderr_)
        fail(Errc::NoSignChange, "exponent does not change sign across the bracket at 3 sigma");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if ((at(mid).value < 0) == lo_neg)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace p2dyn
