#include "p2dyn/cassini.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <nlohmann/json.hpp>

#include "p2dyn/errors.hpp"
#include "p2dyn/parallel.hpp"

namespace p2dyn {

namespace {

Vec3<double> unit_gaussian(std::mt19937_64& rng) {
    Vec3<double> v{gaussian(rng), gaussian(rng), gaussian(rng)};
    return vscale(v, 1.0 / vnorm(v));
}

// Distance of a unit vector to the line through (0:0:1).
double origin_distance(const Vec3<double>& p) { return std::hypot(p[0], p[1]); }

// Sum of |c| |monomial|: the rounding scale of a polynomial value.
double abs_eval(const HomogPoly<double>& h, const Vec3<double>& v) {
    double s = 0.0;
    for (const auto& t : h.terms()) {
        double m = std::abs(t.c);
        for (int i = 0; i < 3; ++i) m *= std::pow(std::abs(v[i]), t.e[i]);
        s += m;
    }
    return s;
}

void check_k(double k) {
    if (k == 0.0 || k == 1.0) fail(Errc::BadParameter, "cassini parameter k must avoid 0 and 1");
}

}  // namespace

double r_ratio(const Vec3<double>& p, double k) {
    const Vec3<double> u = vscale(p, 1.0 / vnorm(p));
    const double q = u[0] * u[0] + u[1] * u[1];
    const double phi = u[0] * u[0] * u[1] * u[1] - q * u[2] * u[2] + k * std::pow(u[2], 4);
    if (q == 0.0) return std::numeric_limits<double>::infinity();
    return std::abs(phi) / (q * q);
}

ContractionReport contraction_check(const CassiniConfig& cfg, long n_samples, std::uint64_t seed,
                                    const CassiniRegion& region) {
    check_k(cfg.k);
    const PolyMap<double> f = cassini_map<double>(cfg.a, cfg.k);
    std::vector<double> ratio(static_cast<std::size_t>(n_samples), 0.0);
    std::vector<Vec3<double>> where(static_cast<std::size_t>(n_samples));
    parallel_for(static_cast<std::size_t>(n_samples), [&](std::size_t i) {
        auto rng = stream_rng(seed, i);
        // rejection sampling into the region; bounded so a tiny region cannot hang
        for (int attempt = 0; attempt < 100000; ++attempt) {
            const Vec3<double> p = unit_gaussian(rng);
            if (origin_distance(p) < region.exclude_radius) continue;
            const double r0 = r_ratio(p, cfg.k);
            if (!(r0 < region.r_max) || r0 == 0.0) continue;
            const Vec3<double> F = eval_lift(f, p);
            if (is_indeterminate_at(f, F)) continue;
            ratio[i] = r_ratio(F, cfg.k) / r0;
            where[i] = p;
            return;
        }
    });
    ContractionReport rep;
    rep.bound_4k = 4.0 * std::abs(cfg.k);
    rep.samples = n_samples;
    for (std::size_t i = 0; i < ratio.size(); ++i)
        if (ratio[i] > rep.sup_ratio || std::isnan(ratio[i])) {
            rep.sup_ratio = ratio[i];
            rep.argmax = where[i];
            if (std::isnan(ratio[i])) break;
        }
    return rep;
}

double cassini_identity_residual(double k, long n_points, std::uint64_t seed) {
    check_k(k);
    const PolyMap<double> f = cassini_map<double>(0.0, k);
    const HomogPoly<double> phi = cassini_phi<double>(k);
    double worst = 0.0;
    for (long i = 0; i < n_points; ++i) {
        auto rng = stream_rng(seed, static_cast<std::uint64_t>(i));
        const Vec3<double> p = unit_gaussian(rng);
        const Vec3<double> F = eval_lift(f, p);
        const double x2 = p[0] * p[0], y2 = p[1] * p[1];
        const double factor = 16.0 * k * x2 * y2 * std::pow(x2 - y2, 4);
        const double lhs = phi(F), rhs = factor * phi(p);
        const double scale = abs_eval(phi, F) + std::abs(factor) * abs_eval(phi, p);
        worst = std::max(worst, std::abs(lhs - rhs) / scale);
    }
    return worst;
}

double quarter_turn_residual(const CassiniConfig& cfg, long n_points, std::uint64_t seed) {
    check_k(cfg.k);
    const PolyMap<double> f = cassini_map<double>(cfg.a, cfg.k);
    double worst = 0.0;
    auto rel = [](const Vec3<double>& u, const Vec3<double>& v) {
        const double s = std::max(vnorm(u), vnorm(v));
        return s > 0 ? vnorm(vsub(u, v)) / s : 0.0;
    };
    for (long i = 0; i < n_points; ++i) {
        auto rng = stream_rng(seed, static_cast<std::uint64_t>(i));
        const Vec3<double> p = unit_gaussian(rng);
        const Vec3<double> half{-p[0], -p[1], p[2]}, quarter{-p[1], p[0], p[2]};
        const Vec3<double> F = eval_lift(f, p);
        worst = std::max(worst, rel(eval_lift(f, half), F));
        worst = std::max(worst, rel(eval_lift(f, eval_lift(f, quarter)), eval_lift(f, F)));
    }
    return worst;
}

bool on_fixed_component(const Vec3<double>& p, double k) {
    check_k(k);
    if (k < 0) return true;
    const Vec3<double> u = vscale(p, 1.0 / vnorm(p));
    // the inner oval is bounded in the chart z = 1
    if (std::abs(u[2]) < 1e-9) return true;
    const double x = u[0] / u[2], y = u[1] / u[2];
    const double rho2 = x * x + y * y;
    if (rho2 == 0.0) return false;
    const double cs2 = x * x * y * y / (rho2 * rho2);
    const double disc = std::sqrt(std::max(0.0, 1.0 - 4.0 * k * cs2));
    const double r_small = 2.0 * k / (1.0 + disc);
    const double r_large = cs2 > 0 ? (1.0 + disc) / (2.0 * cs2) : std::numeric_limits<double>::infinity();
    return rho2 > std::sqrt(r_small * std::min(r_large, 1e6 * r_small));
}

Vec3<double> inner_oval_point(double k, double theta) {
    if (!(k > 0)) fail(Errc::BadParameter, "the real curve has an inner oval only for k > 0");
    check_k(k);
    const double c = std::cos(theta), s = std::sin(theta);
    const double cs2 = c * c * s * s;
    const double rho = std::sqrt(2.0 * k / (1.0 + std::sqrt(1.0 - 4.0 * k * cs2)));
    return {rho * c, rho * s, 1.0};
}

TrappingReport trapping_demo(const CassiniConfig& cfg, long n_orbits, long budget, std::uint64_t seed,
                             long contraction_samples) {
    check_k(cfg.k);
    TrappingReport rep;
    rep.cfg = cfg;
    const ContractionReport cr = contraction_check(cfg, contraction_samples, seed);
    rep.sup_ratio = cr.sup_ratio;
    rep.bound_4k = cr.bound_4k;
    const PolyMap<double> f = cassini_map<double>(cfg.a, cfg.k);
    const FormWithGradient<double> phi(cassini_phi<double>(cfg.k));
    enum Outcome { curve, origin, other, undecided };
    std::vector<int> out(static_cast<std::size_t>(n_orbits), undecided);
    parallel_for(out.size(), [&](std::size_t i) {
        auto rng = stream_rng(seed ^ 0x5eedULL, i);
        Vec3<double> p;
        do p = unit_gaussian(rng);
        while (origin_distance(p) < 0.1);
        int still = 0;
        for (long t = 0; t < budget; ++t) {
            const Vec3<double> F = eval_lift(f, p);
            if (is_indeterminate_at(f, F)) return;
            Vec3<double> q = vscale(F, 1.0 / vnorm(F));
            const double d = std::abs(phi(q)) / std::max(vnorm(phi.gradient(q)), 1e-300);
            if (d < 1e-8 && on_fixed_component(q, cfg.k)) {
                out[i] = curve;
                return;
            }
            if (origin_distance(q) < 1e-8) {
                out[i] = origin;
                return;
            }
            const double step = vnorm(cross(p, q));
            still = step < 1e-13 ? still + 1 : 0;
            if (still >= 20) {
                out[i] = other;
                return;
            }
            p = q;
        }
    });
    for (int o : out) {
        if (o == curve) ++rep.to_curve;
        else if (o == origin) ++rep.to_origin_fp;
        else if (o == other) ++rep.to_other_fp;
        else ++rep.undecided;
    }
    return rep;
}

void TrappingReport::write_json(std::ostream& os) const {
    nlohmann::ordered_json j;
    j["k"] = cfg.k;
    j["a"] = cfg.a;
    j["sup_ratio"] = sup_ratio;
    j["bound_4k"] = bound_4k;
    j["orbits"] = {{"to_curve", to_curve}, {"to_origin_fp", to_origin_fp}, {"to_other_fp", to_other_fp},
                   {"undecided", undecided}};
    os << j.dump(2) << '\n';
}

}  // namespace p2dyn
