#include "p2dyn/identities.hpp"

#include <algorithm>
#include <cmath>

#include "p2dyn/cassini.hpp"
#include "p2dyn/errors.hpp"
#include "p2dyn/families.hpp"
#include "p2dyn/parallel.hpp"

namespace p2dyn {

namespace {

cplx cgauss(std::mt19937_64& rng) {
    const double re = gaussian(rng), im = gaussian(rng);
    return {re, im};
}

Vec3<cplx> cpoint(std::mt19937_64& rng) {
    Vec3<cplx> v;
    for (auto& c : v) c = cgauss(rng);
    return vscale(v, 1.0 / vnorm(v));
}

double rel(const Vec3<cplx>& u, const Vec3<cplx>& v) {
    const double s = std::max(vnorm(u), vnorm(v));
    return s > 0 ? vnorm(vsub(u, v)) / s : 0.0;
}

DesbovesParams<cplx> regular_params(std::mt19937_64& rng) {
    for (;;) {
        DesbovesParams<cplx> p{cgauss(rng), cgauss(rng), cgauss(rng)};
        if (is_regular_desboves(p.a, p.b, p.c)) return p;
    }
}

IdentityCheck fixed_point_derivatives(long n, std::uint64_t seed) {
    IdentityCheck c{"fixed_point_derivatives", 0.0, 1e-9, n};
    for (long i = 0; i < n; ++i) {
        auto rng = stream_rng(seed, static_cast<std::uint64_t>(i));
        const DesbovesParams<cplx> p = regular_params(rng);
        const FixedPointSet fp = fermat_fixed_points(p.a, p.b, p.c);
        for (const auto* set : {&fp.on_curve, &fp.others})
            for (const auto& r : *set) {
                if (r.line < 0) continue;
                const double s = std::max(1.0, std::abs(r.transverse_derivative));
                c.residual = std::max(c.residual, std::abs(r.numeric_derivative - r.transverse_derivative) / s);
            }
    }
    return c;
}

IdentityCheck fixed_point_mean(long n, std::uint64_t seed) {
    IdentityCheck c{"fixed_point_mean_minus_two", 0.0, 1e-9, n};
    for (long i = 0; i < n; ++i) {
        auto rng = stream_rng(seed, static_cast<std::uint64_t>(i));
        const DesbovesParams<cplx> p = regular_params(rng);
        const FixedPointSet fp = fermat_fixed_points(p.a, p.b, p.c);
        cplx sum = 0.0;
        double scale = 0.0;
        for (const auto& r : fp.on_curve) {
            sum += r.numeric_derivative;
            scale = std::max(scale, std::abs(r.numeric_derivative));
        }
        c.residual = std::max(c.residual, std::abs(sum / 9.0 + 2.0) / std::max(1.0, scale));
    }
    return c;
}

IdentityCheck euler_relation(long n, std::uint64_t seed) {
    IdentityCheck c{"euler_relation", 0.0, 1e-9, n};
    for (long i = 0; i < n; ++i) {
        auto rng = stream_rng(seed, static_cast<std::uint64_t>(i));
        const PolyMap<cplx> f = desboves_map<cplx>(regular_params(rng));
        const Vec3<cplx> v = cpoint(rng);
        const Vec3<cplx> F = eval_lift(f, v);
        const Vec3<cplx> Jv = matvec(jacobian(f, v), v);
        c.residual = std::max(c.residual, rel(Jv, vscale(F, cplx(f.degree()))));
    }
    return c;
}

IdentityCheck classical_first_integral(long n, std::uint64_t seed) {
    IdentityCheck c{"classical_first_integral", 0.0, 1e-9, n};
    const PolyMap<cplx> f = classical_desboves<cplx>();
    const HomogPoly<cplx> phi = fermat_phi<cplx>(), psi = classical_psi<cplx>();
    for (long i = 0; i < n; ++i) {
        auto rng = stream_rng(seed, static_cast<std::uint64_t>(i));
        c.residual = std::max(c.residual, first_integral_residual(f, phi, psi, normalize(cpoint(rng))));
    }
    return c;
}

// Phi(H0(p)) against factor(p) * Phi(p).
IdentityCheck degree3_integral(const std::string& name, const cplx& coeff, long n, std::uint64_t seed) {
    IdentityCheck c{name, 0.0, 1e-9, n};
    const PolyMap<cplx> h0 = degree3_map<cplx>(0.0, 0.0, 0.0);
    const HomogPoly<cplx> phi = fermat_phi<cplx>();
    for (long i = 0; i < n; ++i) {
        auto rng = stream_rng(seed, static_cast<std::uint64_t>(i));
        const Vec3<cplx> v = cpoint(rng);
        const cplx y3 = v[1] * v[1] * v[1], z3 = v[2] * v[2] * v[2];
        const Vec3<cplx> H = eval_lift(h0, v);
        const cplx lhs = phi(H);
        const cplx rhs = coeff * y3 * z3 * phi(v);
        // relative to the size of the terms that cancel in Phi(H0)
        double scale = 0.0;
        for (const cplx& h : H) scale += std::pow(std::abs(h), 3);
        c.residual = std::max(c.residual, std::abs(lhs - rhs) / std::max(scale, 1e-300));
    }
    return c;
}

IdentityCheck quotient_semiconjugacy(long n, std::uint64_t seed) {
    IdentityCheck c{"quotient_semiconjugacy", 0.0, 1e-9, n};
    for (long i = 0; i < n; ++i) {
        auto rng = stream_rng(seed, static_cast<std::uint64_t>(i));
        const DesbovesParams<cplx> p = regular_params(rng);
        const Vec3<cplx> v = cpoint(rng);
        const Vec3<cplx> lhs = cube_projection(eval_lift(desboves_map<cplx>(p), v));
        const Vec3<cplx> rhs = eval_lift(quotient_desboves<cplx>(p), cube_projection(v));
        c.residual = std::max(c.residual, rel(lhs, rhs));
    }
    return c;
}

IdentityCheck sign_permutations(long n, std::uint64_t seed) {
    IdentityCheck c{"sign_permutation_conjugacy", 0.0, 1e-9, n};
    std::array<int, 3> sigma{0, 1, 2};
    std::vector<std::array<int, 3>> perms;
    do perms.push_back(sigma);
    while (std::next_permutation(sigma.begin(), sigma.end()));
    for (long i = 0; i < n; ++i) {
        auto rng = stream_rng(seed, static_cast<std::uint64_t>(i));
        const DesbovesParams<cplx> p = regular_params(rng);
        const PolyMap<cplx> f = desboves_map<cplx>(p);
        const Vec3<cplx> v = cpoint(rng);
        for (const auto& s : perms) {
            const PolyMap<cplx> g = desboves_map<cplx>(sign_permutation_conjugate(s, p));
            const Vec3<cplx> lhs = eval_lift(g, v);
            const Vec3<cplx> rhs = apply_sign_permutation(s, eval_lift(f, inverse_sign_permutation(s, v)));
            c.residual = std::max(c.residual, rel(lhs, rhs));
        }
    }
    return c;
}

IdentityCheck g_symmetry(long n, std::uint64_t seed) {
    IdentityCheck c{"g_symmetry_commutation", 0.0, 1e-9, n};
    const cplx om = std::polar(1.0, 2.0 * pi_r<double>() / 3);
    for (long i = 0; i < n; ++i) {
        auto rng = stream_rng(seed, static_cast<std::uint64_t>(i));
        const PolyMap<cplx> f = desboves_map<cplx>(regular_params(rng));
        const Vec3<cplx> v = cpoint(rng);
        const Vec3<cplx> F = eval_lift(f, v);
        for (int ia = 0; ia < 3; ++ia)
            for (int ib = 0; ib < 3; ++ib) {
                const cplx al = std::pow(om, ia), be = std::pow(om, ib);
                const Vec3<cplx> lhs = eval_lift(f, Vec3<cplx>{al * v[0], be * v[1], v[2]});
                const Vec3<cplx> rhs{al * F[0], be * F[1], F[2]};
                c.residual = std::max(c.residual, rel(lhs, rhs));
            }
    }
    return c;
}

IdentityCheck symmetric_product(long n, std::uint64_t seed) {
    IdentityCheck c{"symmetric_product_formula", 0.0, 1e-9, n};
    auto X = HomogPoly<cplx>::variable(0), Y = HomogPoly<cplx>::variable(1);
    for (long i = 0; i < n; ++i) {
        auto rng = stream_rng(seed, static_cast<std::uint64_t>(i));
        const HomogPoly<cplx> p = X * X * cgauss(rng) + X * Y * cgauss(rng) + Y * Y * cgauss(rng);
        const HomogPoly<cplx> q = X * X * cgauss(rng) + X * Y * cgauss(rng) + Y * Y * cgauss(rng);
        const SymmetricProduct sp(p, q);
        const P1<cplx> u{cgauss(rng), cgauss(rng)}, w{cgauss(rng), cgauss(rng)};
        auto image = [&](const P1<cplx>& t) {
            const Vec3<cplx> v{t[0], t[1], cplx(0)};
            return P1<cplx>{p(v), q(v)};
        };
        const ProjPoint<cplx> lhs = sp(normalize(symmetric_embed(u, w)));
        const ProjPoint<cplx> rhs = normalize(symmetric_embed(image(u), image(w)));
        c.residual = std::max(c.residual, fs_distance(lhs, rhs));
    }
    return c;
}

IdentityCheck cassini_identity(long n, std::uint64_t seed) {
    IdentityCheck c{"cassini_identity", 0.0, 1e-9, n};
    for (double k : {0.125, -0.2, 0.7}) c.residual = std::max(c.residual, cassini_identity_residual(k, n, seed));
    return c;
}

}  // namespace

std::vector<IdentityCheck> identity_suite(const std::string& suite, long n_points, std::uint64_t seed) {
    const bool all = suite == "all";
    if (!all && suite != "desboves" && suite != "degree3" && suite != "cassini" && suite != "symmetric")
        fail(Errc::BadParameter, "unknown identity suite " + suite);
    std::vector<IdentityCheck> out;
    if (all || suite == "desboves") {
        out.push_back(fixed_point_derivatives(n_points, seed));
        out.push_back(fixed_point_mean(n_points, seed));
        out.push_back(euler_relation(n_points, seed));
        out.push_back(classical_first_integral(n_points, seed));
        out.push_back(quotient_semiconjugacy(n_points, seed));
        out.push_back(sign_permutations(n_points, seed));
        out.push_back(g_symmetry(n_points, seed));
    }
    if (all || suite == "degree3") {
        const cplx k = degree3_default_k<cplx>();
        out.push_back(degree3_integral("degree3_first_integral", 3.0, n_points, seed));
        out.push_back(degree3_integral("degree3_first_integral_k3", k * k * k, n_points, seed));
    }
    if (all || suite == "cassini") out.push_back(cassini_identity(n_points, seed));
    if (all || suite == "symmetric") out.push_back(symmetric_product(n_points, seed));
    return out;
}

}  // namespace p2dyn
