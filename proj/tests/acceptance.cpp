#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "p2dyn/basin.hpp"
#include "p2dyn/cassini.hpp"
#include "p2dyn/herman.hpp"
#include "p2dyn/identities.hpp"
#include "p2dyn/transverse.hpp"

using namespace p2dyn;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> detail;

    void check(bool ok, const std::string& what) {
        pass = pass && ok;
        detail.push_back(std::string(ok ? "ok   " : "MISS ") + what);
    }
};

std::string num(double v, int prec = 5) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

std::string sci(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

std::string est_str(const ExponentEstimate& e) { return num(e.value) + " +- " + num(e.stderr_, 6); }

bool within(double v, double target, double tol) { return std::abs(v - target) <= tol; }

bool agree_2sigma(const ExponentEstimate& a, const ExponentEstimate& b) {
    return std::abs(a.value - b.value) <= 2.0 * std::hypot(a.stderr_, b.stderr_);
}

double u01(std::mt19937_64& g) { return std::uniform_real_distribution<double>(0.0, 1.0)(g); }

// Quadrature and Birkhoff estimates shared by the exponent criteria and the
// estimator cross-check.
struct ExponentPair {
    std::string label;
    ExponentEstimate quad, birk;
};
std::vector<ExponentPair> g_pairs;

MapSpec spec3(const std::string& a, const std::string& b, const std::string& c) {
    return desboves_spec(parse_rational(a), parse_rational(b), parse_rational(c));
}

constexpr long kQuad = 1000000;
constexpr long kBirkComplex = 1000000;
constexpr long kBirkReal = 100000;

ExponentPair measure(const MapSpec& s, Field field, long real_iter = kBirkReal) {
    ExponentPair p;
    p.label = "(" + s.params_str() + ") " + field_name(field);
    p.quad = family_exponent(s, field, kQuad, 1);
    if (field == Field::complex) {
        const cplx mu = s.family == Family::degree3 ? degree3_multiplier() : cplx(-2.0, 0.0);
        p.birk = lyap_complex(build_map<cplx>(s), fermat_curve_model<cplx>(mu), kBirkComplex, 2, Method::birkhoff_orbit);
    } else {
        p.birk = lyap_real(s, real_iter, 2, 192);
    }
    g_pairs.push_back(p);
    return p;
}

void check_exponent(Outcome& o, const MapSpec& s, Field field, double target, double tol) {
    const ExponentPair p = measure(s, field);
    o.check(within(p.quad.value, target, tol),
            p.label + " quadrature " + est_str(p.quad) + " vs " + num(target, 3) + " +- " + num(tol, 2));
}

// ------------------------------------------------------------ criteria

Outcome c1() {
    Outcome o;
    check_exponent(o, two_thirds_spec(Rational(1, 9)), Field::complex, -0.680, 0.02);
    return o;
}

Outcome c2() {
    Outcome o;
    const ExponentPair p = measure(two_thirds_spec(Rational(1, 9)), Field::real, 1000000);
    o.check(within(p.birk.value, -2.040, 0.03),
            p.label + " Birkhoff 192-bit, 1e6 iterates " + est_str(p.birk) + " vs -2.040 +- 0.03");
    return o;
}

Outcome c3() {
    Outcome o;
    const MapSpec s = spec3("1/3", "0", "-1/3"), t = spec3("-2/3", "0", "2/3");
    check_exponent(o, s, Field::real, -1.456, 0.03);
    check_exponent(o, s, Field::complex, -0.549, 0.02);
    for (Field f : {Field::real, Field::complex}) {
        const ExponentEstimate a = family_exponent(s, f, kQuad, 11), b = family_exponent(t, f, kQuad, 12);
        o.check(agree_2sigma(a, b), std::string(field_name(f)) + " (1/3,0,-1/3) " + est_str(a) + " vs (-2/3,0,2/3) " +
                                        est_str(b) + " within joint 2 sigma");
    }
    return o;
}

Outcome c4() {
    Outcome o;
    const MapSpec s = spec3("-1/5", "7/15", "17/15");
    check_exponent(o, s, Field::real, -0.509, 0.03);
    check_exponent(o, s, Field::complex, 0.402, 0.03);
    return o;
}

Outcome c5() {
    Outcome o;
    const MapSpec s = spec3("-7/5", "-4/5", "7/5");
    check_exponent(o, s, Field::real, 0.247, 0.03);
    check_exponent(o, s, Field::complex, 0.352, 0.03);
    return o;
}

Outcome c6() {
    Outcome o;
    const MapSpec s = spec3("1/3", "1", "5/3");
    check_exponent(o, s, Field::real, 0.081, 0.03);
    check_exponent(o, s, Field::complex, 1.032, 0.05);
    return o;
}

Outcome c7() {
    Outcome o;
    MapSpec s;
    s.family = Family::degree3;
    s.params = parse_exact_list("0,g/2,-1/2");
    check_exponent(o, s, Field::complex, -1.648, 0.02);
    o.detail.push_back("note -ln 2 = " + num(-std::log(2.0)) + ", -(3/2) ln 3 = " + num(-1.5 * std::log(3.0)));
    return o;
}

Outcome c8() {
    Outcome o;
    const FamilyDescriptor fam = two_thirds_family();
    const double r = threshold_find(fam, 0.5, 1.0, 1e-3, Field::real, 100000, 1);
    o.check(within(r, 0.901, 0.01), "real crossing |b| = " + num(r, 4) + " vs 0.901 +- 0.01");
    const double c = threshold_find(fam, 0.0, 0.6, 1e-3, Field::complex, 50000, 1);
    o.check(within(c, 0.274, 0.01), "complex crossing |b| = " + num(c, 4) + " vs 0.274 +- 0.01");
    return o;
}

constexpr double kA = -0.2, kB = 7.0 / 15.0, kC = 17.0 / 15.0;

Outcome c9() {
    Outcome o;
    const auto at = rotation_sweep(kA, kB, {kC});
    o.check(at.size() == 1 && at[0].status == CircleStatus::circle && within(at[0].rotation, 0.18587, 1e-3),
            "rotation number " + num(at.empty() ? 0.0 : at[0].rotation, 6) + " vs 0.18587 +- 0.001");
    std::vector<double> grid;
    for (int i = 0; i < 200; ++i) grid.push_back(1.12 + 0.024 * i / 199.0);
    const auto rows = rotation_sweep(kA, kB, grid);
    const auto plateaus = find_plateaus(rows);
    for (int q : {5, 6}) {
        bool found = false;
        std::string where = "none";
        for (const auto& p : plateaus)
            if (p.p == 1 && p.q == q && p.count >= 3) {
                found = found || p.newton_verified;
                where = "[" + num(p.c_lo, 6) + ", " + num(p.c_hi, 6) + "] " + std::to_string(p.count) + " points" +
                        (p.newton_verified ? ", Newton-verified" : ", not verified");
            }
        o.check(found, "plateau 1/" + std::to_string(q) + ": " + where);
    }
    return o;
}

Outcome c10() {
    Outcome o;
    for (const auto& c : identity_suite("all", 1000, 1))
        o.check(c.pass(), c.name + " residual " + sci(c.residual) + " at " + std::to_string(c.points) +
                              " points, tolerance " + sci(c.tolerance));
    return o;
}

Outcome c11() {
    Outcome o;
    std::mt19937_64 g(20261016);
    const Lattice lat = fermat_lattice<cplx>();
    auto torus = [&] { return u01(g) * lat.omega1 + u01(g) * lat.omega2; };
    auto cg = [&] { return cplx(u01(g) - 0.5, u01(g) - 0.5); };
    double worst_c = 0.0, worst_tan = 0.0, worst_r = 0.0, worst_3 = 0.0;
    for (int i = 0; i < 1000; ++i) {
        DesbovesParams<cplx> p{cg(), cg(), cg()};
        while (!is_regular_desboves(p.a, p.b, p.c)) p = {cg(), cg(), cg()};
        const PolyMap<cplx> f = desboves_map<cplx>(p);
        const cplx t = torus();
        worst_c = std::max(worst_c, semiconjugacy_residual(f, t, cplx(-2.0, 0.0)));
        worst_tan = std::max(worst_tan, tangent_semiconjugacy_residual(p, TorusPoint{t}));
    }
    const PolyMap<double> fr = desboves_map<double>({-5.0 / 9, 1.0 / 9, 7.0 / 9});
    for (int i = 0; i < 1000; ++i) {
        const double s = u01(g);
        double img = std::fmod(-2.0 * s, 1.0);
        if (img < 0) img += 1.0;
        worst_r = std::max(worst_r, fs_distance(eval_map(fr, real_embed<double>(s)), real_embed<double>(img)));
    }
    const PolyMap<cplx> f3 = degree3_map<cplx>(0.0, eisenstein_gamma<cplx>() / 2.0, -0.5);
    for (int i = 0; i < 1000; ++i) worst_3 = std::max(worst_3, semiconjugacy_residual(f3, torus(), degree3_multiplier()));
    o.check(worst_c < 1e-8, "complex f(u(t)) = u(-2t), worst " + sci(worst_c));
    o.check(worst_tan < 1e-8, "complex tangent semiconjugacy, worst " + sci(worst_tan));
    o.check(worst_r < 1e-8, "real s -> -2s, worst " + sci(worst_r));
    o.check(worst_3 < 1e-8, "degree 3 with multiplier gamma k, worst " + sci(worst_3));
    return o;
}

Outcome c12() {
    Outcome o;
    for (const auto& p : g_pairs)
        o.check(agree_2sigma(p.quad, p.birk),
                p.label + " quadrature " + est_str(p.quad) + " vs Birkhoff " + est_str(p.birk));
    for (const char* b : {"1/3", "1/5"}) {
        const MapSpec s = spec3("-1", b, "1");
        const PolyMap<cplx> f = build_map<cplx>(s);
        const auto model = fermat_curve_model<cplx>();
        const ExponentEstimate u = lyap_complex(f, model, 200000, 5);
        const ExponentEstimate v = lyap_complex(f, model, 200000, 5, Method::torus_quadrature, MetricChoice::fiber_vertical);
        o.check(agree_2sigma(u, v), "(" + s.params_str() + ") complex orthogonal " + est_str(u) + " vs fiber " + est_str(v));
        const ExponentEstimate ur = lyap_real_quadrature(s, 200000, 5);
        const ExponentEstimate vr = lyap_real_quadrature(s, 200000, 5, MetricChoice::fiber_vertical);
        o.check(agree_2sigma(ur, vr), "(" + s.params_str() + ") real orthogonal " + est_str(ur) + " vs fiber " + est_str(vr));
    }
    const MapSpec s = two_thirds_spec(Rational(1, 9));
    const PolyMap<cplx> f = build_map<cplx>(s);
    const double e1 = lyap_complex(f, fermat_curve_model<cplx>(), 100000, 3, Method::birkhoff_orbit).stderr_;
    const double e2 = lyap_complex(f, fermat_curve_model<cplx>(), 1000000, 3, Method::birkhoff_orbit).stderr_;
    const double ratio = e1 / e2 / std::sqrt(10.0);
    o.check(within(ratio, 1.0, 0.2), "Birkhoff stderr 1e5 / 1e6 = " + num(e1 / e2, 3) + ", " + num(ratio, 3) +
                                         " of sqrt(10)");
    return o;
}

Outcome c13() {
    Outcome o;
    const ContractionReport r = contraction_check({0.125, 0.0}, 100000, 13);
    o.check(r.sup_ratio <= 0.5 + 1e-9, "sup r(f)/r over 1e5 points = " + num(r.sup_ratio, 9) + " <= 0.5");
    const TrappingReport a0 = trapping_demo({0.125, 0.0}, 2000, 20000, 13, 20000);
    o.check(a0.to_curve == 2000, "a = 0: " + std::to_string(a0.to_curve) + " of 2000 orbits reach the fixed component");
    const TrappingReport a1 = trapping_demo({0.125, 1.0}, 2000, 20000, 13, 20000);
    o.check(a1.to_curve > 0 && a1.to_origin_fp > 0, "a = 1: curve basin " + std::to_string(a1.to_curve) +
                                                        ", (0:0:1) basin " + std::to_string(a1.to_origin_fp));
    return o;
}

Outcome c14() {
    Outcome o;
    const double alpha = std::sqrt(2.0) - 1;
    double worst = 0.0;
    for (const auto& [c0, c1] : std::vector<std::pair<double, double>>{{2.0, 0.5}, {1.0, 1.0}, {0.3, 1.7}}) {
        const PolyMap<cplx> f = synthetic_ring_map(alpha, 2, Vec3<cplx>{c0, c1, 0.0});
        for (double rho : {0.05, 0.2, 0.7, 1.0, 2.0, 6.0}) {
            const ExponentEstimate e = ring_transverse_exponent(f, rho, 100000);
            worst = std::max(worst, std::abs(e.value - std::log(std::max(c0 * rho, c1))));
        }
    }
    o.check(worst < 1e-3, "closed form log max(|c0| rho, |c1|), worst error " + sci(worst));

    std::vector<double> grid;
    for (int i = 0; i <= 60; ++i) grid.push_back(std::exp(-3.0 + 6.0 * i / 60.0));
    const PolyMap<cplx> ring = synthetic_ring_map(alpha, 2, Vec3<cplx>{1.0, 1.0, 0.0});
    const RingProfile p = ring_profile(ring, grid, 8192);
    o.check(p.convex, "ring profile convex, min second difference " + sci(p.min_second_difference));
    bool jumps_ok = !p.slope_jumps.empty();
    for (std::size_t i = 0; i < p.slope_jumps.size(); ++i) {
        const double canon = p.slope_jumps[i] / (2 * M_PI);
        const bool ok = p.zero_jumps[i] > 0 && std::abs(canon / p.zero_jumps[i] - 1.0) < 0.02;
        jumps_ok = jumps_ok && ok;
        o.detail.push_back("     breakpoint h = " + num(p.breakpoints[i], 4) + ": jump/2pi " + num(canon, 4) +
                           ", zeros " + std::to_string(p.zero_jumps[i]));
    }
    o.check(jumps_ok, "slope jump equals 2 pi times the zero count within 2%");

    // disk variant: base degree 3, r = X^2 - 5/2 XY + Y^2 with zeros at 1/2 and 2
    const auto X = HomogPoly<cplx>::variable(0), Y = HomogPoly<cplx>::variable(1);
    const PolyMap<cplx> disk = synthetic_ring_map(alpha, 3, X * X + X * Y * cplx(-2.5) + Y * Y);
    const RingProfile d = ring_profile(disk, grid, 8192);
    bool law_ok = d.segments.size() == 3;
    for (const auto& s : d.segments) {
        const bool ok = std::abs(s.slope_logr - s.zeros_inside) <= 0.02 * std::max(1, s.zeros_inside);
        law_ok = law_ok && ok;
        o.detail.push_back("     segment h in [" + num(s.h_lo, 3) + ", " + num(s.h_hi, 3) + "]: dLyap/dlog r " +
                           num(s.slope_logr, 4) + ", zeros " + std::to_string(s.zeros_inside));
    }
    o.check(law_ok, "disk variant: dLyap/dlog r equals the zero count within 2%");
    return o;
}

Outcome c15() {
    Outcome o;
    const MapSpec s = spec3("-1", "1/3", "1");
    struct Target {
        Field field;
        double north, line, curve;
    };
    for (const Target& t : {Target{Field::real, 0.66, 0.17, 0.17}, Target{Field::complex, 0.81, 0.13, 0.06}}) {
        const BasinReport r = basin_fractions(make_basin_problem(s, t.field), 2000, 15);
        const double n = r.fraction("point_fixed(north)"), l = r.fraction("line_y0"), c = r.fraction("fermat_curve");
        const double und = r.fraction("undecided");
        std::string counts;
        for (const auto& [k, v] : r.counts) counts += " " + k + "=" + std::to_string(v);
        o.detail.push_back(std::string("     ") + field_name(t.field) + " counts:" + counts);
        o.check(n > 0 && l > 0 && c > 0, std::string(field_name(t.field)) + " all three basins non-empty");
        o.check(within(n, t.north, 0.10) && within(l, t.line, 0.10) && within(c, t.curve, 0.10),
                std::string(field_name(t.field)) + " (" + num(100 * n, 1) + ", " + num(100 * l, 1) + ", " +
                    num(100 * c, 1) + ") vs (" + num(100 * t.north, 0) + ", " + num(100 * t.line, 0) + ", " +
                    num(100 * t.curve, 0) + ") +- 10 points");
        o.check(und < 0.10, std::string(field_name(t.field)) + " undecided " + num(100 * und, 1) + "% < 10%");
    }
    return o;
}

Outcome c16() {
    Outcome o;
    const PersistenceReport r = persistence_probe(kA, kB, kC, 1e-3, 9);
    o.check(r.all_persisted, "circle persists at all 9 offsets in [-1e-3, 1e-3]");
    o.check(r.max_hausdorff < 0.05, "Hausdorff drift " + sci(r.max_hausdorff) + " < 0.05");
    o.check(r.max_drho < 0.01, "rotation drift " + sci(r.max_drho) + " < 0.01");
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"complex curve exponent, two-thirds b = 1/9", c1},
        {"real curve exponent, two-thirds b = 1/9", c2},
        {"(1/3,0,-1/3) exponents and equality with (-2/3,0,2/3)", c3},
        {"(-1/5,7/15,17/15) exponents", c4},
        {"(-1.4,-0.8,1.4) exponents", c5},
        {"(1/3,1,5/3) exponents", c6},
        {"degree-3 exponent at b = gamma/2", c7},
        {"sign thresholds of the two-thirds family", c8},
        {"rotation number and plateaus of the circle pair", c9},
        {"exact identities", c10},
        {"uniformization semiconjugacy", c11},
        {"estimator properties", c12},
        {"Cassini contraction and trapping", c13},
        {"synthetic ring profile", c14},
        {"basin fractions of (-1,1/3,1)", c15},
        {"persistence of the circle pair", c16},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.check(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %2zu %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), secs);
        for (const auto& d : o.detail) std::printf("        %s\n", d.c_str());
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
