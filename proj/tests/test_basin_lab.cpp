#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "p2dyn/basin.hpp"
#include "p2dyn/fermat.hpp"
#include "test_util.hpp"

using namespace p2dyn;

namespace {

std::vector<Vec3<double>> circle_points(double cx, double cy, double r, int n, double phase_step, double e = 0.0) {
    std::vector<Vec3<double>> pts;
    for (int i = 0; i < n; ++i) {
        const double t = 2 * M_PI * std::fmod(i * phase_step, 1.0);
        // a wobbly ellipse is still a closed curve
        const double rr = r * (1 + e * std::cos(3 * t));
        pts.push_back({cx + rr * std::cos(t), cy + 0.6 * rr * std::sin(t), 1.0});
    }
    return pts;
}

MapSpec elementary(const Rational& b) { return desboves_spec(Rational(-1), b, Rational(1)); }

}  // namespace

TEST_CASE("starting directions are uniform on the sphere") {
    double mean_x2 = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const Vec3<cplx> p = sample_start(Field::real, 9, static_cast<std::uint64_t>(i));
        CHECK(p[0].imag() == 0.0);
        mean_x2 += std::norm(p[0]) / norm2(p) / n;
    }
    CHECK(std::abs(mean_x2 - 1.0 / 3.0) < 0.01);
    // reproducible per (seed, index)
    CHECK(sample_start(Field::complex, 4, 17) == sample_start(Field::complex, 4, 17));
    CHECK_FALSE(sample_start(Field::complex, 4, 17) == sample_start(Field::complex, 4, 18));
}

TEST_CASE("closed-curve fit") {
    const auto pts = circle_points(0.3, -0.2, 0.5, 500, 0.6180339887, 0.1);
    const ClosedCurveFit fit = fit_closed_curve(pts);
    CHECK(fit.residual < 1e-6 * fit.mean_radius);
    CHECK(fit.distinct > 400);
    CHECK(circle_tail_period(pts, 1e-2) == 1);
    // two curves visited alternately
    const auto a = circle_points(0.0, 0.0, 0.3, 400, 0.31830988618);
    const auto b = circle_points(3.0, 0.0, 0.3, 400, 0.31830988618);
    std::vector<Vec3<double>> tail;
    for (std::size_t i = 0; i < a.size(); ++i) {
        tail.push_back(a[i]);
        tail.push_back(b[i]);
    }
    CHECK(circle_tail_period(tail, 1e-2) == 2);
    // a filled disk is not a curve
    std::mt19937_64 g(5);
    std::vector<Vec3<double>> blob;
    for (int i = 0; i < 800; ++i) blob.push_back({uniform01(g), uniform01(g), 1.0});
    CHECK(circle_tail_period(blob, 1e-2) == 0);
    CHECK(circle_tail_period(std::vector<Vec3<double>>(pts.begin(), pts.begin() + 50), 1e-2) == 0);
}

TEST_CASE("attracting coordinate points are found") {
    // (-1, 1/3, 1): the problem lists the curve and the attracting coordinate points
    const BasinProblem prob = make_basin_problem(elementary(Rational(1, 3)), Field::real);
    CHECK(prob.curve.degree() == 3);
    for (const auto& a : prob.attractors) {
        const PolyMap<cplx> f = build_map<cplx>(prob.spec);
        const Vec3<cplx> F = eval_lift(f, a.point);
        CHECK(vnorm(cross(F, a.point)) < 1e-12 * vnorm(F));
    }
}

TEST_CASE("orbits near an attracting curve are labeled by it") {
    // the real exponent of (-1, 1/3, 1) is negative, so the real curve attracts
    const BasinProblem prob = make_basin_problem(elementary(Rational(1, 3)), Field::real);
    std::mt19937_64 g(7);
    const HomogPoly<double> phi = fermat_phi<double>();
    for (int i = 0; i < 5; ++i) {
        Vec3<double> p = real_embed<double>(uniform01(g)).v;
        for (auto& c : p) c += 1e-7 * gaussian(g);
        const Classification c = classify_orbit(prob, {p[0], p[1], p[2]});
        CHECK(c.label == BasinLabel::fermat_curve);
        CHECK(c.first_hit >= 0);
        CHECK(label_key(prob, c) == "fermat_curve");
    }
}

TEST_CASE("basin fractions are reproducible and consistent") {
    const BasinProblem prob = make_basin_problem(elementary(Rational(1, 3)), Field::real);
    Thresholds thr;
    thr.budget = 5000;
    const BasinReport r1 = basin_fractions(prob, 300, 11, thr);
    const BasinReport r2 = basin_fractions(prob, 300, 11, thr);
    long total = 0;
    for (const auto& [k, v] : r1.counts) total += v;
    CHECK(total == 300);
    std::ostringstream j1, j2;
    r1.write_json(j1);
    r2.write_json(j2);
    CHECK(j1.str() == j2.str());
    const auto j = nlohmann::json::parse(j1.str());
    CHECK(j["n"] == 300);
    CHECK(j.contains("fractions"));
    // three basins, the attracting coordinate point taking the largest share
    CHECK(r1.counts.size() == 3);
    CHECK(r1.fraction("point_fixed(north)") > r1.fraction("fermat_curve"));
    CHECK(r1.fraction("fermat_curve") > 0.05);
    CHECK(r1.fraction("line_y0") > 0.05);
    const auto w = r1.wilson("fermat_curve");
    CHECK(w[0] <= r1.fraction("fermat_curve"));
    CHECK(w[1] >= r1.fraction("fermat_curve"));
}

TEST_CASE("orbit traces and near-variety fractions") {
    const MapSpec s = elementary(Rational(1, 3));
    const OrbitTrace tr = orbit_trace(build_map<double>(s), fermat_phi<double>(), Vec3<double>{0.3, 0.5, 0.2}, 200);
    CHECK(tr.rows.size() <= 201);
    CHECK(tr.rows.size() > 10);
    std::ostringstream os;
    tr.write_csv(os);
    CHECK(os.str().rfind("iter,x2,y2,z2,absphi\n", 0) == 0);
    for (const auto& r : tr.rows) CHECK(std::abs(r.x2 + r.y2 + r.z2 - 1.0) < 1e-12);
    const double frac = near_variety_fraction(build_map<double>(s), fermat_phi<double>(), Vec3<double>{0.3, 0.5, 0.2}, 200, 1e-3);
    CHECK(frac >= 0.0);
    CHECK(frac <= 1.0);
}

TEST_CASE("basin render is deterministic") {
    const BasinProblem prob = make_basin_problem(elementary(Rational(1, 3)), Field::real);
    RenderView view;
    view.resolution = 24;
    view.budget = 500;
    const Image a = render_basin(prob, view), b = render_basin(prob, view);
    CHECK(a.width == 24);
    CHECK(a.height == 24);
    CHECK(a.rgb.size() == 24u * 24u * 3u);
    CHECK(a.rgb == b.rgb);
    const std::string path = "test_basin_render.ppm";
    a.write_ppm(path);
    std::ifstream is(path, std::ios::binary);
    std::string magic;
    is >> magic;
    CHECK(magic == "P6");
    std::remove(path.c_str());
    CHECK_ERRC(render_basin(make_basin_problem(elementary(Rational(1, 3)), Field::complex), view), Errc::BadParameter);
}
