#include <cmath>
#include <sstream>

#include "p2dyn/herman.hpp"
#include "test_util.hpp"

using namespace p2dyn;

namespace {

PolyMap<double> rigid_rotation(double alpha) {
    const auto X = HomogPoly<double>::variable(0), Y = HomogPoly<double>::variable(1), Z = HomogPoly<double>::variable(2);
    const double cs = std::cos(2 * M_PI * alpha), sn = std::sin(2 * M_PI * alpha);
    return PolyMap<double>({X * cs - Y * sn, X * sn + Y * cs, Z});
}

constexpr double kA = -0.2, kB = 7.0 / 15.0, kC = 17.0 / 15.0;

}  // namespace

TEST_CASE("rotation number of a rigid rotation, up to orientation") {
    std::mt19937_64 g(79);
    for (int i = 0; i < 20; ++i) {
        const double alpha = 0.01 + 0.98 * uniform01(g);
        std::vector<double> angles;
        for (int k = 0; k < 4000; ++k) angles.push_back(2 * M_PI * alpha * k + 0.4);
        const RotationEstimate r = rotation_number(angles);
        CHECK(std::abs(r.value - std::min(alpha, 1 - alpha)) < 1e-9);
        CHECK(r.error < 1e-9);
    }
    CHECK_ERRC(rotation_number(std::vector<double>(999, 0.0)), Errc::InsufficientData);
}

TEST_CASE("an irrational rigid rotation has an invariant circle with neutral normal direction") {
    const double alpha = (std::sqrt(5.0) - 1) / 2 - 0.5;
    const PolyMap<double> f = rigid_rotation(alpha);
    const CircleProbe pr = probe_circle(f, {0.3, 0.1, 1.0}, 100, 4000);
    REQUIRE(pr.status == CircleStatus::circle);
    CHECK(pr.has_rotation);
    CHECK(pr.model.period_of_cycle == 1);
    CHECK(std::abs(pr.model.rotation_number - alpha) < 1e-8);
    CHECK(pr.model.fit_residual < 1e-8);
    const ExponentEstimate e = circle_transverse_exponent(f, pr.model, 5000);
    CHECK(std::abs(e.value) < 1e-10);
    // a rational rotation ends on a periodic cycle
    const CircleProbe per = probe_circle(rigid_rotation(0.3), {0.3, 0.1, 1.0}, 100, 4000);
    CHECK(per.status == CircleStatus::circle);
    CHECK(per.model.periodic_q == 10);
    CHECK(std::abs(per.model.rotation_number - 0.3) < 1e-9);
}

TEST_CASE("attracting circle pair of the Desboves map (-1/5, 7/15, 17/15)") {
    const PolyMap<double> f = desboves_map<double>({kA, kB, kC});
    const auto rows = rotation_sweep(kA, kB, {kC});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].status == CircleStatus::circle);
    CHECK(std::abs(rows[0].rotation - 0.18587) < 1e-3);
    // a transverse exponent below zero is what makes the circles attracting
    CHECK(rows[0].lyap < 0);
    CHECK(rows[0].lyap > -0.1);
    CHECK_ERRC(find_attracting_circle(f, {1.0, -1.0, 0.0}, 10, 300, fermat_phi<double>()), Errc::Escaped);
    // (1:0:0) is a fixed point, so the orbit never becomes a circle
    CHECK_ERRC(find_attracting_circle(f, {1.0, 0.0, 0.0}, 10, 300, fermat_phi<double>()), Errc::NotACircle);
}

TEST_CASE("plateau detection on synthetic rows") {
    std::vector<RotationRow> rows;
    const double rho[] = {0.19, 0.2, 0.2 + 5e-5, 0.2 - 5e-5, 0.21, 1.0 / 6, 1.0 / 6, 0.17, 0.25, 0.25};
    for (int i = 0; i < 10; ++i) {
        RotationRow r;
        r.c = i;
        r.rotation = rho[i];
        r.status = i == 6 ? CircleStatus::broke_up : CircleStatus::circle;
        rows.push_back(r);
    }
    const auto pl = find_plateaus(rows);
    REQUIRE(pl.size() == 1);
    CHECK(pl[0].p == 1);
    CHECK(pl[0].q == 5);
    CHECK(pl[0].c_lo == 1.0);
    CHECK(pl[0].c_hi == 3.0);
    CHECK(pl[0].count == 3);
    CHECK(find_plateaus(rows, 1e-4, 24, 2).size() == 3);
    std::ostringstream os;
    write_rotation_csv(os, rows);
    CHECK(os.str().rfind("c,rotation,status,fit_residual,lyap,stderr\n", 0) == 0);
}

TEST_CASE("period-5 orbit on the 1/5 plateau is Newton-verified") {
    const auto rows = rotation_sweep(kA, kB, {1.1231});
    REQUIRE(rows.size() == 1);
    CHECK(std::abs(rows[0].rotation - 0.2) < 1e-4);
    CHECK(rows[0].periodic_q == 5);
    CHECK(rows[0].newton_verified);
}

TEST_CASE("synthetic ring: Jensen closed form for the transverse exponent") {
    // r = c0 X + c1 Y: the average of log|c0 X + c1| over |X| = rho is log max(|c0| rho, |c1|)
    const double c0 = 2.0, c1 = 0.5;
    const PolyMap<cplx> f = synthetic_ring_map(std::sqrt(2.0) - 1, 2, Vec3<cplx>{c0, c1, 0.0});
    for (double rho : {0.05, 0.1, 0.2, 0.5, 1.0, 3.0}) {
        const ExponentEstimate e = ring_transverse_exponent(f, rho, 100000);
        CAPTURE(rho);
        CHECK(std::abs(e.value - std::log(std::max(c0 * rho, c1))) < 1e-3);
        CHECK(multiplier_zero_count(f, rho) == (c0 * rho > c1 ? 1 : 0));
    }
}

TEST_CASE("synthetic ring profile is convex with one breakpoint") {
    const double c0 = 1.0, c1 = 1.0;
    const PolyMap<cplx> f = synthetic_ring_map(std::sqrt(2.0) - 1, 2, Vec3<cplx>{c0, c1, 0.0});
    std::vector<double> grid;
    for (int i = 0; i <= 40; ++i) grid.push_back(std::exp(-2.0 + 4.0 * i / 40.0));
    const RingProfile p = ring_profile(f, grid, 8192);
    CHECK(p.convex);
    REQUIRE(p.breakpoints.size() == 1);
    CHECK(std::abs(p.breakpoints[0]) < 0.02);
    CHECK(p.zero_jumps[0] == 1);
    CHECK(std::abs(p.slope_jumps[0] / (2 * M_PI) - 1.0) < 0.02);
    std::ostringstream os;
    write_profile_csv(os, p);
    CHECK(os.str().rfind("rho,h,lyap,stderr\n", 0) == 0);
}

TEST_CASE("Hausdorff distance") {
    std::vector<Vec3<double>> a, b;
    for (int i = 0; i < 100; ++i) {
        const double t = 2 * M_PI * i / 100;
        a.push_back({std::cos(t), std::sin(t), 4.0});
        b.push_back({std::cos(t), std::sin(t), 4.0 + 1e-3});
    }
    CHECK(hausdorff_distance(a, a) == 0.0);
    const double d = hausdorff_distance(a, b);
    CHECK(d > 0);
    CHECK(d < 2e-3);
    CHECK(std::abs(d - hausdorff_distance(b, a)) < 1e-15);
}

TEST_CASE("persistence of the circle pair under a small change of c") {
    SweepOptions opt;
    opt.n_transient = 10000;
    opt.n_collect = 4000;
    const PersistenceReport rep = persistence_probe(kA, kB, kC, 1e-3, 3, opt);
    CHECK(rep.rows.size() == 3);
    CHECK(rep.all_persisted);
    CHECK(rep.max_hausdorff < 0.05);
    CHECK(rep.max_drho < 0.01);
    std::ostringstream os;
    rep.write_json(os);
    CHECK(os.str().find("\"all_persisted\": true") != std::string::npos);
}
