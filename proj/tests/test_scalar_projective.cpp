#include <cmath>

#include "p2dyn/families.hpp"
#include "p2dyn/projective.hpp"
#include "test_util.hpp"

using namespace p2dyn;
using testutil::crandom;
using testutil::rrandom;

TEST_CASE("exact parameters parse without rounding") {
    CHECK(parse_exact("-5/9") == exact_from(Rational(-5, 9)));
    CHECK(parse_exact("0.4666") == exact_from(Rational(4666, 10000)));
    CHECK(parse_exact("1e-3") == exact_from(Rational(1, 1000)));
    const Exact g2 = parse_exact("g/2");
    CHECK(g2.re == Rational(-1, 4));
    CHECK(g2.s3 == Rational(1, 4));
    CHECK(parse_exact("1+2g") == exact_from(Rational(1)) + exact_gamma().scaled(Rational(2)));
    CHECK(parse_exact("3i").im == Rational(3));
    CHECK(parse_exact_list("-5/9,1/9,7/9").size() == 3);
    CHECK_ERRC(parse_exact(""), Errc::BadParameter);
    CHECK_ERRC(parse_exact("1/0"), Errc::BadParameter);
    CHECK_ERRC(parse_exact("abc"), Errc::BadParameter);
    CHECK_ERRC(to_scalar<double>(parse_exact("i")), Errc::RealContext);
}

TEST_CASE("gamma is a primitive cube root of unity") {
    const cplx g = to_scalar<cplx>(exact_gamma());
    CHECK(std::abs(g * g * g - 1.0) < 1e-15);
    CHECK(std::abs(g * g + g + 1.0) < 1e-15);
}

TEST_CASE("normalize gives unit representatives and rejects zero") {
    std::mt19937_64 g(3);
    for (int i = 0; i < 100; ++i) {
        const auto p = normalize(crandom(g));
        CHECK(std::abs(vnorm(p.v) - 1.0) < 1e-15);
    }
    CHECK_ERRC(normalize(Vec3<cplx>{0.0, 0.0, 0.0}), Errc::ZeroVector);
    // huge and tiny lifts survive the squaring
    const auto big = normalize(Vec3<double>{1e300, 1e300, 0.0});
    CHECK(std::abs(big[0] - std::sqrt(0.5)) < 1e-15);
    const auto tiny = normalize(Vec3<double>{1e-300, 0.0, 1e-300});
    CHECK(std::abs(tiny[2] - std::sqrt(0.5)) < 1e-15);
}

TEST_CASE("Fubini-Study distance is a projective metric") {
    std::mt19937_64 g(5);
    for (int i = 0; i < 200; ++i) {
        const Vec3<cplx> a = crandom(g), b = crandom(g), c = crandom(g);
        const auto p = normalize(a), q = normalize(b), r = normalize(c);
        const cplx lambda = testutil::cgauss(g);
        CHECK(fs_distance(p, normalize(vscale(a, lambda))) < 1e-7);
        CHECK(std::abs(fs_distance(p, q) - fs_distance(q, p)) < 1e-14);
        CHECK(fs_distance(p, r) <= fs_distance(p, q) + fs_distance(q, r) + 1e-12);
        CHECK(fs_distance(p, q) <= M_PI / 2 + 1e-12);
    }
    // orthogonal lines are at distance pi/2
    CHECK(std::abs(fs_distance(normalize(Vec3<double>{1, 0, 0}), normalize(Vec3<double>{0, 1, 0})) - M_PI / 2) < 1e-15);
    // small angles keep full relative accuracy
    const double eps = 1e-12;
    const double d = fs_distance(normalize(Vec3<double>{1, 0, 0}), normalize(Vec3<double>{1, eps, 0}));
    CHECK(std::abs(d / eps - 1.0) < 1e-6);
}

TEST_CASE("points in different contexts do not mix") {
    PrecisionScope scope(128);
    const auto p = normalize(Vec3<double>{1, 2, 3});
    auto q = p;
    q.ctx.precision_bits = 128;
    CHECK_ERRC(fs_distance(p, q), Errc::ContextMismatch);
    CHECK_ERRC(normalize(Vec3<double>{1, 0, 0}, ScalarContext{Field::complex, 53}), Errc::ContextMismatch);
}

TEST_CASE("homogeneous polynomials satisfy the Euler relation") {
    std::mt19937_64 g(7);
    const auto X = HomogPoly<cplx>::variable(0), Y = HomogPoly<cplx>::variable(1), Z = HomogPoly<cplx>::variable(2);
    const HomogPoly<cplx> h = X * X * Y * cplx(2, 1) + Z.pow(3) - X * Y * Z * cplx(0, 3);
    CHECK(h.degree() == 3);
    CHECK(h.coefficient(2, 1, 0) == cplx(2, 1));
    for (int i = 0; i < 50; ++i) {
        const Vec3<cplx> v = crandom(g);
        const Vec3<cplx> grad = h.gradient(v);
        CHECK(std::abs(bdot(grad, v) - 3.0 * h(v)) < 1e-12 * (1 + std::abs(h(v))) * 10);
        // scaling law h(t v) = t^3 h(v)
        const cplx t = testutil::cgauss(g);
        CHECK(std::abs(h(vscale(v, t)) - t * t * t * h(v)) < 1e-10 * (1 + std::abs(t * t * t * h(v))));
    }
    CHECK_ERRC((X + X * Y), Errc::DegreeMismatch);
}

TEST_CASE("PolyMap evaluation and Jacobian") {
    const PolyMap<cplx> f = classical_desboves<cplx>();
    CHECK(f.degree() == 4);
    // (1:2:3) -> (1(8-27) : 2(27-1) : 3(1-8))
    const Vec3<cplx> F = eval_lift(f, Vec3<cplx>{1.0, 2.0, 3.0});
    CHECK(std::abs(F[0] + 19.0) < 1e-12);
    CHECK(std::abs(F[1] - 52.0) < 1e-12);
    CHECK(std::abs(F[2] + 21.0) < 1e-12);
    CHECK_ERRC(eval_map(f, normalize(Vec3<cplx>{1.0, 0.0, 0.0})), Errc::Indeterminate);

    std::mt19937_64 g(11);
    const auto X = HomogPoly<cplx>::variable(0);
    CHECK_ERRC((PolyMap<cplx>({X, X * X, X})), Errc::DegreeMismatch);

    // Jacobian against central differences, and fast paths against the sparse form
    const PolyMap<cplx> d = desboves_map<cplx>({cplx(-5.0 / 9), cplx(1.0 / 9), cplx(7.0 / 9)});
    for (int i = 0; i < 20; ++i) {
        const Vec3<cplx> v = crandom(g);
        const Mat3<cplx> J = jacobian(d, v);
        const double h = 1e-6;
        for (int j = 0; j < 3; ++j) {
            Vec3<cplx> vp = v, vm = v;
            vp[j] += h;
            vm[j] -= h;
            const Vec3<cplx> fp = eval_lift(d, vp), fm = eval_lift(d, vm);
            for (int r = 0; r < 3; ++r) {
                const cplx fd = (fp[r] - fm[r]) / (2 * h);
                CHECK(std::abs(fd - J[r][j]) < 1e-6 * (1 + std::abs(J[r][j])));
            }
        }
        CHECK(vnorm(vsub(eval_lift(d, v), eval_lift_sparse(d, v))) < 1e-12 * vnorm(eval_lift(d, v)));
        const Mat3<cplx> Js = jacobian_sparse(d, v);
        for (int r = 0; r < 3; ++r) CHECK(vnorm(vsub(J[r], Js[r])) < 1e-12 * (1 + vnorm(J[r])));
    }
}

TEST_CASE("multiprecision backend follows the working precision") {
    PrecisionScope scope(256);
    CHECK(working_precision_bits() == 256);
    const mpreal two(2);
    const mpreal r = sqrt(two);
    const mpreal err = abs(r * r - two);
    CHECK(err < mpreal(std::ldexp(1.0, -250)));
    const auto p = normalize(Vec3<mpreal>{mpreal(1), mpreal(2), mpreal(2)});
    CHECK(p.ctx.precision_bits == 256);
    CHECK(abs(p[0] - mpreal(1) / mpreal(3)) < mpreal(std::ldexp(1.0, -250)));
}

TEST_CASE("backend conversion round-trips at double accuracy") {
    PrecisionScope scope(128);
    std::mt19937_64 g(13);
    for (int i = 0; i < 20; ++i) {
        const auto p = normalize(crandom(g));
        const auto q = convert_point<mpcomplex>(p);
        const auto back = convert_point<cplx>(q);
        CHECK(fs_distance(p, back) < 1e-7);
    }
    const auto pr = normalize(rrandom(g));
    CHECK(fs_distance(pr, convert_point<double>(convert_point<mpreal>(pr))) < 1e-7);
}
