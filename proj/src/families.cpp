#include "p2dyn/families.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace p2dyn {

namespace {

template <class S> using H = HomogPoly<S>;

template <class S> H<S> X() { return H<S>::variable(0); }
template <class S> H<S> Y() { return H<S>::variable(1); }
template <class S> H<S> Z() { return H<S>::variable(2); }

}  // namespace

template <class S> HomogPoly<S> fermat_phi() {
    return X<S>().pow(3) + Y<S>().pow(3) + Z<S>().pow(3);
}

template <class S> HomogPoly<S> classical_psi() { return H<S>::monomial(1, 1, 1, S(3)); }

template <class S> PolyMap<S> desboves_map(const DesbovesParams<S>& p) {
    const H<S> phi = fermat_phi<S>();
    const H<S> x3 = X<S>().pow(3), y3 = Y<S>().pow(3), z3 = Z<S>().pow(3);
    PolyMap<S> f({X<S>() * (y3 - z3 + phi * p.a), Y<S>() * (z3 - x3 + phi * p.b), Z<S>() * (x3 - y3 + phi * p.c)},
                 "desboves", {p.a, p.b, p.c});
    const S a = p.a, b = p.b, c = p.c;
    f.fast_eval = [a, b, c](const Vec3<S>& v) -> Vec3<S> {
        const S x3 = v[0] * v[0] * v[0], y3 = v[1] * v[1] * v[1], z3 = v[2] * v[2] * v[2];
        const S phi = x3 + y3 + z3;
        return {v[0] * (y3 - z3 + a * phi), v[1] * (z3 - x3 + b * phi), v[2] * (x3 - y3 + c * phi)};
    };
    f.fast_jac = [a, b, c](const Vec3<S>& v) -> Mat3<S> {
        const S x = v[0], y = v[1], z = v[2];
        const S x2 = x * x, y2 = y * y, z2 = z * z;
        const S x3 = x2 * x, y3 = y2 * y, z3 = z2 * z;
        const S phi = x3 + y3 + z3;
        const S one(1), three(3);
        Mat3<S> m;
        m[0] = {y3 - z3 + a * phi + three * a * x3, three * (one + a) * x * y2, three * (a - one) * x * z2};
        m[1] = {three * (b - one) * x2 * y, z3 - x3 + b * phi + three * b * y3, three * (one + b) * y * z2};
        m[2] = {three * (one + c) * x2 * z, three * (c - one) * y2 * z, x3 - y3 + c * phi + three * c * z3};
        return m;
    };
    return f;
}

template <class S> PolyMap<S> classical_desboves() {
    PolyMap<S> f = desboves_map<S>({S(0), S(0), S(0)});
    f.family = "classical_desboves";
    return f;
}

template <class S> S eisenstein_gamma() {
    using R = real_of<S>;
    if constexpr (is_complex_v<S>)
        return S(R(-1) / R(2), sqrt3_r<R>() / R(2));
    else
        fail(Errc::RealContext, "gamma is not real");
}

template <class S> S degree3_default_k() {
    using R = real_of<S>;
    if constexpr (is_complex_v<S>)
        return S(R(0), sqrt3_r<R>());
    else
        fail(Errc::RealContext, "k is not real");
}

template <class S> PolyMap<S> degree3_map(const S& a, const S& b, const S& c) {
    if constexpr (!is_complex_v<S>) {
        fail(Errc::RealContext, "the degree-3 family needs a complex context");
    } else {
        return degree3_map<S>(a, b, c, degree3_default_k<S>());
    }
}

template <class S> PolyMap<S> degree3_map(const S& a, const S& b, const S& c, const S& k) {
    if constexpr (!is_complex_v<S>) {
        fail(Errc::RealContext, "the degree-3 family needs a complex context");
    } else {
        const S g = eisenstein_gamma<S>();
        const H<S> phi = fermat_phi<S>();
        const H<S> y3 = Y<S>().pow(3), z3 = Z<S>().pow(3);
        return PolyMap<S>({H<S>::monomial(1, 1, 1, k) + phi * a, y3 - z3 * g + phi * b, z3 - y3 * g + phi * c},
                          "degree3", {a, b, c, k});
    }
}

template <class S> HomogPoly<S> cassini_phi(const S& k) {
    if (mag(k) == real_of<S>(0) || mag(k - S(1)) == real_of<S>(0))
        fail(Errc::BadParameter, "Cassini parameter k must avoid 0 and 1");
    const H<S> x2 = X<S>().pow(2), y2 = Y<S>().pow(2), z2 = Z<S>().pow(2);
    return x2 * y2 - (x2 + y2) * z2 + z2 * z2 * k;
}

template <class S> PolyMap<S> cassini_map(const S& a, const S& k) {
    const H<S> phi = cassini_phi<S>(k);
    const H<S> x = X<S>(), y = Y<S>(), z = Z<S>();
    const H<S> x2 = x * x, y2 = y * y, z2 = z * z;
    const H<S> xy = x * y;
    const H<S> cx = xy * (x2 + y2 - z2 * (S(2) * k)) * S(-2);
    const H<S> cy = y2 * y2 - x2 * x2;
    const H<S> cz = xy * (x2 - y2) * S(2) - phi * a;
    PolyMap<S> f({cx, cy, cz}, "cassini", {a, k});
    f.fast_eval = [a, k](const Vec3<S>& v) -> Vec3<S> {
        const S x = v[0], y = v[1], z = v[2];
        const S x2 = x * x, y2 = y * y, z2 = z * z;
        const S two(2);
        const S phi = x2 * y2 - (x2 + y2) * z2 + k * z2 * z2;
        return {-two * x * y * (x2 + y2 - two * k * z2), y2 * y2 - x2 * x2, two * x * y * (x2 - y2) - a * phi};
    };
    return f;
}

template <class S> PolyMap<S> quotient_desboves(const DesbovesParams<S>& p) {
    const H<S> x = X<S>(), y = Y<S>(), z = Z<S>();
    const H<S> phi = x + y + z;
    return PolyMap<S>({x * (y - z + phi * p.a).pow(3), y * (z - x + phi * p.b).pow(3), z * (x - y + phi * p.c).pow(3)},
                      "quotient_desboves", {p.a, p.b, p.c});
}

template <class S> P1<S> lattes_p1_step(const P1<S>& xz) {
    const S x = xz[0], z = xz[1];
    const S x3 = x * x * x, z3 = z * z * z;
    return {x * (-x3 - S(2) * z3), z * (S(2) * x3 + z3)};
}

double lattes_p1_step(double X) {
    if (std::isinf(X)) return std::numeric_limits<double>::infinity();
    P1<double> r = lattes_p1_step<double>({X, 1.0});
    if (r[1] == 0.0) return std::numeric_limits<double>::infinity();
    return r[0] / r[1];
}

PolyMap<cplx> synthetic_ring_map(double alpha, int base_degree, const HomogPoly<cplx>& r) {
    if (base_degree < 1) fail(Errc::DegreeMismatch, "base degree must be positive");
    if (r.degree() != base_degree - 1) fail(Errc::DegreeMismatch, "r must have degree base_degree - 1");
    const cplx rot = std::polar(1.0, 2.0 * pi_r<double>() * alpha);
    const int d = base_degree;
    PolyMap<cplx> f({H<cplx>::monomial(1, d - 1, 0, rot), H<cplx>::monomial(0, d, 0, cplx(1)), Z<cplx>() * r},
                    "synthetic_ring", {cplx(alpha), cplx(d)});
    return f;
}

PolyMap<cplx> synthetic_ring_map(double alpha, int base_degree, const Vec3<cplx>& rc) {
    if (base_degree != 2) fail(Errc::DegreeMismatch, "a coefficient triple describes a linear r (base degree 2)");
    const H<cplx> r = X<cplx>() * rc[0] + Y<cplx>() * rc[1] + Z<cplx>() * rc[2];
    return synthetic_ring_map(alpha, base_degree, r);
}

// ------------------------------------------------------------ symmetric product

Vec3<cplx> symmetric_embed(const P1<cplx>& u, const P1<cplx>& v) {
    return {u[0] * v[0], u[0] * v[1] + u[1] * v[0], u[1] * v[1]};
}

SymmetricProduct::SymmetricProduct(HomogPoly<cplx> p, HomogPoly<cplx> q) : p_(std::move(p)), q_(std::move(q)) {
    if (p_.degree() != q_.degree() || p_.degree() < 1)
        fail(Errc::DegreeMismatch, "p and q must share a positive degree");
    for (const auto* h : {&p_, &q_})
        for (const auto& t : h->terms())
            if (t.e[2] != 0) fail(Errc::DegreeMismatch, "p and q must not involve the third variable");
}

ProjPoint<cplx> SymmetricProduct::operator()(const ProjPoint<cplx>& sp) const {
    const cplx s0 = sp[0], s1 = sp[1], s2 = sp[2];
    // roots of s2 X^2 - s1 X Y + s0 Y^2, written homogeneously to survive s2 = 0
    const cplx disc = std::sqrt(s1 * s1 - 4.0 * s0 * s2);
    const cplx w = std::abs(s1 + disc) >= std::abs(s1 - disc) ? s1 + disc : s1 - disc;
    P1<cplx> r1, r2;
    if (std::abs(w) > 1e-300) {
        r1 = {w, 2.0 * s2};
        r2 = {2.0 * s0, w};
    } else if (std::abs(s2) >= std::abs(s0)) {
        r1 = r2 = {0.0, 1.0};
    } else {
        r1 = r2 = {1.0, 0.0};
    }
    auto unit = [](P1<cplx> r) {
        const double n = std::hypot(std::abs(r[0]), std::abs(r[1]));
        if (!(n > 0)) fail(Errc::DegenerateFiber, "fiber quadratic has no root");
        return P1<cplx>{r[0] / n, r[1] / n};
    };
    r1 = unit(r1);
    r2 = unit(r2);
    auto apply = [this](const P1<cplx>& r) {
        const Vec3<cplx> v{r[0], r[1], 0.0};
        return P1<cplx>{p_(v), q_(v)};
    };
    return normalize(symmetric_embed(apply(r1), apply(r2)), sp.ctx);
}

// ---------------------------------------------------------------- fixed points

bool is_regular_desboves(const cplx& a, const cplx& b, const cplx& c) {
    const double scale = std::max({1.0, std::abs(a), std::abs(b), std::abs(c)});
    for (const cplx& f : {a, b, c, a + b + c, a + 1.0 - b, b + 1.0 - c, c + 1.0 - a})
        if (std::abs(f) < 1e-12 * scale) return false;
    return true;
}

template <class S> S line_restriction_derivative(const PolyMap<S>& f, const Vec3<S>& p, int line) {
    const int j = (line + 1) % 3, k = (line + 2) % 3;
    const int den = mag(p[j]) >= mag(p[k]) ? j : k;
    const int num = den == j ? k : j;
    Vec3<S> v = vscale(p, S(1) / p[den]);
    v[line] = S(0);
    const Vec3<S> F = eval_lift(f, v);
    const Mat3<S> J = jacobian(f, v);
    return (J[num][num] * F[den] - F[num] * J[den][num]) / (F[den] * F[den]);
}

FixedPointSet fermat_fixed_points(const cplx& a, const cplx& b, const cplx& c) {
    FixedPointSet out;
    const PolyMap<cplx> f = desboves_map<cplx>({a, b, c});
    out.degenerate_line = std::abs(c - (b + 1.0)) < 1e-12 * std::max(1.0, std::abs(c));
    const double pi = pi_r<double>();
    // cube roots of -1
    const std::array<cplx, 3> m1{cplx(-1.0), std::polar(1.0, pi / 3), std::polar(1.0, -pi / 3)};
    auto report = [&](Vec3<cplx> v, bool on_curve, int line, cplx closed) {
        FixedPointReport r;
        r.point = normalize(v);
        r.on_fermat = on_curve;
        r.line = line;
        r.transverse_derivative = closed;
        if (line >= 0) r.numeric_derivative = line_restriction_derivative(f, r.point.v, line);
        return r;
    };
    for (const cplx& w : m1) out.on_curve.push_back(report({0.0, w, 1.0}, true, 0, 3.0 * (c - b) - 2.0));
    for (const cplx& w : m1) out.on_curve.push_back(report({w, 0.0, 1.0}, true, 1, 3.0 * (a - c) - 2.0));
    for (const cplx& w : m1) out.on_curve.push_back(report({1.0, w, 0.0}, true, 2, 3.0 * (b - a) - 2.0));

    out.others.push_back(report({0.0, 0.0, 1.0}, false, 0, (b + 1.0) / c));
    out.others.push_back(report({0.0, 1.0, 0.0}, false, 0, (c - 1.0) / b));
    out.others.push_back(report({1.0, 0.0, 0.0}, false, 1, (c + 1.0) / a));

    // Off the coordinate lines the fixed-point equations are linear in the
    // cubes (xi, eta, zeta): both differences of the three brackets vanish.
    const Vec3<cplx> r1{1.0 + a - b, 1.0 + a - b, -2.0 + a - b};
    const Vec3<cplx> r2{-2.0 + b - c, 1.0 + b - c, 1.0 + b - c};
    const Vec3<cplx> cubes = cross(r1, r2);
    const double cn = vnorm(cubes);
    if (cn > 0 && std::abs(cubes[0]) > 1e-12 * cn && std::abs(cubes[1]) > 1e-12 * cn && std::abs(cubes[2]) > 1e-12 * cn) {
        auto cbrt_c = [](cplx z) { return std::polar(std::cbrt(std::abs(z)), std::arg(z) / 3.0); };
        const cplx x = cbrt_c(cubes[0]), y = cbrt_c(cubes[1]), z = cbrt_c(cubes[2]);
        const cplx om = std::polar(1.0, 2.0 * pi / 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                out.others.push_back(report({x, y * std::pow(om, i), z * std::pow(om, j)}, false, -1, cplx(NAN, NAN)));
    }
    return out;
}

int permutation_sign(const std::array<int, 3>& s) {
    std::array<int, 3> sorted = s;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != std::array<int, 3>{0, 1, 2}) fail(Errc::BadParameter, "not a permutation of {0,1,2}");
    int inv = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (s[i] > s[j]) ++inv;
    return inv % 2 ? -1 : 1;
}

double chordal_distance(const cplx& z, const cplx& w) {
    return std::abs(z - w) / (std::sqrt(1.0 + std::norm(z)) * std::sqrt(1.0 + std::norm(w)));
}

template <class S>
double first_integral_residual(const PolyMap<S>& f, const HomogPoly<S>& phi, const HomogPoly<S>& psi,
                               const ProjPoint<S>& p) {
    const ProjPoint<S> q = eval_map(f, p);
    const real_of<S> tol = real_of<S>(1e-14) * psi.coeff_abs_sum();
    const S psi_p = psi(p.v), psi_q = psi(q.v);
    if (mag(psi_p) <= tol || mag(psi_q) <= tol) fail(Errc::PoleAtPoint, "Psi vanishes at the point or its image");
    return chordal_distance(to_cplx(S(phi(p.v) / psi_p)), to_cplx(S(phi(q.v) / psi_q)));
}

std::vector<ProjPoint<cplx>> classical_indeterminacy_points() {
    std::vector<ProjPoint<cplx>> pts;
    pts.push_back(normalize<cplx>({1.0, 0.0, 0.0}));
    pts.push_back(normalize<cplx>({0.0, 1.0, 0.0}));
    pts.push_back(normalize<cplx>({0.0, 0.0, 1.0}));
    const cplx om = std::polar(1.0, 2.0 * pi_r<double>() / 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) pts.push_back(normalize<cplx>({1.0, std::pow(om, i), std::pow(om, j)}));
    return pts;
}

// --------------------------------------------------------------------- specs

const char* family_name(Family f) {
    switch (f) {
    case Family::desboves: return "desboves";
    case Family::classical_desboves: return "classical_desboves";
    case Family::degree3: return "degree3";
    case Family::cassini: return "cassini";
    case Family::quotient_desboves: return "quotient_desboves";
    case Family::synthetic_ring: return "synthetic_ring";
    }
    return "unknown";
}

Family parse_family(const std::string& s) {
    for (Family f : {Family::desboves, Family::classical_desboves, Family::degree3, Family::cassini,
                     Family::quotient_desboves, Family::synthetic_ring})
        if (s == family_name(f)) return f;
    fail(Errc::BadParameter, "unknown family '" + s + "'");
}

std::string MapSpec::params_str() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < params.size(); ++i) os << (i ? "," : "") << params[i].str();
    return os.str();
}

MapSpec desboves_spec(const Rational& a, const Rational& b, const Rational& c) {
    return MapSpec{Family::desboves, {exact_from(a), exact_from(b), exact_from(c)}};
}

MapSpec two_thirds_spec(const Rational& b) {
    return desboves_spec(b - Rational(2, 3), b, b + Rational(2, 3));
}

template <class S> PolyMap<S> build_map(const MapSpec& spec) {
    auto need = [&](std::size_t lo, std::size_t hi) {
        if (spec.params.size() < lo || spec.params.size() > hi)
            fail(Errc::BadParameter, std::string("wrong parameter count for ") + family_name(spec.family));
    };
    auto P = [&](std::size_t i) { return to_scalar<S>(spec.params[i]); };
    switch (spec.family) {
    case Family::desboves: need(3, 3); return desboves_map<S>({P(0), P(1), P(2)});
    case Family::classical_desboves: need(0, 0); return classical_desboves<S>();
    case Family::degree3:
        need(3, 4);
        if (spec.params.size() == 4) return degree3_map<S>(P(0), P(1), P(2), P(3));
        return degree3_map<S>(P(0), P(1), P(2));
    case Family::cassini: need(2, 2); return cassini_map<S>(P(0), P(1));
    case Family::quotient_desboves: need(3, 3); return quotient_desboves<S>({P(0), P(1), P(2)});
    case Family::synthetic_ring:
        need(3, 3);
        if constexpr (std::is_same_v<S, cplx>)
            return synthetic_ring_map(spec.alpha, spec.base_degree, Vec3<cplx>{P(0), P(1), P(2)});
        else
            fail(Errc::BadParameter, "synthetic_ring is available in double-precision complex only");
    }
    fail(Errc::BadParameter, "unknown family");
}

#define P2DYN_INST_FAMILIES(S)                                                                             \
    template HomogPoly<S> fermat_phi<S>();                                                                 \
    template HomogPoly<S> classical_psi<S>();                                                              \
    template PolyMap<S> desboves_map<S>(const DesbovesParams<S>&);                                         \
    template PolyMap<S> classical_desboves<S>();                                                           \
    template PolyMap<S> degree3_map<S>(const S&, const S&, const S&);                                      \
    template PolyMap<S> degree3_map<S>(const S&, const S&, const S&, const S&);                            \
    template HomogPoly<S> cassini_phi<S>(const S&);                                                        \
    template PolyMap<S> cassini_map<S>(const S&, const S&);                                                \
    template PolyMap<S> quotient_desboves<S>(const DesbovesParams<S>&);                                    \
    template P1<S> lattes_p1_step<S>(const P1<S>&);                                                        \
    template S line_restriction_derivative<S>(const PolyMap<S>&, const Vec3<S>&, int);                     \
    template double first_integral_residual<S>(const PolyMap<S>&, const HomogPoly<S>&, const HomogPoly<S>&, \
                                               const ProjPoint<S>&);                                       \
    template PolyMap<S> build_map<S>(const MapSpec&);

P2DYN_EXTERN_ALL(P2DYN_INST_FAMILIES)
template cplx eisenstein_gamma<cplx>();
template mpcomplex eisenstein_gamma<mpcomplex>();
template cplx degree3_default_k<cplx>();
template mpcomplex degree3_default_k<mpcomplex>();

}  // namespace p2dyn
