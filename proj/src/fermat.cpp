#include "p2dyn/fermat.hpp"

#include <cmath>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

namespace p2dyn {

namespace {

template <class C> using RealOf = real_of<C>;

// Laurent coefficients c_k of wp(t) = 1/t^2 + sum_{k>=2} c_k t^{2k-2}.
template <class C> std::vector<C> laurent_coefficients(const C& g2, const C& g3, int kmax) {
    using R = RealOf<C>;
    std::vector<C> c(kmax + 1, C(0));
    if (kmax >= 2) c[2] = g2 / C(R(20));
    if (kmax >= 3) c[3] = g3 / C(R(28));
    for (int k = 4; k <= kmax; ++k) {
        C s(0);
        for (int m = 2; m <= k - 2; ++m) s += c[m] * c[k - m];
        c[k] = s * C(R(3) / R((2 * k + 1) * (k - 3)));
    }
    return c;
}

template <class C> int series_terms() {
    // |t| <= |omega1|/sqrt3 after reduction, so term k shrinks like 3^{-k}
    const int bits = is_mp_v<C> ? working_precision_bits() : 53;
    return static_cast<int>(std::ceil(bits * std::log(2.0) / std::log(3.0))) + 8;
}

}  // namespace

template <class C> LatticeT<C> fermat_lattice() {
    using R = RealOf<C>;
    LatticeT<C> lat;
    R w;
    if constexpr (std::is_same_v<R, double>)
        w = std::pow(std::tgamma(1.0 / 3.0), 3) / (4.0 * pi_r<double>());
    else
        w = pow(boost::math::tgamma(R(1) / R(3)), 3) / (R(4) * pi_r<R>());
    lat.omega1 = C(R(2) * w, R(0));
    lat.omega2 = lat.omega1 * C(R(-1) / R(2), sqrt3_r<R>() / R(2));
    lat.g2 = C(0);
    lat.g3 = C(1);
    return lat;
}

template <class C> C reduce_torus(const C& t, const LatticeT<C>& lat) {
    using R = RealOf<C>;
    using std::floor;
    const R a = lat.omega1.real(), b = lat.omega2.real(), c = lat.omega1.imag(), d = lat.omega2.imag();
    const R det = a * d - b * c;
    const R u = (d * t.real() - b * t.imag()) / det;
    const R v = (-c * t.real() + a * t.imag()) / det;
    const R u0 = floor(u), v0 = floor(v);
    C best = t;
    R best_n = mag2(t);
    for (int i = -1; i <= 2; ++i)
        for (int j = -1; j <= 2; ++j) {
            const C cand = t - lat.omega1 * C(u0 + R(i)) - lat.omega2 * C(v0 + R(j));
            const R n = mag2(cand);
            if (n < best_n) {
                best_n = n;
                best = cand;
            }
        }
    return best;
}

template <class C> std::pair<C, C> weierstrass_scaled(const C& t, const LatticeT<C>& lat) {
    using R = RealOf<C>;
    const int kmax = series_terms<C>() + (mag(lat.g2) == R(0) ? 0 : series_terms<C>());
    const std::vector<C> c = laurent_coefficients(lat.g2, lat.g3, kmax);
    const C t2 = t * t;
    // Horner in t^2 for sum_k c_k t^{2k} and sum_k (2k-2) c_k t^{2k}
    C sa(0), sb(0);
    for (int k = kmax; k >= 2; --k) {
        sa = sa * t2 + c[k];
        sb = sb * t2 + c[k] * C(R(2 * k - 2));
    }
    C tk = t2 * t2;  // t^{2k} at k = 2
    const C A = t + t * tk * sa;
    const C B = C(R(-2)) + tk * sb;
    return {A, B};
}

template <class C> std::pair<C, C> weierstrass(const C& t, const LatticeT<C>& lat) {
    const C r = reduce_torus(t, lat);
    if (mag(r) <= RealOf<C>(unit_eps<C>()) * mag(lat.omega1)) fail(Errc::PoleAtLattice, "wp has a pole at lattice points");
    auto [A, B] = weierstrass_scaled(r, lat);
    const C t3 = r * r * r;
    return {A / t3, B / t3};
}

namespace {

template <class C> const LatticeT<C>& cached_fermat_lattice() {
    static thread_local int cached_bits = -1;
    static thread_local LatticeT<C> lat;
    const int bits = is_mp_v<C> ? working_precision_bits() : 53;
    if (bits != cached_bits) {
        lat = fermat_lattice<C>();
        cached_bits = bits;
    }
    return lat;
}

}  // namespace

template <class C> ProjPoint<C> fermat_embed(const C& t) {
    using R = RealOf<C>;
    const LatticeT<C>& lat = cached_fermat_lattice<C>();
    const C r = reduce_torus(t, lat);
    auto [A, B] = weierstrass_scaled(r, lat);
    const C t3 = r * r * r;
    const C Bs = B / C(sqrt3_r<R>());
    const C half(R(1) / R(2));
    return normalize(Vec3<C>{-A, (t3 + Bs) * half, (t3 - Bs) * half});
}

template <class R> ProjPoint<R> real_embed(const R& s) {
    using C = std::complex<R>;
    using std::floor;
    const R frac = s - floor(s);
    const LatticeT<C>& lat = cached_fermat_lattice<C>();
    const ProjPoint<C> z = fermat_embed<C>(C(frac * lat.omega1.real(), R(0)));
    return normalize(Vec3<R>{z.v[0].real(), z.v[1].real(), z.v[2].real()});
}

template <class C> real_of<C> semiconjugacy_residual(const PolyMap<C>& f, const C& t, const C& mu) {
    return fs_distance(eval_map(f, fermat_embed<C>(t)), fermat_embed<C>(mu * t));
}

double tangent_semiconjugacy_residual(const DesbovesParams<cplx>& params, const TorusPoint& t) {
    return semiconjugacy_residual(desboves_map<cplx>(params), t.t, cplx(-2.0));
}

template <class S>
ProjPoint<S> newton_reproject(const ProjPoint<S>& p, const FormWithGradient<S>& phi, double capture) {
    using R = real_of<S>;
    const double eps = unit_eps<S>();
    const R scale = phi.scale();
    const R target = R(64 * eps) * scale;
    ProjPoint<S> q = p;
    S val = phi(q.v);
    if (mag(val) > R(capture) * scale) fail(Errc::NoConvergence, "point is outside the capture radius of the curve");
    R prev = mag(val);
    for (int it = 0; it < 50; ++it) {
        if (mag(val) <= target) return q;
        const Vec3<S> g = phi.gradient(q.v);
        const R gn = norm2(g);
        if (!(gn > R(0))) fail(Errc::NoConvergence, "gradient vanishes (singular point of the curve)");
        // minimal-norm correction: phi(q + d) ~ phi(q) + g.d = 0
        const Vec3<S> step = vscale(vconj(g), val / S(gn));
        q = normalize(vsub(q.v, step), q.ctx);
        val = phi(q.v);
        const R now = mag(val);
        // rounding floor reached: quadratic convergence has stalled
        if (now >= prev && now <= R(1e6 * eps) * scale) return q;
        prev = now;
    }
    if (mag(val) <= R(1e3 * eps) * scale) return q;
    fail(Errc::NoConvergence, "Newton reprojection did not converge in 50 steps");
}

template <class S> CurveModel<S> fermat_curve_model(cplx multiplier) {
    CurveModel<S> m;
    m.phi = FormWithGradient<S>(fermat_phi<S>());
    m.lattice = fermat_lattice<cplx>();
    m.multiplier = multiplier;
    m.origin = normalize(Vec3<S>{S(0), S(-1), S(1)});
    return m;
}

cplx degree3_multiplier() { return eisenstein_gamma<cplx>() * degree3_default_k<cplx>(); }

#define P2DYN_INST_FERMAT_C(C)                                                              \
    template LatticeT<C> fermat_lattice<C>();                                               \
    template C reduce_torus<C>(const C&, const LatticeT<C>&);                               \
    template std::pair<C, C> weierstrass<C>(const C&, const LatticeT<C>&);                  \
    template std::pair<C, C> weierstrass_scaled<C>(const C&, const LatticeT<C>&);           \
    template ProjPoint<C> fermat_embed<C>(const C&);                                        \
    template real_of<C> semiconjugacy_residual<C>(const PolyMap<C>&, const C&, const C&);

P2DYN_INST_FERMAT_C(cplx)
P2DYN_INST_FERMAT_C(mpcomplex)
template ProjPoint<double> real_embed<double>(const double&);
template ProjPoint<mpreal> real_embed<mpreal>(const mpreal&);

#define P2DYN_INST_FERMAT_S(S)                                                                      \
    template ProjPoint<S> newton_reproject<S>(const ProjPoint<S>&, const FormWithGradient<S>&, double); \
    template CurveModel<S> fermat_curve_model<S>(cplx);

P2DYN_EXTERN_ALL(P2DYN_INST_FERMAT_S)

}  // namespace p2dyn
