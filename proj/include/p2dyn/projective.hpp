#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "p2dyn/scalar.hpp"

namespace p2dyn {

template <class S> using Vec3 = std::array<S, 3>;
template <class S> using Mat3 = std::array<Vec3<S>, 3>;  // row i = d f_i / d x_j

// -------------------------------------------------------------- vector helpers

// Hermitian <a,b> = sum conj(a_i) b_i.
template <class S> S hdot(const Vec3<S>& a, const Vec3<S>& b) {
    return conj_s(a[0]) * b[0] + conj_s(a[1]) * b[1] + conj_s(a[2]) * b[2];
}

// Bilinear a.b, used for pairing a gradient with a tangent vector.
template <class S> S bdot(const Vec3<S>& a, const Vec3<S>& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

template <class S> real_of<S> norm2(const Vec3<S>& a) {
    return mag2(a[0]) + mag2(a[1]) + mag2(a[2]);
}

template <class S> real_of<S> vnorm(const Vec3<S>& a) {
    using std::sqrt;
    return sqrt(norm2(a));
}

template <class S, class T> Vec3<S> vscale(const Vec3<S>& a, const T& k) {
    return {a[0] * k, a[1] * k, a[2] * k};
}

template <class S> Vec3<S> vsub(const Vec3<S>& a, const Vec3<S>& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

template <class S> Vec3<S> vadd(const Vec3<S>& a, const Vec3<S>& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

template <class S> Vec3<S> cross(const Vec3<S>& a, const Vec3<S>& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

template <class S> Vec3<S> vconj(const Vec3<S>& a) { return {conj_s(a[0]), conj_s(a[1]), conj_s(a[2])}; }

template <class S> Vec3<S> matvec(const Mat3<S>& m, const Vec3<S>& v) {
    return {bdot(m[0], v), bdot(m[1], v), bdot(m[2], v)};
}

template <class S> S det3(const Vec3<S>& a, const Vec3<S>& b, const Vec3<S>& c) { return bdot(a, cross(b, c)); }

template <class T, class S> Vec3<T> vcast(const Vec3<S>& a) {
    Vec3<T> out;
    for (int i = 0; i < 3; ++i) {
        if constexpr (is_complex_v<T>)
            out[i] = from_cplx<T>(to_cplx(a[i]));
        else
            out[i] = real_of<T>(to_double(real_part(a[i])));
    }
    return out;
}

// ------------------------------------------------------------------ ProjPoint

// Unit-norm representative of a point of P^2; no phase is fixed.
template <class S> struct ProjPoint {
    Vec3<S> v{};
    ScalarContext ctx = context_of<S>();

    const S& operator[](int i) const { return v[i]; }
};

template <class S> ProjPoint<S> normalize(const Vec3<S>& raw, const ScalarContext& ctx);
template <class S> ProjPoint<S> normalize(const Vec3<S>& raw) { return normalize(raw, context_of<S>()); }
template <class S> real_of<S> fs_distance(const ProjPoint<S>& p, const ProjPoint<S>& q);
template <class S> bool proj_equal(const ProjPoint<S>& p, const ProjPoint<S>& q, double tol = 1e-9) {
    return fs_distance(p, q) < tol;
}

// Converts between backends; the caller owns the working precision.
template <class T, class S> ProjPoint<T> convert_point(const ProjPoint<S>& p) {
    if constexpr (is_mp_v<T> && std::is_same_v<real_of<S>, double>) {
        Vec3<T> out;
        for (int i = 0; i < 3; ++i) {
            if constexpr (is_complex_v<T>) {
                const cplx z = to_cplx(p.v[i]);
                out[i] = T(mpreal(z.real()), mpreal(z.imag()));
            } else {
                out[i] = mpreal(to_double(real_part(p.v[i])));
            }
        }
        return normalize(out);
    } else {
        return normalize(vcast<T>(p.v));
    }
}

// ------------------------------------------------------------------ HomogPoly

template <class S> struct Term {
    std::array<int, 3> e{};
    S c{};
};

template <class S> class HomogPoly {
public:
    HomogPoly() = default;
    // Merges duplicate exponents and drops exact zeros; every exponent triple
    // must sum to degree.
    HomogPoly(int degree, std::vector<Term<S>> terms);

    static HomogPoly monomial(int e0, int e1, int e2, const S& c);
    static HomogPoly variable(int i) {
        std::array<int, 3> e{0, 0, 0};
        e[i] = 1;
        return monomial(e[0], e[1], e[2], S(1));
    }
    static HomogPoly constant(const S& c) { return monomial(0, 0, 0, c); }

    int degree() const { return degree_; }
    const std::vector<Term<S>>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    S operator()(const Vec3<S>& p) const;
    HomogPoly derivative(int var) const;
    Vec3<S> gradient(const Vec3<S>& p) const;
    real_of<S> coeff_abs_sum() const;
    S coefficient(int e0, int e1, int e2) const;

    HomogPoly operator+(const HomogPoly& o) const;
    HomogPoly operator-(const HomogPoly& o) const;
    HomogPoly operator*(const HomogPoly& o) const;
    HomogPoly operator*(const S& k) const;
    HomogPoly pow(int n) const;

    template <class T, class Conv> HomogPoly<T> cast(Conv conv) const {
        std::vector<Term<T>> t;
        for (const auto& term : terms_) t.push_back({term.e, conv(term.c)});
        return HomogPoly<T>(degree_, std::move(t));
    }

private:
    int degree_ = 0;
    std::vector<Term<S>> terms_;
};

// A form together with its precomputed partial derivatives, for hot loops.
template <class S> class FormWithGradient {
public:
    FormWithGradient() = default;
    explicit FormWithGradient(HomogPoly<S> f) : f_(std::move(f)) {
        for (int i = 0; i < 3; ++i) d_[i] = f_.derivative(i);
        scale_ = f_.coeff_abs_sum();
    }
    const HomogPoly<S>& form() const { return f_; }
    S operator()(const Vec3<S>& v) const { return f_(v); }
    Vec3<S> gradient(const Vec3<S>& v) const { return {d_[0](v), d_[1](v), d_[2](v)}; }
    real_of<S> scale() const { return scale_; }

private:
    HomogPoly<S> f_;
    std::array<HomogPoly<S>, 3> d_;
    real_of<S> scale_{};
};

// -------------------------------------------------------------------- PolyMap

template <class S> struct PolyMap {
    PolyMap() = default;
    // Throws DegreeMismatch unless the three components share one degree.
    PolyMap(std::array<HomogPoly<S>, 3> components, std::string family = "", std::vector<S> params = {});

    int degree() const { return degree_; }
    const std::array<HomogPoly<S>, 3>& components() const { return comp_; }
    const HomogPoly<S>& partial(int i, int j) const { return d_[i][j]; }
    real_of<S> eps_indet() const { return eps_indet_; }

    std::string family;
    std::vector<S> params;
    // Optional hand-written routines; validated against the sparse form.
    std::function<Vec3<S>(const Vec3<S>&)> fast_eval;
    std::function<Mat3<S>(const Vec3<S>&)> fast_jac;

private:
    int degree_ = 0;
    std::array<HomogPoly<S>, 3> comp_;
    std::array<std::array<HomogPoly<S>, 3>, 3> d_;
    real_of<S> eps_indet_{};
};

template <class S> PolyMap<S> identity_map();

// Raw lift F(v) with no normalization and no indeterminacy check.
template <class S> Vec3<S> eval_lift(const PolyMap<S>& f, const Vec3<S>& v);
template <class S> Vec3<S> eval_lift_sparse(const PolyMap<S>& f, const Vec3<S>& v);
// Throws Indeterminate when every |F_i| < eps_indet.
template <class S> ProjPoint<S> eval_map(const PolyMap<S>& f, const ProjPoint<S>& p);
template <class S> bool is_indeterminate_at(const PolyMap<S>& f, const Vec3<S>& lift);

template <class S> Mat3<S> jacobian(const PolyMap<S>& f, const Vec3<S>& v);
template <class S> Mat3<S> jacobian_sparse(const PolyMap<S>& f, const Vec3<S>& v);
template <class S> Mat3<S> jacobian(const PolyMap<S>& f, const ProjPoint<S>& p) { return jacobian(f, p.v); }

#define P2DYN_EXTERN_ALL(macro) \
    macro(double)               \
    macro(cplx)                 \
    macro(mpreal)               \
    macro(mpcomplex)

#define P2DYN_EXTERN_PROJECTIVE(S)                                                        \
    extern template class HomogPoly<S>;                                                   \
    extern template struct PolyMap<S>;                                                    \
    extern template ProjPoint<S> normalize<S>(const Vec3<S>&, const ScalarContext&);      \
    extern template real_of<S> fs_distance<S>(const ProjPoint<S>&, const ProjPoint<S>&); \
    extern template PolyMap<S> identity_map<S>();                                         \
    extern template Vec3<S> eval_lift<S>(const PolyMap<S>&, const Vec3<S>&);             \
    extern template Vec3<S> eval_lift_sparse<S>(const PolyMap<S>&, const Vec3<S>&);      \
    extern template ProjPoint<S> eval_map<S>(const PolyMap<S>&, const ProjPoint<S>&);    \
    extern template bool is_indeterminate_at<S>(const PolyMap<S>&, const Vec3<S>&);      \
    extern template Mat3<S> jacobian<S>(const PolyMap<S>&, const Vec3<S>&);              \
    extern template Mat3<S> jacobian_sparse<S>(const PolyMap<S>&, const Vec3<S>&);

P2DYN_EXTERN_ALL(P2DYN_EXTERN_PROJECTIVE)

}  // namespace p2dyn
