#include "p2dyn/projective.hpp"

#include <algorithm>
#include <map>

namespace p2dyn {

template <class S> ProjPoint<S> normalize(const Vec3<S>& raw, const ScalarContext& ctx) {
    if ((ctx.field == Field::complex) != is_complex_v<S>)
        fail(Errc::ContextMismatch, "scalar field does not match the context");
    using R = real_of<S>;
    // scale by the largest magnitude first so tiny or huge lifts do not
    // underflow when squared
    R big = std::max({mag(raw[0]), mag(raw[1]), mag(raw[2])});
    if (!(big > R(0))) fail(Errc::ZeroVector, "cannot normalize the zero vector");
    Vec3<S> v = vscale(raw, R(1) / big);
    R n = vnorm(v);
    ProjPoint<S> p;
    p.v = vscale(v, R(1) / n);
    p.ctx = ctx;
    return p;
}

template <class S> real_of<S> fs_distance(const ProjPoint<S>& p, const ProjPoint<S>& q) {
    using R = real_of<S>;
    if (!(p.ctx == q.ctx)) fail(Errc::ContextMismatch, "points live in different scalar contexts");
    // arccos loses half the digits near 0; use the sine of the angle there
    R c = mag(hdot(p.v, q.v));
    if (c > R(1)) c = R(1);
    using std::acos;
    using std::asin;
    using std::sqrt;
    if (c < R(0.9)) return acos(c);
    S h = hdot(p.v, q.v);
    Vec3<S> perp = vsub(q.v, vscale(p.v, h));
    R s = vnorm(perp);
    if (s > R(1)) s = R(1);
    return asin(s);
}

// ------------------------------------------------------------------ HomogPoly

template <class S> HomogPoly<S>::HomogPoly(int degree, std::vector<Term<S>> terms) : degree_(degree) {
    if (degree < 0) fail(Errc::DegreeMismatch, "negative degree");
    std::map<std::array<int, 3>, S> acc;
    for (auto& t : terms) {
        if (t.e[0] < 0 || t.e[1] < 0 || t.e[2] < 0 || t.e[0] + t.e[1] + t.e[2] != degree)
            fail(Errc::DegreeMismatch, "exponent triple does not sum to the degree");
        auto it = acc.find(t.e);
        if (it == acc.end())
            acc.emplace(t.e, t.c);
        else
            it->second = it->second + t.c;
    }
    for (auto& [e, c] : acc)
        if (mag(c) != real_of<S>(0)) terms_.push_back({e, c});
}

template <class S> HomogPoly<S> HomogPoly<S>::monomial(int e0, int e1, int e2, const S& c) {
    return HomogPoly(e0 + e1 + e2, {Term<S>{{e0, e1, e2}, c}});
}

template <class S> S HomogPoly<S>::operator()(const Vec3<S>& p) const {
    if (terms_.empty()) return S(0);
    if constexpr (!is_mp_v<S>) {
        if (degree_ <= 16) {
            std::array<std::array<S, 17>, 3> pw;
            for (int i = 0; i < 3; ++i) {
                pw[i][0] = S(1);
                for (int k = 1; k <= degree_; ++k) pw[i][k] = pw[i][k - 1] * p[i];
            }
            S acc(0);
            for (const auto& t : terms_) acc += t.c * pw[0][t.e[0]] * pw[1][t.e[1]] * pw[2][t.e[2]];
            return acc;
        }
    }
    std::array<std::vector<S>, 3> pw;
    for (int i = 0; i < 3; ++i) {
        pw[i].resize(degree_ + 1);
        pw[i][0] = S(1);
        for (int k = 1; k <= degree_; ++k) pw[i][k] = pw[i][k - 1] * p[i];
    }
    S acc(0);
    for (const auto& t : terms_) acc += t.c * pw[0][t.e[0]] * pw[1][t.e[1]] * pw[2][t.e[2]];
    return acc;
}

template <class S> HomogPoly<S> HomogPoly<S>::derivative(int var) const {
    std::vector<Term<S>> out;
    for (const auto& t : terms_) {
        if (t.e[var] == 0) continue;
        Term<S> d = t;
        d.c = t.c * S(real_of<S>(t.e[var]));
        d.e[var] -= 1;
        out.push_back(d);
    }
    return HomogPoly(std::max(0, degree_ - 1), std::move(out));
}

template <class S> Vec3<S> HomogPoly<S>::gradient(const Vec3<S>& p) const {
    return {derivative(0)(p), derivative(1)(p), derivative(2)(p)};
}

template <class S> real_of<S> HomogPoly<S>::coeff_abs_sum() const {
    real_of<S> s(0);
    for (const auto& t : terms_) s += mag(t.c);
    return s;
}

template <class S> S HomogPoly<S>::coefficient(int e0, int e1, int e2) const {
    for (const auto& t : terms_)
        if (t.e == std::array<int, 3>{e0, e1, e2}) return t.c;
    return S(0);
}

template <class S> HomogPoly<S> HomogPoly<S>::operator+(const HomogPoly& o) const {
    if (is_zero()) return o;
    if (o.is_zero()) return *this;
    if (degree_ != o.degree_) fail(Errc::DegreeMismatch, "adding polynomials of different degree");
    std::vector<Term<S>> t = terms_;
    t.insert(t.end(), o.terms_.begin(), o.terms_.end());
    return HomogPoly(degree_, std::move(t));
}

template <class S> HomogPoly<S> HomogPoly<S>::operator-(const HomogPoly& o) const { return *this + o * S(-1); }

template <class S> HomogPoly<S> HomogPoly<S>::operator*(const HomogPoly& o) const {
    std::vector<Term<S>> t;
    for (const auto& a : terms_)
        for (const auto& b : o.terms_)
            t.push_back({{a.e[0] + b.e[0], a.e[1] + b.e[1], a.e[2] + b.e[2]}, a.c * b.c});
    return HomogPoly(degree_ + o.degree_, std::move(t));
}

template <class S> HomogPoly<S> HomogPoly<S>::operator*(const S& k) const {
    std::vector<Term<S>> t = terms_;
    for (auto& term : t) term.c = term.c * k;
    return HomogPoly(degree_, std::move(t));
}

template <class S> HomogPoly<S> HomogPoly<S>::pow(int n) const {
    HomogPoly r = constant(S(1));
    for (int i = 0; i < n; ++i) r = r * *this;
    return r;
}

// -------------------------------------------------------------------- PolyMap

template <class S>
PolyMap<S>::PolyMap(std::array<HomogPoly<S>, 3> components, std::string fam, std::vector<S> prm)
    : family(std::move(fam)), params(std::move(prm)), comp_(std::move(components)) {
    degree_ = comp_[0].degree();
    for (const auto& c : comp_)
        if (c.degree() != degree_) fail(Errc::DegreeMismatch, "map components have different degrees");
    if (degree_ < 1) fail(Errc::DegreeMismatch, "map degree must be at least 1");
    real_of<S> mx(0);
    for (int i = 0; i < 3; ++i) {
        mx = std::max(mx, comp_[i].coeff_abs_sum());
        for (int j = 0; j < 3; ++j) {
            HomogPoly<S> d = comp_[i].derivative(j);
            d_[i][j] = HomogPoly<S>(degree_ - 1, d.terms());
        }
    }
    eps_indet_ = real_of<S>(1e-13) * mx;
}

template <class S> PolyMap<S> identity_map() {
    using H = HomogPoly<S>;
    return PolyMap<S>({H::variable(0), H::variable(1), H::variable(2)}, "identity");
}

template <class S> Vec3<S> eval_lift_sparse(const PolyMap<S>& f, const Vec3<S>& v) {
    const auto& c = f.components();
    return {c[0](v), c[1](v), c[2](v)};
}

template <class S> Vec3<S> eval_lift(const PolyMap<S>& f, const Vec3<S>& v) {
    if (f.fast_eval) return f.fast_eval(v);
    return eval_lift_sparse(f, v);
}

template <class S> bool is_indeterminate_at(const PolyMap<S>& f, const Vec3<S>& lift) {
    const auto e = f.eps_indet();
    return mag(lift[0]) < e && mag(lift[1]) < e && mag(lift[2]) < e;
}

template <class S> ProjPoint<S> eval_map(const PolyMap<S>& f, const ProjPoint<S>& p) {
    Vec3<S> w = eval_lift(f, p.v);
    if (is_indeterminate_at(f, w)) fail(Errc::Indeterminate, "map is indeterminate at the point");
    return normalize(w, p.ctx);
}

template <class S> Mat3<S> jacobian_sparse(const PolyMap<S>& f, const Vec3<S>& v) {
    Mat3<S> m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m[i][j] = f.partial(i, j)(v);
    return m;
}

template <class S> Mat3<S> jacobian(const PolyMap<S>& f, const Vec3<S>& v) {
    if (f.fast_jac) return f.fast_jac(v);
    return jacobian_sparse(f, v);
}

#define P2DYN_INST_PROJECTIVE(S)                                                   \
    template class HomogPoly<S>;                                                   \
    template struct PolyMap<S>;                                                    \
    template ProjPoint<S> normalize<S>(const Vec3<S>&, const ScalarContext&);      \
    template real_of<S> fs_distance<S>(const ProjPoint<S>&, const ProjPoint<S>&); \
    template PolyMap<S> identity_map<S>();                                         \
    template Vec3<S> eval_lift<S>(const PolyMap<S>&, const Vec3<S>&);             \
    template Vec3<S> eval_lift_sparse<S>(const PolyMap<S>&, const Vec3<S>&);      \
    template ProjPoint<S> eval_map<S>(const PolyMap<S>&, const ProjPoint<S>&);    \
    template bool is_indeterminate_at<S>(const PolyMap<S>&, const Vec3<S>&);      \
    template Mat3<S> jacobian<S>(const PolyMap<S>&, const Vec3<S>&);              \
    template Mat3<S> jacobian_sparse<S>(const PolyMap<S>&, const Vec3<S>&);

P2DYN_EXTERN_ALL(P2DYN_INST_PROJECTIVE)

}  // namespace p2dyn
