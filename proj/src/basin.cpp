#include "p2dyn/basin.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "p2dyn/fermat.hpp"
#include "p2dyn/parallel.hpp"

namespace p2dyn {

const char* basin_label_name(BasinLabel l) {
    switch (l) {
    case BasinLabel::fermat_curve: return "fermat_curve";
    case BasinLabel::line_x0: return "line_x0";
    case BasinLabel::line_y0: return "line_y0";
    case BasinLabel::line_z0: return "line_z0";
    case BasinLabel::point_fixed: return "point_fixed";
    case BasinLabel::circle_pair: return "circle_pair";
    case BasinLabel::undecided: return "undecided";
    }
    return "undecided";
}

std::string label_key(const BasinProblem& prob, const Classification& c) {
    if (c.label == BasinLabel::point_fixed && c.point_index >= 0)
        return "point_fixed(" + prob.attractors[c.point_index].name + ")";
    return basin_label_name(c.label);
}

// ------------------------------------------------------------------ problem

namespace {

const char* coordinate_point_name(int j) {
    static const char* names[3] = {"1:0:0", "north", "0:0:1"};
    return names[j];
}

}  // namespace

BasinProblem make_basin_problem(const MapSpec& spec, Field field) {
    BasinProblem prob;
    prob.spec = spec;
    prob.field = field;
    if (spec.family == Family::cassini)
        prob.curve = cassini_phi<cplx>(to_scalar<cplx>(spec.params.at(1)));
    else if (spec.family == Family::quotient_desboves)
        prob.curve = HomogPoly<cplx>::variable(0) + HomogPoly<cplx>::variable(1) + HomogPoly<cplx>::variable(2);
    else
        prob.curve = fermat_phi<cplx>();
    const PolyMap<cplx> f = build_map<cplx>(spec);
    for (int j = 0; j < 3; ++j) {
        Vec3<cplx> e{0.0, 0.0, 0.0};
        e[j] = 1.0;
        const Vec3<cplx> F = eval_lift(f, e);
        const int i1 = (j + 1) % 3, i2 = (j + 2) % 3;
        if (std::abs(F[j]) < 1e-12 || std::abs(F[i1]) > 1e-12 || std::abs(F[i2]) > 1e-12) continue;
        // chart derivative at e_j: d(F_i/F_j)/dx_k = J_ik / F_j for i, k != j
        const Mat3<cplx> J = jacobian(f, e);
        const cplx a = J[i1][i1] / F[j], b = J[i1][i2] / F[j], c = J[i2][i1] / F[j], d = J[i2][i2] / F[j];
        const cplx tr = a + d, disc = std::sqrt((a - d) * (a - d) + 4.0 * b * c);
        const double rho = std::max(std::abs(0.5 * (tr + disc)), std::abs(0.5 * (tr - disc)));
        if (rho < 1.0 - 1e-9) prob.attractors.push_back({coordinate_point_name(j), e});
    }
    return prob;
}

// ----------------------------------------------------------- curve fitting

ClosedCurveFit fit_closed_curve(const std::vector<Vec3<double>>& pts, int harmonics) {
    ClosedCurveFit fit;
    if (pts.size() < static_cast<std::size_t>(2 * harmonics + 2)) fail(Errc::InsufficientData, "too few points to fit");
    Vec3<double> c{0, 0, 0};
    for (const auto& p : pts) {
        const double s = bdot(p, pts.front()) < 0 ? -1.0 : 1.0;
        c = vadd(c, vscale(p, s));
    }
    c = vscale(c, 1.0 / vnorm(c));
    fit.centroid = c;
    // orthonormal frame completing the centroid
    Vec3<double> t{1, 0, 0};
    if (std::abs(c[0]) > 0.6) t = {0, 1, 0};
    fit.e1 = vsub(t, vscale(c, bdot(c, t)));
    fit.e1 = vscale(fit.e1, 1.0 / vnorm(fit.e1));
    fit.e2 = cross(c, fit.e1);
    std::vector<std::array<double, 2>> uv;
    uv.reserve(pts.size());
    for (const auto& p : pts) {
        const double w = bdot(p, c);
        if (std::abs(w) < 1e-3) fail(Errc::NotACircle, "point cloud spans a hemisphere");
        uv.push_back({bdot(p, fit.e1) / w, bdot(p, fit.e2) / w});
    }
    for (const auto& q : uv) {
        fit.cu += q[0];
        fit.cv += q[1];
    }
    fit.cu /= static_cast<double>(uv.size());
    fit.cv /= static_cast<double>(uv.size());
    // whiten so that elongated curves become round and r(theta) stays smooth
    Eigen::Matrix2d C = Eigen::Matrix2d::Zero();
    for (const auto& q : uv) {
        const Eigen::Vector2d d(q[0] - fit.cu, q[1] - fit.cv);
        C += d * d.transpose();
    }
    C /= static_cast<double>(uv.size());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(C);
    const Eigen::Vector2d ev = es.eigenvalues().cwiseMax(1e-300);
    const Eigen::Matrix2d Wt = es.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) fit.whiten[2 * a + b] = Wt(a, b);
    const double chart_scale = std::sqrt(ev.maxCoeff());
    const int m = 2 * harmonics + 1;
    Eigen::MatrixXd A(uv.size(), m);
    Eigen::VectorXd r(uv.size());
    fit.theta.resize(uv.size());
    for (std::size_t i = 0; i < uv.size(); ++i) {
        const Eigen::Vector2d d = Wt * Eigen::Vector2d(uv[i][0] - fit.cu, uv[i][1] - fit.cv);
        const double th = std::atan2(d(1), d(0));
        fit.theta[i] = th;
        r(i) = d.norm();
        A(i, 0) = 1.0;
        for (int k = 1; k <= harmonics; ++k) {
            A(i, 2 * k - 1) = std::cos(k * th);
            A(i, 2 * k) = std::sin(k * th);
        }
    }
    const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(r);
    fit.coeffs.assign(coef.data(), coef.data() + m);
    // both reported in chart units
    fit.mean_radius = r.mean() * chart_scale;
    fit.residual = (A * coef - r).cwiseAbs().maxCoeff() * chart_scale;
    std::vector<std::array<double, 2>> sorted = uv;
    std::sort(sorted.begin(), sorted.end());
    fit.distinct = 1;
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (std::hypot(sorted[i][0] - sorted[i - 1][0], sorted[i][1] - sorted[i - 1][1]) > 1e-7) ++fit.distinct;
    return fit;
}

std::array<double, 2> chart_coords(const ClosedCurveFit& fit, const Vec3<double>& p) {
    const double w = bdot(p, fit.centroid);
    const double du = bdot(p, fit.e1) / w - fit.cu, dv = bdot(p, fit.e2) / w - fit.cv;
    return {fit.whiten[0] * du + fit.whiten[1] * dv, fit.whiten[2] * du + fit.whiten[3] * dv};
}

namespace {

bool is_closed_curve(const std::vector<Vec3<double>>& pts, double fit_tol) {
    try {
        const ClosedCurveFit fit = fit_closed_curve(pts);
        return fit.distinct >= 50 && fit.mean_radius > 1e-7 && fit.residual < fit_tol * fit.mean_radius;
    } catch (const Error&) {
        return false;
    }
}

}  // namespace

int circle_tail_period(const std::vector<Vec3<double>>& tail, double fit_tol) {
    if (tail.size() < 200) return 0;
    // one curve: even and odd iterates lie on the same fit
    if (is_closed_curve(tail, fit_tol)) return 1;
    std::vector<Vec3<double>> even, odd;
    for (std::size_t i = 0; i < tail.size(); ++i) (i % 2 ? odd : even).push_back(tail[i]);
    return is_closed_curve(even, fit_tol) && is_closed_curve(odd, fit_tol) ? 2 : 0;
}

// ----------------------------------------------------------- classification

namespace {

template <class T> void canonicalize(Vec3<T>& v) {
    int k = 0;
    for (int i = 1; i < 3; ++i)
        if (mag(v[i]) > mag(v[k])) k = i;
    if constexpr (is_complex_v<T>) {
        const T ph = conj_s(v[k]) / T(mag(v[k]));
        for (auto& c : v) c *= ph;
    } else {
        if (v[k] < T(0))
            for (auto& c : v) c = -c;
    }
}

struct Observation {
    double absphi, ax, ay, az;
};

template <class T> Observation observe(const HomogPoly<T>& phi, const Vec3<T>& v) {
    return {to_double(mag(phi(v))), to_double(mag(v[0])), to_double(mag(v[1])), to_double(mag(v[2]))};
}

double perp_distance(const Vec3<cplx>& a, const Vec3<cplx>& p) {
    const cplx c = hdot(a, p);
    return vnorm(vsub(p, vscale(a, c)));
}

// Maps built once per problem; the mp pair is built under the escalation
// precision, which the caller holds for the lifetime of this object.
template <class S> struct Prepared {
    using M = std::conditional_t<is_complex_v<S>, mpcomplex, mpreal>;
    const BasinProblem* prob;
    Thresholds thr;
    PolyMap<S> f;
    HomogPoly<S> phi;
    std::unique_ptr<PolyMap<M>> fmp;
    std::unique_ptr<HomogPoly<M>> phimp;

    Prepared(const BasinProblem& p, const Thresholds& t) : prob(&p), thr(t) {
        f = build_map<S>(p.spec);
        phi = p.curve.template cast<S>([](const cplx& c) { return from_cplx<S>(c); });
        if (thr.escalate) {
            fmp = std::make_unique<PolyMap<M>>(build_map<M>(p.spec));
            phimp = std::make_unique<HomogPoly<M>>(p.curve.template cast<M>([](const cplx& c) { return from_cplx<M>(c); }));
        }
    }

    Classification run(Vec3<S> start) const;
};

template <class S> Classification Prepared<S>::run(Vec3<S> start) const {
    using M = typename Prepared<S>::M;
    Classification out;
    const int W = thr.window;
    const std::size_t natt = prob->attractors.size();
    std::vector<int> point_run(natt, 0);
    int curve_run = 0, line_run[3] = {0, 0, 0};
    long composite = 0;
    std::vector<Vec3<double>> tail;
    const bool real = !is_complex_v<S>;
    if (real) tail.reserve(thr.circle_tail);
    std::size_t tail_pos = 0;

    canonicalize(start);
    ProjPoint<S> p = normalize(start);
    ProjPoint<M> q;
    bool high = false;
    long i = 0;
    try {
        for (; i < thr.budget; ++i) {
            Observation ob;
            Vec3<cplx> pc;
            if (!high) {
                p = eval_map(f, p);
                canonicalize(p.v);
                ob = observe(phi, p.v);
                pc = {to_cplx(p.v[0]), to_cplx(p.v[1]), to_cplx(p.v[2])};
                if (thr.escalate && ob.absphi < thr.escalate_below) {
                    q = convert_point<M>(p);
                    high = true;
                    out.escalated = true;
                }
            } else {
                q = eval_map(*fmp, q);
                canonicalize(q.v);
                ob = observe(*phimp, q.v);
                pc = {to_cplx(q.v[0]), to_cplx(q.v[1]), to_cplx(q.v[2])};
                if (ob.absphi > 100 * thr.escalate_below) {
                    p = convert_point<S>(q);
                    high = false;
                }
            }
            if (real) {
                const Vec3<double> pr{pc[0].real(), pc[1].real(), pc[2].real()};
                if (tail.size() < static_cast<std::size_t>(thr.circle_tail))
                    tail.push_back(pr);
                else
                    tail[tail_pos] = pr;
                tail_pos = (tail_pos + 1) % thr.circle_tail;
            }
            const double m = std::min({ob.ax, ob.ay, ob.az, std::cbrt(ob.absphi)});
            if (m < thr.composite_eps) ++composite;

            for (std::size_t a = 0; a < natt; ++a) {
                point_run[a] = perp_distance(prob->attractors[a].point, pc) < thr.point_tol ? point_run[a] + 1 : 0;
                if (point_run[a] >= W) {
                    out.label = BasinLabel::point_fixed;
                    out.point_index = static_cast<int>(a);
                    break;
                }
            }
            if (out.label != BasinLabel::undecided) break;
            curve_run = ob.absphi < thr.curve_tol ? curve_run + 1 : 0;
            if (curve_run >= W) {
                out.label = BasinLabel::fermat_curve;
                break;
            }
            const double coord[3] = {ob.ax, ob.ay, ob.az};
            static const BasinLabel lines[3] = {BasinLabel::line_x0, BasinLabel::line_y0, BasinLabel::line_z0};
            for (int k = 0; k < 3; ++k) {
                line_run[k] = coord[k] < thr.line_tol ? line_run[k] + 1 : 0;
                if (line_run[k] >= W) {
                    out.label = lines[k];
                    break;
                }
            }
            if (out.label != BasinLabel::undecided) break;
            const bool check = (i + 1) % thr.circle_check_every == 0 || i + 1 == thr.budget;
            if (real && check && tail.size() == static_cast<std::size_t>(thr.circle_tail)) {
                std::vector<Vec3<double>> ordered(tail.begin() + tail_pos, tail.end());
                ordered.insert(ordered.end(), tail.begin(), tail.begin() + tail_pos);
                const int period = circle_tail_period(ordered, thr.circle_fit_tol);
                if (period > 0) {
                    out.label = BasinLabel::circle_pair;
                    out.circle_period = period;
                    break;
                }
            }
        }
    } catch (const Error& e) {
        out.diagnostic = e.name();
    }
    out.iterations = std::min(i + 1, thr.budget);
    if (out.label == BasinLabel::circle_pair)
        out.first_hit = out.iterations;
    else if (out.label != BasinLabel::undecided)
        out.first_hit = i + 1 - W;
    out.composite_fraction = static_cast<double>(composite) / static_cast<double>(std::max<long>(1, out.iterations));
    return out;
}

template <class S> Vec3<S> start_vector(const Vec3<cplx>& p0) {
    if constexpr (is_complex_v<S>)
        return p0;
    else
        return {p0[0].real(), p0[1].real(), p0[2].real()};
}

}  // namespace

Classification classify_orbit(const BasinProblem& prob, const Vec3<cplx>& p0, const Thresholds& thr) {
    PrecisionScope scope(thr.escalation_bits);
    if (prob.field == Field::complex) return Prepared<cplx>(prob, thr).run(p0);
    return Prepared<double>(prob, thr).run(start_vector<double>(p0));
}

// ------------------------------------------------------------------ reports

double BasinReport::fraction(const std::string& label) const {
    const auto it = counts.find(label);
    return n > 0 && it != counts.end() ? static_cast<double>(it->second) / static_cast<double>(n) : 0.0;
}

std::array<double, 2> BasinReport::wilson(const std::string& label) const {
    if (n == 0) return {0.0, 1.0};
    const double z = 1.959963984540054, nn = static_cast<double>(n), ph = fraction(label);
    const double den = 1.0 + z * z / nn;
    const double center = (ph + z * z / (2 * nn)) / den;
    const double half = z * std::sqrt(ph * (1 - ph) / nn + z * z / (4 * nn * nn)) / den;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

void BasinReport::write_json(std::ostream& os) const {
    nlohmann::ordered_json j;
    j["family"] = family;
    j["params"] = params;
    j["field"] = field_name(field);
    j["seed"] = seed;
    j["n"] = n;
    j["budget"] = budget;
    j["thresholds"] = {{"curve_tol", thresholds.curve_tol},
                       {"line_tol", thresholds.line_tol},
                       {"point_tol", thresholds.point_tol},
                       {"window", thresholds.window},
                       {"escalate_below", thresholds.escalate ? thresholds.escalate_below : 0.0},
                       {"escalation_bits", thresholds.escalation_bits}};
    nlohmann::ordered_json labels = nlohmann::ordered_json::object(), ci = nlohmann::ordered_json::object(),
                           fr = nlohmann::ordered_json::object();
    for (const auto& [k, v] : counts) {
        labels[k] = v;
        fr[k] = fraction(k);
        const auto w = wilson(k);
        ci[k] = {w[0], w[1]};
    }
    j["labels"] = labels;
    j["fractions"] = fr;
    j["ci"] = ci;
    j["composite_A_fraction"] = composite_fraction;
    os << j.dump(2) << '\n';
}

Vec3<cplx> sample_start(Field field, std::uint64_t seed, std::uint64_t index) {
    auto rng = stream_rng(seed, index);
    Vec3<cplx> v;
    for (auto& c : v) {
        if (field == Field::complex) {
            const double re = gaussian(rng), im = gaussian(rng);
            c = cplx(re, im);
        } else {
            c = cplx(gaussian(rng), 0.0);
        }
    }
    return v;
}

BasinReport basin_fractions(const BasinProblem& prob, long n_samples, std::uint64_t seed, const Thresholds& thr) {
    PrecisionScope scope(thr.escalation_bits);
    std::vector<Classification> res(n_samples);
    if (prob.field == Field::complex) {
        const Prepared<cplx> prep(prob, thr);
        parallel_for(n_samples, [&](std::size_t i) { res[i] = prep.run(sample_start(prob.field, seed, i)); });
    } else {
        const Prepared<double> prep(prob, thr);
        parallel_for(n_samples, [&](std::size_t i) {
            res[i] = prep.run(start_vector<double>(sample_start(prob.field, seed, i)));
        });
    }
    BasinReport rep;
    rep.family = family_name(prob.spec.family);
    rep.params = prob.spec.params_str();
    rep.field = prob.field;
    rep.seed = seed;
    rep.n = n_samples;
    rep.budget = thr.budget;
    rep.thresholds = thr;
    CompensatedSum comp;
    for (const auto& c : res) {
        ++rep.counts[label_key(prob, c)];
        comp.add(c.composite_fraction);
    }
    rep.composite_fraction = n_samples ? comp.value() / static_cast<double>(n_samples) : 0.0;
    return rep;
}

// ------------------------------------------------------------------- traces

void OrbitTrace::write_csv(std::ostream& os) const {
    os << "iter,x2,y2,z2,absphi\n";
    os << std::setprecision(17);
    for (const auto& r : rows) os << r.iter << ',' << r.x2 << ',' << r.y2 << ',' << r.z2 << ',' << r.absphi << '\n';
    if (!terminated.empty()) os << "# terminated: " << terminated << '\n';
}

namespace {

template <class S> OrbitTrace trace_impl(const PolyMap<S>& f, const HomogPoly<S>& phi, const Vec3<S>& p0, long n) {
    OrbitTrace t;
    t.rows.reserve(n + 1);
    ProjPoint<S> p = normalize(p0);
    auto record = [&](long k) {
        t.rows.push_back({k, mag2(p.v[0]), mag2(p.v[1]), mag2(p.v[2]), mag(phi(p.v))});
    };
    record(0);
    try {
        for (long k = 1; k <= n; ++k) {
            p = eval_map(f, p);
            record(k);
        }
    } catch (const Error& e) {
        t.terminated = e.name();
    }
    return t;
}

}  // namespace

OrbitTrace orbit_trace(const PolyMap<cplx>& f, const HomogPoly<cplx>& phi, const Vec3<cplx>& p0, long n) {
    return trace_impl(f, phi, p0, n);
}

OrbitTrace orbit_trace(const PolyMap<double>& f, const HomogPoly<double>& phi, const Vec3<double>& p0, long n) {
    return trace_impl(f, phi, p0, n);
}

template <class S>
double near_variety_fraction(const PolyMap<S>& f, const HomogPoly<S>& phi, const Vec3<S>& p0, long n, double eps) {
    if (n <= 0) fail(Errc::InsufficientData, "need at least one iterate");
    ProjPoint<S> p = normalize(p0);
    long near = 0, k = 0;
    try {
        for (; k < n; ++k) {
            p = eval_map(f, p);
            const Observation ob = observe(phi, p.v);
            if (std::min({ob.ax, ob.ay, ob.az, std::cbrt(ob.absphi)}) < eps) ++near;
        }
    } catch (const Error&) {
        // an orbit that dies in an indeterminacy point counts its prefix only
        if (k == 0) throw;
        return static_cast<double>(near) / static_cast<double>(k);
    }
    return static_cast<double>(near) / static_cast<double>(n);
}

template double near_variety_fraction<double>(const PolyMap<double>&, const HomogPoly<double>&, const Vec3<double>&,
                                              long, double);
template double near_variety_fraction<cplx>(const PolyMap<cplx>&, const HomogPoly<cplx>&, const Vec3<cplx>&, long,
                                            double);

// ------------------------------------------------------------------ render

void Image::write_ppm(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) fail(Errc::IoError, "cannot open " + path);
    os << "P6\n" << width << ' ' << height << "\n255\n";
    os.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
    if (!os) fail(Errc::IoError, "write failed for " + path);
}

namespace {

std::array<int, 3> label_color(BasinLabel l, int point_index) {
    switch (l) {
    case BasinLabel::fermat_curve: return {215, 48, 39};
    case BasinLabel::line_x0: return {26, 152, 80};
    case BasinLabel::line_y0: return {49, 84, 214};
    case BasinLabel::line_z0: return {230, 171, 2};
    case BasinLabel::point_fixed: return point_index == 1 ? std::array<int, 3>{150, 150, 150} : std::array<int, 3>{120, 90, 60};
    case BasinLabel::circle_pair: return {150, 60, 200};
    case BasinLabel::undecided: return {0, 0, 0};
    }
    return {0, 0, 0};
}

}  // namespace

Image render_basin(const BasinProblem& prob, const RenderView& view, const Thresholds& thr_in) {
    if (prob.field != Field::real) fail(Errc::BadParameter, "basin images are drawn for the real projective plane");
    if (view.resolution < 1) fail(Errc::BadParameter, "resolution must be positive");
    Thresholds thr = thr_in;
    thr.budget = view.budget;
    PrecisionScope scope(thr.escalation_bits);
    const Prepared<double> prep(prob, thr);
    const FormWithGradient<double> phi(prep.phi);
    const int R = view.resolution;
    const double overlay = view.curve_overlay > 0 ? view.curve_overlay : 2.0 / R;
    Image img;
    img.width = img.height = R;
    img.rgb.assign(static_cast<std::size_t>(R) * R * 3, 0);
    const double log_budget = std::log1p(static_cast<double>(thr.budget));
    parallel_for(R, [&](std::size_t row) {
        for (int col = 0; col < R; ++col) {
            const double u = (2.0 * col + 1.0) / R - 1.0, v = 1.0 - (2.0 * row + 1.0) / R;
            const double w2 = 1.0 - u * u - v * v;
            if (w2 < 0) continue;
            const Vec3<double> s{u, v, std::sqrt(w2)};
            Vec3<double> p;
            for (int i = 0; i < 3; ++i) p[i] = bdot(view.rotation[i], s);
            std::array<int, 3> rgb;
            const Vec3<double> g = phi.gradient(p);
            if (std::abs(phi(p)) < overlay * std::max(vnorm(g), 1e-300)) {
                rgb = {255, 255, 255};
            } else {
                const Classification c = prep.run(p);
                rgb = label_color(c.label, c.point_index);
                // faster convergence draws brighter
                const double t = c.first_hit >= 0 ? std::log1p(static_cast<double>(c.first_hit)) / log_budget : 1.0;
                const double shade = 1.0 - 0.65 * std::clamp(t, 0.0, 1.0);
                for (auto& ch : rgb) ch = static_cast<int>(std::lround(ch * shade));
            }
            const std::size_t at = (row * R + col) * 3;
            for (int k = 0; k < 3; ++k) img.rgb[at + k] = static_cast<std::uint8_t>(rgb[k]);
        }
    });
    return img;
}

void render_basin(const BasinProblem& prob, const RenderView& view, const std::string& out_path, const Thresholds& thr) {
    render_basin(prob, view, thr).write_ppm(out_path);
}

}  // namespace p2dyn
