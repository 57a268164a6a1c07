#include "p2dyn/herman.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "p2dyn/errors.hpp"
#include "p2dyn/parallel.hpp"

namespace p2dyn {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Unit vector with the largest coordinate positive, so p and -p agree.
Vec3<double> canonical(const Vec3<double>& v) {
    const double n = vnorm(v);
    if (!(n > 0.0) || !std::isfinite(n)) fail(Errc::Indeterminate, "orbit hit an indeterminacy point");
    int imax = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
    return vscale(v, (v[imax] < 0 ? -1.0 : 1.0) / n);
}

Vec3<double> step(const PolyMap<double>& f, const Vec3<double>& p) {
    const Vec3<double> F = eval_lift(f, p);
    if (is_indeterminate_at(f, F)) fail(Errc::Indeterminate, "orbit hit an indeterminacy point");
    return canonical(F);
}

double fs(const Vec3<double>& a, const Vec3<double>& b) {
    return fs_distance(normalize(a), normalize(b));
}

double wrap_angle(double d) {
    d = std::fmod(d, kTwoPi);
    if (d > kTwoPi / 2) d -= kTwoPi;
    if (d <= -kTwoPi / 2) d += kTwoPi;
    return d;
}

// exp(-1/(t(1-t))) weighted mean of x[0..n), t at cell midpoints.
double weighted_mean(const std::vector<double>& x, std::size_t n) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
        const double w = std::exp(-1.0 / (t * (1.0 - t)));
        num += w * x[k];
        den += w;
    }
    return num / den;
}

double mod1(double x) {
    x -= std::floor(x);
    return x >= 1.0 ? 0.0 : x;
}

// Smallest q <= max_q with |rho - p/q| < tol, or q = 0.
std::array<int, 2> nearby_rational(double rho, double tol, int max_q) {
    for (int q = 1; q <= max_q; ++q) {
        const int p = static_cast<int>(std::lround(rho * q));
        if (std::abs(rho - static_cast<double>(p) / q) < tol) return {p, q};
    }
    return {0, 0};
}

struct CurveParamFit {
    std::vector<std::size_t> order;  // indices sorted by circle parameter
    double residual = 0.0;           // chart units
};

// An orbit on an invariant circle with rotation number rho is ordered on the
// circle like k*rho mod 1.  Fits both whitened chart coordinates as
// trigonometric polynomials of that parameter; a cloud that is not a curve, or
// is not traversed like a rotation, leaves a large residual.  Needs no
// star-shapedness.
CurveParamFit parametric_fit(const ClosedCurveFit& fit, const std::vector<Vec3<double>>& g, double rho,
                             int harmonics = 24) {
    CurveParamFit out;
    const std::size_t n = g.size();
    std::vector<double> phase(n);
    for (std::size_t k = 0; k < n; ++k) phase[k] = mod1(static_cast<double>(k) * rho);
    const int m = 2 * harmonics + 1;
    Eigen::MatrixXd A(n, m);
    Eigen::MatrixXd U(n, 2);
    double rsum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto u = chart_coords(fit, g[k]);
        U(k, 0) = u[0];
        U(k, 1) = u[1];
        rsum += std::hypot(u[0], u[1]);
        A(k, 0) = 1.0;
        for (int h = 1; h <= harmonics; ++h) {
            A(k, 2 * h - 1) = std::cos(kTwoPi * h * phase[k]);
            A(k, 2 * h) = std::sin(kTwoPi * h * phase[k]);
        }
    }
    const Eigen::MatrixXd C = A.colPivHouseholderQr().solve(U);
    const Eigen::MatrixXd R = A * C - U;
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k) worst = std::max(worst, R.row(k).norm());
    // whitened units back to chart units through the mean radius
    out.residual = worst * fit.mean_radius / (rsum / static_cast<double>(n));
    out.order.resize(n);
    for (std::size_t k = 0; k < n; ++k) out.order[k] = k;
    std::sort(out.order.begin(), out.order.end(), [&](std::size_t a, std::size_t b) { return phase[a] < phase[b]; });
    return out;
}

}  // namespace

// ----------------------------------------------------------------- rotation

RotationEstimate rotation_number(const std::vector<double>& angles) {
    if (angles.size() < 1000) fail(Errc::InsufficientData, "rotation number needs at least 1000 angles");
    std::vector<double> d(angles.size() - 1);
    for (std::size_t k = 0; k + 1 < angles.size(); ++k) d[k] = wrap_angle(angles[k + 1] - angles[k]);
    if (d.front() < 0)
        for (double& x : d) x = -x;
    const std::size_t n = d.size();
    const double r1 = weighted_mean(d, n) / kTwoPi;
    const double r2 = weighted_mean(d, n / 2) / kTwoPi;
    const double r4 = weighted_mean(d, n / 4) / kTwoPi;
    RotationEstimate out;
    out.value = mod1(r1);
    out.error = std::max(std::abs(r1 - r2), std::abs(r2 - r4));
    return out;
}

const char* circle_status_name(CircleStatus s) {
    switch (s) {
        case CircleStatus::circle: return "circle";
        case CircleStatus::shrunk_to_point: return "shrunk_to_point";
        case CircleStatus::broke_up: return "broke_up";
        case CircleStatus::escaped: return "escaped";
    }
    return "?";
}

// ------------------------------------------------------------ circle finding

CircleProbe probe_circle(const PolyMap<double>& f, const Vec3<double>& seed, long n_transient, long n_collect,
                         const HomogPoly<double>& curve, double fit_tol) {
    CircleProbe out;
    const double cscale = curve.is_zero() ? 1.0 : curve.coeff_abs_sum();
    auto on_curve = [&](const Vec3<double>& p) { return !curve.is_zero() && std::abs(curve(p)) < 1e-12 * cscale; };
    std::vector<Vec3<double>> tail;
    try {
        Vec3<double> p = canonical(seed);
        for (long i = 0; i < n_transient; ++i) {
            p = step(f, p);
            if (on_curve(p)) {
                out.detail = "orbit converged to the invariant curve";
                return out;
            }
        }
        tail.reserve(static_cast<std::size_t>(n_collect));
        for (long i = 0; i < n_collect; ++i) {
            p = step(f, p);
            tail.push_back(p);
        }
        if (on_curve(p)) {
            out.detail = "orbit converged to the invariant curve";
            return out;
        }
    } catch (const Error& e) {
        out.detail = e.name();
        return out;
    }
    if (tail.size() < 200) fail(Errc::InsufficientData, "n_collect too small");

    // 2-means on the tail: f swaps two clusters when the even and odd centroids
    // are further apart than the clusters are wide.  One curve sampled twice
    // gives centroids that differ only by the sampling error.
    int period = 1;
    {
        std::vector<Vec3<double>> even, odd;
        for (std::size_t i = 0; i < tail.size(); ++i) (i % 2 ? odd : even).push_back(tail[i]);
        auto spread = [](const std::vector<Vec3<double>>& pts, const Vec3<double>& c) {
            double r = 0.0;
            for (const auto& p : pts) r = std::max(r, fs(c, p));
            return r;
        };
        try {
            const ClosedCurveFit fe = fit_closed_curve(even, 1), fo = fit_closed_curve(odd, 1);
            const double d = fs(fe.centroid, fo.centroid);
            if (d > 1e-6 && d > 0.5 * (spread(even, fe.centroid) + spread(odd, fo.centroid))) period = 2;
        } catch (const Error& e) {
            out.status = CircleStatus::broke_up;
            out.detail = e.what();
            return out;
        }
    }
    CircleModel& m = out.model;
    m.period_of_cycle = period;
    m.orbit = tail;
    std::vector<Vec3<double>> g, partner;
    for (std::size_t i = 0; i < tail.size(); ++i) (i % period == 0 ? g : partner).push_back(tail[i]);

    const Vec3<double>& last = g.back();
    if (fs(g[g.size() - 2], last) < 1e-9) {
        out.status = CircleStatus::shrunk_to_point;
        out.detail = "orbit converged to a cycle of points";
        return out;
    }
    ClosedCurveFit fit;
    try {
        fit = fit_closed_curve(g, 1);
    } catch (const Error& e) {
        out.status = CircleStatus::broke_up;
        out.detail = e.what();
        return out;
    }
    if (fit.mean_radius < 1e-5) {
        out.status = CircleStatus::shrunk_to_point;
        out.detail = "orbit collapsed below the chart resolution";
        return out;
    }
    if (fit.distinct < 50) {
        // attracting periodic cycle on the circle: find its exact period
        int q = 0;
        for (int cand = 2; cand <= 50 && q == 0; ++cand) {
            bool ok = true;
            for (std::size_t k = g.size() - 50; k + cand < g.size() && ok; ++k) ok = fs(g[k], g[k + cand]) < 1e-8;
            if (ok) q = cand;
        }
        if (q == 0) {
            out.status = CircleStatus::broke_up;
            out.detail = "few distinct points but no periodic cycle";
            return out;
        }
        m.periodic_q = q;
        m.fit_residual = 0.0;
    } else {
        try {
            const RotationEstimate r = rotation_number(fit.theta);
            m.rotation_number = r.value;
            m.rotation_error = r.error;
        } catch (const Error& e) {
            out.status = CircleStatus::broke_up;
            out.detail = e.what();
            return out;
        }
        out.has_rotation = m.rotation_error < 1e-5;
        const CurveParamFit pf = parametric_fit(fit, g, m.rotation_number);
        m.fit_residual = pf.residual;
        m.mean_radius = fit.mean_radius;
        if (!(pf.residual < fit_tol * fit.mean_radius)) {
            out.status = CircleStatus::broke_up;
            out.detail = "orbit is not a closed curve";
            return out;
        }
        m.mean_radius = fit.mean_radius;
        for (std::size_t i : pf.order) m.points.push_back(g[i]);
        m.partner = std::move(partner);
        out.status = CircleStatus::circle;
        return out;
    }
    m.mean_radius = fit.mean_radius;
    try {
        const RotationEstimate r = rotation_number(fit.theta);
        m.rotation_number = r.value;
        m.rotation_error = r.error;
        out.has_rotation = true;
    } catch (const Error& e) {
        out.status = CircleStatus::broke_up;
        out.detail = e.what();
        return out;
    }
    std::vector<std::size_t> idx(g.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fit.theta[a] < fit.theta[b]; });
    for (std::size_t i : idx) m.points.push_back(g[i]);
    m.partner = std::move(partner);
    out.status = CircleStatus::circle;
    return out;
}

CircleModel find_attracting_circle(const PolyMap<double>& f, const Vec3<double>& seed, long n_transient,
                                   long n_collect, const HomogPoly<double>& curve) {
    CircleProbe pr = probe_circle(f, seed, n_transient, n_collect, curve);
    switch (pr.status) {
        case CircleStatus::circle: return std::move(pr.model);
        case CircleStatus::escaped: fail(Errc::Escaped, pr.detail);
        default: fail(Errc::NotACircle, std::string(circle_status_name(pr.status)) + ": " + pr.detail);
    }
}

// --------------------------------------------------------- periodic orbits

PeriodicOrbit verify_periodic_orbit(const PolyMap<double>& f, int period, const Vec3<double>& x0, int q) {
    PeriodicOrbit out;
    out.q = q;
    const int n = period * q;
    const Vec3<double> c = canonical(x0);
    Vec3<double> t{1, 0, 0};
    if (std::abs(c[0]) > 0.6) t = {0, 1, 0};
    Vec3<double> e1 = vsub(t, vscale(c, bdot(c, t)));
    e1 = vscale(e1, 1.0 / vnorm(e1));
    const Vec3<double> e2 = cross(c, e1);
    auto point = [&](const Eigen::Vector2d& u) { return vadd(c, vadd(vscale(e1, u(0)), vscale(e2, u(1)))); };
    auto ret = [&](const Eigen::Vector2d& u) {
        Vec3<double> y = canonical(point(u));
        for (int i = 0; i < n; ++i) y = step(f, y);
        const double w = bdot(y, c);
        if (std::abs(w) < 1e-6) fail(Errc::NoConvergence, "return map left the chart");
        return Eigen::Vector2d(bdot(y, e1) / w, bdot(y, e2) / w);
    };
    Eigen::Vector2d u(0, 0);
    Eigen::Matrix2d D = Eigen::Matrix2d::Identity();
    try {
        for (int it = 0; it < 60; ++it) {
            const Eigen::Vector2d R = ret(u);
            const Eigen::Vector2d G = R - u;
            out.residual = G.norm();
            const double h = 1e-7;
            for (int j = 0; j < 2; ++j) {
                Eigen::Vector2d up = u, um = u;
                up(j) += h;
                um(j) -= h;
                D.col(j) = (ret(up) - ret(um)) / (2 * h);
            }
            if (out.residual < 1e-12) break;
            const Eigen::Vector2d du = (D - Eigen::Matrix2d::Identity()).colPivHouseholderQr().solve(-G);
            if (!du.allFinite()) return out;
            u += du;
            if (u.norm() > 0.5) return out;
        }
    } catch (const Error&) {
        return out;
    }
    if (!(out.residual < 1e-10)) return out;
    out.point = canonical(point(u));
    out.multiplier = D.eigenvalues().cwiseAbs().maxCoeff();
    // the period must be exactly q under f^period
    Vec3<double> y = out.point;
    for (int j = 1; j < q; ++j) {
        for (int i = 0; i < period; ++i) y = step(f, y);
        if (fs(y, out.point) < 1e-7) return out;
    }
    out.converged = true;
    return out;
}

// ------------------------------------------------------- transverse exponent

ExponentEstimate circle_transverse_exponent(const PolyMap<double>& f, const CircleModel& circle, long n_iter) {
    if (circle.orbit.empty() || n_iter < 100) fail(Errc::InsufficientData, "circle orbit not resolved");
    ExponentEstimate est;
    est.method = Method::birkhoff_orbit;
    Vec3<double> x = canonical(circle.orbit.back());
    Vec3<double> tau{0.3, -0.7, 0.5};
    tau = vsub(tau, vscale(x, bdot(x, tau)));
    tau = vscale(tau, 1.0 / vnorm(tau));
    // pushes v in T_x to T_q and returns the new base point q
    auto push = [&](const Vec3<double>& F, const Mat3<double>& J, const Vec3<double>& v) {
        const double nF = vnorm(F);
        const Vec3<double> qv = vscale(F, 1.0 / nF);
        Vec3<double> w = vscale(matvec(J, v), 1.0 / nF);
        return vsub(w, vscale(qv, bdot(qv, w)));
    };
    const long burn = 500;
    std::vector<double> series;
    series.reserve(static_cast<std::size_t>(n_iter));
    for (long k = 0; k < burn + n_iter; ++k) {
        const Vec3<double> F = eval_lift(f, x);
        if (is_indeterminate_at(f, F)) fail(Errc::Indeterminate, "circle orbit hit an indeterminacy point");
        const Mat3<double> J = jacobian(f, x);
        const Vec3<double> nu = cross(x, tau);
        const Vec3<double> wt = push(F, J, tau), wn = push(F, J, nu);
        const Vec3<double> q = vscale(F, 1.0 / vnorm(F));
        const Vec3<double> tau2 = vscale(wt, 1.0 / vnorm(wt));
        const double val = std::abs(bdot(cross(q, tau2), wn));
        if (k >= burn) {
            if (!(val > kRejectNorm) || !std::isfinite(val))
                ++est.rejected;
            else
                series.push_back(std::log(val));
        }
        x = q;
        tau = tau2;
    }
    if (series.size() < 100) fail(Errc::InsufficientData, "too many rejected samples");
    const MeanStats ms = batch_means(series, 25);
    est.value = ms.mean;
    est.stderr_ = ms.stderr_;
    est.samples = static_cast<long>(series.size());
    return est;
}

// --------------------------------------------------------------- c sweeps

std::vector<RotationRow> rotation_sweep(double a, double b, const std::vector<double>& c_grid,
                                        const SweepOptions& opt) {
    const HomogPoly<double> phi = fermat_phi<double>();
    std::vector<RotationRow> rows;
    rows.reserve(c_grid.size());
    Vec3<double> seed{};
    bool have_seed = false;
    for (double c : c_grid) {
        const PolyMap<double> f = desboves_map<double>(DesbovesParams<double>{a, b, c});
        RotationRow row;
        row.c = c;
        CircleProbe pr;
        if (have_seed) pr = probe_circle(f, seed, opt.n_transient, opt.n_collect, phi);
        if (pr.status != CircleStatus::circle) {
            // first point, or the continued seed lost the circle: random restarts
            CircleProbe best = pr;
            for (std::uint64_t s = 0; s < 64; ++s) {
                const Vec3<cplx> z = sample_start(Field::real, opt.seed, s);
                const Vec3<double> p{z[0].real(), z[1].real(), z[2].real()};
                CircleProbe cand = probe_circle(f, p, opt.n_transient, opt.n_collect, phi);
                if (cand.status == CircleStatus::circle) {
                    best = std::move(cand);
                    break;
                }
                // prefer the most informative failure: shrunk > broke_up > escaped
                auto rank = [](CircleStatus st) {
                    return st == CircleStatus::shrunk_to_point ? 2 : st == CircleStatus::broke_up ? 1 : 0;
                };
                if (!have_seed && s == 0) best = cand;
                if (rank(cand.status) > rank(best.status)) best = std::move(cand);
            }
            pr = std::move(best);
        }
        row.status = pr.status;
        const double nan = std::numeric_limits<double>::quiet_NaN();
        row.rotation = row.fit_residual = row.lyap = row.stderr_ = nan;
        const CircleModel& m = pr.model;
        if (pr.status == CircleStatus::circle) {
            row.fit_residual = m.fit_residual;
            seed = m.orbit.back();
            have_seed = true;
            try {
                const ExponentEstimate e = circle_transverse_exponent(f, m, opt.lyap_iter);
                row.lyap = e.value;
                row.stderr_ = e.stderr_;
            } catch (const Error&) {
            }
        }
        if (pr.has_rotation) {
            // a locked orbit on a circle that is breaking up still has a rotation number
            row.rotation = m.rotation_number;
            const auto pq = nearby_rational(row.rotation, 1e-4, 24);
            if (pq[1] > 1) {
                const PeriodicOrbit po = verify_periodic_orbit(f, m.period_of_cycle, m.orbit.back(), pq[1]);
                row.newton_verified = po.converged;
                if (po.converged) row.periodic_q = pq[1];
            }
        }
        rows.push_back(row);
    }
    return rows;
}

void write_rotation_csv(std::ostream& os, const std::vector<RotationRow>& rows) {
    os << "c,rotation,status,fit_residual,lyap,stderr\n";
    os << std::setprecision(12);
    for (const auto& r : rows)
        os << r.c << ',' << r.rotation << ',' << circle_status_name(r.status) << ',' << r.fit_residual << ','
           << r.lyap << ',' << r.stderr_ << '\n';
}

std::vector<Plateau> find_plateaus(const std::vector<RotationRow>& rows, double tol, int max_q, int min_points) {
    std::vector<Plateau> out;
    std::size_t i = 0;
    while (i < rows.size()) {
        std::array<int, 2> pq{0, 0};
        if (std::isfinite(rows[i].rotation)) pq = nearby_rational(rows[i].rotation, tol, max_q);
        if (pq[1] == 0) {
            ++i;
            continue;
        }
        std::size_t j = i;
        bool verified = false;
        const double target = static_cast<double>(pq[0]) / pq[1];
        while (j < rows.size() && std::abs(rows[j].rotation - target) < tol) {
            verified = verified || (rows[j].newton_verified && rows[j].periodic_q == pq[1]);
            ++j;
        }
        const int count = static_cast<int>(j - i);
        if (count >= min_points) out.push_back({pq[0], pq[1], rows[i].c, rows[j - 1].c, count, verified});
        i = j;
    }
    return out;
}

// --------------------------------------------------------- synthetic rings

cplx ring_chart_multiplier(const PolyMap<cplx>& f, const cplx& X) {
    const Vec3<cplx> p{X, cplx(1), cplx(0)};
    const Vec3<cplx> F = eval_lift(f, p);
    const Mat3<cplx> J = jacobian(f, p);
    return J[2][2] / F[1];
}

ExponentEstimate ring_transverse_exponent(const PolyMap<cplx>& f, double rho, long n_iter) {
    const FormWithGradient<cplx> phi(HomogPoly<cplx>::variable(2));
    ProjPoint<cplx> p = normalize(Vec3<cplx>{std::polar(rho, 0.1), cplx(1), cplx(0)});
    std::vector<double> series;
    series.reserve(static_cast<std::size_t>(n_iter));
    ExponentEstimate est;
    est.method = Method::birkhoff_orbit;
    for (long k = 0; k < n_iter; ++k) {
        const double v = transverse_norm(f, phi, p);
        if (!(v > kRejectNorm) || !std::isfinite(v))
            ++est.rejected;
        else
            series.push_back(std::log(v));
        p = eval_map(f, p);
    }
    if (series.size() < 100) fail(Errc::InsufficientData, "too many rejected samples");
    const MeanStats ms = batch_means(series, 25);
    est.value = ms.mean;
    est.stderr_ = ms.stderr_;
    est.samples = static_cast<long>(series.size());
    return est;
}

int multiplier_zero_count(const PolyMap<cplx>& f, double rho, int samples) {
    double total = 0.0;
    cplx prev = ring_chart_multiplier(f, cplx(rho, 0.0));
    for (int j = 1; j <= samples; ++j) {
        const cplx cur = ring_chart_multiplier(f, std::polar(rho, kTwoPi * j / samples));
        total += std::arg(cur / prev);
        prev = cur;
    }
    return static_cast<int>(std::lround(total / kTwoPi));
}

namespace {

double circle_mean_log(const PolyMap<cplx>& f, double rho, int m) {
    CompensatedSum s;
    for (int j = 0; j < m; ++j) s.add(std::log(std::abs(ring_chart_multiplier(f, std::polar(rho, kTwoPi * (j + 0.5) / m)))));
    return s.value() / m;
}

}  // namespace

RingProfile ring_profile(const PolyMap<cplx>& f, const std::vector<double>& rho_grid, int samples_per_circle) {
    RingProfile prof;
    std::vector<double> rhos = rho_grid;
    // ascending h means descending rho
    std::sort(rhos.begin(), rhos.end(), std::greater<>());
    const std::size_t n = rhos.size();
    std::vector<int> zeros(n);
    prof.rho = rhos;
    prof.h.resize(n);
    prof.lyap.resize(n);
    prof.stderr_.resize(n);
    parallel_for(n, [&](std::size_t i) {
        const double full = circle_mean_log(f, rhos[i], samples_per_circle);
        const double half = circle_mean_log(f, rhos[i], std::max(1, samples_per_circle / 2));
        prof.h[i] = -std::log(rhos[i]) / kTwoPi;
        prof.lyap[i] = full;
        prof.stderr_[i] = std::abs(full - half);
        zeros[i] = multiplier_zero_count(f, rhos[i]);
    });
    if (n < 2) return prof;
    std::vector<double> s(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) s[i] = (prof.lyap[i + 1] - prof.lyap[i]) / (prof.h[i + 1] - prof.h[i]);
    prof.min_second_difference = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 2 < n; ++i)
        prof.min_second_difference = std::min(prof.min_second_difference, s[i + 1] - s[i]);
    if (n < 3) prof.min_second_difference = 0.0;
    prof.convex = prof.min_second_difference >= -1e-6;
    // linear segments: maximal runs of cells whose end circles enclose the same zeros
    std::size_t i = 0;
    while (i + 1 < n) {
        if (zeros[i] != zeros[i + 1]) {
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        while (j + 1 < n && zeros[j + 1] == zeros[i]) ++j;
        ProfileSegment seg;
        seg.h_lo = prof.h[i];
        seg.h_hi = prof.h[j];
        seg.slope_h = (prof.lyap[j] - prof.lyap[i]) / (seg.h_hi - seg.h_lo);
        seg.slope_logr = -seg.slope_h / kTwoPi;
        seg.zeros_inside = zeros[i];
        prof.segments.push_back(seg);
        i = j;
    }
    for (std::size_t k = 0; k + 1 < prof.segments.size(); ++k) {
        const ProfileSegment &A = prof.segments[k], &B = prof.segments[k + 1];
        // intersection of the two lines
        const double la = prof.lyap[static_cast<std::size_t>(std::find(prof.h.begin(), prof.h.end(), A.h_hi) - prof.h.begin())];
        const double lb = prof.lyap[static_cast<std::size_t>(std::find(prof.h.begin(), prof.h.end(), B.h_lo) - prof.h.begin())];
        const double ds = B.slope_h - A.slope_h;
        double hb = 0.5 * (A.h_hi + B.h_lo);
        if (std::abs(ds) > 1e-12) hb = (lb - B.slope_h * B.h_lo - la + A.slope_h * A.h_hi) / (A.slope_h - B.slope_h);
        prof.breakpoints.push_back(hb);
        prof.slope_jumps.push_back(ds);
        prof.zero_jumps.push_back(A.zeros_inside - B.zeros_inside);
    }
    return prof;
}

void write_profile_csv(std::ostream& os, const RingProfile& p) {
    os << "rho,h,lyap,stderr\n" << std::setprecision(12);
    for (std::size_t i = 0; i < p.rho.size(); ++i)
        os << p.rho[i] << ',' << p.h[i] << ',' << p.lyap[i] << ',' << p.stderr_[i] << '\n';
}

// ------------------------------------------------------------ persistence

double hausdorff_distance(const std::vector<Vec3<double>>& A, const std::vector<Vec3<double>>& B) {
    if (A.empty() || B.empty()) return std::numeric_limits<double>::infinity();
    auto directed = [](const std::vector<Vec3<double>>& X, const std::vector<Vec3<double>>& Y) {
        std::vector<double> best(X.size());
        parallel_for(X.size(), [&](std::size_t i) {
            double m = std::numeric_limits<double>::infinity();
            for (const auto& y : Y) {
                // sine of the angle between unit lines, exact at coincidence
                m = std::min(m, vnorm(cross(X[i], y)));
            }
            best[i] = m;
        });
        return *std::max_element(best.begin(), best.end());
    };
    return std::max(directed(A, B), directed(B, A));
}

PersistenceReport persistence_probe(double a, double b, double c, double delta, int probes, const SweepOptions& opt) {
    PersistenceReport rep;
    rep.a = a;
    rep.b = b;
    rep.c = c;
    rep.delta = delta;
    const HomogPoly<double> phi = fermat_phi<double>();
    const PolyMap<double> f0 = desboves_map<double>(DesbovesParams<double>{a, b, c});
    CircleProbe base;
    for (std::uint64_t s = 0; s < 64 && base.status != CircleStatus::circle; ++s) {
        const Vec3<cplx> z = sample_start(Field::real, opt.seed, s);
        base = probe_circle(f0, {z[0].real(), z[1].real(), z[2].real()}, opt.n_transient, opt.n_collect, phi);
    }
    if (base.status != CircleStatus::circle) fail(Errc::NotACircle, "no attracting circle at the base parameters");
    rep.rotation0 = base.model.rotation_number;
    std::vector<double> offsets;
    if (probes <= 1 || delta == 0.0)
        offsets.assign(static_cast<std::size_t>(std::max(1, probes)), 0.0);
    else
        for (int i = 0; i < probes; ++i) offsets.push_back(-delta + 2.0 * delta * i / (probes - 1));
    rep.rows.resize(offsets.size());
    parallel_for(offsets.size(), [&](std::size_t i) {
        PersistenceRow& row = rep.rows[i];
        row.dc = offsets[i];
        const PolyMap<double> f = desboves_map<double>(DesbovesParams<double>{a, b, c + row.dc});
        // the unperturbed map reuses the base orbit so that delta = 0 reports exactly zero drift
        const CircleProbe pr = row.dc == 0.0 ? base
                                             : probe_circle(f, base.model.orbit.back(), opt.n_transient, opt.n_collect, phi);
        row.status = pr.status;
        if (pr.status == CircleStatus::circle) {
            row.hausdorff = hausdorff_distance(base.model.orbit, pr.model.orbit);
            row.rotation = pr.model.rotation_number;
            row.drho = std::abs(row.rotation - rep.rotation0);
            row.drho = std::min(row.drho, 1.0 - row.drho);
            row.persisted = true;
        } else {
            row.hausdorff = row.rotation = row.drho = std::numeric_limits<double>::quiet_NaN();
        }
    });
    for (const auto& r : rep.rows) {
        rep.all_persisted = rep.all_persisted && r.persisted;
        if (r.persisted) {
            rep.max_hausdorff = std::max(rep.max_hausdorff, r.hausdorff);
            rep.max_drho = std::max(rep.max_drho, r.drho);
        }
    }
    return rep;
}

void PersistenceReport::write_json(std::ostream& os) const {
    nlohmann::ordered_json j;
    j["a"] = a;
    j["b"] = b;
    j["c"] = c;
    j["delta"] = delta;
    j["rotation0"] = rotation0;
    j["all_persisted"] = all_persisted;
    j["max_hausdorff"] = max_hausdorff;
    j["max_drho"] = max_drho;
    auto num = [](double x) { return std::isfinite(x) ? nlohmann::ordered_json(x) : nlohmann::ordered_json(nullptr); };
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        arr.push_back({{"dc", r.dc},
                       {"status", circle_status_name(r.status)},
                       {"persisted", r.persisted},
                       {"hausdorff", num(r.hausdorff)},
                       {"rotation", num(r.rotation)},
                       {"drho", num(r.drho)}});
    }
    j["probes"] = arr;
    os << j.dump(2) << '\n';
}

}  // namespace p2dyn
