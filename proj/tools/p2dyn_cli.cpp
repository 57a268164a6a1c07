#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "p2dyn/basin.hpp"
#include "p2dyn/cassini.hpp"
#include "p2dyn/errors.hpp"
#include "p2dyn/herman.hpp"
#include "p2dyn/identities.hpp"
#include "p2dyn/parallel.hpp"
#include "p2dyn/transverse.hpp"

namespace fs = std::filesystem;
using namespace p2dyn;

namespace {

// Every option lives on the top-level app so that a flat key = value config
// file can set any of them; subcommands fall through to the parent.
struct RunConfig {
    std::string family = "desboves";
    std::string params = "-5/9,1/9,7/9";
    std::string field = "complex";
    std::string fields = "real,complex";
    std::string method = "quadrature";
    std::string metric = "orthogonal";
    int precision = 192;
    std::uint64_t seed = 1;
    double samples = 1e5;
    double iterations = 1e5;
    int threads = 0;
    std::string out = "out";

    std::string sweep_family = "two-thirds";
    std::string grid = "-1:1:21";
    double lo = 0.0, hi = 1.5, tol = 1e-3;

    int resolution = 256;
    std::string start = "1,2,3";

    std::string a = "-1/5", b = "7/15";
    std::string c = "17/15";
    std::string c_range = "1.12:1.144:200";
    double transient = 20000, collect = 8000;
    double persist_delta = 0.0;
    int probes = 9;

    double alpha = 0.0;
    int base_degree = 2;
    std::string r = "1,1";
    std::string rho_range = "0.05:20:81";

    double k = 0.125;
    double cassini_a = 0.0;
    double orbits = 2000;

    std::string suite = "all";
    double points = 1000;
};

struct ArgError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

long as_count(double v, const char* what) {
    if (!(v >= 1) || v > 9e15 || v != std::floor(v)) throw ArgError(std::string(what) + " must be a positive integer");
    return static_cast<long>(v);
}

// A trailing "..." repeats the last decimal digit: 0.4666... = 7/15.
std::string expand_repeating(const std::string& s) {
    if (s.size() < 4 || s.compare(s.size() - 3, 3, "...") != 0) return s;
    std::string body = s.substr(0, s.size() - 3);
    const auto dot = body.find('.');
    if (dot == std::string::npos || body.back() == '.' || body.find_first_of("/gieE") != std::string::npos)
        throw ArgError("cannot expand '" + s + "'");
    const int n = static_cast<int>(body.size() - dot - 1);
    const char last = body.back();
    // x = body + last * 10^-n / 9
    std::string tail = std::string(1, last) + "/9" + std::string(static_cast<std::size_t>(n), '0');
    const bool neg = body[0] == '-';
    return body + (neg ? "-" : "+") + tail;
}

Exact exact_arg(const std::string& s) { return parse_exact(expand_repeating(s)); }

double real_arg(const std::string& s) {
    const Exact e = exact_arg(s);
    if (!e.is_real()) throw ArgError("expected a real number, got '" + s + "'");
    return e.to_real_double();
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    return out;
}

struct Range {
    std::string lo, hi;
    long n = 0;
};

Range parse_range(const std::string& s) {
    const auto parts = split(s, ':');
    if (parts.size() != 3) throw ArgError("range must be lo:hi:n, got '" + s + "'");
    Range r{parts[0], parts[1], 0};
    try {
        r.n = std::stol(parts[2]);
    } catch (const std::exception&) {
        throw ArgError("bad point count in '" + s + "'");
    }
    if (r.n < 2) throw ArgError("range needs at least 2 points");
    return r;
}

std::vector<double> linear_grid(const Range& r) {
    const double lo = real_arg(r.lo), hi = real_arg(r.hi);
    std::vector<double> g(static_cast<std::size_t>(r.n));
    for (long i = 0; i < r.n; ++i) g[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(r.n - 1);
    return g;
}

std::vector<Rational> rational_grid(const Range& r) {
    const Rational lo = parse_rational(expand_repeating(r.lo)), hi = parse_rational(expand_repeating(r.hi));
    std::vector<Rational> g;
    for (long i = 0; i < r.n; ++i) g.push_back(lo + (hi - lo) * Rational(i) / Rational(r.n - 1));
    return g;
}

MapSpec spec_from(const RunConfig& cfg) {
    MapSpec spec;
    spec.family = parse_family(cfg.family);
    for (const auto& p : split(cfg.params, ',')) spec.params.push_back(exact_arg(p));
    return spec;
}

FamilyDescriptor sweep_family(const std::string& name) {
    if (name == "two-thirds" || name == "two_thirds") return two_thirds_family();
    if (name == "elementary") return elementary_family();
    throw ArgError("unknown sweep family '" + name + "' (two-thirds, elementary)");
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream os(p);
    if (!os) fail(Errc::IoError, "cannot write " + p.string());
    return os;
}

std::string fmt(double v, int prec = 6) {
    std::ostringstream os;
    os << std::setprecision(prec) << v;
    return os.str();
}

// ------------------------------------------------------------- subcommands

int run_lyap(const RunConfig& cfg, const fs::path& dir) {
    const MapSpec spec = spec_from(cfg);
    const Field field = parse_field(cfg.field);
    const Method method = parse_method(cfg.method);
    const MetricChoice metric = parse_metric(cfg.metric);
    ExponentEstimate est;
    if (method == Method::torus_quadrature) {
        if (metric != MetricChoice::orthogonal_complement) throw ArgError("quadrature uses the orthogonal metric");
        est = family_exponent(spec, field, as_count(cfg.samples, "samples"), cfg.seed);
    } else if (field == Field::complex) {
        cplx mu(-2.0, 0.0);
        if (spec.family == Family::degree3)
            mu = spec.params.size() == 4 ? eisenstein_gamma<cplx>() * to_scalar<cplx>(spec.params[3])
                                         : degree3_multiplier();
        est = lyap_complex(build_map<cplx>(spec), fermat_curve_model<cplx>(mu), as_count(cfg.samples, "samples"),
                           cfg.seed, Method::birkhoff_orbit, metric);
    } else {
        est = lyap_real(spec, as_count(cfg.iterations, "iterations"), cfg.seed, cfg.precision, 1000, metric);
    }
    nlohmann::ordered_json j;
    j["family"] = family_name(spec.family);
    j["params"] = spec.params_str();
    j["field"] = field_name(field);
    j["method"] = method_name(est.method);
    j["metric"] = metric_name(est.metric);
    j["seed"] = cfg.seed;
    j["samples"] = est.samples;
    j["rejected"] = est.rejected;
    j["value"] = est.value;
    j["stderr"] = est.stderr_;
    open_out(dir / "lyap.json") << j.dump(2) << '\n';
    std::cout << "lyap " << family_name(spec.family) << " (" << spec.params_str() << ") " << field_name(field)
              << ": " << fmt(est.value) << " +- " << fmt(est.stderr_, 2) << " [" << method_name(est.method)
              << ", n=" << est.samples << "]\n";
    return 0;
}

int run_sweep(const RunConfig& cfg, const fs::path& dir) {
    const FamilyDescriptor fam = sweep_family(cfg.sweep_family);
    std::vector<Field> fields;
    for (const auto& f : split(cfg.fields, ',')) fields.push_back(parse_field(f));
    const auto rows = sweep(fam, rational_grid(parse_range(cfg.grid)), fields, as_count(cfg.samples, "samples"), cfg.seed);
    auto os = open_out(dir / "sweep.csv");
    write_sweep_csv(os, rows);
    long failed = 0;
    for (const auto& r : rows) failed += r.error.empty() ? 0 : 1;
    std::cout << "sweep " << fam.name << ": " << rows.size() << " rows, " << failed << " failed\n";
    return 0;
}

int run_threshold(const RunConfig& cfg, const fs::path& dir) {
    const FamilyDescriptor fam = sweep_family(cfg.sweep_family);
    const Field field = parse_field(cfg.field);
    const double t = threshold_find(fam, cfg.lo, cfg.hi, cfg.tol, field, as_count(cfg.samples, "samples"), cfg.seed);
    nlohmann::ordered_json j;
    j["family"] = fam.name;
    j["field"] = field_name(field);
    j["lo"] = cfg.lo;
    j["hi"] = cfg.hi;
    j["tol"] = cfg.tol;
    j["threshold"] = t;
    open_out(dir / "threshold.json") << j.dump(2) << '\n';
    std::cout << "threshold " << fam.name << " " << field_name(field) << ": " << fmt(t) << '\n';
    return 0;
}

Thresholds thresholds_from(const RunConfig& cfg) {
    Thresholds thr;
    thr.budget = as_count(cfg.iterations, "iterations");
    return thr;
}

int run_basin_image(const RunConfig& cfg, const fs::path& dir) {
    const BasinProblem prob = make_basin_problem(spec_from(cfg), Field::real);
    RenderView view;
    view.resolution = cfg.resolution;
    view.budget = as_count(cfg.iterations, "iterations");
    const fs::path p = dir / "basin.ppm";
    render_basin(prob, view, p.string(), thresholds_from(cfg));
    std::cout << "basin-image " << cfg.resolution << "x" << cfg.resolution << " -> " << p.string() << '\n';
    return 0;
}

int run_basin_stats(const RunConfig& cfg, const fs::path& dir) {
    const BasinProblem prob = make_basin_problem(spec_from(cfg), parse_field(cfg.field));
    const BasinReport rep = basin_fractions(prob, as_count(cfg.samples, "samples"), cfg.seed, thresholds_from(cfg));
    auto os = open_out(dir / "basin.json");
    rep.write_json(os);
    std::cout << "basin-stats " << rep.family << " (" << rep.params << ") " << field_name(rep.field) << ":";
    for (const auto& [label, n] : rep.counts) std::cout << ' ' << label << '=' << fmt(100.0 * rep.fraction(label), 4) << '%';
    std::cout << '\n';
    return 0;
}

int run_orbit_trace(const RunConfig& cfg, const fs::path& dir) {
    const MapSpec spec = spec_from(cfg);
    const Field field = parse_field(cfg.field);
    const BasinProblem prob = make_basin_problem(spec, field);
    const auto start = split(cfg.start, ',');
    if (start.size() != 3) throw ArgError("--start needs three coordinates");
    const long n = as_count(cfg.iterations, "iterations");
    OrbitTrace tr;
    if (field == Field::complex) {
        Vec3<cplx> p;
        for (int i = 0; i < 3; ++i) p[i] = to_scalar<cplx>(exact_arg(start[i]));
        tr = orbit_trace(build_map<cplx>(spec), prob.curve, p, n);
    } else {
        Vec3<double> p;
        for (int i = 0; i < 3; ++i) p[i] = real_arg(start[i]);
        const HomogPoly<double> phi = prob.curve.cast<double>([](const cplx& z) { return z.real(); });
        tr = orbit_trace(build_map<double>(spec), phi, p, n);
    }
    auto os = open_out(dir / "trace.csv");
    tr.write_csv(os);
    std::cout << "orbit-trace: " << tr.rows.size() << " rows"
              << (tr.terminated.empty() ? std::string() : ", stopped by " + tr.terminated) << '\n';
    return 0;
}

SweepOptions sweep_options(const RunConfig& cfg) {
    SweepOptions opt;
    opt.n_transient = as_count(cfg.transient, "transient");
    opt.n_collect = as_count(cfg.collect, "collect");
    opt.seed = cfg.seed;
    return opt;
}

int run_rotation_sweep(const RunConfig& cfg, const fs::path& dir) {
    const double a = real_arg(cfg.a), b = real_arg(cfg.b);
    const auto rows = rotation_sweep(a, b, linear_grid(parse_range(cfg.c_range)), sweep_options(cfg));
    {
        auto os = open_out(dir / "rotation.csv");
        write_rotation_csv(os, rows);
    }
    const auto plateaus = find_plateaus(rows);
    auto os = open_out(dir / "plateaus.csv");
    os << "p,q,c_lo,c_hi,count,newton_verified\n" << std::setprecision(12);
    std::cout << "rotation-sweep: " << rows.size() << " rows, plateaus:";
    for (const auto& pl : plateaus) {
        os << pl.p << ',' << pl.q << ',' << pl.c_lo << ',' << pl.c_hi << ',' << pl.count << ','
           << (pl.newton_verified ? 1 : 0) << '\n';
        std::cout << ' ' << pl.p << '/' << pl.q << " [" << fmt(pl.c_lo, 7) << ", " << fmt(pl.c_hi, 7) << "]";
    }
    if (plateaus.empty()) std::cout << " none";
    std::cout << '\n';
    return 0;
}

int run_circle_find(const RunConfig& cfg, const fs::path& dir) {
    const double a = real_arg(cfg.a), b = real_arg(cfg.b), c = real_arg(cfg.c);
    const SweepOptions opt = sweep_options(cfg);
    const auto rows = rotation_sweep(a, b, {c}, opt);
    const RotationRow& row = rows.front();
    if (row.status != CircleStatus::circle)
        fail(Errc::NotACircle, std::string("no attracting circle: ") + circle_status_name(row.status));
    const PolyMap<double> f = desboves_map<double>(DesbovesParams<double>{a, b, c});
    // re-find the model for the point list; the sweep keeps only summaries
    CircleModel model;
    for (std::uint64_t s = 0;; ++s) {
        if (s == 64) fail(Errc::NotACircle, "circle not reproduced");
        const Vec3<cplx> z = sample_start(Field::real, opt.seed, s);
        const CircleProbe pr = probe_circle(f, {z[0].real(), z[1].real(), z[2].real()}, opt.n_transient, opt.n_collect,
                                            fermat_phi<double>());
        if (pr.status == CircleStatus::circle) {
            model = pr.model;
            break;
        }
    }
    {
        auto os = open_out(dir / "circle.csv");
        os << "curve,x,y,z\n" << std::setprecision(15);
        for (const auto& p : model.points) os << "0," << p[0] << ',' << p[1] << ',' << p[2] << '\n';
        for (const auto& p : model.partner) os << "1," << p[0] << ',' << p[1] << ',' << p[2] << '\n';
    }
    nlohmann::ordered_json j;
    j["a"] = a;
    j["b"] = b;
    j["c"] = c;
    j["period_of_cycle"] = model.period_of_cycle;
    j["rotation_number"] = model.rotation_number;
    j["rotation_error"] = model.rotation_error;
    j["fit_residual"] = model.fit_residual;
    j["transverse_exponent"] = row.lyap;
    j["transverse_stderr"] = row.stderr_;
    open_out(dir / "circle.json") << j.dump(2) << '\n';
    std::cout << "circle-find: period " << model.period_of_cycle << ", rotation " << fmt(model.rotation_number, 8)
              << " +- " << fmt(model.rotation_error, 2) << ", transverse " << fmt(row.lyap) << '\n';
    if (cfg.persist_delta > 0) {
        const PersistenceReport rep = persistence_probe(a, b, c, cfg.persist_delta, cfg.probes, opt);
        auto os = open_out(dir / "persistence.json");
        rep.write_json(os);
        std::cout << "persistence: " << (rep.all_persisted ? "all persisted" : "lost") << ", hausdorff "
                  << fmt(rep.max_hausdorff, 3) << ", drho " << fmt(rep.max_drho, 3) << '\n';
    }
    return 0;
}

int run_ring_profile(const RunConfig& cfg, const fs::path& dir) {
    const int d = cfg.base_degree;
    if (d < 1) throw ArgError("base degree must be positive");
    const auto coeffs = split(cfg.r, ',');
    if (static_cast<int>(coeffs.size()) != d) throw ArgError("--r needs base_degree coefficients");
    // r = sum_j r_j X^(d-1-j) Y^j
    const auto X = HomogPoly<cplx>::variable(0), Y = HomogPoly<cplx>::variable(1);
    HomogPoly<cplx> r;
    for (int j = 0; j < d; ++j) {
        HomogPoly<cplx> m = HomogPoly<cplx>::constant(to_scalar<cplx>(exact_arg(coeffs[static_cast<std::size_t>(j)])));
        for (int i = 0; i < d - 1 - j; ++i) m = m * X;
        for (int i = 0; i < j; ++i) m = m * Y;
        r = j == 0 ? m : r + m;
    }
    const PolyMap<cplx> f = synthetic_ring_map(cfg.alpha, d, r);
    const Range rr = parse_range(cfg.rho_range);
    const double lo = real_arg(rr.lo), hi = real_arg(rr.hi);
    if (!(lo > 0 && hi > lo)) throw ArgError("rho range must satisfy 0 < lo < hi");
    std::vector<double> grid;
    for (long i = 0; i < rr.n; ++i)
        grid.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(rr.n - 1)));
    const RingProfile prof = ring_profile(f, grid, static_cast<int>(as_count(cfg.samples, "samples")));
    {
        auto os = open_out(dir / "profile.csv");
        write_profile_csv(os, prof);
    }
    nlohmann::ordered_json j;
    j["alpha"] = cfg.alpha;
    j["base_degree"] = d;
    j["convex"] = prof.convex;
    j["min_second_difference"] = prof.min_second_difference;
    j["segments"] = nlohmann::ordered_json::array();
    for (const auto& s : prof.segments)
        j["segments"].push_back({{"h_lo", s.h_lo}, {"h_hi", s.h_hi}, {"slope_h", s.slope_h},
                                 {"slope_logr", s.slope_logr}, {"zeros_inside", s.zeros_inside}});
    j["breakpoints"] = prof.breakpoints;
    j["slope_jumps"] = prof.slope_jumps;
    j["zero_jumps"] = prof.zero_jumps;
    open_out(dir / "profile.json") << j.dump(2) << '\n';
    std::cout << "ring-profile: " << prof.rho.size() << " circles, " << prof.segments.size() << " segments, "
              << (prof.convex ? "convex" : "not convex") << '\n';
    return 0;
}

int run_cassini(const RunConfig& cfg, const fs::path& dir) {
    const CassiniConfig cc{cfg.k, cfg.cassini_a};
    const TrappingReport rep = trapping_demo(cc, as_count(cfg.orbits, "orbits"), as_count(cfg.iterations, "iterations"),
                                             cfg.seed, as_count(cfg.samples, "samples"));
    auto os = open_out(dir / "cassini.json");
    rep.write_json(os);
    const double ident = cassini_identity_residual(cfg.k, 1000, cfg.seed);
    const double quarter = quarter_turn_residual(cc, 1000, cfg.seed);
    std::cout << "cassini-verify k=" << cfg.k << " a=" << cfg.cassini_a << ": sup ratio " << fmt(rep.sup_ratio, 4)
              << " (4k = " << fmt(rep.bound_4k, 4) << "), orbits curve/origin/other/undecided " << rep.to_curve << '/'
              << rep.to_origin_fp << '/' << rep.to_other_fp << '/' << rep.undecided << ", identity "
              << fmt(ident, 2) << ", quarter turn " << fmt(quarter, 2) << '\n';
    return 0;
}

int run_identities(const RunConfig& cfg, const fs::path& dir) {
    const auto checks = identity_suite(cfg.suite, as_count(cfg.points, "points"), cfg.seed);
    auto os = open_out(dir / "identities.csv");
    os << "name,residual,tolerance,points,status\n";
    int failed = 0;
    for (const auto& c : checks) {
        os << c.name << ',' << std::setprecision(6) << c.residual << ',' << c.tolerance << ',' << c.points << ','
           << (c.pass() ? "pass" : "fail") << '\n';
        std::cout << (c.pass() ? "  pass " : "  FAIL ") << c.name << " " << fmt(c.residual, 3) << '\n';
        failed += c.pass() ? 0 : 1;
    }
    std::cout << "identities " << cfg.suite << ": " << checks.size() - static_cast<std::size_t>(failed) << '/'
              << checks.size() << " below tolerance\n";
    return 0;
}

int default_precision() {
    if (const char* env = std::getenv("P2DYN_PRECISION")) {
        try {
            const int v = std::stoi(env);
            if (v >= 53) return v;
        } catch (const std::exception&) {
        }
    }
    return 192;
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    cfg.precision = default_precision();
    CLI::App app{"p2dyn: dynamics of rational maps of the projective plane along invariant curves"};
    app.set_config("--config", "", "flat key = value file; flags override it");
    app.require_subcommand(1);

    app.add_option("--family", cfg.family, "desboves, classical_desboves, degree3, cassini, quotient_desboves")->capture_default_str();
    app.add_option("--params", cfg.params, "comma-separated exact parameters (p/q, decimals, i, g = gamma)")->capture_default_str();
    app.add_option("--field", cfg.field, "real or complex")->capture_default_str();
    app.add_option("--fields", cfg.fields, "fields for sweep")->capture_default_str();
    app.add_option("--method", cfg.method, "quadrature or birkhoff")->capture_default_str();
    app.add_option("--metric", cfg.metric, "orthogonal or fiber")->capture_default_str();
    app.add_option("--precision", cfg.precision, "bits for real Birkhoff orbits")->capture_default_str();
    app.add_option("--seed", cfg.seed)->capture_default_str();
    app.add_option("--samples", cfg.samples, "sample budget")->capture_default_str();
    app.add_option("--iterations", cfg.iterations, "iteration budget")->capture_default_str();
    app.add_option("--threads", cfg.threads, "worker threads (0 = hardware)")->capture_default_str();
    app.add_option("--out", cfg.out, "output directory")->capture_default_str();
    app.add_option("--sweep-family", cfg.sweep_family, "two-thirds or elementary")->capture_default_str();
    app.add_option("--grid", cfg.grid, "lo:hi:n parameter grid")->capture_default_str();
    app.add_option("--lo", cfg.lo)->capture_default_str();
    app.add_option("--hi", cfg.hi)->capture_default_str();
    app.add_option("--tol", cfg.tol)->capture_default_str();
    app.add_option("--resolution", cfg.resolution)->capture_default_str();
    app.add_option("--start", cfg.start, "x,y,z")->capture_default_str();
    app.add_option("--a", cfg.a)->capture_default_str();
    app.add_option("--b", cfg.b)->capture_default_str();
    app.add_option("--c", cfg.c)->capture_default_str();
    app.add_option("--c-range", cfg.c_range, "lo:hi:n")->capture_default_str();
    app.add_option("--transient", cfg.transient)->capture_default_str();
    app.add_option("--collect", cfg.collect)->capture_default_str();
    app.add_option("--persist-delta", cfg.persist_delta, "c offset for the persistence probe (0 = skip)")->capture_default_str();
    app.add_option("--probes", cfg.probes)->capture_default_str();
    app.add_option("--alpha", cfg.alpha, "rotation angle in turns")->capture_default_str();
    app.add_option("--base-degree", cfg.base_degree)->capture_default_str();
    app.add_option("--r", cfg.r, "coefficients of r in X^(d-1), ..., Y^(d-1)")->capture_default_str();
    app.add_option("--rho-range", cfg.rho_range, "lo:hi:n, log-spaced")->capture_default_str();
    app.add_option("--k", cfg.k)->capture_default_str();
    app.add_option("--cassini-a", cfg.cassini_a)->capture_default_str();
    app.add_option("--orbits", cfg.orbits)->capture_default_str();
    app.add_option("--suite", cfg.suite, "all, desboves, degree3, cassini, symmetric")->capture_default_str();
    app.add_option("--points", cfg.points)->capture_default_str();

    using Runner = int (*)(const RunConfig&, const fs::path&);
    const std::vector<std::pair<std::string, Runner>> commands = {
        {"lyap", run_lyap},
        {"sweep", run_sweep},
        {"threshold", run_threshold},
        {"basin-image", run_basin_image},
        {"basin-stats", run_basin_stats},
        {"orbit-trace", run_orbit_trace},
        {"rotation-sweep", run_rotation_sweep},
        {"circle-find", run_circle_find},
        {"ring-profile", run_ring_profile},
        {"cassini-verify", run_cassini},
        {"identities", run_identities},
    };
    for (const auto& [name, run] : commands) app.add_subcommand(name)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    Runner run = nullptr;
    for (const auto& [n, r] : commands)
        if (n == name) run = r;

    try {
        if (cfg.threads < 0) throw ArgError("threads must be non-negative");
        if (cfg.precision < 53) throw ArgError("precision must be at least 53 bits");
        if (cfg.threads > 0) set_worker_count(cfg.threads);
        const fs::path dir(cfg.out);
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) fail(Errc::IoError, "cannot create " + dir.string());
        {
            auto os = open_out(dir / "manifest.conf");
            os << "# subcommand: " << name << '\n' << app.config_to_str(true, false);
        }
        return run(cfg, dir);
    } catch (const ArgError& e) {
        std::cerr << "argument error: " << e.what() << "\n\n" << app.help();
        return 2;
    } catch (const Error& e) {
        // bad parameter strings are usage errors, everything else is numeric
        if (e.code() == Errc::BadParameter) {
            std::cerr << "argument error: " << e.name() << ": " << e.what() << '\n';
            return 2;
        }
        std::cerr << "error: " << e.name() << ": " << e.what() << '\n';
        return 3;
    }
}
