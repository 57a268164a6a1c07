#include <atomic>
#include <cctype>
#include <cmath>
#include <sstream>

#include "p2dyn/errors.hpp"
#include "p2dyn/parallel.hpp"
#include "p2dyn/scalar.hpp"

namespace p2dyn {

const char* errc_name(Errc e) {
    switch (e) {
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::ContextMismatch: return "ContextMismatch";
    case Errc::Indeterminate: return "Indeterminate";
    case Errc::BadParameter: return "BadParameter";
    case Errc::RealContext: return "RealContext";
    case Errc::DegreeMismatch: return "DegreeMismatch";
    case Errc::DegenerateFiber: return "DegenerateFiber";
    case Errc::DegenerateLine: return "DegenerateLine";
    case Errc::PoleAtLattice: return "PoleAtLattice";
    case Errc::PoleAtPoint: return "PoleAtPoint";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::OffCurve: return "OffCurve";
    case Errc::SingularSample: return "SingularSample";
    case Errc::CriticalOrbitHit: return "CriticalOrbitHit";
    case Errc::NoSignChange: return "NoSignChange";
    case Errc::NotACircle: return "NotACircle";
    case Errc::Escaped: return "Escaped";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

void fail(Errc code, const std::string& what) { throw Error(code, what); }

const char* field_name(Field f) { return f == Field::real ? "real" : "complex"; }

Field parse_field(const std::string& s) {
    if (s == "real") return Field::real;
    if (s == "complex") return Field::complex;
    fail(Errc::BadParameter, "unknown field '" + s + "'");
}

namespace {

unsigned bits_to_digits10(int bits) {
    return static_cast<unsigned>(std::ceil(bits * std::log10(2.0))) + 1;
}

}  // namespace

namespace {
// Requested bits; mpfr rounds the digits10 setting up, so it cannot be read back.
std::atomic<int> g_precision_bits{0};
}  // namespace

int working_precision_bits() {
    const int bits = g_precision_bits.load();
    return bits ? bits : static_cast<int>(std::ceil(mpreal::default_precision() * std::log2(10.0)));
}

void set_working_precision(int bits) {
    if (bits < 53) fail(Errc::BadParameter, "precision below 53 bits");
    mpreal::default_precision(bits_to_digits10(bits));
    g_precision_bits.store(bits);
}

PrecisionScope::PrecisionScope(int bits)
    : saved_digits10_(mpreal::default_precision()), saved_bits_(g_precision_bits.load()) {
    set_working_precision(bits);
}

PrecisionScope::~PrecisionScope() {
    mpreal::default_precision(saved_digits10_);
    g_precision_bits.store(saved_bits_);
}

// ---------------------------------------------------------------- exact values

Exact exact_from(const Rational& q) { return Exact{q, 0, 0}; }

Exact exact_gamma() { return Exact{Rational(-1, 2), 0, Rational(1, 2)}; }

double Exact::to_real_double() const {
    if (!is_real()) fail(Errc::RealContext, "non-real parameter " + str());
    return re.convert_to<double>();
}

std::string Exact::str() const {
    std::ostringstream os;
    bool any = false;
    auto part = [&](const Rational& q, const char* unit) {
        if (q == 0) return;
        if (any && q > 0) os << '+';
        os << q << unit;
        any = true;
    };
    part(re, "");
    part(im, "i");
    part(s3, "i*sqrt3");
    if (!any) os << '0';
    return os.str();
}

Rational parse_rational(const std::string& raw) {
    std::string s;
    for (char ch : raw)
        if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
    if (s.empty()) fail(Errc::BadParameter, "empty number");
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        Rational num = slash == 0 ? Rational(1) : parse_rational(s.substr(0, slash));
        if (s.substr(0, slash) == "-") num = -1;
        if (s.substr(0, slash) == "+") num = 1;
        Rational den = parse_rational(s.substr(slash + 1));
        if (den == 0) fail(Errc::BadParameter, "zero denominator in '" + raw + "'");
        return num / den;
    }
    std::size_t i = 0;
    bool neg = false;
    if (s[i] == '+' || s[i] == '-') neg = s[i++] == '-';
    bmp::cpp_int mant = 0;
    int scale = 0, digits = 0;
    bool dot = false;
    for (; i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.'); ++i) {
        if (s[i] == '.') {
            if (dot) fail(Errc::BadParameter, "malformed number '" + raw + "'");
            dot = true;
            continue;
        }
        mant = mant * 10 + (s[i] - '0');
        ++digits;
        if (dot) --scale;
    }
    if (digits == 0) fail(Errc::BadParameter, "malformed number '" + raw + "'");
    if (i < s.size()) {
        if (s[i] != 'e' && s[i] != 'E') fail(Errc::BadParameter, "malformed number '" + raw + "'");
        std::size_t used = 0;
        int ex = 0;
        try {
            ex = std::stoi(s.substr(i + 1), &used);
        } catch (const std::exception&) {
            fail(Errc::BadParameter, "malformed exponent in '" + raw + "'");
        }
        if (i + 1 + used != s.size()) fail(Errc::BadParameter, "malformed number '" + raw + "'");
        scale += ex;
    }
    Rational q(mant);
    bmp::cpp_int p10 = bmp::pow(bmp::cpp_int(10), std::abs(scale));
    q = scale >= 0 ? q * Rational(p10) : q / Rational(p10);
    return neg ? -q : q;
}

Exact parse_exact(const std::string& raw) {
    std::string s;
    for (char ch : raw)
        if (!std::isspace(static_cast<unsigned char>(ch)) && ch != '*') s += ch;
    if (s.empty()) fail(Errc::BadParameter, "empty parameter");
    // split into signed terms, leaving exponent signs alone
    std::vector<std::string> terms;
    std::string cur;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char ch = s[i];
        const bool sign = ch == '+' || ch == '-';
        const bool after_exp = i > 0 && (s[i - 1] == 'e' || s[i - 1] == 'E');
        if (sign && i > 0 && !after_exp && s[i - 1] != '/') {
            terms.push_back(cur);
            cur.clear();
        }
        cur += ch;
    }
    terms.push_back(cur);
    Exact out;
    for (const auto& t0 : terms) {
        std::string t = t0;
        char unit = 0;
        for (char u : {'g', 'i'}) {
            auto pos = t.find(u);
            if (pos != std::string::npos) {
                if (unit) fail(Errc::BadParameter, "malformed parameter '" + raw + "'");
                unit = u;
                t.erase(pos, 1);
            }
        }
        if (t.empty() || t == "+" || t == "-" || t[0] == '/' || t.substr(0, 2) == "+/" || t.substr(0, 2) == "-/") {
            const bool neg = !t.empty() && t[0] == '-';
            std::string rest = t;
            if (!rest.empty() && (rest[0] == '+' || rest[0] == '-')) rest.erase(0, 1);
            t = std::string(neg ? "-" : "") + "1" + rest;
        }
        if (!unit && (t.empty())) fail(Errc::BadParameter, "malformed parameter '" + raw + "'");
        Rational q = parse_rational(t);
        if (unit == 'g')
            out = out + exact_gamma().scaled(q);
        else if (unit == 'i')
            out.im += q;
        else
            out.re += q;
    }
    return out;
}

std::vector<Exact> parse_exact_list(const std::string& csv) {
    std::vector<Exact> out;
    std::string cur;
    std::istringstream is(csv);
    while (std::getline(is, cur, ',')) out.push_back(parse_exact(cur));
    return out;
}

// ------------------------------------------------------------------ parallel

namespace {
int g_workers = 0;
}

int worker_count() {
    if (g_workers > 0) return g_workers;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

void set_worker_count(int n) { g_workers = n; }

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

MeanStats replicate_stats(const std::vector<double>& values) {
    MeanStats st;
    st.n = values.size();
    if (values.empty()) return st;
    CompensatedSum s;
    for (double v : values) s.add(v);
    st.mean = s.value() / static_cast<double>(values.size());
    if (values.size() > 1) {
        CompensatedSum ss;
        for (double v : values) ss.add((v - st.mean) * (v - st.mean));
        st.stderr_ = std::sqrt(ss.value() / static_cast<double>(values.size() - 1) /
                               static_cast<double>(values.size()));
    }
    return st;
}

MeanStats batch_means(const std::vector<double>& series, std::size_t batches) {
    batches = std::max<std::size_t>(2, std::min(batches, series.size()));
    const std::size_t len = series.size() / batches;
    std::vector<double> means;
    for (std::size_t b = 0; b < batches; ++b) {
        CompensatedSum s;
        for (std::size_t i = b * len; i < (b + 1) * len; ++i) s.add(series[i]);
        means.push_back(s.value() / static_cast<double>(len));
    }
    MeanStats st = replicate_stats(means);
    CompensatedSum all;
    for (std::size_t i = 0; i < batches * len; ++i) all.add(series[i]);
    st.mean = all.value() / static_cast<double>(batches * len);
    st.n = batches * len;
    return st;
}

}  // namespace p2dyn
