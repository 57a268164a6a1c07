#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <type_traits>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include "p2dyn/errors.hpp"

namespace p2dyn {

namespace bmp = boost::multiprecision;

// Expression templates are off so that std::complex<mpreal> behaves like an
// ordinary value type.
using mpreal = bmp::number<bmp::mpfr_float_backend<0>, bmp::et_off>;
using mpcomplex = std::complex<mpreal>;
using cplx = std::complex<double>;
using Rational = bmp::cpp_rational;

enum class Field { real, complex };

struct ScalarContext {
    Field field = Field::real;
    int precision_bits = 53;

    bool operator==(const ScalarContext&) const = default;
};

const char* field_name(Field f);
Field parse_field(const std::string& s);

template <class S> struct scalar_traits;
template <> struct scalar_traits<double> {
    using real = double;
    static constexpr bool complex = false;
};
template <> struct scalar_traits<cplx> {
    using real = double;
    static constexpr bool complex = true;
};
template <> struct scalar_traits<mpreal> {
    using real = mpreal;
    static constexpr bool complex = false;
};
template <> struct scalar_traits<mpcomplex> {
    using real = mpreal;
    static constexpr bool complex = true;
};

template <class S> using real_of = typename scalar_traits<S>::real;
template <class S> inline constexpr bool is_complex_v = scalar_traits<S>::complex;
template <class S> inline constexpr bool is_mp_v = std::is_same_v<real_of<S>, mpreal>;
template <class S>
using complex_of = std::conditional_t<is_mp_v<S>, mpcomplex, cplx>;

// The MPFR default precision is process-global; set it before building any
// high-precision object and keep it fixed for the duration of a computation.
int working_precision_bits();
void set_working_precision(int bits);

class PrecisionScope {
public:
    explicit PrecisionScope(int bits);
    ~PrecisionScope();
    PrecisionScope(const PrecisionScope&) = delete;
    PrecisionScope& operator=(const PrecisionScope&) = delete;

private:
    unsigned saved_digits10_;
    int saved_bits_;
};

template <class S> ScalarContext context_of() {
    ScalarContext c;
    c.field = is_complex_v<S> ? Field::complex : Field::real;
    c.precision_bits = is_mp_v<S> ? working_precision_bits() : 53;
    return c;
}

template <class S> real_of<S> mag(const S& x) {
    using std::abs;
    return abs(x);
}

template <class S> real_of<S> mag2(const S& x) {
    if constexpr (is_complex_v<S>)
        return x.real() * x.real() + x.imag() * x.imag();
    else
        return x * x;
}

template <class S> S conj_s(const S& x) {
    if constexpr (is_complex_v<S>)
        return std::conj(x);
    else
        return x;
}

template <class S> real_of<S> real_part(const S& x) {
    if constexpr (is_complex_v<S>)
        return x.real();
    else
        return x;
}

template <class R> double to_double(const R& x) {
    if constexpr (std::is_same_v<R, double>)
        return x;
    else
        return static_cast<double>(x);
}

template <class S> cplx to_cplx(const S& x) {
    if constexpr (is_complex_v<S>)
        return {to_double(x.real()), to_double(x.imag())};
    else
        return {to_double(x), 0.0};
}

template <class S> S from_cplx(const cplx& z) {
    using R = real_of<S>;
    if constexpr (is_complex_v<S>)
        return S(R(z.real()), R(z.imag()));
    else
        return R(z.real());
}

template <class R> R pi_r() {
    if constexpr (std::is_same_v<R, double>)
        return 3.14159265358979323846;
    else
        return R(4) * atan(R(1));
}

template <class R> R sqrt3_r() {
    using std::sqrt;
    return sqrt(R(3));
}

// Unit machine epsilon of the active backend.
template <class S> double unit_eps() {
    if constexpr (is_mp_v<S>)
        return std::ldexp(1.0, -working_precision_bits());
    else
        return std::ldexp(1.0, -52);
}

// Exact parameter value re + i*(im + s3*sqrt(3)).  This covers the rationals
// and the Eisenstein field Q(gamma), gamma = (-1 + i*sqrt3)/2, which is all the
// parameter families need.
struct Exact {
    Rational re{0};
    Rational im{0};
    Rational s3{0};

    bool is_real() const { return im == 0 && s3 == 0; }
    Exact operator-() const { return {-re, -im, -s3}; }
    Exact operator+(const Exact& o) const { return {re + o.re, im + o.im, s3 + o.s3}; }
    Exact operator-(const Exact& o) const { return *this + (-o); }
    Exact scaled(const Rational& q) const { return {re * q, im * q, s3 * q}; }
    bool operator==(const Exact&) const = default;
    std::string str() const;
    double to_real_double() const;
};

Exact exact_from(const Rational& q);
Exact exact_gamma();
// Parses sums of terms like "-5/9", "0.4666", "1e-3", "g/2", "3i", "1+2g";
// the letter g denotes gamma and i the imaginary unit.
Exact parse_exact(const std::string& s);
std::vector<Exact> parse_exact_list(const std::string& csv);
Rational parse_rational(const std::string& s);

template <class R> R rational_to(const Rational& q) {
    if constexpr (std::is_same_v<R, double>)
        return q.convert_to<double>();
    else
        return R(bmp::numerator(q).str()) / R(bmp::denominator(q).str());
}

template <class S> S to_scalar(const Exact& e) {
    using R = real_of<S>;
    if constexpr (is_complex_v<S>) {
        R im = rational_to<R>(e.im);
        if (e.s3 != 0) im += rational_to<R>(e.s3) * sqrt3_r<R>();
        return S(rational_to<R>(e.re), im);
    } else {
        if (!e.is_real()) fail(Errc::RealContext, "non-real parameter " + e.str() + " in a real context");
        return rational_to<R>(e.re);
    }
}

}  // namespace p2dyn
