#pragma once

#include <optional>
#include <string>
#include <vector>

#include "p2dyn/projective.hpp"

namespace p2dyn {

template <class S> struct DesbovesParams {
    S a{}, b{}, c{};
};

// Phi = x^3 + y^3 + z^3.
template <class S> HomogPoly<S> fermat_phi();
// Psi = 3xyz, the companion of Phi in the classical first integral.
template <class S> HomogPoly<S> classical_psi();

// x(y^3 - z^3 + a Phi), y(z^3 - x^3 + b Phi), z(x^3 - y^3 + c Phi).
template <class S> PolyMap<S> desboves_map(const DesbovesParams<S>& p);
template <class S> PolyMap<S> classical_desboves();

// gamma = (-1 + i sqrt3)/2 and the default k = i sqrt3, so k^3 = 3(gamma^2 - gamma).
template <class S> S eisenstein_gamma();
template <class S> S degree3_default_k();
// H0 + (a,b,c) Phi with H0 = (k xyz, y^3 - gamma z^3, z^3 - gamma y^3).
// Throws RealContext for real scalars.
template <class S> PolyMap<S> degree3_map(const S& a, const S& b, const S& c);
template <class S> PolyMap<S> degree3_map(const S& a, const S& b, const S& c, const S& k);

// Phi_k = x^2 y^2 - (x^2 + y^2) z^2 + k z^4.  Throws BadParameter for k in {0, 1}.
template <class S> HomogPoly<S> cassini_phi(const S& k);
template <class S> PolyMap<S> cassini_map(const S& a, const S& k);

// Image of the Desboves map under pi(x:y:z) = (x^3:y^3:z^3).
template <class S> PolyMap<S> quotient_desboves(const DesbovesParams<S>& p);
template <class S> Vec3<S> cube_projection(const Vec3<S>& v) {
    return {v[0] * v[0] * v[0], v[1] * v[1] * v[1], v[2] * v[2] * v[2]};
}

// Homogeneous point of P^1; (1:0) is infinity.
template <class S> using P1 = std::array<S, 2>;
// X' = -X (X^3 + 2)/(2 X^3 + 1) in homogeneous form (x:z) -> (x(-x^3-2z^3) : z(2x^3+z^3)).
template <class S> P1<S> lattes_p1_step(const P1<S>& xz);
double lattes_p1_step(double X);  // +-infinity in and out for the point at infinity

// p = e^{2 pi i alpha} z0 z1^{d-1}, q = z1^d, third component z2 r.
// Throws DegreeMismatch if deg r != d - 1.
PolyMap<cplx> synthetic_ring_map(double alpha, int base_degree, const HomogPoly<cplx>& r);
PolyMap<cplx> synthetic_ring_map(double alpha, int base_degree, const Vec3<cplx>& r_coeffs);

// Ueda symmetric product of a self-map (p:q) of P^1, evaluated by splitting
// the fiber quadratic into its two roots.
class SymmetricProduct {
public:
    // p and q are homogeneous in (x, y) of a common degree d >= 1.
    SymmetricProduct(HomogPoly<cplx> p, HomogPoly<cplx> q);
    ProjPoint<cplx> operator()(const ProjPoint<cplx>& s) const;
    int degree() const { return p_.degree(); }

private:
    HomogPoly<cplx> p_, q_;
};

// (x1 x2 : x1 y2 + y1 x2 : y1 y2).
Vec3<cplx> symmetric_embed(const P1<cplx>& u, const P1<cplx>& v);

bool is_regular_desboves(const cplx& a, const cplx& b, const cplx& c);

struct FixedPointReport {
    ProjPoint<cplx> point;
    bool on_fermat = false;
    int line = -1;                       // coordinate line index used for the derivative, -1 if none
    cplx transverse_derivative{NAN, NAN};  // closed form
    cplx numeric_derivative{NAN, NAN};     // from the Jacobian of the restriction
};

struct FixedPointSet {
    std::vector<FixedPointReport> on_curve;  // nine points of the Fermat curve
    std::vector<FixedPointReport> others;    // three coordinate points, nine with xyz != 0
    bool degenerate_line = false;            // c = b + 1: the line x = 0 is pointwise fixed
};

FixedPointSet fermat_fixed_points(const cplx& a, const cplx& b, const cplx& c);

// Derivative at p of the restriction of f to the invariant line x_line = 0,
// in the affine chart u = x_num / x_den of that line.
template <class S> S line_restriction_derivative(const PolyMap<S>& f, const Vec3<S>& p, int line);

// sigma is a permutation of {0,1,2}; hat(sigma)(z) = sgn(sigma) (z_{sigma 0}, z_{sigma 1}, z_{sigma 2}).
int permutation_sign(const std::array<int, 3>& sigma);
template <class S> Vec3<S> apply_sign_permutation(const std::array<int, 3>& sigma, const Vec3<S>& z) {
    const S s(real_of<S>(permutation_sign(sigma)));
    return {s * z[sigma[0]], s * z[sigma[1]], s * z[sigma[2]]};
}
template <class S>
DesbovesParams<S> sign_permutation_conjugate(const std::array<int, 3>& sigma, const DesbovesParams<S>& p) {
    Vec3<S> v = apply_sign_permutation(sigma, Vec3<S>{p.a, p.b, p.c});
    return {v[0], v[1], v[2]};
}
template <class S> Vec3<S> inverse_sign_permutation(const std::array<int, 3>& sigma, const Vec3<S>& z) {
    const S s(real_of<S>(permutation_sign(sigma)));
    Vec3<S> out;
    for (int i = 0; i < 3; ++i) out[sigma[i]] = s * z[i];
    return out;
}

// Chordal distance on the Riemann sphere between Phi/Psi at p and at f(p).
// Throws PoleAtPoint when Psi vanishes at either point.
template <class S>
double first_integral_residual(const PolyMap<S>& f, const HomogPoly<S>& phi, const HomogPoly<S>& psi,
                               const ProjPoint<S>& p);
double chordal_distance(const cplx& z, const cplx& w);

// The twelve indeterminacy points of the classical map: coordinate points and
// the nine points with x^3 = y^3 = z^3.
std::vector<ProjPoint<cplx>> classical_indeterminacy_points();

// ---------------------------------------------------------------- map specs

enum class Family { desboves, classical_desboves, degree3, cassini, quotient_desboves, synthetic_ring };

const char* family_name(Family f);
Family parse_family(const std::string& s);

// Exact description of a map, buildable at any backend.  Parameter layout:
// desboves/quotient (a,b,c); degree3 (a,b,c[,k]); cassini (a,k);
// synthetic_ring (r0,r1,r2) with alpha and base_degree below.
struct MapSpec {
    Family family = Family::desboves;
    std::vector<Exact> params;
    double alpha = 0.0;
    int base_degree = 2;

    std::string params_str() const;
};

MapSpec desboves_spec(const Rational& a, const Rational& b, const Rational& c);
MapSpec two_thirds_spec(const Rational& b);

template <class S> PolyMap<S> build_map(const MapSpec& spec);

}  // namespace p2dyn
