#pragma once

#include <utility>

#include "p2dyn/families.hpp"

namespace p2dyn {

// Period lattice Z omega1 + Z omega2 with Weierstrass invariants g2, g3.
template <class C> struct LatticeT {
    C omega1{}, omega2{}, g2{}, g3{};
};
using Lattice = LatticeT<cplx>;

// Equianharmonic lattice g2 = 0, g3 = 1: omega1 = 2 w real with
// w = Gamma(1/3)^3 / (4 pi), omega2 = omega1 * e^{2 pi i / 3}.
template <class C> LatticeT<C> fermat_lattice();

struct TorusPoint {
    cplx t{};
};

// Minimal-norm representative of t modulo the lattice; idempotent.
template <class C> C reduce_torus(const C& t, const LatticeT<C>& lat);
inline TorusPoint reduce(const TorusPoint& t, const Lattice& lat) { return {reduce_torus(t.t, lat)}; }

// (wp, wp') at t.  Throws PoleAtLattice when t is a lattice point.
template <class C> std::pair<C, C> weierstrass(const C& t, const LatticeT<C>& lat);
// (t^3 wp, t^3 wp') at the reduced representative, finite at t = 0.
template <class C> std::pair<C, C> weierstrass_scaled(const C& t_reduced, const LatticeT<C>& lat);

// Torus -> Fermat curve, X = -wp, Y = (1 + wp'/sqrt3)/2, Z = (1 - wp'/sqrt3)/2
// (written with the t^3-scaled series); embed(0) = (0:-1:1).
template <class C> ProjPoint<C> fermat_embed(const C& t);
inline ProjPoint<cplx> fermat_embed(const TorusPoint& t) { return fermat_embed<cplx>(t.t); }

// Real component parametrized by s in R/Z through t = s * omega1.
template <class R> ProjPoint<R> real_embed(const R& s);

// fs_distance(f(embed(t)), embed(mu t)); mu = -2 for Desboves maps.
template <class C> real_of<C> semiconjugacy_residual(const PolyMap<C>& f, const C& t, const C& mu);
double tangent_semiconjugacy_residual(const DesbovesParams<cplx>& params, const TorusPoint& t);

// Newton steps along the gradient of phi until |phi| reaches the precision
// floor.  Throws NoConvergence if |phi(p)| exceeds capture or after 50 steps.
template <class S>
ProjPoint<S> newton_reproject(const ProjPoint<S>& p, const FormWithGradient<S>& phi, double capture = 1e-2);
template <class S> ProjPoint<S> newton_reproject(const ProjPoint<S>& p, const HomogPoly<S>& phi, double capture = 1e-2) {
    return newton_reproject(p, FormWithGradient<S>(phi), capture);
}

template <class S> struct CurveModel {
    FormWithGradient<S> phi;
    Lattice lattice;
    cplx multiplier{-2.0, 0.0};
    ProjPoint<S> origin;
};

template <class S> CurveModel<S> fermat_curve_model(cplx multiplier = {-2.0, 0.0});

// Multiplier of the degree-3 family on the Fermat curve: gamma * k.
cplx degree3_multiplier();

}  // namespace p2dyn
