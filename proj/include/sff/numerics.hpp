#pragma once

#include "sff/types.hpp"

#include <functional>
#include <sstream>

namespace sff {

namespace detail {
[[noreturn]] void throw_non_finite(double t);
}

// One classical fourth-order Runge-Kutta step of x' = f(t, x).
template <class F, class V>
V rk4_step(F&& f, double t, const V& x, double dt) {
  if (!(dt > 0.0)) throw DomainError("rk4_step: dt must be positive");
  const double h2 = 0.5 * dt;
  const V k1 = f(t, x);
  if (!k1.allFinite()) detail::throw_non_finite(t);
  const V k2 = f(t + h2, V(x + h2 * k1));
  if (!k2.allFinite()) detail::throw_non_finite(t + h2);
  const V k3 = f(t + h2, V(x + h2 * k2));
  if (!k3.allFinite()) detail::throw_non_finite(t + h2);
  const V k4 = f(t + dt, V(x + dt * k3));
  if (!k4.allFinite()) detail::throw_non_finite(t + dt);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

template <class F, class V>
V euler_step(F&& f, double t, const V& x, double dt) {
  if (!(dt > 0.0)) throw DomainError("euler_step: dt must be positive");
  const V k = f(t, x);
  if (!k.allFinite()) detail::throw_non_finite(t);
  return x + dt * k;
}

// Stabilizing solution of PA + A'P + Q - P B R^-1 B' P = 0.
// Throws SolverError when the pair is not stabilizable or the residual
// contract |res| <= 1e-8 (1 + |P|) cannot be met.
MatX solve_are(const MatX& A, const MatX& B, const MatX& Q, const MatX& R);

// Relative ARE residual |PA + A'P + Q - PBR^-1B'P| / (1 + |P|) (Frobenius).
double are_residual(const MatX& A, const MatX& B, const MatX& Q, const MatX& R, const MatX& P);

// X solving A'X + XA + C = 0 (A Hurwitz assumed by the caller).
MatX solve_lyapunov(const MatX& A, const MatX& C);

// exp(M * scale) by scaling and squaring with a degree-13 Pade kernel.
MatX matrix_exponential(const MatX& M, double scale = 1.0);

// Largest real part among the eigenvalues of M.
double spectral_abscissa(const MatX& M);

// Central-difference Jacobian. The step is h scaled by max(1, |x_j|).
MatX fd_jacobian(const std::function<VecX(const VecX&)>& f, const VecX& x, double h = 1e-6);

}  // namespace sff
