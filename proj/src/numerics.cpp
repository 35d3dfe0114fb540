#include "sff/numerics.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace sff {

namespace detail {
void throw_non_finite(double t) {
  std::ostringstream os;
  os << "non-finite derivative at t = " << t;
  throw PropagationError(os.str());
}
}  // namespace detail

namespace {

double log_abs_det(const MatX& Z) {
  Eigen::PartialPivLU<MatX> lu(Z);
  const MatX& U = lu.matrixLU();
  double s = 0.0;
  for (Eigen::Index i = 0; i < U.rows(); ++i) s += std::log(std::abs(U(i, i)));
  return s;
}

// sign(H) by the determinant-scaled Newton iteration.
MatX matrix_sign(const MatX& H) {
  MatX Z = H;
  const double p = static_cast<double>(Z.rows());
  for (int it = 0; it < 100; ++it) {
    Eigen::PartialPivLU<MatX> lu(Z);
    const MatX Zinv = lu.inverse();
    if (!Zinv.allFinite()) throw SolverError("solve_are: Hamiltonian is singular (eigenvalue on the imaginary axis)");
    const double ld = log_abs_det(Z);
    double c = std::exp(-ld / p);
    if (!std::isfinite(c) || c <= 0.0) c = 1.0;
    const MatX Znext = 0.5 * (c * Z + Zinv / c);
    const double change = (Znext - Z).lpNorm<1>();
    Z = Znext;
    if (change <= 1e-13 * Z.lpNorm<1>()) return Z;
  }
  return Z;
}

}  // namespace

double are_residual(const MatX& A, const MatX& B, const MatX& Q, const MatX& R, const MatX& P) {
  const MatX G = B * R.llt().solve(B.transpose());
  const MatX res = P * A + A.transpose() * P + Q - P * G * P;
  return res.norm() / (1.0 + P.norm());
}

MatX solve_lyapunov(const MatX& A, const MatX& C) {
  const Eigen::Index n = A.rows();
  // vec(A'X + XA) = (I kron A' + A' kron I) vec(X)
  MatX L = MatX::Zero(n * n, n * n);
  const MatX At = A.transpose();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index row = j * n + i;
      for (Eigen::Index k = 0; k < n; ++k) {
        L(row, j * n + k) += At(i, k);
        L(row, k * n + i) += At(j, k);
      }
    }
  }
  const VecX c = Eigen::Map<const VecX>(C.data(), n * n);
  const VecX x = L.partialPivLu().solve(-c);
  MatX X = Eigen::Map<const MatX>(x.data(), n, n);
  return 0.5 * (X + X.transpose());
}

MatX solve_are(const MatX& A, const MatX& B, const MatX& Q, const MatX& R) {
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != m || R.cols() != m)
    throw DomainError("solve_are: inconsistent shapes");
  if (!A.allFinite() || !B.allFinite() || !Q.allFinite() || !R.allFinite())
    throw DomainError("solve_are: non-finite input");
  Eigen::LLT<MatX> rllt(R);
  if (rllt.info() != Eigen::Success) throw DomainError("solve_are: R is not positive definite");
  const MatX G = B * rllt.solve(B.transpose());
  const MatX Qs = 0.5 * (Q + Q.transpose());

  // P = alpha * Pt, with alpha balancing the quadratic and constant terms.
  const double gq = Qs.norm(), gg = G.norm();
  const double alpha = (gq > 0.0 && gg > 0.0) ? std::sqrt(gq / gg) : 1.0;
  const MatX Qt = Qs / alpha;
  const MatX Gt = G * alpha;

  MatX H(2 * n, 2 * n);
  H << A, -Gt, -Qt, -A.transpose();
  const MatX W = matrix_sign(H);
  MatX lhs(2 * n, n), rhs(2 * n, n);
  lhs << W.topRightCorner(n, n), W.bottomRightCorner(n, n) + MatX::Identity(n, n);
  rhs << W.topLeftCorner(n, n) + MatX::Identity(n, n), W.bottomLeftCorner(n, n);
  MatX Pt = lhs.colPivHouseholderQr().solve(-rhs);
  Pt = 0.5 * (Pt + Pt.transpose());
  if (!Pt.allFinite()) throw SolverError("solve_are: sign iteration produced non-finite P; pair likely not stabilizable");

  // Newton-Kleinman polish on the scaled equation.
  auto scaled_res = [&](const MatX& P) {
    return (P * A + A.transpose() * P + Qt - P * Gt * P).norm() / (1.0 + P.norm());
  };
  double r = scaled_res(Pt);
  for (int it = 0; it < 12 && r > 1e-15; ++it) {
    const MatX Acl = A - Gt * Pt;
    if (spectral_abscissa(Acl) >= 0.0) break;
    const MatX next = solve_lyapunov(Acl, Qt + Pt * Gt * Pt);
    const double rn = scaled_res(next);
    if (!(rn < r)) break;
    Pt = next;
    r = rn;
  }

  const MatX P = alpha * Pt;
  const double res = are_residual(A, B, Qs, R, P);
  const double abscissa = spectral_abscissa(A - G * P);
  if (!(res <= 1e-8) || !(abscissa < 0.0)) {
    std::ostringstream os;
    os << "solve_are: failed to converge (relative residual " << res << ", closed-loop spectral abscissa "
       << abscissa << "); check stabilizability of (A, B) and detectability of (Q, A)";
    throw SolverError(os.str());
  }
  return P;
}

MatX matrix_exponential(const MatX& M, double scale) {
  if (M.rows() != M.cols()) throw DomainError("matrix_exponential: matrix must be square");
  if (!M.allFinite() || !std::isfinite(scale)) throw DomainError("matrix_exponential: non-finite input");
  const Eigen::Index n = M.rows();
  MatX A = M * scale;

  static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;

  const double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm1 > theta13) s = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
  if (s > 0) A /= std::ldexp(1.0, s);

  const MatX I = MatX::Identity(n, n);
  const MatX A2 = A * A;
  const MatX A4 = A2 * A2;
  const MatX A6 = A4 * A2;
  const MatX U = A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I);
  const MatX V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;
  MatX E = (V - U).partialPivLu().solve(V + U);
  for (int k = 0; k < s; ++k) {
    E = E * E;
    if (!E.allFinite()) {
      std::ostringstream os;
      os << "matrix_exponential: overflow during squaring (step " << k + 1 << " of " << s << ")";
      throw SolverError(os.str());
    }
  }
  if (!E.allFinite()) throw SolverError("matrix_exponential: non-finite result");
  return E;
}

double spectral_abscissa(const MatX& M) {
  Eigen::EigenSolver<MatX> es(M, false);
  return es.eigenvalues().real().maxCoeff();
}

MatX fd_jacobian(const std::function<VecX(const VecX&)>& f, const VecX& x, double h) {
  if (!(h > 0.0)) throw DomainError("fd_jacobian: step must be positive");
  const VecX f0 = f(x);
  MatX J(f0.size(), x.size());
  VecX xp = x, xm = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double step = h * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + step;
    xm[j] = x[j] - step;
    J.col(j) = (f(xp) - f(xm)) / (2.0 * step);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return J;
}

}  // namespace sff
