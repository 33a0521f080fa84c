#pragma once

#include <cmath>
#include <functional>

#include <Eigen/Dense>

#include "mhsplit/model.hpp"

// Reference computations kept independent of the library code paths.
namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline VectorXd normals(int d, mhsplit::Rng& rng) {
  std::normal_distribution<double> n;
  VectorXd v(d);
  for (int i = 0; i < d; ++i) v[i] = n(rng);
  return v;
}

/// Solves X - G X G^T = S through the Kronecker system (I - G (x) G) vec X = vec S.
inline MatrixXd lyapunov_kron(const MatrixXd& G, const MatrixXd& S) {
  const auto d = G.rows();
  MatrixXd K(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) K.block(i * d, j * d, d, d) = G(i, j) * G;
  const MatrixXd I = MatrixXd::Identity(d * d, d * d);
  const VectorXd vs = Eigen::Map<const VectorXd>(S.data(), d * d);
  const VectorXd vx = (I - K).fullPivLu().solve(vs);
  return Eigen::Map<const MatrixXd>(vx.data(), d, d);
}

/// Full multivariate normal log density including the normalizing constant.
inline double mvn_logpdf(const VectorXd& x, const VectorXd& mean, const MatrixXd& cov) {
  const Eigen::LDLT<MatrixXd> ldlt(cov);
  const VectorXd r = x - mean;
  const double logdet = ldlt.vectorD().array().log().sum();
  return -0.5 * r.dot(ldlt.solve(r)) - 0.5 * logdet -
         0.5 * static_cast<double>(x.size()) * std::log(2.0 * M_PI);
}

/// Golden-section maximization of a unimodal function on [a, b].
inline double golden_max(const std::function<double(double)>& f, double a, double b) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  while (b - a > 1e-12) {
    if (f(c) > f(d)) b = d;
    else a = c;
    c = b - r * (b - a);
    d = a + r * (b - a);
  }
  return 0.5 * (a + b);
}

/// Nodes and weights of n-point Gauss-Hermite quadrature for weight exp(-x^2)
/// from the Golub-Welsch eigenproblem.
inline std::pair<VectorXd, VectorXd> gauss_hermite(int n) {
  MatrixXd J = MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) J(i, i - 1) = J(i - 1, i) = std::sqrt(0.5 * i);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(J);
  const VectorXd w = std::sqrt(M_PI) * es.eigenvectors().row(0).transpose().cwiseAbs2();
  return {es.eigenvalues(), w};
}

/// E[f(X)] for X ~ N(mu, sigma^2) by Gauss-Hermite quadrature.
inline double normal_expectation(const std::function<double(double)>& f, double mu, double sigma,
                                 int n = 200) {
  const auto [x, w] = gauss_hermite(n);
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += w[i] * f(mu + std::sqrt(2.0) * sigma * x[i]);
  return s / std::sqrt(M_PI);
}

/// Composite Simpson rule on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

inline double phi_cdf(double t) { return 0.5 * std::erfc(-t / std::sqrt(2.0)); }

}  // namespace oracle
