#include "mgsim/eskbf.hpp"

#include <stdexcept>
#include <string>

namespace mgsim {

void NoiseConfig::validate() const {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(q_x);
  if (es.eigenvalues().minCoeff() < 0.0)
    throw std::invalid_argument("noise config: Q_x must be positive semidefinite");
  if (!(q_xi > 0.0)) throw std::invalid_argument("noise config: Q_xi must be positive");
  if (!(r_x > 0.0)) throw std::invalid_argument("noise config: R_x must be positive");
  if (sigma2_meas < 0.0)
    throw std::invalid_argument("noise config: sigma2_meas must be nonnegative");
}

namespace {

// Unscaled CARE solve; assumes Q and R of comparable magnitude.
Eigen::Matrix3d care_solve_balanced(const Eigen::Matrix3d& a,
                                    const Eigen::RowVector3d& c,
                                    const Eigen::Matrix3d& q, double r) {
  using Mat6 = Eigen::Matrix<double, 6, 6>;
  const Eigen::Matrix3d cc = c.transpose() * c / r;
  Mat6 ham;
  ham.topLeftCorner<3, 3>() = a.transpose();
  ham.topRightCorner<3, 3>() = -cc;
  ham.bottomLeftCorner<3, 3>() = -q;
  ham.bottomRightCorner<3, 3>() = -a;

  Eigen::EigenSolver<Mat6> es(ham);
  Eigen::Matrix<std::complex<double>, 3, 3> u_stab, v_stab;
  int found = 0;
  for (int i = 0; i < 6 && found < 3; ++i) {
    if (es.eigenvalues()(i).real() < 0.0) {
      u_stab.col(found) = es.eigenvectors().col(i).head<3>();
      v_stab.col(found) = es.eigenvectors().col(i).tail<3>();
      ++found;
    }
  }
  if (found != 3)
    throw std::runtime_error("care: Hamiltonian has no 3-dimensional stable subspace");
  Eigen::Matrix3d p = (v_stab * u_stab.inverse()).real();
  p = 0.5 * (p + p.transpose()).eval();

  // Newton (Kleinman) refinement: the subspace solve loses digits when Q and R
  // differ by many orders of magnitude.
  // Newton step for A P + P A^T - P S P + Q = 0:
  //   (A - P_k S) P_{k+1} + P_{k+1} (A - P_k S)^T + P_k S P_k + Q = 0.
  const Eigen::Matrix3d s = cc;
  for (int iter = 0; iter < 8; ++iter) {
    const Eigen::Matrix3d ak = a - p * s;
    const Eigen::Matrix3d w = p * s * p + q;
    // Solve ak X + X ak^T + w = 0 via the Kronecker form.
    Eigen::Matrix<double, 9, 9> lhs = Eigen::Matrix<double, 9, 9>::Zero();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int m = 0; m < 3; ++m) {
          lhs(3 * i + j, 3 * m + j) += ak(i, m);
          lhs(3 * i + j, 3 * i + m) += ak(j, m);
        }
    Eigen::Matrix<double, 9, 1> rhs;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) rhs(3 * i + j) = -w(i, j);
    Eigen::Matrix<double, 9, 1> vec_x = lhs.fullPivLu().solve(rhs);
    Eigen::Matrix3d next;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) next(i, j) = vec_x(3 * i + j);
    next = 0.5 * (next + next.transpose()).eval();
    const double delta = (next - p).cwiseAbs().maxCoeff();
    p = next;
    if (delta <= 1e-14 * p.cwiseAbs().maxCoeff()) break;
  }
  return p;
}

}  // namespace

Eigen::Matrix3d care_steady_covariance(const ExtendedModel& model,
                                       const Eigen::Matrix3d& q, double r) {
  // The chain structure is self-similar: with omega = (q_33/r)^(1/6) and
  // D = diag(1, omega, omega^2), P = r omega D P~ D where P~ solves the CARE
  // with R = 1 and Q~ = D^-1 Q D^-1 / (r omega^2), whose entries are O(1).
  // Solving in scaled coordinates keeps the subspace method well conditioned
  // even when cond(P) ~ omega^4 overwhelms double precision directly.
  if (!(r > 0.0)) throw std::invalid_argument("care: R must be positive");
  if (!(q(2, 2) > 0.0)) throw std::invalid_argument("care: Q_xi must be positive");
  const double omega = std::pow(q(2, 2) / r, 1.0 / 6.0);
  const Eigen::Vector3d d(1.0, omega, omega * omega);
  Eigen::Matrix3d q_scaled;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      q_scaled(i, j) = q(i, j) / (d(i) * d(j) * r * omega * omega);
  Eigen::Matrix3d p_scaled = care_solve_balanced(model.a(), model.c(), q_scaled, 1.0);
  Eigen::Matrix3d p;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) p(i, j) = r * omega * d(i) * d(j) * p_scaled(i, j);
  return p;
}

double covariance_scaled_min_eig(const Eigen::Matrix3d& p) {
  // Definiteness is invariant under congruence; normalizing by the diagonal
  // keeps the eigenvalue problem conditioned when entries span many decades.
  Eigen::Vector3d d;
  for (int i = 0; i < 3; ++i) {
    if (!(p(i, i) > 0.0)) return -1.0;
    d(i) = 1.0 / std::sqrt(p(i, i));
  }
  Eigen::Matrix3d scaled;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) scaled(i, j) = p(i, j) * d(i) * d(j);
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(scaled).eigenvalues().minCoeff();
}

EskbfState eskbf_init(const ExtendedModel& model, const NoiseConfig& noise,
                      const Eigen::Vector3d& x0_guess, const Eigen::Matrix3d& p0,
                      int substeps) {
  noise.validate();
  if (substeps < 1) throw std::invalid_argument("eskbf: substeps must be >= 1");
  if ((p0 - p0.transpose()).cwiseAbs().maxCoeff() >
      1e-9 * (1.0 + p0.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("eskbf: P0 must be symmetric");
  const double min_eig = covariance_scaled_min_eig(p0);
  if (!(min_eig > 0.0))
    throw std::invalid_argument("eskbf: P0 not positive definite (scaled eigenvalue " +
                                std::to_string(min_eig) + ")");

  EskbfState fs;
  fs.model = model;
  fs.x_hat = x0_guess;
  fs.p = p0;
  fs.p0 = p0;
  fs.q.setZero();
  fs.q.topLeftCorner<2, 2>() = noise.q_x;
  fs.q(2, 2) = noise.q_xi;
  fs.r = noise.r_x;
  fs.k = fs.p * model.c().transpose() / fs.r;
  fs.substeps = substeps;
  fs.min_eig_seen = min_eig;
  return fs;
}

namespace {

// Joint derivative of (x_hat, P) per Eq.-(23)-style filter ODE with the gain
// recomputed from the instantaneous covariance.
inline void filter_rhs(const EskbfState& fs, const Eigen::Vector3d& xh,
                       const Eigen::Matrix3d& p, double y, double u,
                       Eigen::Vector3d& dxh, Eigen::Matrix3d& dp) {
  const Eigen::Matrix3d& a = fs.model.a();
  const Eigen::Vector3d k = p.col(0) / fs.r;  // P C^T / R with C = e1^T
  dxh = a * xh + fs.model.b() * u + k * (y - xh(0));
  dp = a * p + p * a.transpose() - k * p.row(0) + fs.q;
}

}  // namespace

void eskbf_step(EskbfState& fs, double y_meas, double u, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("eskbf_step: dt must be positive");
  const double h = dt / fs.substeps;
  Eigen::Vector3d k1x, k2x, k3x, k4x;
  Eigen::Matrix3d k1p, k2p, k3p, k4p;
  for (int s = 0; s < fs.substeps; ++s) {
    filter_rhs(fs, fs.x_hat, fs.p, y_meas, u, k1x, k1p);
    filter_rhs(fs, fs.x_hat + 0.5 * h * k1x, fs.p + 0.5 * h * k1p, y_meas, u, k2x, k2p);
    filter_rhs(fs, fs.x_hat + 0.5 * h * k2x, fs.p + 0.5 * h * k2p, y_meas, u, k3x, k3p);
    filter_rhs(fs, fs.x_hat + h * k3x, fs.p + h * k3p, y_meas, u, k4x, k4p);
    fs.x_hat += (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    fs.p += (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    fs.p = 0.5 * (fs.p + fs.p.transpose()).eval();
  }
  const double min_eig = covariance_scaled_min_eig(fs.p);
  if (min_eig < fs.min_eig_seen) fs.min_eig_seen = min_eig;
  if (!(min_eig > 0.0)) {
    fs.p = fs.p0;
    ++fs.reset_warnings;
  }
  fs.k = fs.p * fs.model.c().transpose() / fs.r;
}

void eskbf_reset_on_reconnect(EskbfState& fs, double y_meas) {
  fs.p = fs.p0;
  fs.x_hat << y_meas, 0.0, 0.0;
  fs.k = fs.p * fs.model.c().transpose() / fs.r;
}

}  // namespace mgsim
