#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "mgsim/linearize.hpp"

namespace mgsim {

/// Noise model and filter tuning (Assumptions 3.1 / 3.2 bounds).
struct NoiseConfig {
  Eigen::Matrix2d q_x = Eigen::Matrix2d::Zero();  // process-noise bound on [v_od, dv_od]
  double q_xi = 0.0;                              // bound on the extended-state drive psi
  double r_x = 0.0;                               // measurement covariance used by the filter
  double sigma2_meas = 0.0;                       // injected measurement variance (V^2)
  uint64_t seed = 0;

  void validate() const;  // Q_x >= 0, Q_xi > 0, R_x > 0
};

/// Per-DG extended-state Kalman-Bucy filter state.
struct EskbfState {
  Eigen::Vector3d x_hat = Eigen::Vector3d::Zero();
  Eigen::Matrix3d p = Eigen::Matrix3d::Zero();
  Eigen::Vector3d k = Eigen::Vector3d::Zero();  // P C^T / R, kept current
  Eigen::Matrix3d p0 = Eigen::Matrix3d::Zero(); // reset covariance
  Eigen::Matrix3d q = Eigen::Matrix3d::Zero();  // block-diag(Q_x, Q_xi)
  double r = 0.0;
  ExtendedModel model{1.0};
  int substeps = 1;          // internal RK4 substeps per call
  int reset_warnings = 0;    // count of positive-definiteness recoveries
  double min_eig_seen = 0.0; // smallest diagonal-normalized covariance eigenvalue

  double xi_hat() const { return x_hat(2); }
  double innovation(double y) const { return y - x_hat(0); }
};

/// Steady-state filter covariance: solves A P + P A' - P C' R^-1 C P + Q = 0
/// via the Hamiltonian stable subspace, solved in bandwidth-scaled
/// coordinates with Newton polishing.
Eigen::Matrix3d care_steady_covariance(const ExtendedModel& model,
                                       const Eigen::Matrix3d& q, double r);

/// Smallest eigenvalue of the diagonal-normalized covariance; > 0 iff P is
/// positive definite (congruence invariance), robust to wide entry scales.
double covariance_scaled_min_eig(const Eigen::Matrix3d& p);

/// Constructs the filter; rejects a non-SPD P0 naming the offending eigenvalue.
EskbfState eskbf_init(const ExtendedModel& model, const NoiseConfig& noise,
                      const Eigen::Vector3d& x0_guess, const Eigen::Matrix3d& p0,
                      int substeps = 1);

/// Advances estimate and covariance by dt (RK4, the plant's scheme), holding
/// the measurement and input. P is re-symmetrized afterwards and K refreshed.
/// A covariance that loses positive definiteness is reset to P0 and counted.
void eskbf_step(EskbfState& fs, double y_meas, double u, double dt);

/// Plug-and-play support: P <- P0, x_hat <- (current measured v_od, 0, 0).
void eskbf_reset_on_reconnect(EskbfState& fs, double y_meas);

}  // namespace mgsim
