#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "beamforge/array_model.hpp"

namespace beamforge {

/// Analog phase-shifter network between RF chains and antennas. The realized
/// mapping matrix is exp(j * phases) elementwise, so every entry has unit
/// modulus by construction and no projection step is ever needed.
struct PhaseNetwork {
    Eigen::MatrixXd phases; // n_antennas x n_rf, radians

    Eigen::MatrixXcd realized() const;

    /// Phases i.i.d. uniform on [0, 2*pi).
    static PhaseNetwork init(int n_antennas, int n_rf, std::uint64_t seed);
};

/// Baseband precoder Q, parameterized by unconstrained real and imaginary
/// parts. The transmit covariance it shapes is Q Q^H.
struct Precoder {
    Eigen::MatrixXd q_real; // n_rf x n_rf
    Eigen::MatrixXd q_imag;

    Eigen::MatrixXcd matrix() const;

    /// Entries i.i.d. complex Gaussian scaled by 1/sqrt(n_rf).
    static Precoder init(int n_rf, std::uint64_t seed);
};

/// White baseband snapshots, one column per time sample. Each complex entry
/// has unit variance split evenly across real and imaginary parts.
struct SnapshotBatch {
    Eigen::MatrixXcd samples; // n_rf x count

    int count() const { return static_cast<int>(samples.cols()); }
};

SnapshotBatch draw_snapshots(int n_rf, int count, std::mt19937_64& rng);
SnapshotBatch draw_snapshots(int n_rf, int count, std::uint64_t seed);

/// Sparse-array outputs y(t; theta_k) for every grid angle and snapshot:
/// A^H S2^T S2 F_RF S1^T S1 Q e(t). Selection matrices may be soft
/// (row-stochastic) or hard binary; shape is K x count.
Eigen::MatrixXcd soft_forward(const Eigen::MatrixXcd& steering,
                              const Eigen::MatrixXd& s1,
                              const Eigen::MatrixXd& s2,
                              const Eigen::MatrixXcd& f_rf,
                              const Eigen::MatrixXcd& q,
                              const SnapshotBatch& batch);

/// Average output power per angle: mean over snapshots of |y|^2.
Eigen::VectorXd empirical_power(const Eigen::MatrixXcd& outputs);

/// Expected output power per angle, i.e. the squared norm of each row of
/// A^H S2^T S2 F_RF S1^T S1 Q. No snapshots involved.
Eigen::VectorXd closed_form_power(const Eigen::MatrixXcd& steering,
                                  const Eigen::MatrixXd& s1,
                                  const Eigen::MatrixXd& s2,
                                  const Eigen::MatrixXcd& f_rf,
                                  const Eigen::MatrixXcd& q);

/// Weighted squared beampattern error sum_k gamma_k (p_k - power_k)^2.
double beampattern_error(const TargetPattern& target, const Eigen::VectorXd& powers);

/// Beampattern error on empirical powers plus the two selection penalties
/// weighted by alpha1 (RF chains) and alpha2 (antennas).
double total_loss(const TargetPattern& target,
                  const Eigen::MatrixXcd& steering,
                  const Eigen::MatrixXd& s1,
                  const Eigen::MatrixXd& s2,
                  const Eigen::MatrixXcd& f_rf,
                  const Eigen::MatrixXcd& q,
                  const SnapshotBatch& batch,
                  double alpha1,
                  double alpha2);

} // namespace beamforge
