#include "beamforge/had_forward.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "beamforge/linalg.hpp"
#include "beamforge/selection.hpp"

namespace beamforge {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_dims(const Eigen::MatrixXcd& steering,
                const Eigen::MatrixXd& s1,
                const Eigen::MatrixXd& s2,
                const Eigen::MatrixXcd& f_rf,
                const Eigen::MatrixXcd& q) {
    const auto nt = steering.rows();
    const auto nrf = f_rf.cols();
    if (f_rf.rows() != nt)
        throw std::invalid_argument("had_forward: F_RF rows != steering rows (" +
                                    std::to_string(f_rf.rows()) + " vs " + std::to_string(nt) + ")");
    if (s2.cols() != nt)
        throw std::invalid_argument("had_forward: S2 cols != antenna count");
    if (s1.cols() != nrf)
        throw std::invalid_argument("had_forward: S1 cols != RF chain count");
    if (q.rows() != nrf || q.cols() != nrf)
        throw std::invalid_argument("had_forward: Q must be n_rf x n_rf");
    if (s1.rows() > s1.cols() || s2.rows() > s2.cols())
        throw std::invalid_argument("had_forward: selection matrix has more rows than columns");
}

// A^H S2^T S2 F_RF S1^T S1 Q, evaluated as the K x n_rf map applied to e(t).
Eigen::MatrixXcd effective_map(const Eigen::MatrixXcd& steering,
                               const Eigen::MatrixXd& s1,
                               const Eigen::MatrixXd& s2,
                               const Eigen::MatrixXcd& f_rf,
                               const Eigen::MatrixXcd& q) {
    const Eigen::MatrixXcd sel_a = real_times_complex(s2, steering); // m_t x K
    const Eigen::MatrixXcd sel_f = real_times_complex(s2, f_rf);     // m_t x n_rf
    const Eigen::MatrixXcd head = sel_a.adjoint() * sel_f;           // K x n_rf
    const Eigen::MatrixXcd sel_q = real_times_complex(s1, q);        // m_rf x n_rf
    return complex_times_real(head, s1.transpose()) * sel_q;         // K x n_rf
}

} // namespace

Eigen::MatrixXcd PhaseNetwork::realized() const {
    Eigen::MatrixXcd f(phases.rows(), phases.cols());
    f.real() = phases.array().cos();
    f.imag() = phases.array().sin();
    return f;
}

PhaseNetwork PhaseNetwork::init(int n_antennas, int n_rf, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 2.0 * kPi);
    Eigen::MatrixXd phi(n_antennas, n_rf);
    for (int i = 0; i < n_antennas; ++i)
        for (int j = 0; j < n_rf; ++j)
            phi(i, j) = uniform(rng);
    return PhaseNetwork{std::move(phi)};
}

Eigen::MatrixXcd Precoder::matrix() const {
    Eigen::MatrixXcd q(q_real.rows(), q_real.cols());
    q.real() = q_real;
    q.imag() = q_imag;
    return q;
}

Precoder Precoder::init(int n_rf, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_rf));
    Eigen::MatrixXd re(n_rf, n_rf), im(n_rf, n_rf);
    for (int i = 0; i < n_rf; ++i) {
        for (int j = 0; j < n_rf; ++j) {
            re(i, j) = scale * gauss(rng);
            im(i, j) = scale * gauss(rng);
        }
    }
    return Precoder{std::move(re), std::move(im)};
}

SnapshotBatch draw_snapshots(int n_rf, int count, std::mt19937_64& rng) {
    if (n_rf < 1 || count < 1)
        throw std::invalid_argument("draw_snapshots: n_rf and count must be >= 1");
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    Eigen::MatrixXcd e(n_rf, count);
    for (int t = 0; t < count; ++t) {
        for (int n = 0; n < n_rf; ++n) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            e(n, t) = std::complex<double>(re, im);
        }
    }
    return SnapshotBatch{std::move(e)};
}

SnapshotBatch draw_snapshots(int n_rf, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return draw_snapshots(n_rf, count, rng);
}

Eigen::MatrixXcd soft_forward(const Eigen::MatrixXcd& steering,
                              const Eigen::MatrixXd& s1,
                              const Eigen::MatrixXd& s2,
                              const Eigen::MatrixXcd& f_rf,
                              const Eigen::MatrixXcd& q,
                              const SnapshotBatch& batch) {
    check_dims(steering, s1, s2, f_rf, q);
    if (batch.samples.rows() != f_rf.cols())
        throw std::invalid_argument("soft_forward: snapshot rows != RF chain count");
    return effective_map(steering, s1, s2, f_rf, q) * batch.samples;
}

Eigen::VectorXd empirical_power(const Eigen::MatrixXcd& outputs) {
    if (outputs.cols() < 1)
        throw std::invalid_argument("empirical_power: needs at least one snapshot");
    return outputs.rowwise().squaredNorm() / static_cast<double>(outputs.cols());
}

Eigen::VectorXd closed_form_power(const Eigen::MatrixXcd& steering,
                                  const Eigen::MatrixXd& s1,
                                  const Eigen::MatrixXd& s2,
                                  const Eigen::MatrixXcd& f_rf,
                                  const Eigen::MatrixXcd& q) {
    check_dims(steering, s1, s2, f_rf, q);
    return effective_map(steering, s1, s2, f_rf, q).rowwise().squaredNorm();
}

double beampattern_error(const TargetPattern& target, const Eigen::VectorXd& powers) {
    if (powers.size() != target.desired_power.size())
        throw std::invalid_argument("beampattern_error: power vector length != target length");
    const Eigen::ArrayXd diff = target.desired_power.array() - powers.array();
    return (target.weights.array() * diff.square()).sum();
}

double total_loss(const TargetPattern& target,
                  const Eigen::MatrixXcd& steering,
                  const Eigen::MatrixXd& s1,
                  const Eigen::MatrixXd& s2,
                  const Eigen::MatrixXcd& f_rf,
                  const Eigen::MatrixXcd& q,
                  const SnapshotBatch& batch,
                  double alpha1,
                  double alpha2) {
    if (alpha1 < 0.0 || alpha2 < 0.0)
        throw std::invalid_argument("total_loss: alpha weights must be >= 0");
    const Eigen::VectorXd power = empirical_power(soft_forward(steering, s1, s2, f_rf, q, batch));
    return beampattern_error(target, power) + alpha1 * orthonormality_penalty(s1) +
           alpha2 * orthonormality_penalty(s2);
}

} // namespace beamforge
