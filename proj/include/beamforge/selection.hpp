#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace beamforge {

/// One softmax network per row. Row m of the soft selection matrix is
/// softmax(biases.row(m)); the biases are the only trainable parameters.
struct SoftSelector {
    Eigen::MatrixXd biases; // n_choose x n_from

    int n_choose() const { return static_cast<int>(biases.rows()); }
    int n_from() const { return static_cast<int>(biases.cols()); }

    /// Biases i.i.d. uniform on [-0.01, 0.01]; tiny noise keeps rows from
    /// starting identical.
    static SoftSelector init(int n_choose, int n_from, std::uint64_t seed);
};

/// Column picked by each row of a hardened selector; all distinct.
struct HardSelection {
    std::vector<int> indices;
};

struct HardnessReport {
    double min_max_entry = 0.0; // min over rows of the largest row probability
    double penalty = 0.0;       // orthonormality penalty of the soft matrix
};

/// Row-stochastic soft selection matrix, max-subtracted for stability.
Eigen::MatrixXd soft_matrix(const SoftSelector& sel);

/// ||S S^T - I||_F^2; zero exactly when S is a valid binary selection matrix.
double orthonormality_penalty(const Eigen::MatrixXd& s);

/// Greedy extraction: rows in descending order of their top probability,
/// each takes its best column still available, ties to the lowest index.
HardSelection harden(const Eigen::MatrixXd& soft);
HardSelection harden(const SoftSelector& sel);

HardnessReport hardness_report(const SoftSelector& sel);

/// Binary selection matrix with row m carrying a single 1 at indices[m].
Eigen::MatrixXd selection_matrix(const HardSelection& hard, int n_from);

/// The no-op selection 0..n-1.
HardSelection identity_selection(int n);

} // namespace beamforge
