#include "beamforge/selection.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

namespace beamforge {

SoftSelector SoftSelector::init(int n_choose, int n_from, std::uint64_t seed) {
    if (n_choose < 1 || n_from < 1)
        throw std::invalid_argument("SoftSelector: dimensions must be >= 1");
    if (n_choose > n_from)
        throw std::invalid_argument("SoftSelector: n_choose must not exceed n_from");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> noise(-0.01, 0.01);
    Eigen::MatrixXd b(n_choose, n_from);
    for (int m = 0; m < n_choose; ++m)
        for (int i = 0; i < n_from; ++i)
            b(m, i) = noise(rng);
    return SoftSelector{std::move(b)};
}

Eigen::MatrixXd soft_matrix(const SoftSelector& sel) {
    const auto& b = sel.biases;
    if (b.rows() == 0 || b.cols() == 0)
        throw std::invalid_argument("soft_matrix: empty bias matrix");
    if (!b.allFinite())
        throw std::domain_error("soft_matrix: non-finite bias");
    Eigen::MatrixXd s(b.rows(), b.cols());
    for (Eigen::Index m = 0; m < b.rows(); ++m) {
        const Eigen::ArrayXd shifted = b.row(m).array() - b.row(m).maxCoeff();
        const Eigen::ArrayXd e = shifted.exp();
        s.row(m) = e / e.sum();
    }
    return s;
}

double orthonormality_penalty(const Eigen::MatrixXd& s) {
    const Eigen::MatrixXd gram = s * s.transpose();
    const Eigen::Index m = s.rows();
    return (gram - Eigen::MatrixXd::Identity(m, m)).squaredNorm();
}

HardSelection harden(const Eigen::MatrixXd& soft) {
    const int m_rows = static_cast<int>(soft.rows());
    const int n_cols = static_cast<int>(soft.cols());
    if (m_rows > n_cols)
        throw std::invalid_argument("harden: more rows than columns");

    std::vector<int> order(static_cast<std::size_t>(m_rows));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return soft.row(a).maxCoeff() > soft.row(b).maxCoeff();
    });

    std::vector<int> picked(static_cast<std::size_t>(m_rows), -1);
    std::vector<bool> taken(static_cast<std::size_t>(n_cols), false);
    for (int row : order) {
        int best = -1;
        for (int col = 0; col < n_cols; ++col) {
            if (taken[static_cast<std::size_t>(col)])
                continue;
            if (best < 0 || soft(row, col) > soft(row, best))
                best = col;
        }
        taken[static_cast<std::size_t>(best)] = true;
        picked[static_cast<std::size_t>(row)] = best;
    }
    return HardSelection{std::move(picked)};
}

HardSelection harden(const SoftSelector& sel) { return harden(soft_matrix(sel)); }

HardnessReport hardness_report(const SoftSelector& sel) {
    const Eigen::MatrixXd s = soft_matrix(sel);
    return HardnessReport{s.rowwise().maxCoeff().minCoeff(), orthonormality_penalty(s)};
}

Eigen::MatrixXd selection_matrix(const HardSelection& hard, int n_from) {
    const int m = static_cast<int>(hard.indices.size());
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(m, n_from);
    for (int row = 0; row < m; ++row) {
        const int col = hard.indices[static_cast<std::size_t>(row)];
        if (col < 0 || col >= n_from)
            throw std::invalid_argument("selection_matrix: index out of range");
        s(row, col) = 1.0;
    }
    return s;
}

HardSelection identity_selection(int n) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    return HardSelection{std::move(idx)};
}

} // namespace beamforge
