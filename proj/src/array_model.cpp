#include "beamforge/array_model.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "beamforge/errors.hpp"

namespace beamforge {

namespace {

constexpr double kPi = 3.14159265358979323846;

double deg2rad(double deg) { return deg * kPi / 180.0; }

} // namespace

void validate(const ArrayGeometry& geom) {
    if (geom.n_antennas < 1)
        throw std::invalid_argument("ArrayGeometry: n_antennas must be >= 1");
    if (!(geom.spacing > 0.0))
        throw std::invalid_argument("ArrayGeometry: spacing must be > 0");
}

AngleGrid::AngleGrid(std::vector<double> angles_deg) : angles_(std::move(angles_deg)) {
    if (angles_.empty())
        throw std::invalid_argument("AngleGrid: needs at least one angle");
    for (std::size_t k = 0; k < angles_.size(); ++k) {
        if (angles_[k] < -90.0 || angles_[k] > 90.0)
            throw std::invalid_argument("AngleGrid: angle " + std::to_string(angles_[k]) +
                                        " outside [-90, 90]");
        if (k > 0 && !(angles_[k] > angles_[k - 1]))
            throw std::invalid_argument("AngleGrid: angles must be strictly increasing");
    }
}

AngleGrid AngleGrid::uniform(double lo_deg, double hi_deg, int n_points) {
    if (n_points < 1)
        throw std::invalid_argument("AngleGrid: n_points must be >= 1");
    if (n_points > 1 && !(hi_deg > lo_deg))
        throw std::invalid_argument("AngleGrid: hi_deg must exceed lo_deg");
    std::vector<double> angles(static_cast<std::size_t>(n_points));
    if (n_points == 1) {
        angles[0] = lo_deg;
    } else {
        const double step = (hi_deg - lo_deg) / (n_points - 1);
        for (int k = 0; k < n_points; ++k)
            angles[static_cast<std::size_t>(k)] = lo_deg + step * k;
        angles.back() = hi_deg; // avoid drift past the endpoint
    }
    return AngleGrid(std::move(angles));
}

void validate(const TargetPattern& target) {
    const int k = target.grid.size();
    if (target.desired_power.size() != k || target.weights.size() != k)
        throw std::invalid_argument("TargetPattern: desired_power/weights length must equal grid size");
    if ((target.desired_power.array() < 0.0).any())
        throw std::invalid_argument("TargetPattern: desired_power entries must be >= 0");
    if ((target.weights.array() < 0.0).any())
        throw std::invalid_argument("TargetPattern: weights must be >= 0");
}

Eigen::VectorXcd steering_vector(const ArrayGeometry& geom, double theta_deg) {
    validate(geom);
    if (theta_deg < -90.0 || theta_deg > 90.0)
        throw std::domain_error("steering_vector: angle " + std::to_string(theta_deg) +
                                " outside [-90, 90]");
    const double phase_step = 2.0 * kPi * geom.spacing * std::sin(deg2rad(theta_deg));
    Eigen::VectorXcd a(geom.n_antennas);
    for (int n = 0; n < geom.n_antennas; ++n)
        a[n] = std::polar(1.0, phase_step * n);
    return a;
}

Eigen::MatrixXcd steering_matrix(const ArrayGeometry& geom, const AngleGrid& grid) {
    Eigen::MatrixXcd a(geom.n_antennas, grid.size());
    for (int k = 0; k < grid.size(); ++k)
        a.col(k) = steering_vector(geom, grid[k]);
    return a;
}

TargetPattern pattern_from_intervals(const AngleGrid& grid,
                                     const std::vector<AngleInterval>& intervals,
                                     double level) {
    if (level < 0.0)
        throw std::invalid_argument("pattern_from_intervals: level must be >= 0");
    for (const auto& [lo, hi] : intervals)
        if (!(lo <= hi))
            throw std::invalid_argument("pattern_from_intervals: interval with lo > hi");

    Eigen::VectorXd p = Eigen::VectorXd::Zero(grid.size());
    for (int k = 0; k < grid.size(); ++k) {
        for (const auto& [lo, hi] : intervals) {
            if (grid[k] >= lo && grid[k] <= hi) {
                p[k] = level;
                break;
            }
        }
    }
    return TargetPattern{grid, std::move(p), Eigen::VectorXd::Ones(grid.size())};
}

} // namespace beamforge
