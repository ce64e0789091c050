#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace beamforge {

/// Uniform linear array. Spacing is stored as the ratio d/lambda, so the
/// geometry is wavelength-free; half-wavelength spacing is the default.
struct ArrayGeometry {
    int n_antennas = 1;
    double spacing = 0.5;
};

void validate(const ArrayGeometry& geom);

/// Strictly increasing look angles in degrees, all within [-90, 90].
class AngleGrid {
public:
    explicit AngleGrid(std::vector<double> angles_deg);

    /// Evenly spaced grid with n_points samples covering [lo_deg, hi_deg].
    static AngleGrid uniform(double lo_deg, double hi_deg, int n_points);

    const std::vector<double>& angles_deg() const noexcept { return angles_; }
    int size() const noexcept { return static_cast<int>(angles_.size()); }
    double operator[](int k) const { return angles_[static_cast<std::size_t>(k)]; }

private:
    std::vector<double> angles_;
};

/// Desired power level p_k and importance weight gamma_k per grid angle.
struct TargetPattern {
    AngleGrid grid;
    Eigen::VectorXd desired_power;
    Eigen::VectorXd weights;
};

void validate(const TargetPattern& target);

/// Array phase response toward theta. Element n carries the phase
/// 2*pi*n*(d/lambda)*sin(theta); element 0 is the phase reference.
Eigen::VectorXcd steering_vector(const ArrayGeometry& geom, double theta_deg);

/// Steering vectors for all grid angles as columns (n_antennas x K).
Eigen::MatrixXcd steering_matrix(const ArrayGeometry& geom, const AngleGrid& grid);

using AngleInterval = std::pair<double, double>;

/// Piecewise-constant target: `level` inside any closed interval, zero
/// elsewhere, flat unit weights.
TargetPattern pattern_from_intervals(const AngleGrid& grid,
                                     const std::vector<AngleInterval>& intervals,
                                     double level);

} // namespace beamforge
