#pragma once

#include <Eigen/Dense>

namespace beamforge {

// Mixed real/complex products as two real GEMMs; Eigen does not multiply
// across scalar types directly.

inline Eigen::MatrixXcd real_times_complex(const Eigen::MatrixXd& r, const Eigen::MatrixXcd& c) {
    Eigen::MatrixXcd out(r.rows(), c.cols());
    out.real() = r * c.real();
    out.imag() = r * c.imag();
    return out;
}

inline Eigen::MatrixXcd complex_times_real(const Eigen::MatrixXcd& c, const Eigen::MatrixXd& r) {
    Eigen::MatrixXcd out(c.rows(), r.cols());
    out.real() = c.real() * r;
    out.imag() = c.imag() * r;
    return out;
}

} // namespace beamforge
