#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hgauge {

using cplx = std::complex<double>;
using Mat3 = Eigen::Matrix3cd;
using Mat9 = Eigen::Matrix<cplx, 9, 9>;
using Vec3 = Eigen::Vector3cd;
using Vec9 = Eigen::Matrix<cplx, 9, 1>;
using MatX = Eigen::MatrixXcd;
using VecX = Eigen::VectorXcd;

// A point of the control manifold. For the STIRAP model x1 = Omega_P and
// x2 = Omega_S; synthetic models reuse the same pair as generic coordinates.
struct ControlPoint {
    double x1 = 0.0;
    double x2 = 0.0;

    double omega_p() const { return x1; }
    double omega_s() const { return x2; }
};

// Uniform rectangular lattice, node (i, j) at origin + (i h1, j h2), stored
// row-major with i as the slow index. Direction 2 may be periodic.
struct Grid2D {
    ControlPoint origin;
    double h1 = 1.0;
    double h2 = 1.0;
    int n1 = 1;
    int n2 = 1;
    bool periodic2 = false;

    int size() const { return n1 * n2; }
    int index(int i, int j) const { return i * n2 + j; }
    ControlPoint point(int i, int j) const { return {origin.x1 + i * h1, origin.x2 + j * h2}; }
};

// square n x n grid covering [lo, hi]^2
Grid2D square_grid(double lo, double hi, int n);

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace hgauge
