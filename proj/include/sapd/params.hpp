#pragma once

#include <utility>

#include <Eigen/Dense>

#include "sapd/core.hpp"

namespace sapd {

struct SapdParams {
    double tau = 1.0;
    double sigma = 1.0;
    double theta = 0.5;
    double rho = 0.5;
    double alpha = 0.0;

    void validate() const;
};

using Mat5 = Eigen::Matrix<double, 5, 5>;

struct Certificate {
    bool feasible = false;
    double min_eig = 0.0;
    Mat5 matrix = Mat5::Zero();
};

constexpr double kTolPsd = 1e-9;

// 5x5 symmetric matrix of the contraction inequality, rows in printed order.
Mat5 assemble_inequality(const SapdParams& p, const ProblemConstants& c);
Certificate matrix_inequality(const SapdParams& p, const ProblemConstants& c,
                              double tol = kTolPsd);

std::pair<double, double> cp_params(double theta, double mu_x, double mu_y);

// tau, sigma from cp_params; rho = theta; alpha = a/sigma - sqrt(theta) L_yy.
SapdParams cp_certified_params(double theta, const ProblemConstants& c, double a = 0.5);

struct Thresholds {
    double theta1 = 0.0;
    double theta2 = 0.0;
    double beta = 0.0;
};

// Reciprocal forms, stable as theta -> 1.
Thresholds theta_thresholds(const ProblemConstants& c);
// The directly displayed forms; used to cross-check the reciprocal ones.
Thresholds theta_thresholds_direct(const ProblemConstants& c);

struct UniversalConstants {
    double a1 = 2400.0;
    double a2 = 1.0;
    double a3 = 480.0;
    double c1x = 256.0 * (2.0 + 20.0 * 2400.0);
    double c2x = 4096.0 * 1.0;
    double c3x = 1024.0 * 480.0;
    double c1y = 256.0 * (4.0 + 24.0 * 2400.0);
    double c2y = 4096.0 * 1.0;
    double c3y = 5120.0 * 480.0;

    // c's rebuilt from a's with the same recipe as the defaults.
    static UniversalConstants from_a(double a1, double a2, double a3);
};

struct ThetaSelection {
    double theta = 0.5;
    Thresholds thresholds;
    double theta_xx = 0.0;  // noise-driven lower bound, x part
    double theta_yy = 0.0;  // noise-driven lower bound, y part
};

ThetaSelection select_theta(double eps, double p, const ProblemConstants& c, double nu_x,
                            double nu_y, const UniversalConstants& u = {});

}  // namespace sapd
