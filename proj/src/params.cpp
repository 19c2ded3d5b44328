#include "sapd/params.hpp"

#include <algorithm>
#include <cmath>

namespace sapd {

void SapdParams::validate() const {
    if (!(tau > 0.0) || !(sigma > 0.0)) throw DomainError("tau and sigma must be positive");
    if (!(theta >= 0.0 && theta < 1.0)) throw DomainError("theta must lie in [0,1)");
    if (!(rho > 0.0 && rho < 1.0)) throw DomainError("rho must lie in (0,1)");
    if (!(alpha >= 0.0 && alpha * sigma < 1.0)) throw DomainError("alpha must lie in [0, 1/sigma)");
}

Mat5 assemble_inequality(const SapdParams& p, const ProblemConstants& c) {
    p.validate();
    c.validate();
    const double t = p.tau, s = p.sigma, th = p.theta, r = p.rho, a = p.alpha;
    const double Lyx = c.L.yx, Lyy = c.L.yy, Lxx = c.L.xx;
    const double k1 = th / r - 1.0;
    const double k2 = th / r;
    Mat5 M = Mat5::Zero();
    M(0, 0) = 1.0 / t + c.mu_x - 1.0 / (r * t);
    M(1, 1) = 1.0 / s + c.mu_y - 1.0 / (r * s);
    M(1, 2) = M(2, 1) = k1 * Lyx;
    M(1, 3) = M(3, 1) = k1 * Lyy;
    M(2, 2) = 1.0 / t - Lxx;
    M(2, 4) = M(4, 2) = -k2 * Lyx;
    M(3, 3) = 1.0 / s - a;
    M(3, 4) = M(4, 3) = -k2 * Lyy;
    M(4, 4) = a / r;
    return M;
}

Certificate matrix_inequality(const SapdParams& p, const ProblemConstants& c, double tol) {
    Certificate cert;
    cert.matrix = assemble_inequality(p, c);
    Eigen::SelfAdjointEigenSolver<Mat5> es(cert.matrix, Eigen::EigenvaluesOnly);
    cert.min_eig = es.eigenvalues().minCoeff();
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    cert.feasible = cert.min_eig >= -tol * scale;
    return cert;
}

std::pair<double, double> cp_params(double theta, double mu_x, double mu_y) {
    if (!(theta > 0.0 && theta < 1.0)) throw DomainError("theta must lie in (0,1)");
    if (!(mu_x > 0.0) || !(mu_y > 0.0)) throw DomainError("mu must be positive");
    const double r = (1.0 - theta) / theta;
    return {r / mu_x, r / mu_y};
}

SapdParams cp_certified_params(double theta, const ProblemConstants& c, double a) {
    auto [tau, sigma] = cp_params(theta, c.mu_x, c.mu_y);
    SapdParams p;
    p.tau = tau;
    p.sigma = sigma;
    p.theta = theta;
    p.rho = theta;
    p.alpha = a / sigma - std::sqrt(theta) * c.L.yy;
    return p;
}

static double beta_of(const ProblemConstants& c) {
    return std::min({0.5, c.mu_x / c.mu_y, c.mu_y / c.mu_x});
}

Thresholds theta_thresholds(const ProblemConstants& c) {
    c.validate();
    Thresholds t;
    t.beta = beta_of(c);
    const double h = 0.5 * (c.L.xx / c.mu_x + 1.0);
    const double inv1 = h + std::sqrt(h * h + 2.0 * c.L.yx * c.L.yx / (t.beta * c.mu_x * c.mu_y));
    t.theta1 = 1.0 - 1.0 / inv1;
    if (c.L.yy > 0.0) {
        const double q = (1.0 - t.beta) * c.mu_y;
        const double inv2 = 0.5 + std::sqrt(0.25 + 16.0 * c.L.yy * c.L.yy / (q * q));
        t.theta2 = 1.0 - 1.0 / inv2;
    }
    return t;
}

Thresholds theta_thresholds_direct(const ProblemConstants& c) {
    c.validate();
    Thresholds t;
    const double b = beta_of(c);
    t.beta = b;
    const double lx = c.L.xx + c.mu_x;
    const double Lyx2 = c.L.yx * c.L.yx;
    t.theta1 = 1.0 - b * lx * c.mu_y / (4.0 * Lyx2) *
                         (std::sqrt(1.0 + 8.0 * c.mu_x * Lyx2 / (b * c.mu_y * lx * lx)) - 1.0);
    if (c.L.yy > 0.0) {
        const double r2 = c.mu_y * c.mu_y / (c.L.yy * c.L.yy);
        const double ob2 = (1.0 - b) * (1.0 - b);
        t.theta2 = 1.0 - ob2 / 32.0 * r2 * (std::sqrt(1.0 + 64.0 / (ob2 * r2)) - 1.0);
    }
    return t;
}

UniversalConstants UniversalConstants::from_a(double a1, double a2, double a3) {
    UniversalConstants u;
    u.a1 = a1;
    u.a2 = a2;
    u.a3 = a3;
    u.c1x = 256.0 * (2.0 + 20.0 * a1);
    u.c2x = 4096.0 * a2;
    u.c3x = 1024.0 * a3;
    u.c1y = 256.0 * (4.0 + 24.0 * a1);
    u.c2y = 4096.0 * a2;
    u.c3y = 5120.0 * a3;
    return u;
}

ThetaSelection select_theta(double eps, double p, const ProblemConstants& c, double nu_x,
                            double nu_y, const UniversalConstants& u) {
    if (!(eps > 0.0)) throw DomainError("eps must be positive");
    if (!(p >= 0.0 && p < 1.0)) throw DomainError("p must lie in [0,1)");
    ThetaSelection sel;
    sel.thresholds = theta_thresholds(c);
    const double r = c.L.xy / c.L.yx;
    const double lg = 1.0 + std::log(1.0 / (1.0 - p));
    const double kx = (u.c1x + u.c2x * r + u.c3x * r * r) * nu_x * nu_x * lg;
    const double ky = (u.c1y + u.c2y * r + u.c3y * r * r) * nu_y * nu_y * lg;
    sel.theta_xx = kx > 0.0 ? 1.0 - c.mu_x * eps / kx : -INFINITY;
    sel.theta_yy = ky > 0.0 ? 1.0 - c.mu_y * eps / ky : -INFINITY;
    sel.theta = std::max({0.5, sel.thresholds.theta1, sel.thresholds.theta2, sel.theta_xx,
                          sel.theta_yy});
    return sel;
}

}  // namespace sapd
