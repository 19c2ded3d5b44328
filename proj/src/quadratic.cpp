#include "sapd/quadratic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sapd/certificates.hpp"

namespace sapd {

void QuadProblem::validate() const {
    if (K.rows() < 1 || K.rows() != K.cols()) throw DomainError("K must be square and nonempty");
    if ((K - K.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, K.cwiseAbs().maxCoeff()))
        throw DomainError("K must be symmetric");
    if (!(mu_x > 0.0) || !(mu_y > 0.0)) throw DomainError("mu must be positive");
    if (delta < 0.0) throw DomainError("delta must be nonnegative");
}

ProblemConstants QuadProblem::constants() const {
    ProblemConstants c;
    c.mu_x = mu_x;
    c.mu_y = mu_y;
    const double nk = K.rows() ? K.operatorNorm() : 0.0;
    c.L.xy = nk;
    c.L.yx = nk;
    return c;
}

SaddleProblem QuadProblem::saddle_problem() const {
    validate();
    SaddleProblem sp;
    sp.dim_x = dim();
    sp.dim_y = dim();
    Mat Kc = K;
    sp.grad_x = [Kc](const Vec&, const Vec& y) -> Vec { return Kc.transpose() * y; };
    sp.grad_y = [Kc](const Vec& x, const Vec&) -> Vec { return Kc * x; };
    sp.prox_f = quadratic_prox(mu_x);
    sp.prox_g = quadratic_prox(mu_y);
    sp.constants = constants();
    sp.x_star = Vec::Zero(dim());
    sp.y_star = Vec::Zero(dim());
    return sp;
}

double kappa_of(double lambda, double mu_x, double mu_y) {
    return lambda / std::sqrt(mu_x * mu_y);
}

double theta_min(double kappa) {
    const double k = std::abs(kappa);
    if (k == 0.0) return 0.0;
    // (sqrt(1+k^2)-1)/k without cancellation
    return k / (std::sqrt(1.0 + k * k) + 1.0);
}

Mat2 alambda_general(double lambda, const SapdParams& p, double mu_x, double mu_y) {
    const double a = 1.0 + p.tau * mu_x;
    const double b = 1.0 + p.sigma * mu_y;
    const double t = p.theta;
    Mat2 A;
    A << 1.0 / a, -p.tau * lambda / a,
        (p.sigma * (1.0 + t) / a - p.sigma * t) * lambda / b,
        (1.0 - p.tau * p.sigma * (1.0 + t) * lambda * lambda / a) / b;
    return A;
}

Mat2 rlambda_general(double lambda, const SapdParams& p, double mu_x, double mu_y, double s2) {
    const double a = 1.0 + p.tau * mu_x;
    const double b = 1.0 + p.sigma * mu_y;
    const double t = p.theta, tau = p.tau, sig = p.sigma;
    const double r11 = tau * tau / (a * a);
    const double r12 = (tau * tau * sig * (1.0 + t) / (a * a * b) +
                        tau * sig * sig * t * (1.0 + t) / (b * b * a)) * lambda;
    const double r22 = sig * sig * (1.0 + t) * (1.0 + t) / (b * b) *
                           (tau * tau / (a * a) + 2.0 * tau * sig * t / (a * b)) * lambda * lambda +
                       sig * sig / (b * b) * (1.0 + 2.0 * t * (1.0 + t) * sig * mu_y / b);
    Mat2 R;
    R << r11, r12, r12, r22;
    return s2 * R;
}

Mat2 alambda_cp(double lambda, double theta, double mu_x, double mu_y) {
    const double t = theta;
    const double k = kappa_of(lambda, mu_x, mu_y);
    Mat2 A;
    A << t, -(1.0 - t) * lambda / mu_x,
        (1.0 - t) * t * t * lambda / mu_y, t - (1.0 - t) * (1.0 - t) * (1.0 + t) * k * k;
    return A;
}

Mat2 rlambda_cp(double lambda, double theta, double mu_x, double mu_y, double s2) {
    const double t = theta;
    const double c = s2 * (1.0 - t) * (1.0 - t) / (mu_x * mu_x * mu_y * mu_y);
    const double off = (1.0 - t * t) * (t * mu_x + mu_y) * lambda;
    const double r22 = (1.0 - t) * (1.0 - t) * (1.0 + t) * (1.0 + t) * (1.0 + 2.0 * t * mu_x / mu_y) *
                           lambda * lambda +
                       mu_x * mu_x * (1.0 + 2.0 * (1.0 - t * t) * t);
    Mat2 R;
    R << mu_y * mu_y, off, off, r22;
    return c * R;
}

Mat2 tlambda(double lambda, const SapdParams& p, double mu_x) {
    const double a = 1.0 + p.tau * mu_x;
    Mat2 T;
    T << 1.0 / a, -p.tau * lambda / a, 0.0, 1.0;
    return T;
}

static double spectral_radius2(const Mat2& A) {
    Eigen::EigenSolver<Mat2> es(A, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

QuadSpectralModel build_system(const QuadProblem& q, const SapdParams& p) {
    q.validate();
    if (!(p.tau > 0.0) || !(p.sigma > 0.0)) throw DomainError("tau and sigma must be positive");
    const int d = q.dim();
    const double s2 = q.delta * q.delta / d;
    QuadSpectralModel m;
    Eigen::SelfAdjointEigenSolver<Mat> es(q.K);
    m.eigenvalues = es.eigenvalues();
    m.U = es.eigenvectors();
    for (int i = 0; i < d; ++i) {
        LambdaBlock b;
        b.lambda = m.eigenvalues[i];
        b.kappa = kappa_of(b.lambda, q.mu_x, q.mu_y);
        b.theta_min = theta_min(b.kappa);
        b.A = alambda_general(b.lambda, p, q.mu_x, q.mu_y);
        b.R = rlambda_general(b.lambda, p, q.mu_x, q.mu_y, s2);
        b.A_cp = alambda_cp(b.lambda, p.theta, q.mu_x, q.mu_y);
        b.R_cp = rlambda_cp(b.lambda, p.theta, q.mu_x, q.mu_y, s2);
        m.spectral_radius = std::max(m.spectral_radius, spectral_radius2(b.A));
        m.blocks.push_back(b);
    }
    const double a = 1.0 + p.tau * q.mu_x;
    const double b = 1.0 + p.sigma * q.mu_y;
    const double t = p.theta;
    const Mat I = Mat::Identity(d, d);
    const Mat& K = q.K;
    m.A.resize(2 * d, 2 * d);
    m.A.topLeftCorner(d, d) = I / a;
    m.A.topRightCorner(d, d) = -p.tau * K / a;
    m.A.bottomLeftCorner(d, d) = (p.sigma * (1.0 + t) / a - p.sigma * t) * K / b;
    m.A.bottomRightCorner(d, d) = (I - p.tau * p.sigma * (1.0 + t) * K * K / a) / b;
    m.B = Mat::Zero(2 * d, 3 * d);
    m.B.block(0, 0, d, d) = -p.tau / a * I;
    m.B.block(d, 0, d, d) = -p.tau * p.sigma * (1.0 + t) * K / (a * b);
    m.B.block(d, d, d, d) = -p.sigma * t / b * I;
    m.B.block(d, 2 * d, d, d) = p.sigma * (1.0 + t) / b * I;
    // omega_k and omega_{k+1} share w^y_k, so E[z~_k omega_k^T] = s2 [0, B_3, 0].
    const Mat B1 = m.B.middleCols(d, d);
    const Mat B2 = m.B.rightCols(d);
    const Mat cross = m.A * B2 * B1.transpose();
    m.R = s2 * (m.B * m.B.transpose() + cross + cross.transpose());
    return m;
}

EigenPair eigen_Alambda(const Mat2& A, double theta, double kappa) {
    if (!(theta > theta_min(kappa))) throw DomainError("theta at or below the complex-eigenvalue threshold");
    const double tr = A.trace();
    const double disc = tr * tr - 4.0 * A.determinant();
    if (disc >= 0.0) throw DomainError("discriminant is nonnegative");
    EigenPair e;
    const double im = std::sqrt(-disc);
    e.nu1 = {tr / 2.0, im / 2.0};
    e.nu2 = {tr / 2.0, -im / 2.0};
    e.V << -A(0, 1), -A(0, 1), A(0, 0) - e.nu1, A(0, 0) - e.nu2;
    return e;
}

double eig_product_closed(double theta, double kappa) {
    const double t = theta, om = 1.0 - theta, k2 = kappa * kappa;
    return t * t - t * om * om * k2;
}

double eig_sum_closed(double theta, double kappa) {
    const double t = theta, om = 1.0 - theta, k2 = kappa * kappa;
    return 2.0 * t - om * om * (1.0 + t) * k2;
}

double power_sum_closed(int k, double theta, double kappa) {
    const double t = theta, om = 1.0 - theta, k2 = kappa * kappa;
    const double om2 = om * om, om4 = om2 * om2;
    switch (k) {
        case 2:
            return 2.0 * t * t - 2.0 * t * om2 * (1.0 + 2.0 * t) * k2 +
                   om4 * (1.0 + t) * (1.0 + t) * k2 * k2;
        case 3:
            return (2.0 * t - om2 * (1.0 + t) * k2) *
                   (t * t - t * om2 * (1.0 + 4.0 * t) * k2 + om4 * (1.0 + t) * (1.0 + t) * k2 * k2);
        case 4: {
            const double k4 = k2 * k2, k6 = k4 * k2, k8 = k4 * k4;
            const double t2 = t * t, t3 = t2 * t, t4 = t2 * t2;
            const double op = 1.0 + t;
            return 2.0 * t4 - om2 * k2 * t3 * (4.0 + 16.0 * t) +
                   om4 * k4 * t2 * (6.0 + 24.0 * t + 20.0 * t2) -
                   om4 * om2 * k6 * 4.0 * t * (1.0 + 4.0 * t + 5.0 * t2 + 2.0 * t3) +
                   om4 * om4 * k8 * op * op * op * op;
        }
        default:
            throw DomainError("power sum order must be 2, 3 or 4");
    }
}

Mat2 lyapunov_2x2(const Mat2& A, const Mat2& R) {
    if (spectral_radius2(A) >= 1.0 - 1e-14) throw NumericalError("rho(A) >= 1: no stationary solution");
    Eigen::Matrix4d M = Eigen::Matrix4d::Identity();
    // column-major vec: vec(A S A^T) = (A kron A) vec(S)
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l) M(2 * j + i, 2 * l + k) -= A(i, k) * A(j, l);
    Eigen::Vector4d r(R(0, 0), R(1, 0), R(0, 1), R(1, 1));
    Eigen::Vector4d s = M.fullPivLu().solve(r);
    Mat2 S;
    S << s[0], s[2], s[1], s[3];
    return 0.5 * (S + S.transpose());
}

Mat lyapunov_doubling(const Mat& A, const Mat& R, int max_iter) {
    Mat S = R;
    Mat Ak = A;
    for (int i = 0; i < max_iter; ++i) {
        const Mat inc = Ak * S * Ak.transpose();
        S += inc;
        Ak = Ak * Ak;
        if (inc.norm() <= 1e-18 * S.norm() && Ak.norm() < 1e-12) break;
    }
    return 0.5 * (S + S.transpose());
}

double lyapunov_residual(const Mat& S, const Mat& A, const Mat& R) {
    return (S - A * S * A.transpose() - R).norm();
}

namespace poly {
double eval(const PolyTable& t, double theta, double kappa) {
    double total = 0.0;
    for (const Term& term : t) {
        double p = 0.0;
        for (auto it = term.coeffs.rbegin(); it != term.coeffs.rend(); ++it) p = p * theta + *it;
        total += std::pow(kappa, term.kpow) * std::pow(1.0 - theta, term.omt_pow) * p;
    }
    return total;
}
}  // namespace poly

namespace {

Mat2 assemble_closed(const poly::PolyTable& t11a, const poly::PolyTable& t11b,
                     const poly::PolyTable& t12a, const poly::PolyTable& t12b,
                     const poly::PolyTable& t22a, const poly::PolyTable& t22b, double lambda,
                     double theta, double mu_x, double mu_y, double s2) {
    const double k = kappa_of(lambda, mu_x, mu_y);
    const double l2y = lambda * lambda / (mu_y * mu_y);
    const double pre = s2 * (1.0 - theta) / (lambda * lambda * poly::eval(poly::kCommon, theta, k));
    Mat2 S;
    S(0, 0) = lambda * lambda / (mu_x * mu_x) *
              (poly::eval(t11a, theta, k) + l2y * poly::eval(t11b, theta, k));
    S(0, 1) = lambda / mu_x * (poly::eval(t12a, theta, k) + l2y * poly::eval(t12b, theta, k));
    S(1, 0) = S(0, 1);
    S(1, 1) = poly::eval(t22a, theta, k) + l2y * poly::eval(t22b, theta, k);
    return pre * S;
}

Mat2 zero_block(double theta, double mu_x, double mu_y, double s2, bool shifted) {
    const double t = theta;
    const double c = s2 * (1.0 - t) / (mu_x * mu_x * mu_y * mu_y * (1.0 + t));
    Mat2 S = Mat2::Zero();
    S(0, 0) = c * (shifted ? t * t : 1.0) * mu_y * mu_y;
    S(1, 1) = c * mu_x * mu_x * (1.0 + 2.0 * (1.0 - t * t) * t);
    return S;
}

}  // namespace

Mat2 sigma_tilde_closed(double lambda, double theta, double mu_x, double mu_y, double s2) {
    if (lambda == 0.0) return zero_block(theta, mu_x, mu_y, s2, false);
    using namespace poly;
    return assemble_closed(kTilde11a, kTilde11b, kTilde12a, kTilde12b, kTilde22a, kTilde22b, lambda,
                           theta, mu_x, mu_y, s2);
}

Mat2 sigma_closed(double lambda, double theta, double mu_x, double mu_y, double s2) {
    if (lambda == 0.0) return zero_block(theta, mu_x, mu_y, s2, true);
    using namespace poly;
    return assemble_closed(kInf11a, kInf11b, kInf12a, kInf12b, kTilde22a, kTilde22b, lambda, theta,
                           mu_x, mu_y, s2);
}

Mat2 sigma_closed_printed(double lambda, double theta, double mu_x, double mu_y, double s2) {
    if (lambda == 0.0) return zero_block(theta, mu_x, mu_y, s2, true);
    using namespace poly;
    return assemble_closed(kInf11a, kInf11b, kInf12aPrinted, kInf12bPrinted, kTilde22a, kTilde22b,
                           lambda, theta, mu_x, mu_y, s2);
}

static Mat embed_blocks(const Mat& U, const std::vector<Mat2>& blocks) {
    const int d = static_cast<int>(U.rows());
    Mat S = Mat::Zero(2 * d, 2 * d);
    for (int i = 0; i < d; ++i) {
        S(i, i) = blocks[i](0, 0);
        S(i, d + i) = S(d + i, i) = blocks[i](0, 1);
        S(d + i, d + i) = blocks[i](1, 1);
    }
    Mat Q = Mat::Zero(2 * d, 2 * d);
    Q.topLeftCorner(d, d) = U;
    Q.bottomRightCorner(d, d) = U;
    Mat out = Q * S * Q.transpose();
    return 0.5 * (out + out.transpose());
}

LimitingCovariance limiting_covariance(const QuadProblem& q, double theta) {
    q.validate();
    if (!(theta > 0.0 && theta < 1.0)) throw DomainError("theta must lie in (0,1)");
    const int d = q.dim();
    const double s2 = q.delta * q.delta / d;
    SapdParams p;
    std::tie(p.tau, p.sigma) = cp_params(theta, q.mu_x, q.mu_y);
    p.theta = p.rho = theta;
    Eigen::SelfAdjointEigenSolver<Mat> es(q.K);
    const Vec lam = es.eigenvalues();
    const double knorm = lam.cwiseAbs().maxCoeff();
    LimitingCovariance out;
    out.theta = theta;
    std::vector<Mat2> s, st, se;
    const double gx = (1.0 - theta) / q.mu_x;  // tau/(1+tau mu_x)
    for (int i = 0; i < d; ++i) {
        BlockCovariance b;
        b.lambda = std::abs(lam[i]) < 1e-12 * knorm ? 0.0 : lam[i];
        b.kappa = kappa_of(b.lambda, q.mu_x, q.mu_y);
        if (!(theta > theta_min(b.kappa)))
            throw DomainError("theta must exceed the threshold for every eigenvalue of K");
        const Mat2 A = alambda_cp(b.lambda, theta, q.mu_x, q.mu_y);
        const Mat2 R = rlambda_cp(b.lambda, theta, q.mu_x, q.mu_y, s2);
        const Mat2 T = tlambda(b.lambda, p, q.mu_x);
        b.sigma_tilde = sigma_tilde_closed(b.lambda, theta, q.mu_x, q.mu_y, s2);
        b.sigma = sigma_closed(b.lambda, theta, q.mu_x, q.mu_y, s2);
        b.sigma_tilde_numeric = lyapunov_2x2(A, R);
        b.sigma_numeric = T * b.sigma_tilde_numeric * T.transpose();
        b.sigma_exact = b.sigma_numeric;
        b.sigma_exact(0, 0) += s2 * gx * gx;
        b.residual = (b.sigma_tilde - A * b.sigma_tilde * A.transpose() - R).norm();
        out.rho_A = std::max(out.rho_A, spectral_radius2(A));
        s.push_back(b.sigma);
        st.push_back(b.sigma_tilde);
        se.push_back(b.sigma_exact);
        out.blocks.push_back(b);
    }
    out.sigma = embed_blocks(es.eigenvectors(), s);
    out.sigma_tilde = embed_blocks(es.eigenvectors(), st);
    out.sigma_exact = embed_blocks(es.eigenvectors(), se);
    return out;
}

std::vector<Mat> covariance_recursion(const QuadProblem& q, const SapdParams& p, const Mat& S0,
                                      int n) {
    const QuadSpectralModel m = build_system(q, p);
    if (S0.rows() != m.A.rows() || S0.cols() != m.A.cols()) throw DomainError("Sigma_0 has wrong size");
    std::vector<Mat> seq;
    seq.reserve(static_cast<std::size_t>(n) + 1);
    seq.push_back(S0);
    for (int k = 0; k < n; ++k) {
        Mat next = m.A * seq.back() * m.A.transpose() + m.R;
        seq.push_back(0.5 * (next + next.transpose()));
    }
    return seq;
}

RateFit covariance_rate_fit(const QuadProblem& q, const SapdParams& p, int n_lo, int n_hi) {
    if (n_lo < 0 || n_hi <= n_lo) throw DomainError("bad fit window");
    const QuadSpectralModel m = build_system(q, p);
    const int d = q.dim();
    std::vector<Mat2> blocks;
    for (const auto& b : m.blocks) blocks.push_back(lyapunov_2x2(b.A, b.R));
    const Mat Sinf = embed_blocks(m.U, blocks);
    const auto seq = covariance_recursion(q, p, Mat::Zero(2 * d, 2 * d), n_hi);
    RateFit fit;
    for (int k = n_lo; k <= n_hi; ++k) {
        Eigen::SelfAdjointEigenSolver<Mat> es(seq[k] - Sinf, Eigen::EigenvaluesOnly);
        fit.n.push_back(k);
        fit.log_gap.push_back(std::log(es.eigenvalues().cwiseAbs().maxCoeff()));
    }
    const double N = static_cast<double>(fit.n.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < fit.n.size(); ++i) {
        sx += fit.n[i];
        sy += fit.log_gap[i];
        sxx += fit.n[i] * fit.n[i];
        sxy += fit.n[i] * fit.log_gap[i];
    }
    fit.slope = (N * sxy - sx * sy) / (N * sxx - sx * sx);
    fit.expected = 2.0 * std::log(m.spectral_radius);
    fit.ratio = fit.slope / fit.expected;
    return fit;
}

Tightness tightness_bounds(const QuadProblem& q, double theta, double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("p must lie in (0,1)");
    const LimitingCovariance lc = limiting_covariance(q, theta);
    Tightness t;
    Eigen::SelfAdjointEigenSolver<Mat> es(lc.sigma, Eigen::EigenvaluesOnly);
    t.min_eig = std::max(0.0, es.eigenvalues().minCoeff());
    const double lg = std::log(1.0 / (1.0 - p));
    t.psi1 = t.min_eig * std::max(0.0, 2.0 * q.dim() + 2.0 * lg - 2.5);
    const ProblemConstants c = q.constants();
    const SapdParams sp = cp_certified_params(theta, c);
    const Ledger led = build_ledger(c, sp, q.delta, q.delta);
    t.psi2 = distance_bound(led, theta, c, p);
    return t;
}

std::vector<std::pair<double, double>> ellipse_polyline(const Mat2& S, double level, int points) {
    if (points < 3) throw DomainError("need at least 3 points");
    Eigen::SelfAdjointEigenSolver<Mat2> es(S);
    if (es.eigenvalues().minCoeff() <= 0.0) throw DomainError("matrix must be positive definite");
    std::vector<std::pair<double, double>> out;
    for (int i = 0; i <= points; ++i) {
        const double a = 2.0 * std::numbers::pi * i / points;
        Eigen::Vector2d u(std::cos(a) * std::sqrt(level / es.eigenvalues()[0]),
                          std::sin(a) * std::sqrt(level / es.eigenvalues()[1]));
        const Eigen::Vector2d z = es.eigenvectors() * u;
        out.emplace_back(z[0], z[1]);
    }
    return out;
}

}  // namespace sapd
