#pragma once

#include <complex>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sapd/core.hpp"
#include "sapd/params.hpp"

namespace sapd {

using Mat2 = Eigen::Matrix2d;

// min_x max_y mu_x/2|x|^2 + <Kx, y> - mu_y/2|y|^2 with isotropic gradient noise
// of per-coordinate variance delta^2/d.
struct QuadProblem {
    Mat K;
    double mu_x = 1.0;
    double mu_y = 1.0;
    double delta = 0.0;

    int dim() const { return static_cast<int>(K.rows()); }
    void validate() const;
    ProblemConstants constants() const;
    SaddleProblem saddle_problem() const;
};

struct LambdaBlock {
    double lambda = 0.0;
    double kappa = 0.0;
    double theta_min = 0.0;
    Mat2 A;      // general form
    Mat2 R;
    Mat2 A_cp;   // CP form in theta (equals A when tau, sigma follow the CP rule)
    Mat2 R_cp;
};

struct QuadSpectralModel {
    Vec eigenvalues;
    Mat U;
    std::vector<LambdaBlock> blocks;
    Mat A;  // 2d x 2d, acting on (x_{k-1}, y_k)
    Mat B;  // 2d x 3d, acting on (w^x_{k-1}, w^y_{k-1}, w^y_k)
    Mat R;  // (delta^2/d) (B B^T + A B_3 B_2^T + B_2 B_3^T A^T), B_j the column blocks of B
    double spectral_radius = 0.0;
};

double kappa_of(double lambda, double mu_x, double mu_y);
// (sqrt(1+kappa^2)-1)/|kappa|, zero at kappa = 0.
double theta_min(double kappa);

Mat2 alambda_general(double lambda, const SapdParams& p, double mu_x, double mu_y);
Mat2 rlambda_general(double lambda, const SapdParams& p, double mu_x, double mu_y, double s2);
Mat2 alambda_cp(double lambda, double theta, double mu_x, double mu_y);
Mat2 rlambda_cp(double lambda, double theta, double mu_x, double mu_y, double s2);
// Change of variables (x_{n-1}, y_n) -> (x_n, y_n), noise term excluded.
Mat2 tlambda(double lambda, const SapdParams& p, double mu_x);

QuadSpectralModel build_system(const QuadProblem& q, const SapdParams& p);

struct EigenPair {
    std::complex<double> nu1;
    std::complex<double> nu2;
    Eigen::Matrix2cd V;
};

EigenPair eigen_Alambda(const Mat2& A, double theta, double kappa);

// nu1^k + nu2^k for k in {2,3,4}, polynomial identities in (theta, kappa).
double power_sum_closed(int k, double theta, double kappa);
double eig_product_closed(double theta, double kappa);
double eig_sum_closed(double theta, double kappa);

// Sigma = A Sigma A^T + R via the vectorized 4x4 system.
Mat2 lyapunov_2x2(const Mat2& A, const Mat2& R);
// Any size, by squaring (Smith iteration); used as an independent check.
Mat lyapunov_doubling(const Mat& A, const Mat& R, int max_iter = 200);
double lyapunov_residual(const Mat& S, const Mat& A, const Mat& R);

namespace poly {
struct Term {
    int kpow;
    int omt_pow;
    std::vector<int> coeffs;
};
using PolyTable = std::vector<Term>;
double eval(const PolyTable& t, double theta, double kappa);

extern const PolyTable kTilde11a, kTilde11b, kTilde12a, kTilde12b, kTilde22a, kTilde22b;
extern const PolyTable kInf11a, kInf11b, kInf12a, kInf12b;
extern const PolyTable kInf12aPrinted, kInf12bPrinted;
extern const PolyTable kCommon;
}  // namespace poly

// Closed-form stationary covariance of (x_{n-1}, y_n) for one eigenvalue.
Mat2 sigma_tilde_closed(double lambda, double theta, double mu_x, double mu_y, double s2);
// Closed-form stationary covariance of (x_n, y_n) for one eigenvalue.
Mat2 sigma_closed(double lambda, double theta, double mu_x, double mu_y, double s2);
// Same, with the off-diagonal table exactly as printed.
Mat2 sigma_closed_printed(double lambda, double theta, double mu_x, double mu_y, double s2);

struct BlockCovariance {
    double lambda = 0.0;
    double kappa = 0.0;
    Mat2 sigma_tilde;          // closed form
    Mat2 sigma;                // closed form
    Mat2 sigma_tilde_numeric;  // lyapunov_2x2
    Mat2 sigma_numeric;        // T sigma_tilde_numeric T^T
    Mat2 sigma_exact;          // includes the x-noise of the last step
    double residual = 0.0;     // of sigma_tilde against (A_cp, R_cp)
};

struct LimitingCovariance {
    double theta = 0.0;
    std::vector<BlockCovariance> blocks;
    Mat sigma;        // 2d x 2d in (x, y) coordinates
    Mat sigma_tilde;  // 2d x 2d for (x_{n-1}, y_n)
    Mat sigma_exact;
    double rho_A = 0.0;
};

LimitingCovariance limiting_covariance(const QuadProblem& q, double theta);

// Sigma~_{k+1} = A Sigma~_k A^T + R (exact for k >= 1); returns Sigma~_0..Sigma~_n.
std::vector<Mat> covariance_recursion(const QuadProblem& q, const SapdParams& p, const Mat& S0,
                                      int n);

struct RateFit {
    double slope = 0.0;
    double expected = 0.0;  // 2 log rho(A)
    double ratio = 0.0;
    std::vector<double> n;
    std::vector<double> log_gap;
};

// Least-squares slope of log rho(Sigma~_n - Sigma~_inf) over [n_lo, n_hi], Sigma~_0 = 0.
RateFit covariance_rate_fit(const QuadProblem& q, const SapdParams& p, int n_lo, int n_hi);

struct Tightness {
    double psi1 = 0.0;
    double psi2 = 0.0;
    double min_eig = 0.0;
};

Tightness tightness_bounds(const QuadProblem& q, double theta, double p);

// Level set {z : z^T S z = level} as a closed polyline.
std::vector<std::pair<double, double>> ellipse_polyline(const Mat2& S, double level, int points);

}  // namespace sapd
