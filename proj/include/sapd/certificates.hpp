#pragma once

#include <string>

#include <Eigen/Dense>

#include "sapd/core.hpp"
#include "sapd/params.hpp"

namespace sapd {

using Vec4 = Eigen::Vector4d;

// A-vectors and the B/C constants of the one-step analysis.
struct LedgerCore {
    Vec4 A0 = Vec4::Zero();
    Vec4 A1 = Vec4::Zero();
    Vec4 A2 = Vec4::Zero();
    Vec4 A3 = Vec4::Zero();
    double Bx = 0.0, Cx = 0.0, Cx1 = 0.0;
    double By = 0.0, By1 = 0.0, Cy = 0.0, Cy1 = 0.0, Cy2 = 0.0;
    double C_sigma_theta = 0.0;

    double Qx() const { return Bx + Cx + Cx1; }
    double Qy() const { return By + By1 + Cy + Cy1 + Cy2; }
};

// General (tau, sigma, theta, rho, alpha) forms.
LedgerCore ledger_core_general(const ProblemConstants& c, const SapdParams& p);
// Simplified forms under the CP rule with rho = theta and alpha*sigma = 1/2 - sigma sqrt(theta) L_yy.
LedgerCore ledger_core_cp(double theta, const ProblemConstants& c);

struct Ledger {
    LedgerCore core;
    double Qx = 0.0, Qy = 0.0;
    double gamma_x = 0.0, gamma_y = 0.0;
    double xi1x = 0.0, xi1y = 0.0, xi2x = 0.0, xi2y = 0.0, xi3x = 0.0, xi3y = 0.0;
    double xi1 = 0.0, xi2 = 0.0, xi3 = 0.0;
    double C = 0.0;  // multiplies the bias D
    double D = 0.0;  // (1/2tau)|x0-x*|^2 + (1/2sigma)|y0-y*|^2
    double nu_x = 0.0, nu_y = 0.0;
    double theta = 0.0, rho = 0.0;
    std::string mode = "gamma";
};

Ledger build_ledger(const ProblemConstants& c, const SapdParams& p, double nu_x, double nu_y);
Ledger build_ledger(const ProblemConstants& c, const SapdParams& p, double nu_x, double nu_y,
                    const Vec& x0, const Vec& y0, const Vec& xs, const Vec& ys);

// Bound on the p-quantile of D_{n+1} + D_n.
double q_bound(const Ledger& l, double rho, int n, double p);

struct RiskBounds {
    double cvar = 0.0;
    double evar = 0.0;
    double chi2 = 0.0;
};

// Bounds on risk measures of D_{n+1}^{1/2}; chi2 uses radius r.
RiskBounds risk_bounds(const Ledger& l, double rho, int n, double p, double r);
double cvar_bound(const Ledger& l, double rho, int n, double p);
double evar_bound(const Ledger& l, double rho, int n, double p);
double chi2_bound(const Ledger& l, double rho, int n, double r);

// Upper witness for the p-quantile of E_infinity.
double distance_bound(const Ledger& l, double theta, const ProblemConstants& c, double p);
// Same without the bias-carrying Xi^(1): stationary floor in E units.
double stationary_floor(const Ledger& l, double theta, const ProblemConstants& c, double p);

struct PartialBounds {
    bool qx = false, qy = false, a1 = false, a2 = false, a3 = false;
    bool all() const { return qx && qy && a1 && a2 && a3; }
};

// Checks |A_i|^2, Q_x, Q_y against (1-theta)/mu (a-combinations).
PartialBounds partial_bounds(const LedgerCore& core, double theta, const ProblemConstants& c,
                             const UniversalConstants& u = {});

struct Complexity {
    double theta = 0.0;
    long long n = 0;
    double factor = 0.0;  // 32 + 6 a1 + 4 a3 (L_xy/L_yx)^2
};

// W0 = mu_x |x0-x*|^2 + mu_y |y0-y*|^2.
Complexity complexity_n(double eps, double p, const ProblemConstants& c, double nu_x, double nu_y,
                        double W0, const UniversalConstants& u = {});

}  // namespace sapd
