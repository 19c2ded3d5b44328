#include "sapd/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sapd {

LedgerCore ledger_core_general(const ProblemConstants& c, const SapdParams& p) {
    c.validate();
    p.validate();
    const double tau = p.tau, sig = p.sigma, t = p.theta, rho = p.rho;
    const double Lxx = c.L.xx, Lxy = c.L.xy, Lyx = c.L.yx, Lyy = c.L.yy;
    const double a = 1.0 + tau * c.mu_x;
    const double b = 1.0 + sig * c.mu_y;
    const double oas = 1.0 - p.alpha * sig;
    if (!(oas > 0.0)) throw DomainError("1 - alpha*sigma must be positive");
    LedgerCore L;
    const double Cs = 1.0 + sig * (1.0 + t) * Lyy;
    L.C_sigma_theta = Cs;
    const double rt = std::sqrt(2.0 * rho * tau);
    const double rs = std::sqrt(2.0 * rho * sig / oas);
    L.A0 = Vec4(rt * sig * (1.0 + t) * Lyx, rs * Cs, rt * sig * t * Lyx, rs * sig * t * Lyy) / b;
    const double n0 = L.A0.squaredNorm();
    const double k = rho / (4.0 * n0 * (1.0 + rho));
    const double s2t2 = sig * sig * (1.0 + t) * (1.0 + t);
    const double lyx_term = s2t2 * Lyx * Lyx / (b * b) * k * 3.0 * tau * tau;

    L.Bx = 4.0 * tau / (1.0 + rho) + lyx_term / (a * a);
    L.Cx = tau / a + tau * sig * (1.0 + 2.0 * t) * Lxy / (2.0 * a * b);
    L.Cx1 = tau * sig * t / (2.0 * rho * b) * (1.0 + t) * Lyx / a;

    L.By = 4.0 * (1.0 + t) * (1.0 + t) * sig / ((1.0 + rho) * oas) +
           3.0 * n0 * (1.0 + rho) * t * t / (rho * rho * rho) +
           k * Cs * Cs / (b * b) * 2.0 * s2t2 / (b * b) +
           lyx_term * s2t2 * Lxy * Lxy / (a * a * b * b);
    L.By1 = 4.0 * sig * t * t / (rho * (1.0 + rho) * oas) +
            k * Cs * Cs / (b * b) * 2.0 * sig * sig * t * t / rho / (b * b) +
            lyx_term * sig * sig * t * t / rho * Lxy * Lxy / (a * a * b * b);
    L.Cy = sig * (1.0 + 2.0 * t) * (1.0 + t) / b + tau * sig * (1.0 + t) * Lxy / (2.0 * a * b);
    const double G = Cs / b + tau * sig * (1.0 + t) * Lyx * Lxy / (a * b);
    L.Cy2 = sig * t * t / (2.0 * rho * rho * b) * G;
    L.Cy1 = sig * t / (rho * b) *
            (1.0 + 2.0 * t + tau / (2.0 * a) * ((1.0 + t) * Lyx + Lxy) + (1.0 + 1.5 * t) * G);

    const Vec4 A1h(1.0 + tau * Lxx + tau * sig * (1.0 + t) * Lyx * Lxy / b, tau * Lxy * Cs / b,
                   sig * tau * t * Lxy * Lyx / b, sig * tau * t * Lxy * Lyy / b);
    const Vec4 A2h(sig * (1.0 + t) * Lyx, Cs, sig * t * Lyx, sig * t * Lyy);
    const Vec4 A3h(
        Cs * sig * (1.0 + t) * a * Lyx +
            sig * (1.0 + t) * Lyx * ((1.0 + tau * Lxx) * b + tau * sig * (1.0 + t) * Lyx * Lxy) +
            sig * t * Lyx * a * b,
        a * Cs * Cs + sig * (1.0 + t) * Lyx * tau * Lxy * Cs + sig * t * Lyy * a * b,
        sig * (Cs * t * Lyx * a + (1.0 + t) * tau * sig * t * Lxy * Lyx * Lyx),
        sig * (Cs * t * Lyy * a + (1.0 + t) * tau * sig * t * Lxy * Lyx * Lyy));
    const Vec4 D(rt, rs, rt, rs);
    const double s = std::sqrt((1.0 + rho) / rho);
    L.A1 = s * 4.0 / a * A1h.cwiseProduct(D);
    L.A2 = s * 4.0 * std::sqrt(2.0) * (1.0 + t) / b * A2h.cwiseProduct(D);
    L.A3 = s * 4.0 * std::sqrt(2.0) * t / rho / (b * b * a) * A3h.cwiseProduct(D);
    return L;
}

LedgerCore ledger_core_cp(double theta, const ProblemConstants& c) {
    c.validate();
    if (!(theta > 0.0 && theta < 1.0)) throw DomainError("theta must lie in (0,1)");
    const double t = theta, om = 1.0 - theta, mx = c.mu_x, my = c.mu_y;
    const double Lxx = c.L.xx, Lxy = c.L.xy, Lyx = c.L.yx, Lyy = c.L.yy;
    const double h = 0.5 + om * Lyy / (std::sqrt(t) * my);
    const double s2 = std::sqrt(2.0);
    LedgerCore L;
    L.A0 = std::sqrt(om / my) *
           Vec4(s2 * (1.0 + t) * om * Lyx / std::sqrt(mx * my),
                s2 * t / std::sqrt(h) * (1.0 + (1.0 + t) / t * om * Lyy / my),
                s2 * t * om * Lyx / std::sqrt(mx * my), s2 * t / std::sqrt(h) * om * Lyy / my);
    const double n0 = L.A0.squaredNorm();
    const double Cs = 1.0 + om * (1.0 + t) / t * Lyy / my;
    L.C_sigma_theta = Cs;
    const double LL = Lyx * Lyx * Lxy * Lxy / (mx * mx * my * my);
    L.Bx = om / mx *
           (4.0 / (t * (1.0 + t)) + 1.0 / n0 * 3.0 * t * (1.0 + t) * om / 4.0 * om * om * Lyx * Lyx /
                                        (mx * my * my));
    const double quad = Cs * Cs;
    L.By = om / my *
           (4.0 * (1.0 + t) / (t * h) + 3.0 * n0 * (1.0 + t) * my / (t * om) +
            t * t * t * (1.0 + t) * om / (2.0 * my * n0) * quad +
            3.0 * t * std::pow(1.0 + t, 3) / (4.0 * n0) * std::pow(om, 5) / my * LL);
    L.By1 = om / my *
            (4.0 / ((1.0 + t) * h) + std::pow(t, 4) * om / (2.0 * n0 * (1.0 + t) * my) * quad +
             om / my * 3.0 * (1.0 + t) * t * t / (4.0 * n0) * std::pow(om, 4) * LL);
    L.Cx = om / mx * (1.0 + (1.0 + 2.0 * t) / 2.0 * om * Lxy / my);
    L.Cx1 = om / mx * ((1.0 + t) / 2.0 * om * Lyx / my);
    L.Cy = om / my * ((1.0 + 2.0 * t) * (1.0 + t) + (1.0 + t) / 2.0 * om * Lxy / mx);
    L.Cy1 = om / my *
            (1.0 + 2.0 * t + (1.0 + t) / 2.0 * om * Lyx / mx + 0.5 * om * Lxy / mx +
             (1.0 + 1.5 * t) *
                 (t + om * (1.0 + t) * Lyy / my + om * om * (1.0 + t) * Lyx * Lxy / (mx * my)));
    L.Cy2 = om / my *
            (t / 2.0 + (1.0 + t) / 2.0 * om * Lyy / my +
             (1.0 + t) / 2.0 * om * om * Lyx * Lxy / (mx * my));
    const Vec4 H(std::sqrt(2.0 / mx), std::sqrt(2.0 / my) / std::sqrt(h), std::sqrt(2.0 / mx),
                 std::sqrt(2.0 / my) / std::sqrt(h));
    const double so = std::sqrt(om), stt = std::sqrt(t * (1.0 + t));
    const double om2 = om * om, om3 = om2 * om;
    L.A1 = so * 4.0 * stt *
           H.cwiseProduct(Vec4(1.0 + om / t * Lxx / mx + (1.0 + t) / t * om2 * Lxy * Lyx / (mx * my),
                               om * Lxy / mx * Cs, om2 * Lxy * Lyx / (mx * my),
                               om2 * Lxy * Lyy / (mx * my)));
    L.A2 = so * 4.0 * s2 * stt * (1.0 + t) *
           H.cwiseProduct(Vec4((1.0 + t) / t * om * Lyx / my, Cs, om * Lyx / my, om * Lyy / my));
    const double p1 = (1.0 + t), p2 = p1 * p1;
    L.A3 = so * 4.0 * s2 * stt *
           H.cwiseProduct(Vec4(
               (1.0 + 2.0 * p1) * om * Lyx / my + p2 / t * om2 * Lyx * Lyy / (my * my) +
                   p1 / t * om2 * Lxx * Lyx / (mx * my) + p2 / t * om3 * Lyx * Lyx * Lxy / (mx * my * my),
               t + (1.0 + 2.0 * p1) * om * Lyy / my + p2 / t * om2 * Lyy * Lyy / (my * my) +
                   om2 * p1 * Lxy * Lyx / (mx * my) + om3 * p2 / t * Lyx * Lxy * Lyy / (mx * my * my),
               t * om * Lyx / my + p1 * om2 * Lyx * Lyy / (my * my) +
                   p1 * om3 * Lxy * Lyx * Lyx / (mx * my * my),
               t * om * Lyy / my + p1 * om2 * Lyy * Lyy / (my * my) +
                   p1 * om3 * Lxy * Lyx * Lyy / (mx * my * my)));
    return L;
}

Ledger build_ledger(const ProblemConstants& c, const SapdParams& p, double nu_x, double nu_y) {
    if (nu_x < 0.0 || nu_y < 0.0) throw DomainError("noise proxies must be nonnegative");
    Ledger l;
    l.core = ledger_core_general(c, p);
    l.Qx = l.core.Qx();
    l.Qy = l.core.Qy();
    l.theta = p.theta;
    l.rho = p.rho;
    l.nu_x = nu_x;
    l.nu_y = nu_y;
    const double t = p.theta, om = 1.0 - p.theta;
    const double a1 = l.core.A1.squaredNorm(), a2 = l.core.A2.squaredNorm(),
                 a3 = l.core.A3.squaredNorm();
    l.gamma_x = 2.0 * t * p.tau + 16.0 * l.Qx + 4.0 * a1;
    l.gamma_y = 4.0 * t * p.sigma + 16.0 * l.Qy + 4.0 * a2 + 4.0 * a3;
    l.xi1x = 16.0 * t * p.tau + 32.0 * l.Qx;
    l.xi1y = 16.0 * t * p.sigma + 32.0 * l.Qy;
    l.xi2x = 64.0 * l.Qx / om;
    l.xi2y = 64.0 * l.Qy / om;
    l.xi3x = 8.0 * t * l.gamma_x / om;
    l.xi3y = 8.0 * t * l.gamma_y / om;
    const double vx = nu_x * nu_x, vy = nu_y * nu_y;
    l.xi1 = l.xi1x * vx + l.xi1y * vy;
    l.xi2 = l.xi2x * vx + l.xi2y * vy;
    l.xi3 = l.xi3x * vx + l.xi3y * vy;
    l.C = 4.0 + (c.mu_x * a1 + c.mu_y / 2.0 * (a2 + a3)) / (4.0 * om);
    return l;
}

Ledger build_ledger(const ProblemConstants& c, const SapdParams& p, double nu_x, double nu_y,
                    const Vec& x0, const Vec& y0, const Vec& xs, const Vec& ys) {
    Ledger l = build_ledger(c, p, nu_x, nu_y);
    if (x0.size() != xs.size() || y0.size() != ys.size()) throw DomainError("dimension mismatch");
    l.D = (x0 - xs).squaredNorm() / (2.0 * p.tau) + (y0 - ys).squaredNorm() / (2.0 * p.sigma);
    return l;
}

static double log_tail(double p) {
    if (!(p >= 0.0 && p < 1.0)) throw DomainError("p must lie in [0,1)");
    return std::log(1.0 / (1.0 - p));
}

static double geometric(double rho, double n) {
    if (!(rho > 0.0 && rho < 1.0)) throw DomainError("rho must lie in (0,1)");
    if (n < 0) throw DomainError("n must be nonnegative");
    return std::pow((1.0 + rho) / 2.0, n);
}

double q_bound(const Ledger& l, double rho, int n, double p) {
    const double lg = log_tail(p);
    return geometric(rho, n) * (l.C * l.D + l.xi1) + l.xi2 + l.xi3 * lg;
}

static double risk_head(const Ledger& l, double rho, int n) {
    return std::sqrt(geometric(rho, n / 2.0) * (l.C * l.D + l.xi1) + l.xi2);
}

double cvar_bound(const Ledger& l, double rho, int n, double p) {
    const double lg = log_tail(p);
    return risk_head(l, rho, n) + std::sqrt(l.xi3 * (1.0 + lg));
}

double evar_bound(const Ledger& l, double rho, int n, double p) {
    const double lg = log_tail(p);
    return risk_head(l, rho, n) + std::sqrt(l.xi3) * (std::sqrt(lg) + std::sqrt(std::numbers::pi));
}

double chi2_bound(const Ledger& l, double rho, int n, double r) {
    if (!(r >= 0.0)) throw DomainError("r must be nonnegative");
    return evar_bound(l, rho, n, 1.0 - 1.0 / (1.0 + r));
}

RiskBounds risk_bounds(const Ledger& l, double rho, int n, double p, double r) {
    return {cvar_bound(l, rho, n, p), evar_bound(l, rho, n, p), chi2_bound(l, rho, n, r)};
}

double distance_bound(const Ledger& l, double theta, const ProblemConstants& c, double p) {
    const double lg = log_tail(p);
    return 4.0 * (1.0 - theta) / (theta * std::min(c.mu_x, c.mu_y)) * (l.xi1 + l.xi2 + l.xi3 * lg);
}

double stationary_floor(const Ledger& l, double theta, const ProblemConstants& c, double p) {
    const double lg = log_tail(p);
    return 4.0 * (1.0 - theta) / (theta * std::min(c.mu_x, c.mu_y)) * (l.xi2 + l.xi3 * lg);
}

PartialBounds partial_bounds(const LedgerCore& core, double theta, const ProblemConstants& c,
                             const UniversalConstants& u) {
    const double om = 1.0 - theta;
    const double r = c.L.xy / c.L.yx;
    const double fx = om / c.mu_x, fy = om / c.mu_y;
    PartialBounds b;
    b.qx = core.Qx() <= fx * (u.a1 + u.a2 * r);
    b.qy = core.Qy() <= fy * (u.a1 + u.a2 * r + u.a3 * r * r);
    b.a1 = core.A1.squaredNorm() <= fx * (u.a1 + u.a3 * r * r);
    b.a2 = core.A2.squaredNorm() <= fy * u.a1;
    b.a3 = core.A3.squaredNorm() <= fy * (u.a1 + u.a3 * r * r);
    return b;
}

Complexity complexity_n(double eps, double p, const ProblemConstants& c, double nu_x, double nu_y,
                        double W0, const UniversalConstants& u) {
    if (!(eps > 0.0)) throw DomainError("eps must be positive");
    if (W0 < 0.0) throw DomainError("W0 must be nonnegative");
    if (!(c.L.yx > 0.0)) throw DomainError("L_yx must be positive");
    const ThetaSelection sel = select_theta(eps, p, c, nu_x, nu_y, u);
    Complexity out;
    out.theta = sel.theta;
    const double r = c.L.xy / c.L.yx;
    out.factor = 32.0 + 6.0 * u.a1 + 4.0 * u.a3 * r * r;
    const double arg = out.factor * W0 / eps;
    const double n = arg > 1.0 ? 2.0 / (1.0 - sel.theta) * std::log(arg) : 0.0;
    out.n = static_cast<long long>(std::ceil(n));
    return out;
}

}  // namespace sapd
