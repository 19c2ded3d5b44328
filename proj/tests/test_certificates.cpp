#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "fixtures.hpp"
#include "sapd/certificates.hpp"
#include "sapd/engine.hpp"
#include "sapd/risk.hpp"

using namespace sapd;
using fx::v1;

namespace {

ProblemConstants constants(double mx, double my, double lxx, double lxy, double lyx, double lyy) {
    ProblemConstants c;
    c.mu_x = mx;
    c.mu_y = my;
    c.L = {lxx, lxy, lyx, lyy};
    return c;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1e-300, std::abs(b)); }

void check_core_equal(const LedgerCore& g, const LedgerCore& c) {
    for (int i = 0; i < 4; ++i) {
        CHECK(std::abs(g.A0[i] - c.A0[i]) <= 1e-10 * std::max(1.0, std::abs(c.A0[i])));
        CHECK(std::abs(g.A1[i] - c.A1[i]) <= 1e-10 * std::max(1.0, std::abs(c.A1[i])));
        CHECK(std::abs(g.A2[i] - c.A2[i]) <= 1e-10 * std::max(1.0, std::abs(c.A2[i])));
        CHECK(std::abs(g.A3[i] - c.A3[i]) <= 1e-10 * std::max(1.0, std::abs(c.A3[i])));
    }
    const double gv[] = {g.Bx, g.Cx, g.Cx1, g.By, g.By1, g.Cy, g.Cy1, g.Cy2, g.C_sigma_theta};
    const double cv[] = {c.Bx, c.Cx, c.Cx1, c.By, c.By1, c.Cy, c.Cy1, c.Cy2, c.C_sigma_theta};
    for (int i = 0; i < 9; ++i) CHECK(std::abs(gv[i] - cv[i]) <= 1e-10 * std::max(1e-12, std::abs(cv[i])));
}

}  // namespace

TEST_CASE("general and CP ledger forms agree") {
    const std::vector<std::pair<ProblemConstants, double>> cases{
        {constants(1, 1, 0, 1, 1, 0), 0.9},
        {constants(2, 0.5, 1.5, 3, 2, 0.7), 0.97},
        {constants(0.3, 4, 0.1, 0.5, 1.2, 2.0), 0.995},
        {constants(1, 1, 1, 1, 1, 1), 0.9},
    };
    for (const auto& [c, theta0] : cases) {
        const Thresholds t = theta_thresholds(c);
        const double theta = std::max({theta0, t.theta1 + 1e-3, t.theta2 + 1e-3});
        const SapdParams p = cp_certified_params(theta, c);
        check_core_equal(ledger_core_general(c, p), ledger_core_cp(theta, c));
    }
    // toy at theta = 0.9: Q_x from both forms
    const ProblemConstants c = constants(1, 1, 0, 1, 1, 0);
    const auto g = ledger_core_general(c, cp_certified_params(0.9, c));
    const auto k = ledger_core_cp(0.9, c);
    CHECK(rel(g.Qx(), k.Qx()) < 1e-10);
    CHECK(rel(g.Qy(), k.Qy()) < 1e-10);
}

TEST_CASE("ledger identities and zero noise") {
    const ProblemConstants c = constants(2, 0.5, 1.5, 3, 2, 0.7);
    const double theta = 0.99;
    const SapdParams p = cp_certified_params(theta, c);
    const Ledger l = build_ledger(c, p, 0.0, 0.0);
    CHECK(l.xi1 == 0.0);
    CHECK(l.xi2 == 0.0);
    CHECK(l.xi3 == 0.0);
    CHECK(l.mode == "gamma");
    const auto& k = l.core;
    CHECK(l.Qx == k.Bx + k.Cx + k.Cx1);
    CHECK(l.Qy == k.By + k.By1 + k.Cy + k.Cy1 + k.Cy2);
    CHECK(rel(l.xi2x, 64.0 / (1 - theta) * l.Qx) < 1e-14);
    CHECK(rel(l.xi2y, 64.0 / (1 - theta) * l.Qy) < 1e-14);
    const Ledger n = build_ledger(c, p, 0.3, 1.7);
    CHECK(rel(n.xi1, n.xi1x * 0.09 + n.xi1y * 1.7 * 1.7) < 1e-14);
    CHECK(rel(n.xi3, n.xi3x * 0.09 + n.xi3y * 1.7 * 1.7) < 1e-14);
    for (double v : {n.Qx, n.Qy, n.gamma_x, n.gamma_y, n.xi1, n.xi2, n.xi3, n.C}) {
        CHECK(std::isfinite(v));
        CHECK(v >= 0.0);
    }
    const Ledger d = build_ledger(c, p, 0.3, 1.7, v1(1), v1(2), v1(0), v1(0));
    CHECK(rel(d.D, 1.0 / (2 * p.tau) + 4.0 / (2 * p.sigma)) < 1e-14);
}

TEST_CASE("Xi terms stay bounded as theta -> 1") {
    const ProblemConstants c = constants(1, 2, 0.5, 1, 1.5, 0.3);
    std::vector<double> x1, x2;
    for (double e : {1e-2, 1e-3, 1e-4, 1e-5}) {
        const Ledger l = build_ledger(c, cp_certified_params(1 - e, c), 1.0, 1.0);
        x1.push_back(l.xi1);
        x2.push_back(l.xi2);
    }
    for (std::size_t i = 1; i < x1.size(); ++i) {
        CHECK(x1[i] / x1[i - 1] == doctest::Approx(1.0).epsilon(0.5));
        CHECK(x2[i] / x2[i - 1] == doctest::Approx(1.0).epsilon(0.5));
    }
}

TEST_CASE("q_bound shape") {
    const ProblemConstants c = constants(1, 1, 0, 1, 1, 0);
    const SapdParams p = cp_certified_params(0.95, c);
    const Ledger z = build_ledger(c, p, 0.0, 0.0, v1(10), v1(10), v1(0), v1(0));
    for (int n : {0, 10, 100})
        CHECK(rel(q_bound(z, p.rho, n, 0.0), std::pow((1 + p.rho) / 2, n) * z.C * z.D) < 1e-14);
    const Ledger l = build_ledger(c, p, 0.3, 0.3, v1(10), v1(10), v1(0), v1(0));
    const double floor = l.xi2 + l.xi3 * std::log(1 / (1 - 0.9));
    CHECK(q_bound(l, p.rho, 100000, 0.9) == doctest::Approx(floor).epsilon(1e-12));
    double prev = 0.0;
    for (double pp : {0.0, 0.5, 0.9, 0.99}) {
        const double q = q_bound(l, p.rho, 50, pp);
        CHECK(q > prev);
        prev = q;
    }
    CHECK(q_bound(l, p.rho, 51, 0.9) < q_bound(l, p.rho, 50, 0.9));
}

TEST_CASE("risk bound shapes") {
    const ProblemConstants c = constants(1, 1, 0, 1, 1, 0);
    const SapdParams p = cp_certified_params(0.95, c);
    const Ledger l = build_ledger(c, p, 0.3, 0.3, v1(10), v1(10), v1(0), v1(0));
    for (double pp : {0.0, 0.3, 0.5, 0.9, 0.99, 0.999})
        for (int n : {0, 10, 100, 1000})
            CHECK(evar_bound(l, p.rho, n, pp) >= cvar_bound(l, p.rho, n, pp));
    const double g = std::pow((1 + p.rho) / 2, 10 / 2.0);
    CHECK(cvar_bound(l, p.rho, 10, 0.0) ==
          doctest::Approx(std::sqrt(g * (l.C * l.D + l.xi1) + l.xi2) + std::sqrt(l.xi3)).epsilon(1e-14));
    CHECK(chi2_bound(l, p.rho, 10, 1.0) == doctest::Approx(evar_bound(l, p.rho, 10, 0.5)).epsilon(1e-14));
    const Ledger z = build_ledger(c, p, 0.0, 0.0, v1(10), v1(10), v1(0), v1(0));
    const RiskBounds b = risk_bounds(z, p.rho, 100000, 0.9, 1.0);
    CHECK(b.cvar < 1e-100);
    CHECK(b.evar < 1e-100);
    CHECK(b.chi2 < 1e-100);
    CHECK_THROWS_AS(chi2_bound(l, p.rho, 1, -1.0), DomainError);
}

TEST_CASE("complexity scaling") {
    const ProblemConstants c = constants(1, 1, 0, 10, 10, 0);
    const Complexity a = complexity_n(1e-3, 0.9, c, 0.0, 0.0, 100.0);
    const Complexity b = complexity_n(5e-4, 0.9, c, 0.0, 0.0, 100.0);
    CHECK(a.theta == b.theta);
    const double step = 2.0 / (1 - a.theta) * std::log(2.0);
    CHECK(std::abs(static_cast<double>(b.n - a.n) - step) <= 1.0);
    CHECK(a.factor == doctest::Approx(32 + 6 * 2400.0 + 4 * 480.0));
    for (double k : {10.0, 20.0, 40.0}) {
        const Complexity n1 = complexity_n(1e-3, 0.9, constants(1, 1, 0, k, k, 0), 0, 0, 100.0);
        const Complexity n2 = complexity_n(1e-3, 0.9, constants(1, 1, 0, 2 * k, 2 * k, 0), 0, 0, 100.0);
        CHECK(static_cast<double>(n2.n) / n1.n == doctest::Approx(2.0).epsilon(0.25));
    }
    // p enters only through the noise-driven theta
    CHECK(complexity_n(1e-3, 0.5, c, 0, 0, 100.0).n == complexity_n(1e-3, 0.99, c, 0, 0, 100.0).n);
    CHECK(complexity_n(1e-3, 0.99, c, 1, 1, 100.0).n > complexity_n(1e-3, 0.5, c, 1, 1, 100.0).n);
    CHECK_THROWS_AS(complexity_n(0.0, 0.9, c, 0, 0, 1.0), DomainError);
}

TEST_CASE("partial bounds hold with the default a-constants on a fresh grid") {
    const Stream s(31337, 0);
    int checked = 0;
    for (std::uint64_t i = 0; i < 3000; ++i) {
        auto lu = [&](int j, double lo, double hi) {
            return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * s.uniform(i, OracleTag::aux, j));
        };
        ProblemConstants c = constants(lu(0, 1e-2, 1e2), lu(1, 1e-2, 1e2), lu(2, 1e-2, 1e3),
                                       lu(3, 1e-2, 1e3), lu(4, 1e-2, 1e3), lu(5, 1e-2, 1e3));
        if (s.uniform(i, OracleTag::aux, 6) < 0.3) c.L.xx = 0.0;
        if (s.uniform(i, OracleTag::aux, 7) < 0.3) c.L.yy = 0.0;
        const Thresholds t = theta_thresholds(c);
        const double t0 = std::max({0.5, t.theta1, t.theta2});
        const double u = s.uniform(i, OracleTag::aux, 8);
        const double theta = 1.0 - (1.0 - t0) * std::pow(1e-4, u);
        if (!(theta < 1.0)) continue;
        const PartialBounds b = partial_bounds(ledger_core_cp(theta, c), theta, c);
        CHECK(b.all());
        ++checked;
    }
    CHECK(checked > 2900);
}

TEST_CASE("stationary floor scales with 1 - theta") {
    const ProblemConstants c = constants(1, 1, 0, 1, 1, 0);
    auto fl = [&](double th) {
        return stationary_floor(build_ledger(c, cp_certified_params(th, c), 0.3, 0.3), th, c, 0.9);
    };
    const double r = fl(0.999) / fl(0.99);
    CHECK(r >= 0.1 / 3);
    CHECK(r <= 0.1 * 3);
}

TEST_CASE("bounds dominate the toy ensemble") {
    const QuadProblem q = fx::toy();
    const SaddleProblem prob = q.saddle_problem();
    const SapdParams p = fx::cp(q, 0.95);
    const ProblemConstants c = q.constants();
    const Ledger l = build_ledger(c, p, q.delta, q.delta, v1(10), v1(10), v1(0), v1(0));
    const auto ens = ensemble(prob, p, 1001, v1(10), v1(10), NoiseModel::gaussian(q.delta), 2000, 42);
    REQUIRE(ens.failures == 0);
    for (int n : {100, 300, 1000}) {
        std::vector<double> s, r;
        for (const auto& t : ens.runs) {
            s.push_back(t.D[n + 1] + t.D[n]);
            r.push_back(std::sqrt(t.D[n + 1]));
        }
        const SampleSet S(s), Rs(r);
        for (double pp : {0.5, 0.9, 0.99}) CHECK(var_p(S, pp) <= q_bound(l, p.rho, n, pp));
        for (double pp : {0.5, 0.9}) {
            CHECK(cvar_p(Rs, pp) <= cvar_bound(l, p.rho, n, pp));
            CHECK(evar_p(Rs, pp) <= evar_bound(l, p.rho, n, pp));
        }
    }
}
