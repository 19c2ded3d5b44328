#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "sapd/core.hpp"
#include "sapd/risk.hpp"

using namespace sapd;

namespace {

std::vector<double> one_to_ten() {
    std::vector<double> v(10);
    std::iota(v.begin(), v.end(), 1.0);
    return v;
}

std::vector<double> random_set(const Stream& s, std::uint64_t i, int n) {
    std::vector<double> v(n);
    for (int j = 0; j < n; ++j) {
        const double z = s.normal(i, OracleTag::aux, j);
        v[j] = (i % 2 == 0) ? z : std::exp(z);  // symmetric and skewed sets
    }
    return v;
}

}  // namespace

TEST_CASE("VaR and CVaR examples") {
    const SampleSet s(one_to_ten());
    CHECK(var_p(s, 0.8) == 8.0);
    CHECK(cvar_p(s, 0.8) == doctest::Approx(9.5).epsilon(1e-14));
    CHECK(var_p(s, 0.0) == 1.0);
    CHECK(cvar_p(s, 0.0) == doctest::Approx(5.5).epsilon(1e-14));
    CHECK(var_p(s, 0.95) == 10.0);
    CHECK(var_p(s, 0.7) == 7.0);
}

TEST_CASE("constant samples") {
    const SampleSet s(std::vector<double>(17, 3.25));
    for (double p : {0.0, 0.3, 0.9, 0.999}) {
        CHECK(var_p(s, p) == 3.25);
        CHECK(cvar_p(s, p) == doctest::Approx(3.25).epsilon(1e-14));
        CHECK(evar_p(s, p) == doctest::Approx(3.25).epsilon(1e-12));
    }
    for (double r : {0.0, 1.0, 10.0}) CHECK(chi2_risk(s, r) == doctest::Approx(3.25).epsilon(1e-12));
}

TEST_CASE("errors") {
    CHECK_THROWS_AS(SampleSet(std::vector<double>{}), DomainError);
    CHECK_THROWS_AS(SampleSet(std::vector<double>{1.0, NAN}), DomainError);
    const SampleSet s(one_to_ten());
    CHECK_THROWS_AS(var_p(s, 1.0), DomainError);
    CHECK_THROWS_AS(cvar_p(s, -0.1), DomainError);
    CHECK_THROWS_AS(chi2_risk(s, -1.0), DomainError);
}

TEST_CASE("EVaR at p = 0 is the mean") {
    const SampleSet s(one_to_ten());
    CHECK(evar_p(s, 0.0) == doctest::Approx(5.5).epsilon(1e-8));
}

TEST_CASE("EVaR of standard normal draws") {
    const Stream st(2024, 0);
    std::vector<double> v(1000000);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = st.normal(0, OracleTag::aux, i);
    const EvarResult r = evar_detail(SampleSet(std::move(v)), 1.0 - std::exp(-2.0));
    CHECK(std::abs(r.value - 2.0) <= 0.02);
    CHECK_FALSE(r.at_boundary);
}

TEST_CASE("coherence laws on random sample sets") {
    const Stream st(99, 0);
    const double tol = 1e-9;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        const int n = 5 + static_cast<int>(st.bits(i, OracleTag::batch_x, 0) % 60);
        const std::vector<double> v = random_set(st, i, n);
        const SampleSet s(v);
        const double c = 3.0 * st.normal(i, OracleTag::batch_y, 0);
        const double a = 0.1 + 4.0 * st.uniform(i, OracleTag::batch_y, 1);
        std::vector<double> shift(v), scale(v);
        for (auto& x : shift) x += c;
        for (auto& x : scale) x *= a;
        const SampleSet ss(shift), sa(scale);
        double prev[3] = {-INFINITY, -INFINITY, -INFINITY};
        for (double p : {0.0, 0.25, 0.5, 0.8, 0.9, 0.95}) {
            const double q = var_p(s, p), cv = cvar_p(s, p), ev = evar_p(s, p);
            CHECK(q <= cv + tol);
            CHECK(cv <= ev + tol * std::max(1.0, std::abs(ev)));
            CHECK(var_p(ss, p) == doctest::Approx(q + c).epsilon(1e-12));
            CHECK(std::abs(cvar_p(ss, p) - (cv + c)) <= tol * std::max(1.0, std::abs(cv + c)));
            CHECK(std::abs(evar_p(ss, p) - (ev + c)) <= tol * std::max(1.0, std::abs(ev + c)));
            CHECK(std::abs(var_p(sa, p) - a * q) <= tol * std::max(1.0, std::abs(a * q)));
            CHECK(std::abs(cvar_p(sa, p) - a * cv) <= tol * std::max(1.0, std::abs(a * cv)));
            CHECK(std::abs(evar_p(sa, p) - a * ev) <= tol * std::max(1.0, std::abs(a * ev)));
            CHECK(q >= prev[0] - tol);
            CHECK(cv >= prev[1] - tol);
            CHECK(ev >= prev[2] - tol * std::max(1.0, std::abs(ev)));
            prev[0] = q;
            prev[1] = cv;
            prev[2] = ev;
        }
    }
}

TEST_CASE("CVaR equals the brute-force quantile integral") {
    const Stream st(7, 0);
    for (std::uint64_t i = 0; i < 300; ++i) {
        const int n = 1 + static_cast<int>(st.bits(i, OracleTag::aux, 0) % 20);
        std::vector<double> v(n);
        for (int j = 0; j < n; ++j) v[j] = static_cast<double>(st.bits(i, OracleTag::aux, j + 1) % 50);
        const int k = static_cast<int>(st.bits(i, OracleTag::batch_x, 0) % 20);
        const double p = k / 20.0;
        // integrate the step quantile function over (p, 1] on a grid of width 1/(20 n)
        std::vector<double> s(v);
        std::sort(s.begin(), s.end());
        const int M = 20 * n;
        double acc = 0.0;
        for (int m = k * n; m < M; ++m) {
            const int idx = m / 20;  // quantile on (m/M, (m+1)/M] is s[idx]
            acc += s[idx];
        }
        const double brute = acc / (M - k * n);
        CHECK(cvar_p(SampleSet(v), p) == doctest::Approx(brute).epsilon(1e-12));
    }
}

TEST_CASE("chi2 risk") {
    const SampleSet s(one_to_ten());
    CHECK(chi2_risk(s, 0.0) >= 5.5 - 1e-9);
    const std::vector<double> u{0, 0, 0, 10};
    auto obj = [&](double eta) {
        double m = 0.0;
        for (double x : u) m += std::pow(std::max(0.0, x - eta), 2);
        return std::sqrt(3.0) * std::sqrt(m / 4.0) + eta;
    };
    double best = INFINITY;
    for (int i = 0; i <= 1000000; ++i) best = std::min(best, obj(10.0 * i / 1000000));
    CHECK(chi2_risk(SampleSet(u), 1.0) == doctest::Approx(best).epsilon(1e-6));
    CHECK(chi2_risk(SampleSet(u), 2.0) >= chi2_risk(SampleSet(u), 1.0));
}

TEST_CASE("risk report") {
    const RiskReport r = risk_report(SampleSet(one_to_ten()), 0.8, 1.0);
    CHECK(r.n == 10);
    CHECK(r.var == 8.0);
    CHECK(r.cvar == doctest::Approx(9.5));
    CHECK(r.evar >= r.cvar);
    CHECK(r.chi2 > 5.5);
}
