#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "sapd/certificates.hpp"
#include "sapd/quadratic.hpp"
#include "sapd/risk.hpp"

using namespace sapd;

namespace {

struct GridPoint {
    double theta, kappa, mx, my;
};

std::vector<GridPoint> grid(std::initializer_list<double> thetas, std::initializer_list<double> kappas) {
    std::vector<GridPoint> g;
    const std::vector<std::pair<double, double>> mus{{1, 1}, {4.4, 1.5}, {2, 20}};
    for (double t : thetas)
        for (double k : kappas)
            for (auto [mx, my] : mus)
                if (t > theta_min(k)) g.push_back({t, k, mx, my});
    return g;
}

double quantile_norm2(const Mat& S, int draws, double p, std::uint64_t seed) {
    Eigen::SelfAdjointEigenSolver<Mat> es(S);
    const Mat L = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    const Stream s(seed, 0);
    std::vector<double> v(draws);
    for (int i = 0; i < draws; ++i) v[i] = (L * s.normal_vec(i, OracleTag::aux, S.rows(), 1.0)).squaredNorm();
    return var_p(SampleSet(v), p);
}

}  // namespace

TEST_CASE("A at lambda = 0 is theta I") {
    const Mat2 A = alambda_cp(0.0, 0.8, 1.0, 2.0);
    CHECK(A(0, 0) == doctest::Approx(0.8));
    CHECK(A(1, 1) == doctest::Approx(0.8));
    CHECK(A(0, 1) == 0.0);
    CHECK(A(1, 0) == 0.0);
}

TEST_CASE("general and CP forms agree; trace and determinant identities") {
    for (const auto& g : grid({0.7, 0.9, 0.99, 0.999}, {0.5, 1, 2, 5})) {
        const double lam = g.kappa * std::sqrt(g.mx * g.my);
        SapdParams p;
        std::tie(p.tau, p.sigma) = cp_params(g.theta, g.mx, g.my);
        p.theta = p.rho = g.theta;
        const Mat2 Ag = alambda_general(lam, p, g.mx, g.my);
        const Mat2 Ac = alambda_cp(lam, g.theta, g.mx, g.my);
        CHECK((Ag - Ac).cwiseAbs().maxCoeff() < 1e-12 * std::max(1.0, Ac.cwiseAbs().maxCoeff()));
        const Mat2 Rg = rlambda_general(lam, p, g.mx, g.my, 2.0);
        const Mat2 Rc = rlambda_cp(lam, g.theta, g.mx, g.my, 2.0);
        CHECK((Rg - Rc).norm() <= 1e-12 * Rc.norm());
        CHECK(Ac.trace() == doctest::Approx(eig_sum_closed(g.theta, g.kappa)).epsilon(1e-12));
        CHECK(Ac.determinant() == doctest::Approx(eig_product_closed(g.theta, g.kappa)).epsilon(1e-10));
    }
}

TEST_CASE("eigenpair example and power sums") {
    const Mat2 A = alambda_cp(1.0, 0.9, 1.0, 1.0);
    const EigenPair e = eigen_Alambda(A, 0.9, 1.0);
    CHECK(std::norm(e.nu1) == doctest::Approx(0.801));
    CHECK(std::abs(e.nu1) == doctest::Approx(0.89499).epsilon(1e-5));
    for (const auto& g : grid({0.7, 0.9, 0.99, 0.999}, {0.5, 1, 2, 5})) {
        const double lam = g.kappa * std::sqrt(g.mx * g.my);
        const Mat2 Al = alambda_cp(lam, g.theta, g.mx, g.my);
        Eigen::EigenSolver<Mat2> es(Al);
        const auto n1 = es.eigenvalues()[0], n2 = es.eigenvalues()[1];
        CHECK(std::abs((n1 * n2).real() - eig_product_closed(g.theta, g.kappa)) < 1e-10);
        CHECK(std::abs((n1 + n2).real() - eig_sum_closed(g.theta, g.kappa)) < 1e-10);
        for (int k : {2, 3, 4})
            CHECK(std::abs((std::pow(n1, k) + std::pow(n2, k)).real() -
                           power_sum_closed(k, g.theta, g.kappa)) < 1e-10);
        // printed eigenvectors
        const EigenPair ep = eigen_Alambda(Al, g.theta, g.kappa);
        for (int c = 0; c < 2; ++c) {
            const auto nu = c == 0 ? ep.nu1 : ep.nu2;
            const Eigen::Vector2cd v = ep.V.col(c);
            CHECK((Al.cast<std::complex<double>>() * v - nu * v).norm() < 1e-10 * v.norm());
        }
    }
}

TEST_CASE("eigenpair domain") {
    const double t = std::sqrt(2.0) - 1.0;
    CHECK_THROWS_AS(eigen_Alambda(alambda_cp(1.0, t - 1e-6, 1, 1), t - 1e-6, 1.0), DomainError);
    const EigenPair e = eigen_Alambda(alambda_cp(1.0, t + 1e-6, 1, 1), t + 1e-6, 1.0);
    CHECK(e.nu1.imag() > 0.0);
    CHECK(theta_min(1.0) == doctest::Approx(t));
    CHECK(theta_min(0.0) == 0.0);
}

TEST_CASE("lyapunov examples") {
    const Mat2 R = (Mat2() << 2, 1, 1, 3).finished();
    CHECK((lyapunov_2x2(Mat2::Zero(), R) - R).norm() < 1e-15);
    const Mat2 S = lyapunov_2x2(0.5 * Mat2::Identity(), Mat2::Identity());
    CHECK((S - (4.0 / 3.0) * Mat2::Identity()).norm() < 1e-14);
    const Mat2 A = alambda_cp(2.0, 0.95, 1, 1);
    const Mat2 Rl = rlambda_cp(2.0, 0.95, 1, 1, 1.0);
    CHECK(lyapunov_residual(lyapunov_2x2(A, Rl), A, Rl) <= 1e-12 * Rl.norm());
    CHECK_THROWS_AS(lyapunov_2x2(Mat2::Identity(), R), NumericalError);
    const Mat D = lyapunov_doubling(A, Rl);
    CHECK((D - lyapunov_2x2(A, Rl)).norm() < 1e-9 * D.norm());
}

TEST_CASE("closed-form blocks match numeric lyapunov") {
    for (const auto& g : grid({0.7, 0.9, 0.99, 0.999}, {0.5, 1, 2, 5})) {
        const double lam = g.kappa * std::sqrt(g.mx * g.my);
        const LimitingCovariance lc = limiting_covariance(fx::scalar(lam, g.mx, g.my, 1.3), g.theta);
        const auto& b = lc.blocks[0];
        CHECK(fx::rel_fro(b.sigma_tilde, b.sigma_tilde_numeric) < 1e-9);
        CHECK(fx::rel_fro(b.sigma, b.sigma_numeric) < 1e-9);
        const Mat2 Rl = rlambda_cp(lam, g.theta, g.mx, g.my, 1.69);
        CHECK(b.residual <= 1e-9 * Rl.norm());
    }
}

TEST_CASE("lambda = 0 example") {
    const LimitingCovariance lc = limiting_covariance(fx::scalar(0.0, 1, 1, 1), 0.95);
    CHECK(lc.sigma(0, 0) == doctest::Approx(0.0231410).epsilon(1e-6));
    CHECK(lc.sigma(1, 1) == doctest::Approx(0.0303910).epsilon(1e-6));
    CHECK(std::abs(lc.sigma(0, 1)) < 1e-15);
    const Mat2 R0 = rlambda_cp(0.0, 0.95, 1, 1, 1.0);
    CHECK((lc.blocks[0].sigma_tilde - R0 / (1 - 0.95 * 0.95)).norm() < 1e-14);
}

TEST_CASE("printed P12 table differs by the theta factor") {
    for (double theta : {0.7, 0.9, 0.99})
        for (double kappa : {0.5, 1.0, 5.0}) {
            if (!(theta > theta_min(kappa))) continue;
            const Mat2 st = sigma_tilde_closed(kappa, theta, 1, 1, 1);
            const Mat2 s = sigma_closed(kappa, theta, 1, 1, 1);
            const Mat2 sp = sigma_closed_printed(kappa, theta, 1, 1, 1);
            CHECK(s(0, 1) == doctest::Approx(theta * st(0, 1) - (1 - theta) * kappa * st(1, 1)).epsilon(1e-9));
            CHECK(sp(0, 1) == doctest::Approx(theta * st(0, 1) - theta * (1 - theta) * kappa * st(1, 1)).epsilon(1e-9));
            CHECK(sp(0, 0) == doctest::Approx(s(0, 0)).epsilon(1e-12));
            CHECK(sp(1, 1) == doctest::Approx(s(1, 1)).epsilon(1e-12));
        }
}

TEST_CASE("zero noise gives zero covariance") {
    const LimitingCovariance lc = limiting_covariance(fx::scalar(2.0, 1, 1, 0.0), 0.99);
    CHECK(lc.sigma.norm() == 0.0);
    CHECK_THROWS_AS(limiting_covariance(fx::scalar(5.0, 1, 1, 1.0), 0.5), DomainError);
}

TEST_CASE("multi-dimensional model: U orthogonal, spectral radius, full residual") {
    QuadProblem q;
    const Stream s(4, 0);
    Mat G(4, 4);
    for (int i = 0; i < 16; ++i) G(i / 4, i % 4) = s.normal(0, OracleTag::aux, i);
    q.K = 0.5 * (G + G.transpose());
    q.mu_x = 1.5;
    q.mu_y = 0.7;
    q.delta = 2.0;
    const double theta = 0.97;
    const SapdParams p = fx::cp(q, theta);
    const QuadSpectralModel m = build_system(q, p);
    CHECK((m.U.transpose() * m.U - Mat::Identity(4, 4)).norm() < 1e-10);
    Eigen::EigenSolver<Mat> es(m.A);
    const double rho = es.eigenvalues().cwiseAbs().maxCoeff();
    double bmax = 0.0;
    for (const auto& b : m.blocks) {
        Eigen::EigenSolver<Mat2> eb(b.A);
        bmax = std::max(bmax, eb.eigenvalues().cwiseAbs().maxCoeff());
    }
    CHECK(rho == doctest::Approx(bmax).epsilon(1e-9));
    CHECK(m.spectral_radius == doctest::Approx(bmax).epsilon(1e-9));
    const Mat B2 = m.B.middleCols(4, 4), B3 = m.B.rightCols(4);
    const Mat cross = m.A * B3 * B2.transpose();
    const Mat Rfull = (q.delta * q.delta / 4) * (m.B * m.B.transpose() + cross + cross.transpose());
    CHECK((m.R - Rfull).norm() < 1e-12 * m.R.norm());
    Mat Rblk = Mat::Zero(8, 8);
    for (int i = 0; i < 4; ++i) {
        const Mat2& r = m.blocks[i].R;
        const Vec u = m.U.col(i);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) Rblk.block(4 * a, 4 * b, 4, 4) += r(a, b) * u * u.transpose();
    }
    CHECK((m.R - Rblk).norm() < 1e-12 * m.R.norm());
    const LimitingCovariance lc = limiting_covariance(q, theta);
    CHECK(lyapunov_residual(lc.sigma_tilde, m.A, m.R) <= 1e-9 * m.R.norm());
    Eigen::SelfAdjointEigenSolver<Mat> ps(lc.sigma);
    CHECK(ps.eigenvalues().minCoeff() >= -1e-10 * lc.sigma.trace());
    CHECK_THROWS_AS(build_system([] { QuadProblem a; a.K = (Mat(2, 2) << 1, 2, 0, 1).finished(); return a; }(), p),
                    DomainError);
}

TEST_CASE("recursion: stationarity and Loewner monotonicity") {
    const QuadProblem q = fx::P1();
    const SapdParams p = fx::cp(q, 0.99);
    const LimitingCovariance lc = limiting_covariance(q, 0.99);
    const auto st = covariance_recursion(q, p, lc.sigma_tilde, 1);
    CHECK((st[1] - st[0]).norm() < 1e-12 * std::max(1.0, st[0].norm()));
    const auto seq = covariance_recursion(q, p, Mat::Zero(2, 2), 300);
    for (int k = 0; k < 300; ++k) {
        Eigen::SelfAdjointEigenSolver<Mat> es(seq[k + 1] - seq[k], Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().minCoeff() >= -1e-10 * std::max(1.0, seq[k + 1].norm()));
    }
}

TEST_CASE("covariance scales with 1 - theta") {
    // diagonal entries are Theta(1 - theta); the x-y cross term is Theta((1 - theta)^3)
    for (double kappa : {0.5, 1.0, 2.0}) {
        std::vector<Mat2> S;
        for (double e : {1e-2, 1e-3, 1e-4}) S.push_back(sigma_closed(kappa, 1 - e, 1, 1, 1));
        for (int k = 1; k < 3; ++k) {
            for (int i = 0; i < 2; ++i)
                CHECK(S[k](i, i) / S[k - 1](i, i) * 10.0 == doctest::Approx(1.0).epsilon(0.1));
            CHECK(S[k](0, 1) / S[k - 1](0, 1) * 1000.0 == doctest::Approx(1.0).epsilon(0.1));
        }
    }
}

TEST_CASE("tightness bounds") {
    const QuadProblem q = fx::toy();
    const Tightness lo = tightness_bounds(q, 0.95, 1e-6);
    CHECK(lo.psi1 == 0.0);
    CHECK_THROWS_AS(tightness_bounds(q, 0.95, 1.0), DomainError);
    for (double p : {0.5, 0.9, 0.99}) {
        const Tightness t = tightness_bounds(q, 0.99, p);
        const double Q = quantile_norm2(limiting_covariance(q, 0.99).sigma, 100000, p, 8);
        CHECK(Q >= t.psi1);
        CHECK(Q <= t.psi2);
    }
    const double r = quantile_norm2(limiting_covariance(q, 0.999).sigma, 100000, 0.9, 9) /
                     quantile_norm2(limiting_covariance(q, 0.99).sigma, 100000, 0.9, 9);
    CHECK(r >= 1.0 / 30);
    CHECK(r <= 1.0 / 3);
}

TEST_CASE("ellipse polyline lies on the level set") {
    const Mat2 S = (Mat2() << 2, 0.3, 0.3, 1).finished();
    const auto pts = ellipse_polyline(S, 1.0, 64);
    CHECK(pts.size() == 65);
    for (auto [a, b] : pts) {
        const Eigen::Vector2d z(a, b);
        CHECK(z.dot(S * z) == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(ellipse_polyline(-S, 1.0, 10), DomainError);
}
