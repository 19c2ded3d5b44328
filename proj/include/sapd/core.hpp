#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace sapd {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Bad input or parameters outside an operation's domain.
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Divergence, non-convergence or other numerical breakdown.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Lipschitz {
    double xx = 0.0;
    double xy = 0.0;
    double yx = 0.0;
    double yy = 0.0;
};

struct ProblemConstants {
    double mu_x = 1.0;
    double mu_y = 1.0;
    Lipschitz L;

    void validate() const;
};

enum class OracleTag : std::uint32_t {
    grad_x = 1,
    grad_y = 2,
    batch_x = 3,
    batch_y = 4,
    aux = 7,
};

// Counter-based stream: every draw is a pure function of
// (seed, run, iteration, tag, index), so worker scheduling cannot change it.
class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t run) : seed_(seed), run_(run) {}

    std::uint64_t bits(std::uint64_t iter, OracleTag tag, std::uint64_t idx) const;
    // Uniform on (0,1).
    double uniform(std::uint64_t iter, OracleTag tag, std::uint64_t idx) const;
    double normal(std::uint64_t iter, OracleTag tag, std::uint64_t idx) const;
    Vec normal_vec(std::uint64_t iter, OracleTag tag, int dim, double scale) const;

    std::uint64_t seed() const { return seed_; }
    std::uint64_t run() const { return run_; }

private:
    std::uint64_t seed_;
    std::uint64_t run_;
};

std::uint64_t splitmix64(std::uint64_t x);

struct NoiseModel {
    enum class Kind { none, gaussian, minibatch };
    Kind kind = Kind::none;
    double delta = 0.0;   // total standard deviation; per-coordinate variance delta^2/dim
    int batch = 1;        // minibatch size
    double nu_x = 0.0;    // norm-subGaussian proxies consumed by the certificates
    double nu_y = 0.0;

    static NoiseModel none_model() { return {}; }
    static NoiseModel gaussian(double delta);
    static NoiseModel minibatch(int batch);
};

Vec sample_noise(const NoiseModel& model, int dim, const Stream& stream,
                 std::uint64_t iter, OracleTag tag);

using GradFn = std::function<Vec(const Vec&, const Vec&)>;
using ProxFn = std::function<Vec(const Vec&, double)>;
using BatchGradFn = std::function<Vec(const Vec&, const Vec&, int, const Stream&, std::uint64_t)>;

struct SaddleProblem {
    int dim_x = 0;
    int dim_y = 0;
    GradFn grad_x;
    GradFn grad_y;
    ProxFn prox_f;
    ProxFn prox_g;
    // Unbiased minibatch estimates, used when the noise model is minibatch.
    BatchGradFn batch_grad_x;
    BatchGradFn batch_grad_y;
    ProblemConstants constants;
    std::optional<Vec> x_star;
    std::optional<Vec> y_star;

    void validate() const;
    bool has_saddle() const { return x_star.has_value() && y_star.has_value(); }
};

// 1/(2 tau)|x - x*|^2 + (1 - alpha sigma)/(2 sigma)|y - y*|^2
double weighted_distance(const Vec& x, const Vec& y, const Vec& xs, const Vec& ys,
                         double tau, double sigma, double alpha);

double squared_distance(const Vec& x, const Vec& y, const Vec& xs, const Vec& ys);

struct ErrorMetric {
    bool weighted = false;
    double tau = 1.0;
    double sigma = 1.0;
    double alpha = 0.0;

    double operator()(const Vec& x, const Vec& y, const Vec& xs, const Vec& ys) const;
    // Constants (lo, hi) with lo*E <= D <= hi*E.
    std::pair<double, double> equivalence_bounds() const;
};

// Quadratic regularizer prox: argmin mu/2|u|^2 + 1/(2 step)|u - v|^2.
ProxFn quadratic_prox(double mu);

}  // namespace sapd
