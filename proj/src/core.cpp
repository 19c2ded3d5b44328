#include "sapd/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sapd {

void ProblemConstants::validate() const {
    if (!(mu_x > 0.0) || !(mu_y > 0.0))
        throw DomainError("strong convexity moduli must be positive");
    if (L.xx < 0.0 || L.yy < 0.0 || L.xy < 0.0 || L.yx < 0.0)
        throw DomainError("Lipschitz constants must be nonnegative");
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t Stream::bits(std::uint64_t iter, OracleTag tag, std::uint64_t idx) const {
    std::uint64_t h = splitmix64(seed_);
    h = splitmix64(h ^ run_);
    h = splitmix64(h ^ iter);
    h = splitmix64(h ^ static_cast<std::uint64_t>(tag));
    return splitmix64(h ^ idx);
}

double Stream::uniform(std::uint64_t iter, OracleTag tag, std::uint64_t idx) const {
    // 53 random bits, shifted off zero
    return (static_cast<double>(bits(iter, tag, idx) >> 11) + 0.5) * 0x1.0p-53;
}

double Stream::normal(std::uint64_t iter, OracleTag tag, std::uint64_t idx) const {
    const double u1 = uniform(iter, tag, 2 * idx);
    const double u2 = uniform(iter, tag, 2 * idx + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Vec Stream::normal_vec(std::uint64_t iter, OracleTag tag, int dim, double scale) const {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = scale * normal(iter, tag, static_cast<std::uint64_t>(i));
    return v;
}

NoiseModel NoiseModel::gaussian(double delta) {
    if (delta < 0.0) throw DomainError("noise scale must be nonnegative");
    NoiseModel m;
    m.kind = Kind::gaussian;
    m.delta = delta;
    m.nu_x = delta;
    m.nu_y = delta;
    return m;
}

NoiseModel NoiseModel::minibatch(int batch) {
    if (batch < 1) throw DomainError("batch size must be >= 1");
    NoiseModel m;
    m.kind = Kind::minibatch;
    m.batch = batch;
    return m;
}

Vec sample_noise(const NoiseModel& model, int dim, const Stream& stream,
                 std::uint64_t iter, OracleTag tag) {
    if (dim < 1) throw DomainError("noise dimension must be >= 1");
    if (model.kind != NoiseModel::Kind::gaussian || model.delta == 0.0) return Vec::Zero(dim);
    return stream.normal_vec(iter, tag, dim, model.delta / std::sqrt(static_cast<double>(dim)));
}

void SaddleProblem::validate() const {
    if (dim_x < 1 || dim_y < 1) throw DomainError("dimensions must be positive");
    if (!grad_x || !grad_y || !prox_f || !prox_g) throw DomainError("missing oracle");
    constants.validate();
    if (x_star && x_star->size() != dim_x) throw DomainError("saddle x dimension mismatch");
    if (y_star && y_star->size() != dim_y) throw DomainError("saddle y dimension mismatch");
}

double weighted_distance(const Vec& x, const Vec& y, const Vec& xs, const Vec& ys,
                         double tau, double sigma, double alpha) {
    if (x.size() != xs.size() || y.size() != ys.size()) throw DomainError("dimension mismatch");
    if (!(tau > 0.0) || !(sigma > 0.0)) throw DomainError("step sizes must be positive");
    if (alpha < 0.0 || alpha * sigma >= 1.0) throw DomainError("alpha outside [0, 1/sigma)");
    return (x - xs).squaredNorm() / (2.0 * tau) +
           (1.0 - alpha * sigma) / (2.0 * sigma) * (y - ys).squaredNorm();
}

double squared_distance(const Vec& x, const Vec& y, const Vec& xs, const Vec& ys) {
    if (x.size() != xs.size() || y.size() != ys.size()) throw DomainError("dimension mismatch");
    return (x - xs).squaredNorm() + (y - ys).squaredNorm();
}

double ErrorMetric::operator()(const Vec& x, const Vec& y, const Vec& xs, const Vec& ys) const {
    if (weighted) return weighted_distance(x, y, xs, ys, tau, sigma, alpha);
    return squared_distance(x, y, xs, ys);
}

std::pair<double, double> ErrorMetric::equivalence_bounds() const {
    const double wx = 1.0 / (2.0 * tau);
    const double wy = (1.0 - alpha * sigma) / (2.0 * sigma);
    return {std::min(wx, wy), std::max(wx, wy)};
}

ProxFn quadratic_prox(double mu) {
    return [mu](const Vec& v, double step) -> Vec { return v / (1.0 + step * mu); };
}

}  // namespace sapd
