#include "sapd/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sapd/core.hpp"

namespace sapd {

SampleSet::SampleSet(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw DomainError("empty sample set");
    for (double v : values_)
        if (!std::isfinite(v)) throw DomainError("non-finite sample");
    sorted_ = values_;
    std::sort(sorted_.begin(), sorted_.end());
}

static void check_p(double p) {
    if (!(p >= 0.0 && p < 1.0)) throw DomainError("p must lie in [0,1)");
}

static std::size_t quantile_rank(std::size_t n, double p) {
    // ceil(pN) with a guard against pN landing just above an integer by rounding
    const double pn = p * static_cast<double>(n);
    double r = std::ceil(pn);
    if (r - pn > 1.0 - 1e-12 * static_cast<double>(n)) r -= 1.0;
    return std::max<std::size_t>(1, static_cast<std::size_t>(r));
}

double var_p(const SampleSet& s, double p) {
    check_p(p);
    return s.sorted()[quantile_rank(s.size(), p) - 1];
}

double cvar_p(const SampleSet& s, double p) {
    check_p(p);
    const auto& x = s.sorted();
    const std::size_t n = x.size();
    const double N = static_cast<double>(n);
    const std::size_t k = quantile_rank(n, p);
    // Q(u) = x_(i) on ((i-1)/N, i/N]; integrate over (p, 1]
    double acc = x[k - 1] * (static_cast<double>(k) / N - p);
    for (std::size_t i = k; i < n; ++i) acc += x[i] / N;
    return acc / (1.0 - p);
}

namespace {

double log_mean_exp(const std::vector<double>& x, double eta) {
    double m = -INFINITY;
    for (double v : x) m = std::max(m, eta * v);
    double acc = 0.0;
    for (double v : x) acc += std::exp(eta * v - m);
    return m + std::log(acc / static_cast<double>(x.size()));
}

template <class F>
double golden_min(F f, double lo, double hi, double tol) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol * std::max(1.0, std::abs(a) + std::abs(b))) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

EvarResult evar_detail(const SampleSet& s, double p) {
    check_p(p);
    const auto& x = s.sorted();
    EvarResult res;
    if (x.front() == x.back()) {
        res.value = x.front();
        return res;
    }
    const double L = std::log(1.0 / (1.0 - p));
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    if (p == 0.0) {
        // infimum is the limit eta -> 0, the mean
        res.value = mean;
        return res;
    }
    // work on (U - mean)/scale so the bracket is shift and scale free
    const double scale = std::max(mean - x.front(), x.back() - mean);
    std::vector<double> z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - mean) / scale;
    auto phi = [&](double eta) { return (L + log_mean_exp(z, eta)) / eta; };
    const double lo = std::log(1e-8), hi = std::log(50.0);
    // coarse scan locates the basin of the quasi-convex objective
    constexpr int kScan = 200;
    int best = 0;
    double fbest = INFINITY;
    for (int i = 0; i <= kScan; ++i) {
        const double v = phi(std::exp(lo + (hi - lo) * i / kScan));
        if (v < fbest) {
            fbest = v;
            best = i;
        }
    }
    const double step = (hi - lo) / kScan;
    const double a = lo + std::max(0, best - 1) * step, b = lo + std::min(kScan, best + 1) * step;
    const double t = golden_min([&](double u) { return phi(std::exp(u)); }, a, b, 1e-10);
    const double zval = std::min({phi(std::exp(t)), fbest, z.back()});
    res.eta = std::exp(t) / scale;
    res.value = std::min(mean + scale * zval, x.back());
    res.at_boundary = best == 0 || best == kScan;
    return res;
}

double evar_p(const SampleSet& s, double p) { return evar_detail(s, p).value; }

double chi2_risk(const SampleSet& s, double r) {
    if (!(r >= 0.0)) throw DomainError("r must be nonnegative");
    const auto& x = s.sorted();
    const double c = std::sqrt(1.0 + 2.0 * r);
    const double N = static_cast<double>(x.size());
    auto obj = [&](double eta) {
        double acc = 0.0;
        for (double v : x) {
            const double d = v - eta;
            if (d > 0.0) acc += d * d;
        }
        return c * std::sqrt(acc / N) + eta;
    };
    double a = x.front(), b = x.back();
    if (a == b) return a;
    const double tol = 1e-8 * (b - a);
    while (b - a > tol) {
        const double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
        if (obj(m1) <= obj(m2))
            b = m2;
        else
            a = m1;
    }
    return std::min({obj(0.5 * (a + b)), obj(x.front()), obj(x.back())});
}

RiskReport risk_report(const SampleSet& s, double p, double r) {
    RiskReport rep;
    rep.p = p;
    rep.r = r;
    rep.var = var_p(s, p);
    rep.cvar = cvar_p(s, p);
    rep.evar = evar_p(s, p);
    rep.chi2 = chi2_risk(s, r);
    rep.n = s.size();
    return rep;
}

}  // namespace sapd
