#include "sapd/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace sapd {

namespace {

Vec noisy_grad_y(const SaddleProblem& prob, const Vec& x, const Vec& y, const NoiseModel& noise,
                 const Stream& stream, std::uint64_t k) {
    if (noise.kind == NoiseModel::Kind::minibatch) {
        if (!prob.batch_grad_y) throw DomainError("problem has no minibatch dual oracle");
        return prob.batch_grad_y(x, y, noise.batch, stream, k);
    }
    Vec g = prob.grad_y(x, y);
    if (noise.kind == NoiseModel::Kind::gaussian)
        g += sample_noise(noise, prob.dim_y, stream, k, OracleTag::grad_y);
    return g;
}

Vec noisy_grad_x(const SaddleProblem& prob, const Vec& x, const Vec& y, const NoiseModel& noise,
                 const Stream& stream, std::uint64_t k) {
    if (noise.kind == NoiseModel::Kind::minibatch) {
        if (!prob.batch_grad_x) throw DomainError("problem has no minibatch primal oracle");
        return prob.batch_grad_x(x, y, noise.batch, stream, k);
    }
    Vec g = prob.grad_x(x, y);
    if (noise.kind == NoiseModel::Kind::gaussian)
        g += sample_noise(noise, prob.dim_x, stream, k, OracleTag::grad_x);
    return g;
}

}  // namespace

SapdState init_state(const SaddleProblem& prob, const Vec& x0, const Vec& y0,
                     const NoiseModel& noise, const Stream& stream) {
    if (x0.size() != prob.dim_x || y0.size() != prob.dim_y)
        throw DomainError("initial point dimension mismatch");
    SapdState s;
    s.x = x0;
    s.y = y0;
    s.g = noisy_grad_y(prob, x0, y0, noise, stream, 0);
    s.g_prev = s.g;
    return s;
}

void sapd_step(SapdState& s, const SapdParams& p, const SaddleProblem& prob,
               const NoiseModel& noise, const Stream& stream) {
    const Vec m = s.k == 0 ? s.g : Vec((1.0 + p.theta) * s.g - p.theta * s.g_prev);
    Vec y = prob.prox_g(s.y + p.sigma * m, p.sigma);
    Vec x = prob.prox_f(s.x - p.tau * noisy_grad_x(prob, s.x, y, noise, stream, s.k), p.tau);
    s.x = std::move(x);
    s.y = std::move(y);
    ++s.k;
    s.g_prev = std::move(s.g);
    s.g = noisy_grad_y(prob, s.x, s.y, noise, stream, s.k);
}

bool storage_allowed(int dim, int n) {
    return static_cast<double>(dim) * static_cast<double>(n) <= 1e7;
}

Trajectory run(const SaddleProblem& prob, const SapdParams& p, int n, const Vec& x0,
               const Vec& y0, const NoiseModel& noise, std::uint64_t seed,
               std::uint64_t run_index, const RunOptions& opt) {
    if (n < 1) throw DomainError("n must be >= 1");
    prob.validate();
    p.validate();
    const Stream stream(seed, run_index);
    Trajectory t;
    t.params = p;
    t.seed = seed;
    t.run = run_index;
    const bool metrics = opt.metric_stride > 0 && prob.has_saddle();
    const bool store =
        opt.iterate_stride > 0 && storage_allowed(prob.dim_x + prob.dim_y, n / opt.iterate_stride);
    SapdState s = init_state(prob, x0, y0, noise, stream);
    double E0 = 0.0;
    if (prob.has_saddle()) E0 = squared_distance(x0, y0, *prob.x_star, *prob.y_star);
    const double limit = opt.divergence_factor * std::max(1.0, E0);
    auto record = [&](std::uint64_t k) {
        if (metrics && (k % opt.metric_stride == 0 || k == static_cast<std::uint64_t>(n))) {
            t.metric_index.push_back(k);
            t.E.push_back(squared_distance(s.x, s.y, *prob.x_star, *prob.y_star));
            t.D.push_back(weighted_distance(s.x, s.y, *prob.x_star, *prob.y_star, p.tau, p.sigma,
                                            p.alpha));
        }
        if (store && (k % opt.iterate_stride == 0 || k == static_cast<std::uint64_t>(n))) {
            t.iterate_index.push_back(k);
            t.xs.push_back(s.x);
            t.ys.push_back(s.y);
        }
    };
    record(0);
    for (int k = 0; k < n; ++k) {
        sapd_step(s, p, prob, noise, stream);
        const bool finite = s.x.allFinite() && s.y.allFinite();
        const double e = prob.has_saddle() && finite
                             ? squared_distance(s.x, s.y, *prob.x_star, *prob.y_star)
                             : (finite ? 0.0 : INFINITY);
        if (!finite || e > limit || !s.g.allFinite()) {
            t.diverged = true;
            t.diverged_at = s.k;
            throw NumericalError("SAPD diverged at iteration " + std::to_string(s.k));
        }
        record(s.k);
    }
    t.x_final = s.x;
    t.y_final = s.y;
    return t;
}

RunEnsemble ensemble(const SaddleProblem& prob, const SapdParams& p, int n, const Vec& x0,
                     const Vec& y0, const NoiseModel& noise, int runs, std::uint64_t seed,
                     int workers, const RunOptions& opt) {
    if (runs < 1) throw DomainError("runs must be >= 1");
    if (n < 1) throw DomainError("n must be >= 1");
    prob.validate();
    p.validate();
    RunEnsemble ens;
    ens.seed = seed;
    ens.runs.resize(static_cast<std::size_t>(runs));
    int w = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
    w = std::clamp(w, 1, runs);
    std::atomic<int> next{0};
    std::exception_ptr fatal;
    std::mutex mu;
    auto work = [&] {
        for (int r = next++; r < runs; r = next++) {
            try {
                ens.runs[r] = run(prob, p, n, x0, y0, noise, seed, static_cast<std::uint64_t>(r), opt);
            } catch (const NumericalError&) {
                Trajectory t;
                t.params = p;
                t.seed = seed;
                t.run = static_cast<std::uint64_t>(r);
                t.diverged = true;
                ens.runs[r] = std::move(t);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!fatal) fatal = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int i = 1; i < w; ++i) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    if (fatal) std::rethrow_exception(fatal);

    for (const auto& t : ens.runs) {
        if (t.diverged) {
            ++ens.failures;
            continue;
        }
        if (ens.metric_index.empty()) ens.metric_index = t.metric_index;
    }
    const std::size_t m = ens.metric_index.size();
    ens.mean_E.assign(m, 0.0);
    ens.stderr_E.assign(m, 0.0);
    ens.mean_D.assign(m, 0.0);
    const double cnt = static_cast<double>(ens.runs.size() - ens.failures);
    if (m == 0 || cnt == 0) return ens;
    for (const auto& t : ens.runs) {
        if (t.diverged) continue;
        for (std::size_t i = 0; i < m; ++i) {
            ens.mean_E[i] += t.E[i];
            ens.mean_D[i] += t.D[i];
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        ens.mean_E[i] /= cnt;
        ens.mean_D[i] /= cnt;
    }
    if (cnt > 1) {
        for (const auto& t : ens.runs) {
            if (t.diverged) continue;
            for (std::size_t i = 0; i < m; ++i) {
                const double d = t.E[i] - ens.mean_E[i];
                ens.stderr_E[i] += d * d;
            }
        }
        for (std::size_t i = 0; i < m; ++i)
            ens.stderr_E[i] = std::sqrt(ens.stderr_E[i] / (cnt - 1.0) / cnt);
    }
    return ens;
}

std::vector<double> metric_column(const RunEnsemble& ens, std::size_t pos, bool weighted) {
    std::vector<double> out;
    out.reserve(ens.runs.size());
    for (const auto& t : ens.runs) {
        if (t.diverged) continue;
        const auto& v = weighted ? t.D : t.E;
        if (pos >= v.size()) throw DomainError("metric position out of range");
        out.push_back(v[pos]);
    }
    return out;
}

}  // namespace sapd
