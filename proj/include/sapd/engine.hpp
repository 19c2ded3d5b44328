#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sapd/core.hpp"
#include "sapd/params.hpp"

namespace sapd {

// Iterate (x_k, y_k) plus the cached noisy dual gradients at k and k-1.
struct SapdState {
    Vec x;
    Vec y;
    Vec g;       // noisy grad_y at (x_k, y_k)
    Vec g_prev;  // noisy grad_y at (x_{k-1}, y_{k-1}); unused at k = 0
    std::uint64_t k = 0;
};

// Draws g_0 at (x_0, y_0).
SapdState init_state(const SaddleProblem& prob, const Vec& x0, const Vec& y0,
                     const NoiseModel& noise, const Stream& stream);

// One iteration. The y-noise at (x_{k+1}, y_{k+1}) is drawn once here and reused
// by the next momentum average.
void sapd_step(SapdState& s, const SapdParams& p, const SaddleProblem& prob,
               const NoiseModel& noise, const Stream& stream);

struct RunOptions {
    int metric_stride = 1;    // 0 disables per-iteration metrics
    int iterate_stride = 0;   // 0 disables iterate storage
    double divergence_factor = 1e12;
};

struct Trajectory {
    std::vector<std::uint64_t> metric_index;
    std::vector<double> E;  // |x_k - x*|^2 + |y_k - y*|^2
    std::vector<double> D;  // weighted distance with (tau, sigma, alpha)
    std::vector<std::uint64_t> iterate_index;
    std::vector<Vec> xs;
    std::vector<Vec> ys;
    Vec x_final;
    Vec y_final;
    SapdParams params;
    std::uint64_t seed = 0;
    std::uint64_t run = 0;
    bool diverged = false;
    std::uint64_t diverged_at = 0;
};

// n iterations from (x0, y0). Metrics need a known saddle. Throws NumericalError on
// divergence.
Trajectory run(const SaddleProblem& prob, const SapdParams& p, int n, const Vec& x0,
               const Vec& y0, const NoiseModel& noise, std::uint64_t seed,
               std::uint64_t run_index = 0, const RunOptions& opt = {});

struct RunEnsemble {
    std::vector<Trajectory> runs;  // ordered by run index
    std::vector<std::uint64_t> metric_index;
    std::vector<double> mean_E;    // over non-diverged runs
    std::vector<double> stderr_E;
    std::vector<double> mean_D;
    std::size_t failures = 0;
    std::uint64_t seed = 0;
};

// workers = 0 uses hardware concurrency. Result does not depend on workers.
RunEnsemble ensemble(const SaddleProblem& prob, const SapdParams& p, int n, const Vec& x0,
                     const Vec& y0, const NoiseModel& noise, int runs, std::uint64_t seed,
                     int workers = 0, const RunOptions& opt = {});

// Per-run E or D at a metric position, skipping diverged runs.
std::vector<double> metric_column(const RunEnsemble& ens, std::size_t pos, bool weighted = false);

// Iterate storage guard: d*n <= 1e7.
bool storage_allowed(int dim, int n);

}  // namespace sapd
