#pragma once

#include <cmath>

#include "sapd/core.hpp"
#include "sapd/params.hpp"
#include "sapd/quadratic.hpp"

namespace fx {

// min_x max_y x^2/2 + xy - y^2/2, gradient noise variance 0.1.
inline sapd::QuadProblem toy(double delta = std::sqrt(0.1)) {
    sapd::QuadProblem q;
    q.K = sapd::Mat::Constant(1, 1, 1.0);
    q.mu_x = q.mu_y = 1.0;
    q.delta = delta;
    return q;
}

inline sapd::QuadProblem scalar(double c, double mx, double my, double delta) {
    sapd::QuadProblem q;
    q.K = sapd::Mat::Constant(1, 1, c);
    q.mu_x = mx;
    q.mu_y = my;
    q.delta = delta;
    return q;
}

inline sapd::QuadProblem P1() { return scalar(1.0, 4.4, 1.5, 35.0); }

inline sapd::SapdParams cp(const sapd::QuadProblem& q, double theta) {
    return sapd::cp_certified_params(theta, q.constants());
}

inline sapd::Vec v1(double a) { return sapd::Vec::Constant(1, a); }

inline double rel_fro(const sapd::Mat& a, const sapd::Mat& b) { return (a - b).norm() / b.norm(); }

}  // namespace fx
