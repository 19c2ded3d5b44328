#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sapd/core.hpp"
#include "sapd/quadratic.hpp"

namespace sapd {

struct BilinearSpec {
    int d = 30;
    std::uint64_t seed = 0;
    double mu_x = 1.0;
    double mu_y = 1.0;
    double norm = 10.0;
    double delta = 0.0;
};

struct Bilinear {
    QuadProblem quad;
    SaddleProblem problem;
};

// K = norm * Kt/|Kt| with Kt the symmetric part of a standard normal matrix.
Bilinear gen_bilinear(const BilinearSpec& spec);

Vec project_simplex(const Vec& v);

struct Projection {
    Vec y;
    int sweeps = 0;
    bool converged = false;
};

// Euclidean projection onto {y >= 0, 1^T y = 1, |y - 1/n|^2 <= r/n^2} by Dykstra's
// alternating projections.
Projection project_Pr_detail(const Vec& v, double r, int max_sweeps = 10000, double tol = 1e-10);
Vec project_Pr(const Vec& v, double r);

// Signed distance to the set: max of simplex, sign and ball violations.
double Pr_violation(const Vec& y, double r);

struct Dataset {
    Mat A;  // rows are samples
    Vec b;  // labels in {-1, +1}
    std::vector<std::string> feature_names;
    std::vector<std::string> label_values;  // original labels mapped to -1, +1
    std::vector<std::string> warnings;

    int rows() const { return static_cast<int>(A.rows()); }
    int cols() const { return static_cast<int>(A.cols()); }
};

struct CsvSchema {
    std::string label_column;  // by name; empty uses label_index
    int label_index = -1;      // -1 = last column
    bool standardize = true;
};

Dataset load_csv(const std::string& path, const CsvSchema& schema = {});
Dataset parse_csv(const std::string& text, const CsvSchema& schema = {});

struct DrlrSpec {
    Dataset data;
    double mu_x = 1e-2;
    double mu_y = 1e-2;
    double r = -1.0;  // negative means 2 sqrt(n)
};

double drlr_radius(const DrlrSpec& spec);
// Data-norm bounds: L_xx = max|a_i|^2/4, L_xy = L_yx = max|a_i| sqrt(n), L_yy = 0.
ProblemConstants drlr_constants(const DrlrSpec& spec);
// phi_i(x) = log(1 + exp(-b_i a_i^T x)).
Vec drlr_losses(const Dataset& d, const Vec& x);
SaddleProblem drlr_oracles(const DrlrSpec& spec);

}  // namespace sapd
