#include "sapd/problems.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>

namespace sapd {

Bilinear gen_bilinear(const BilinearSpec& spec) {
    if (spec.d < 1) throw DomainError("dimension must be >= 1");
    if (!(spec.norm > 0.0)) throw DomainError("target norm must be positive");
    const Stream stream(spec.seed, 0);
    const int d = spec.d;
    Mat M(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            M(i, j) = stream.normal(0, OracleTag::aux, static_cast<std::uint64_t>(i) * d + j);
    Mat Kt = 0.5 * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(Kt, Eigen::EigenvaluesOnly);
    const double nrm = es.eigenvalues().cwiseAbs().maxCoeff();
    if (!(nrm > 0.0)) throw NumericalError("degenerate random matrix");
    Bilinear out;
    out.quad.K = spec.norm * Kt / nrm;
    out.quad.K = 0.5 * (out.quad.K + out.quad.K.transpose());
    out.quad.mu_x = spec.mu_x;
    out.quad.mu_y = spec.mu_y;
    out.quad.delta = spec.delta;
    out.problem = out.quad.saddle_problem();
    return out;
}

Vec project_simplex(const Vec& v) {
    const Eigen::Index n = v.size();
    if (n < 1) throw DomainError("empty vector");
    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<>());
    double cum = 0.0, shift = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        cum += u[j];
        const double t = (cum - 1.0) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0) shift = t;
    }
    return (v.array() - shift).max(0.0).matrix();
}

static Vec clip_ball(const Vec& y, const Vec& c, double rad) {
    const double nrm = (y - c).norm();
    if (nrm <= rad) return y;
    return c + (y - c) * (rad / nrm);
}

double Pr_violation(const Vec& y, double r) {
    const double n = static_cast<double>(y.size());
    const double sum = std::abs(y.sum() - 1.0);
    const double neg = std::max(0.0, -y.minCoeff());
    const Vec c = Vec::Constant(y.size(), 1.0 / n);
    const double ball = std::max(0.0, (y - c).squaredNorm() - r / (n * n));
    return std::max({sum, neg, ball});
}

Projection project_Pr_detail(const Vec& v, double r, int max_sweeps, double tol) {
    if (!(r > 0.0)) throw DomainError("radius must be positive");
    const Eigen::Index n = v.size();
    if (n < 1) throw DomainError("empty vector");
    const double nd = static_cast<double>(n);
    const Vec c = Vec::Constant(n, 1.0 / nd);
    const double rad = std::sqrt(r) / nd;
    Projection out;
    Vec x = v, p = Vec::Zero(n), q = Vec::Zero(n), y = v;
    for (int s = 1; s <= max_sweeps; ++s) {
        y = project_simplex(x + p);
        p = x + p - y;
        Vec xn = clip_ball(y + q, c, rad);
        q = y + q - xn;
        const double step = (xn - x).norm();
        x = std::move(xn);
        out.sweeps = s;
        if (step < tol && (x - y).norm() < tol) {
            out.converged = true;
            break;
        }
    }
    // y lies on the simplex; pulling it toward the center keeps it there
    out.y = clip_ball(y, c, rad);
    return out;
}

Vec project_Pr(const Vec& v, double r) { return project_Pr_detail(v, r).y; }

namespace {

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, ',')) {
        const auto b = cur.find_first_not_of(" \t\r\"");
        const auto e = cur.find_last_not_of(" \t\r\"");
        out.push_back(b == std::string::npos ? std::string() : cur.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool parse_double(const std::string& s, double& v) {
    if (s.empty()) return false;
    const char* first = s.data();
    if (*first == '+') ++first;
    auto res = std::from_chars(first, s.data() + s.size(), v);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace

Dataset parse_csv(const std::string& text, const CsvSchema& schema) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw DomainError("csv: missing header");
    const auto header = split_row(line);
    const int ncol = static_cast<int>(header.size());
    if (ncol < 2) throw DomainError("csv: need at least one feature and one label column");
    int label = schema.label_index < 0 ? ncol - 1 : schema.label_index;
    if (!schema.label_column.empty()) {
        auto it = std::find(header.begin(), header.end(), schema.label_column);
        if (it == header.end()) throw DomainError("csv: no column named " + schema.label_column);
        label = static_cast<int>(it - header.begin());
    }
    if (label >= ncol) throw DomainError("csv: label index out of range");

    std::vector<std::vector<double>> rows;
    std::vector<std::string> labels;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_row(line);
        if (static_cast<int>(cells.size()) != ncol)
            throw DomainError("csv: line " + std::to_string(lineno) + ": expected " +
                              std::to_string(ncol) + " fields");
        std::vector<double> row;
        for (int j = 0; j < ncol; ++j) {
            if (j == label) continue;
            double v;
            if (!parse_double(cells[j], v) || !std::isfinite(v))
                throw DomainError("csv: line " + std::to_string(lineno) + ": bad number '" +
                                  cells[j] + "'");
            row.push_back(v);
        }
        rows.push_back(std::move(row));
        labels.push_back(cells[label]);
    }
    if (rows.empty()) throw DomainError("csv: no data rows");

    Dataset d;
    for (int j = 0; j < ncol; ++j)
        if (j != label) d.feature_names.push_back(header[j]);
    // numeric labels sort numerically so {-1,1} and {0,1} map naturally
    std::vector<std::string> uniq = labels;
    auto num_less = [](const std::string& a, const std::string& b) {
        double x, y;
        if (parse_double(a, x) && parse_double(b, y)) return x < y;
        return a < b;
    };
    std::sort(uniq.begin(), uniq.end(), num_less);
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    if (uniq.size() > 2) throw DomainError("csv: more than two classes");
    d.label_values = uniq;
    const int n = static_cast<int>(rows.size()), p = ncol - 1;
    d.A.resize(n, p);
    d.b.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) d.A(i, j) = rows[i][j];
        d.b[i] = (uniq.size() == 2 && labels[i] == uniq[1]) ? 1.0 : -1.0;
    }
    if (uniq.size() == 1) d.warnings.push_back("single class in labels");
    if (schema.standardize) {
        for (int j = 0; j < p; ++j) {
            const double mean = d.A.col(j).mean();
            d.A.col(j).array() -= mean;
            const double sd = std::sqrt(d.A.col(j).squaredNorm() / n);
            if (sd > 1e-12 * std::max(1.0, std::abs(mean))) {
                d.A.col(j) /= sd;
            } else {
                d.A.col(j).setZero();
                d.warnings.push_back("constant feature '" + d.feature_names[j] +
                                     "': unit scale substituted");
            }
        }
    }
    return d;
}

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream f(path);
    if (!f) throw DomainError("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_csv(ss.str(), schema);
}

double drlr_radius(const DrlrSpec& spec) {
    return spec.r > 0.0 ? spec.r : 2.0 * std::sqrt(static_cast<double>(spec.data.rows()));
}

ProblemConstants drlr_constants(const DrlrSpec& spec) {
    const Dataset& d = spec.data;
    if (d.rows() < 1) throw DomainError("empty dataset");
    const double amax = d.A.rowwise().norm().maxCoeff();
    ProblemConstants c;
    c.mu_x = spec.mu_x;
    c.mu_y = spec.mu_y;
    c.L.xx = amax * amax / 4.0;
    c.L.yx = amax * std::sqrt(static_cast<double>(d.rows()));
    c.L.xy = c.L.yx;
    c.L.yy = 0.0;
    // all-zero features still need positive coupling constants downstream
    if (c.L.yx == 0.0) c.L.xy = c.L.yx = 1e-12;
    return c;
}

static double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }
static double sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

Vec drlr_losses(const Dataset& d, const Vec& x) {
    const Vec m = d.A * x;
    Vec out(d.rows());
    for (int i = 0; i < d.rows(); ++i) out[i] = softplus(-d.b[i] * m[i]);
    return out;
}

SaddleProblem drlr_oracles(const DrlrSpec& spec) {
    const Dataset& d = spec.data;
    if (d.rows() < 1 || d.cols() < 1) throw DomainError("empty dataset");
    if (!d.A.allFinite() || !d.b.allFinite()) throw DomainError("non-finite features");
    const int n = d.rows();
    const double r = drlr_radius(spec);
    auto data = std::make_shared<const Dataset>(d);
    SaddleProblem sp;
    sp.dim_x = d.cols();
    sp.dim_y = n;
    sp.constants = drlr_constants(spec);
    // grad phi_i(x) = -b_i a_i s(-b_i a_i^T x)
    sp.grad_x = [data](const Vec& x, const Vec& y) -> Vec {
        const Vec m = data->A * x;
        Vec w(data->rows());
        for (int i = 0; i < data->rows(); ++i)
            w[i] = -y[i] * data->b[i] * sigmoid(-data->b[i] * m[i]);
        return data->A.transpose() * w;
    };
    sp.grad_y = [data](const Vec& x, const Vec&) -> Vec { return drlr_losses(*data, x); };
    sp.prox_f = quadratic_prox(spec.mu_x);
    const double mu_y = spec.mu_y;
    sp.prox_g = [mu_y, r](const Vec& v, double step) -> Vec {
        return project_Pr(v / (1.0 + step * mu_y), r);
    };
    auto draw = [n](const Stream& s, std::uint64_t iter, OracleTag tag, int batch) {
        std::vector<int> idx(static_cast<std::size_t>(batch));
        for (int j = 0; j < batch; ++j)
            idx[j] = static_cast<int>(s.bits(iter, tag, static_cast<std::uint64_t>(j)) %
                                      static_cast<std::uint64_t>(n));
        return idx;
    };
    sp.batch_grad_x = [data, draw, n](const Vec& x, const Vec& y, int batch, const Stream& s,
                                      std::uint64_t iter) -> Vec {
        Vec g = Vec::Zero(data->cols());
        const double scale = static_cast<double>(n) / batch;
        for (int i : draw(s, iter, OracleTag::batch_x, batch)) {
            const double m = data->A.row(i).dot(x);
            g += (-scale * y[i] * data->b[i] * sigmoid(-data->b[i] * m)) * data->A.row(i).transpose();
        }
        return g;
    };
    sp.batch_grad_y = [data, draw, n](const Vec& x, const Vec&, int batch, const Stream& s,
                                      std::uint64_t iter) -> Vec {
        Vec g = Vec::Zero(n);
        const double scale = static_cast<double>(n) / batch;
        for (int i : draw(s, iter, OracleTag::batch_y, batch))
            g[i] += scale * softplus(-data->b[i] * data->A.row(i).dot(x));
        return g;
    };
    return sp;
}

}  // namespace sapd
