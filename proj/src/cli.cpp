#include "sapd/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "sapd/certificates.hpp"
#include "sapd/core.hpp"
#include "sapd/engine.hpp"
#include "sapd/params.hpp"
#include "sapd/problems.hpp"
#include "sapd/quadratic.hpp"
#include "sapd/risk.hpp"

#ifndef SAPD_VERSION
#define SAPD_VERSION "0.1.0"
#endif

namespace sapd::cli {

namespace fs = std::filesystem;

std::string version() { return SAPD_VERSION; }

json to_json(const ExperimentConfig& c) {
    return json{{"command", c.command},   {"problem", c.problem},   {"thetas", c.thetas},
                {"runs", c.runs},         {"iterations", c.iterations}, {"seed", c.seed},
                {"out_dir", c.out_dir},   {"emit_csv", c.emit_csv}, {"emit_json", c.emit_json},
                {"emit_svg", c.emit_svg}, {"eps", c.eps},           {"p", c.p},
                {"workers", c.workers}};
}

ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object()) throw DomainError("config must be a JSON object");
    static const std::vector<std::string> known = {
        "command", "problem", "thetas", "runs", "iterations", "seed", "out_dir",
        "emit_csv", "emit_json", "emit_svg", "eps", "p", "workers"};
    for (const auto& [k, v] : j.items())
        if (std::find(known.begin(), known.end(), k) == known.end())
            throw DomainError("unknown config key '" + k + "'");
    ExperimentConfig c;
    try {
        c.command = j.value("command", c.command);
        c.problem = j.value("problem", json::object());
        c.thetas = j.value("thetas", c.thetas);
        c.runs = j.value("runs", c.runs);
        c.iterations = j.value("iterations", c.iterations);
        c.seed = j.value("seed", c.seed);
        c.out_dir = j.value("out_dir", c.out_dir);
        c.emit_csv = j.value("emit_csv", c.emit_csv);
        c.emit_json = j.value("emit_json", c.emit_json);
        c.emit_svg = j.value("emit_svg", c.emit_svg);
        c.eps = j.value("eps", c.eps);
        c.p = j.value("p", c.p);
        c.workers = j.value("workers", c.workers);
    } catch (const json::exception& e) {
        throw DomainError(std::string("config: ") + e.what());
    }
    if (!c.problem.is_object()) throw DomainError("config: problem must be an object");
    return c;
}

static void set_default(json& obj, const char* key, const json& v) {
    if (!obj.contains(key)) obj[key] = v;
}

void apply_defaults(ExperimentConfig& c) {
    json& p = c.problem;
    if (c.command == "toy") {
        set_default(p, "mu_x", 1.0);
        set_default(p, "mu_y", 1.0);
        set_default(p, "variance", 0.1);
        set_default(p, "x0", 10.0);
        set_default(p, "y0", 10.0);
        set_default(p, "p_risk", 0.8);
        if (c.thetas.empty()) c.thetas = {0.95, 0.99};
        if (c.iterations <= 0) c.iterations = 1000;
        if (c.runs <= 0) c.runs = 500;
    } else if (c.command == "bilinear") {
        set_default(p, "d", 30);
        set_default(p, "k_seed", 0);
        set_default(p, "mu_x", 1.0);
        set_default(p, "mu_y", 1.0);
        set_default(p, "norm", 10.0);
        set_default(p, "delta", 1.0);
        set_default(p, "init_scale", 50.0);
        set_default(p, "checkpoints", json::array({2000, 5000}));
        set_default(p, "p_risk", 0.9);
        if (c.iterations <= 0) {
            int m = 0;
            for (int k : p["checkpoints"]) m = std::max(m, k);
            c.iterations = m;
        }
        if (c.runs <= 0) c.runs = 500;
    } else if (c.command == "quadcov") {
        set_default(p, "problems",
                    json::array({{{"name", "P1"}, {"c", 1.0}, {"mu_x", 4.4}, {"mu_y", 1.5}, {"delta", 35.0}},
                                 {{"name", "P2"}, {"c", 1.0}, {"mu_x", 2.0}, {"mu_y", 20.0}, {"delta", 50.0}},
                                 {{"name", "P3"}, {"c", 1e-3}, {"mu_x", 0.205}, {"mu_y", 0.307}, {"delta", 5.0}}}));
        set_default(p, "rate_window", json::array({20, 200}));
        if (c.thetas.empty()) c.thetas = {0.99};
        if (c.iterations <= 0) c.iterations = 512;
        if (c.runs <= 0) c.runs = 2000;
    } else if (c.command == "drlr") {
        set_default(p, "csv", "");
        set_default(p, "label", "");
        set_default(p, "mu_x", 0.1);
        set_default(p, "mu_y", 0.1);
        set_default(p, "r", -1.0);
        set_default(p, "batch", 1);
        set_default(p, "x0", 2.0);
        set_default(p, "reference_factor", 10);
        set_default(p, "p_risk", 0.9);
        if (c.iterations <= 0) c.iterations = 2000;
        if (c.runs <= 0) c.runs = 500;
    } else if (c.command == "certify") {
        set_default(p, "mu_x", 1.0);
        set_default(p, "mu_y", 1.0);
        set_default(p, "L_xx", 0.0);
        set_default(p, "L_xy", 1.0);
        set_default(p, "L_yx", 1.0);
        set_default(p, "L_yy", 0.0);
        set_default(p, "nu_x", std::sqrt(0.1));
        set_default(p, "nu_y", std::sqrt(0.1));
        set_default(p, "dist_x", 10.0);
        set_default(p, "dist_y", 10.0);
        set_default(p, "ns", json::array({0, 10, 100, 1000}));
        set_default(p, "ps", json::array({0.5, 0.9, 0.99}));
        set_default(p, "eps_list", json::array({1e-1, 1e-2, 1e-3}));
        set_default(p, "r", 1.0);
        if (c.runs <= 0) c.runs = 1;
        if (c.iterations <= 0) c.iterations = 1;
    } else if (c.command == "risk") {
        set_default(p, "ps", json::array({c.p}));
        set_default(p, "r", 1.0);
        if (c.runs <= 0) c.runs = 1;
        if (c.iterations <= 0) c.iterations = 1;
    } else {
        throw DomainError("unknown command '" + c.command + "'");
    }
}

std::string config_hash(const ExperimentConfig& c) {
    json j = to_json(c);
    j.erase("seed");
    j.erase("out_dir");
    j.erase("workers");
    const std::string s = j.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

static std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

static std::string fx(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

Histogram histogram(const std::vector<double>& v) {
    if (v.empty()) throw DomainError("histogram of empty data");
    const SampleSet s(v);
    const double lo = s.sorted().front(), hi = s.sorted().back();
    Histogram h;
    std::size_t bins = 40;
    h.rule = "fixed-40";
    const double iqr = var_p(s, 0.75) - var_p(s, 0.25);
    if (iqr > 0.0 && hi > lo) {
        const double w = 2.0 * iqr / std::cbrt(static_cast<double>(v.size()));
        const double b = std::ceil((hi - lo) / w);
        if (b >= 1.0 && b <= 1000.0) {
            bins = static_cast<std::size_t>(b);
            h.rule = "freedman-diaconis";
        }
    }
    const double width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
    for (std::size_t i = 0; i <= bins; ++i) h.edges.push_back(lo + width * static_cast<double>(i));
    h.counts.assign(bins, 0);
    for (double x : v) {
        std::size_t i = hi > lo ? static_cast<std::size_t>((x - lo) / width) : 0;
        h.counts[std::min(i, bins - 1)]++;
    }
    return h;
}

namespace {

constexpr double kW = 640.0, kH = 400.0, kM = 50.0;

struct Frame {
    double x0, x1, y0, y1;
    double px(double x) const { return kM + (x - x0) / (x1 - x0) * (kW - 2 * kM); }
    double py(double y) const { return kH - kM - (y - y0) / (y1 - y0) * (kH - 2 * kM); }
};

Frame make_frame(double x0, double x1, double y0, double y1) {
    if (!(x1 > x0)) x1 = x0 + 1.0;
    if (!(y1 > y0)) y1 = y0 + 1.0;
    return {x0, x1, y0, y1};
}

std::string svg_head(const std::string& title, const std::string& stamp, const Frame& f) {
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n";
    s << "<!-- " << stamp << " -->\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<text x=\"" << kM << "\" y=\"30\" font-size=\"14\">" << title << "</text>\n";
    s << "<line x1=\"" << kM << "\" y1=\"" << kH - kM << "\" x2=\"" << kW - kM << "\" y2=\""
      << kH - kM << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << kM << "\" y1=\"" << kM << "\" x2=\"" << kM << "\" y2=\"" << kH - kM
      << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << kM << "\" y=\"" << kH - kM + 15 << "\" font-size=\"10\">" << num(f.x0)
      << "</text>\n";
    s << "<text x=\"" << kW - kM << "\" y=\"" << kH - kM + 15
      << "\" font-size=\"10\" text-anchor=\"end\">" << num(f.x1) << "</text>\n";
    s << "<text x=\"" << kM - 4 << "\" y=\"" << kM << "\" font-size=\"10\" text-anchor=\"end\">"
      << num(f.y1) << "</text>\n";
    return s.str();
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

std::string svg_lines(const std::string& title, const std::vector<SvgSeries>& series,
                      const std::string& stamp) {
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : series)
        for (auto [x, y] : s.points) {
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    const Frame f = make_frame(x0, x1, y0, y1);
    std::ostringstream s;
    s << svg_head(title, stamp, f);
    for (std::size_t i = 0; i < series.size(); ++i) {
        const char* col = kColors[i % 6];
        s << "<polyline fill=\"none\" stroke=\"" << col << "\" points=\"";
        for (auto [x, y] : series[i].points) s << fx(f.px(x)) << ',' << fx(f.py(y)) << ' ';
        s << "\"/>\n";
        s << "<text x=\"" << kW - kM << "\" y=\"" << 30 + 14 * i << "\" font-size=\"11\" fill=\""
          << col << "\" text-anchor=\"end\">" << series[i].label << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

std::string svg_histogram(const std::string& title, const Histogram& h,
                          const std::vector<std::pair<std::string, double>> markers,
                          const std::string& stamp) {
    std::size_t cmax = 1;
    for (auto c : h.counts) cmax = std::max(cmax, c);
    const Frame f = make_frame(h.edges.front(), h.edges.back(), 0.0, static_cast<double>(cmax));
    std::ostringstream s;
    s << svg_head(title, stamp, f);
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        const double xa = f.px(h.edges[i]), xb = f.px(h.edges[i + 1]);
        const double ya = f.py(static_cast<double>(h.counts[i])), yb = f.py(0.0);
        s << "<rect x=\"" << fx(xa) << "\" y=\"" << fx(ya) << "\" width=\"" << fx(xb - xa)
          << "\" height=\"" << fx(yb - ya) << "\" fill=\"#9ecae1\" stroke=\"#3182bd\"/>\n";
    }
    for (std::size_t i = 0; i < markers.size(); ++i) {
        const double x = f.px(markers[i].second);
        const char* col = kColors[(i + 1) % 6];
        s << "<line x1=\"" << fx(x) << "\" y1=\"" << kM << "\" x2=\"" << fx(x) << "\" y2=\""
          << kH - kM << "\" stroke=\"" << col << "\" stroke-dasharray=\"4,3\"/>\n";
        s << "<text x=\"" << kW - kM << "\" y=\"" << 30 + 14 * i << "\" font-size=\"11\" fill=\""
          << col << "\" text-anchor=\"end\">" << markers[i].first << " = "
          << num(markers[i].second) << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

namespace {

class Writer {
public:
    explicit Writer(const ExperimentConfig& c) : cfg_(c) {
        hash_ = config_hash(c);
        stamp_ = "sapd-lab " + version() + " config " + hash_;
    }

    const std::string& stamp() const { return stamp_; }
    const std::string& hash() const { return hash_; }

    void csv(const std::string& name, const std::string& header, const std::string& body) {
        if (!cfg_.emit_csv) return;
        write(name, "# " + stamp_ + "\n" + header + "\n" + body);
    }
    void svg(const std::string& name, const std::string& content) {
        if (cfg_.emit_svg) write(name, content);
    }
    void json_file(const std::string& name, json j) {
        if (!cfg_.emit_json) return;
        j["version"] = version();
        j["config_hash"] = hash_;
        write(name, j.dump(2) + "\n");
    }
    std::vector<std::string> files;

private:
    void write(const std::string& name, const std::string& content) {
        fs::create_directories(cfg_.out_dir);
        const fs::path p = fs::path(cfg_.out_dir) / name;
        std::ofstream f(p, std::ios::binary);
        if (!f) throw DomainError("cannot write " + p.string());
        f << content;
        files.push_back(p.string());
    }

    const ExperimentConfig& cfg_;
    std::string hash_;
    std::string stamp_;
};

std::string tag(double theta) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "theta%.6g", theta);
    return buf;
}

json risk_json(const RiskReport& r) {
    return {{"p", r.p}, {"r", r.r}, {"var", r.var}, {"cvar", r.cvar}, {"evar", r.evar},
            {"chi2", r.chi2}, {"N", r.n}};
}

double getd(const json& p, const char* k) {
    if (!p.contains(k) || !p[k].is_number()) throw DomainError(std::string("problem.") + k + " must be a number");
    return p[k].get<double>();
}

int geti(const json& p, const char* k) {
    if (!p.contains(k) || !p[k].is_number_integer())
        throw DomainError(std::string("problem.") + k + " must be an integer");
    return p[k].get<int>();
}

void check_common(const ExperimentConfig& c) {
    if (c.runs < 1) throw DomainError("runs must be >= 1");
    if (c.iterations < 1) throw DomainError("iterations must be >= 1");
    for (double t : c.thetas)
        if (!(t > 0.0 && t < 1.0)) throw DomainError("theta must lie in (0,1)");
}

std::string hist_csv(const Histogram& h) {
    std::string body;
    for (std::size_t i = 0; i < h.counts.size(); ++i)
        body += num(h.edges[i]) + "," + num(h.edges[i + 1]) + "," + std::to_string(h.counts[i]) + "\n";
    return body;
}

std::string convergence_csv(const RunEnsemble& ens, double p_risk) {
    std::string body;
    for (std::size_t i = 0; i < ens.metric_index.size(); ++i) {
        const SampleSet s(metric_column(ens, i));
        body += std::to_string(ens.metric_index[i]) + "," + num(ens.mean_E[i]) + "," +
                num(ens.stderr_E[i]) + "," + num(ens.mean_D[i]) + "," + num(var_p(s, p_risk)) + "\n";
    }
    return body;
}

// Histogram CSV + SVG for E at one metric position.
json emit_histogram(Writer& w, const RunEnsemble& ens, std::size_t pos, double p_risk,
                    const std::string& base, const std::string& title) {
    const std::vector<double> col = metric_column(ens, pos);
    const SampleSet s(col);
    const Histogram h = histogram(col);
    const double mean = ens.mean_E[pos];
    const double v = var_p(s, p_risk), cv = cvar_p(s, p_risk);
    w.csv(base + ".csv", "bin_lo,bin_hi,count", hist_csv(h));
    w.svg(base + ".svg", svg_histogram(title, h, {{"mean", mean}, {"VaR", v}, {"CVaR", cv}}, w.stamp()));
    return {{"k", ens.metric_index[pos]}, {"mean", mean}, {"var", v}, {"cvar", cv},
            {"binning", h.rule}, {"bins", h.counts.size()}};
}

}  // namespace

CommandResult cmd_toy(const ExperimentConfig& c) {
    check_common(c);
    const json& p = c.problem;
    QuadProblem q;
    q.K = Mat::Constant(1, 1, 1.0);
    q.mu_x = getd(p, "mu_x");
    q.mu_y = getd(p, "mu_y");
    const double var = getd(p, "variance");
    if (var < 0.0) throw DomainError("variance must be nonnegative");
    q.delta = std::sqrt(var);
    const double p_risk = getd(p, "p_risk");
    const SaddleProblem prob = q.saddle_problem();
    const Vec x0 = Vec::Constant(1, getd(p, "x0")), y0 = Vec::Constant(1, getd(p, "y0"));
    Writer w(c);
    json summary = {{"command", "toy"}, {"runs", c.runs}, {"iterations", c.iterations}, {"seed", c.seed}};
    json per = json::array();
    for (double theta : c.thetas) {
        const SapdParams sp = cp_certified_params(theta, prob.constants);
        const Certificate cert = matrix_inequality(sp, prob.constants);
        const RunEnsemble ens = ensemble(prob, sp, c.iterations, x0, y0, NoiseModel::gaussian(q.delta),
                                         c.runs, c.seed, c.workers);
        if (ens.failures == ens.runs.size()) throw NumericalError("all runs diverged");
        const std::string base = "toy_" + tag(theta);
        w.csv(base + "_convergence.csv", "k,mean_E,stderr_E,mean_D,var_p", convergence_csv(ens, p_risk));
        const json hist = emit_histogram(w, ens, ens.metric_index.size() - 1, p_risk,
                                         base + "_hist", "E_n, theta = " + num(theta));
        const RiskReport rep = risk_report(SampleSet(metric_column(ens, ens.metric_index.size() - 1)), p_risk, 1.0);
        per.push_back({{"theta", theta}, {"tau", sp.tau}, {"sigma", sp.sigma}, {"alpha", sp.alpha},
                       {"certified", cert.feasible}, {"min_eig", cert.min_eig},
                       {"failures", ens.failures}, {"final", hist}, {"risk", risk_json(rep)}});
    }
    summary["thetas"] = per;
    w.json_file("toy_summary.json", summary);
    return {summary, w.files};
}

CommandResult cmd_bilinear(const ExperimentConfig& c) {
    check_common(c);
    const json& p = c.problem;
    BilinearSpec bs;
    bs.d = geti(p, "d");
    bs.seed = p["k_seed"].get<std::uint64_t>();
    bs.mu_x = getd(p, "mu_x");
    bs.mu_y = getd(p, "mu_y");
    bs.norm = getd(p, "norm");
    bs.delta = getd(p, "delta");
    const double scale = getd(p, "init_scale");
    const double p_risk = getd(p, "p_risk");
    std::vector<int> checkpoints = p["checkpoints"].get<std::vector<int>>();
    for (int k : checkpoints)
        if (k < 0 || k > c.iterations) throw DomainError("checkpoint outside [0, iterations]");
    const Bilinear bl = gen_bilinear(bs);
    const Vec lam = Eigen::SelfAdjointEigenSolver<Mat>(bl.quad.K, Eigen::EigenvaluesOnly).eigenvalues();
    const double kmax = lam.cwiseAbs().maxCoeff() / std::sqrt(bs.mu_x * bs.mu_y);
    const double tbar = theta_min(kmax);
    std::vector<double> thetas = c.thetas;
    if (thetas.empty()) thetas = {tbar, 1.0 - (1.0 - tbar) * (1.0 - tbar)};
    const Stream init(c.seed, 0xffffffffULL);
    const Vec x0 = scale * init.normal_vec(0, OracleTag::aux, bs.d, 1.0);
    const Vec y0 = scale * init.normal_vec(1, OracleTag::aux, bs.d, 1.0);

    Writer w(c);
    json summary = {{"command", "bilinear"}, {"theta_bar", tbar}, {"kappa_max", kmax},
                    {"runs", c.runs}, {"iterations", c.iterations}, {"seed", c.seed}};
    json per = json::array();
    for (double theta : thetas) {
        SapdParams sp;
        std::tie(sp.tau, sp.sigma) = cp_params(theta, bs.mu_x, bs.mu_y);
        sp.theta = sp.rho = theta;
        sp.alpha = 0.5 / sp.sigma;
        const RunEnsemble ens = ensemble(bl.problem, sp, c.iterations, x0, y0,
                                         NoiseModel::gaussian(bs.delta), c.runs, c.seed, c.workers);
        if (ens.failures == ens.runs.size()) throw NumericalError("all runs diverged");
        const std::string base = "bilinear_" + tag(theta);
        w.csv(base + "_convergence.csv", "k,mean_E,stderr_E,mean_D,var_p", convergence_csv(ens, p_risk));
        json hs = json::array();
        for (int k : checkpoints)
            hs.push_back(emit_histogram(w, ens, static_cast<std::size_t>(k), p_risk,
                                        base + "_hist_k" + std::to_string(k),
                                        "E_k at k = " + std::to_string(k) + ", theta = " + num(theta)));
        per.push_back({{"theta", theta}, {"failures", ens.failures}, {"checkpoints", hs}});
    }
    summary["thetas"] = per;
    w.json_file("bilinear_summary.json", summary);
    return {summary, w.files};
}

CommandResult cmd_quadcov(const ExperimentConfig& c) {
    check_common(c);
    if (c.thetas.size() != 1) throw DomainError("quadcov takes exactly one theta");
    const double theta = c.thetas[0];
    const json& p = c.problem;
    const std::vector<int> win = p["rate_window"].get<std::vector<int>>();
    if (win.size() != 2) throw DomainError("rate_window must have two entries");
    std::vector<int> ns;
    for (int n = 1; n <= c.iterations; n *= 2) ns.push_back(n);

    Writer w(c);
    json summary = {{"command", "quadcov"}, {"theta", theta}, {"runs", c.runs}, {"seed", c.seed}};
    json probs = json::array();
    for (const json& pj : p["problems"]) {
        const std::string name = pj.value("name", "P");
        QuadProblem q;
        q.K = Mat::Constant(1, 1, getd(pj, "c"));
        q.mu_x = getd(pj, "mu_x");
        q.mu_y = getd(pj, "mu_y");
        q.delta = getd(pj, "delta");
        const double kap = kappa_of(q.K(0, 0), q.mu_x, q.mu_y);
        if (!(theta > theta_min(kap)))
            throw DomainError(name + ": theta " + num(theta) + " not above threshold " + num(theta_min(kap)));
        const LimitingCovariance lc = limiting_covariance(q, theta);
        SapdParams sp;
        std::tie(sp.tau, sp.sigma) = cp_params(theta, q.mu_x, q.mu_y);
        sp.theta = sp.rho = theta;
        sp.alpha = 0.5 / sp.sigma;
        const RateFit fit = covariance_rate_fit(q, sp, win[0], win[1]);
        const QuadSpectralModel m = build_system(q, sp);
        const auto seq = covariance_recursion(q, sp, Mat::Zero(2, 2), c.iterations);
        const Mat2 T = tlambda(q.K(0, 0), sp, q.mu_x);
        const double g = sp.tau / (1.0 + sp.tau * q.mu_x);
        const double s2 = q.delta * q.delta;
        auto exact_n = [&](int n) {
            Mat2 S = T * Mat2(seq[n]) * T.transpose();
            S(0, 0) += s2 * g * g;
            return S;
        };
        const RunEnsemble ens =
            ensemble(q.saddle_problem(), sp, c.iterations, Vec::Zero(1), Vec::Zero(1),
                     NoiseModel::gaussian(q.delta), c.runs, c.seed, c.workers,
                     RunOptions{0, 1, 1e12});
        auto empirical_n = [&](int n) {
            Mat2 S = Mat2::Zero();
            double cnt = 0;
            for (const auto& t : ens.runs) {
                if (t.diverged) continue;
                const Eigen::Vector2d z(t.xs[n][0], t.ys[n][0]);
                S += z * z.transpose();
                cnt += 1;
            }
            return Mat2(S / std::max(1.0, cnt));
        };
        std::string body;
        std::vector<SvgSeries> series;
        for (int n : ns) {
            for (int kind = 0; kind < 2; ++kind) {
                const Mat2 S = kind == 0 ? exact_n(n) : empirical_n(n);
                try {
                    const auto poly = ellipse_polyline(S, 1.0, 64);
                    for (std::size_t i = 0; i < poly.size(); ++i)
                        body += std::to_string(n) + "," + (kind == 0 ? "exact" : "empirical") + "," +
                                std::to_string(i) + "," + num(poly[i].first) + "," + num(poly[i].second) + "\n";
                    if (kind == 0) series.push_back({"n=" + std::to_string(n), poly});
                } catch (const DomainError&) {
                    // singular empirical estimate at tiny run counts
                }
            }
        }
        series.push_back({"limit", ellipse_polyline(Mat2(lc.sigma), 1.0, 64)});
        w.csv("quadcov_" + name + "_ellipses.csv", "n,kind,i,x,y", body);
        w.svg("quadcov_" + name + "_ellipses.svg",
              svg_lines(name + ": {z : z^T Sigma_n z = 1}", series, w.stamp()));
        const Mat2 emp = empirical_n(c.iterations);
        const double mc_err = (emp - Mat2(lc.sigma)).norm() / Mat2(lc.sigma).norm();
        auto mat = [](const Mat& M) {
            json a = json::array();
            for (int i = 0; i < M.rows(); ++i) {
                json r = json::array();
                for (int j = 0; j < M.cols(); ++j) r.push_back(M(i, j));
                a.push_back(r);
            }
            return a;
        };
        double res = 0.0;
        for (const auto& b : lc.blocks)
            res = std::max(res, b.residual / rlambda_cp(b.lambda, theta, q.mu_x, q.mu_y, s2).norm());
        probs.push_back({{"name", name}, {"kappa", kap}, {"theta_min", theta_min(kap)},
                         {"sigma_inf", mat(lc.sigma)}, {"sigma_tilde_inf", mat(lc.sigma_tilde)},
                         {"sigma_exact", mat(lc.sigma_exact)}, {"rho_A", lc.rho_A},
                         {"spectral_radius", m.spectral_radius},
                         {"lyapunov_relative_residual", res},
                         {"rate_fit", {{"slope", fit.slope}, {"expected", fit.expected},
                                       {"ratio", fit.ratio}, {"window", win}}},
                         {"empirical_n", c.iterations}, {"empirical_relative_error", mc_err}});
    }
    summary["problems"] = probs;
    w.json_file("quadcov_summary.json", summary);
    return {summary, w.files};
}

CommandResult cmd_drlr(const ExperimentConfig& c) {
    check_common(c);
    const json& p = c.problem;
    const std::string path = p.value("csv", "");
    if (path.empty()) throw DomainError("drlr: problem.csv is required");
    CsvSchema schema;
    schema.label_column = p.value("label", "");
    DrlrSpec spec;
    spec.data = load_csv(path, schema);
    spec.mu_x = getd(p, "mu_x");
    spec.mu_y = getd(p, "mu_y");
    spec.r = getd(p, "r");
    const int batch = geti(p, "batch");
    const double p_risk = getd(p, "p_risk");
    const int ref_factor = geti(p, "reference_factor");
    SaddleProblem prob = drlr_oracles(spec);
    const Thresholds th = theta_thresholds(prob.constants);
    const double tbar = std::max({0.5, th.theta1, th.theta2});
    std::vector<double> thetas = c.thetas;
    if (thetas.empty()) {
        const double t1 = tbar + 0.01 < 1.0 ? tbar + 0.01 : 0.5 * (1.0 + tbar);
        thetas = {t1, 1.0 - (1.0 - tbar) * (1.0 - tbar)};
    }
    const int n = spec.data.rows();
    const double r = drlr_radius(spec);
    const Vec x0 = Vec::Constant(spec.data.cols(), getd(p, "x0"));
    const Vec y0 = Vec::Constant(n, 1.0 / n);

    // reference point: long noiseless run at the smallest theta
    const double tref = *std::min_element(thetas.begin(), thetas.end());
    const SapdParams pref = cp_certified_params(tref, prob.constants);
    const Trajectory ref = run(prob, pref, ref_factor * c.iterations, x0, y0,
                               NoiseModel::none_model(), c.seed, 0, RunOptions{0, 0, 1e12});
    prob.x_star = ref.x_final;
    prob.y_star = ref.y_final;

    Writer w(c);
    json summary = {{"command", "drlr"}, {"n", n}, {"features", spec.data.cols()},
                    {"radius", r}, {"theta_bar", tbar}, {"batch", batch},
                    {"warnings", spec.data.warnings}, {"runs", c.runs},
                    {"iterations", c.iterations}, {"seed", c.seed}};
    json per = json::array();
    const NoiseModel noise = batch >= n ? NoiseModel::none_model() : NoiseModel::minibatch(batch);
    for (double theta : thetas) {
        const SapdParams sp = cp_certified_params(theta, prob.constants);
        const RunEnsemble ens = ensemble(prob, sp, c.iterations, x0, y0, noise, c.runs, c.seed, c.workers);
        if (ens.failures == ens.runs.size()) throw NumericalError("all runs diverged");
        double viol = 0.0;
        if (storage_allowed(prob.dim_x + prob.dim_y, c.iterations)) {
            const Trajectory t = run(prob, sp, c.iterations, x0, y0, noise, c.seed, 0, RunOptions{0, 1, 1e12});
            for (const Vec& y : t.ys) viol = std::max(viol, Pr_violation(y, r));
        }
        const std::size_t last = ens.metric_index.size() - 1;
        const std::size_t tail0 = last - last / 10;
        double plateau = 0.0;
        for (std::size_t i = tail0; i <= last; ++i) plateau += ens.mean_E[i];
        plateau /= static_cast<double>(last - tail0 + 1);
        const std::string base = "drlr_" + tag(theta);
        w.csv(base + "_convergence.csv", "k,mean_E,stderr_E,mean_D,var_p", convergence_csv(ens, p_risk));
        const json hist = emit_histogram(w, ens, last, p_risk, base + "_hist",
                                         "E_n, theta = " + num(theta));
        per.push_back({{"theta", theta}, {"tau", sp.tau}, {"sigma", sp.sigma},
                       {"failures", ens.failures}, {"plateau_mean_E", plateau},
                       {"max_Pr_violation", viol}, {"final", hist}});
    }
    summary["thetas"] = per;
    w.json_file("drlr_summary.json", summary);
    return {summary, w.files};
}

CommandResult cmd_certify(const ExperimentConfig& c) {
    const json& p = c.problem;
    ProblemConstants pc;
    pc.mu_x = getd(p, "mu_x");
    pc.mu_y = getd(p, "mu_y");
    pc.L.xx = getd(p, "L_xx");
    pc.L.xy = getd(p, "L_xy");
    pc.L.yx = getd(p, "L_yx");
    pc.L.yy = getd(p, "L_yy");
    pc.validate();
    if (!(pc.L.yx > 0.0) || !(pc.L.xy > 0.0)) throw DomainError("L_xy and L_yx must be positive");
    const double nu_x = getd(p, "nu_x"), nu_y = getd(p, "nu_y");
    const double dx = getd(p, "dist_x"), dy = getd(p, "dist_y");
    const double r = getd(p, "r");
    const Thresholds th = theta_thresholds(pc);
    double theta;
    json selection;
    if (!c.thetas.empty()) {
        theta = c.thetas[0];
        selection = {{"source", "config"}};
    } else {
        const ThetaSelection sel = select_theta(c.eps, c.p, pc, nu_x, nu_y);
        theta = sel.theta;
        selection = {{"source", "select_theta"}, {"eps", c.eps}, {"p", c.p},
                     {"theta_xx", sel.theta_xx}, {"theta_yy", sel.theta_yy}};
    }
    if (!(theta > 0.0 && theta < 1.0)) throw DomainError("theta must lie in (0,1)");
    const SapdParams sp = cp_certified_params(theta, pc);
    const Certificate cert = matrix_inequality(sp, pc);
    const Vec x0 = Vec::Constant(1, dx), y0 = Vec::Constant(1, dy), z = Vec::Zero(1);
    const Ledger l = build_ledger(pc, sp, nu_x, nu_y, x0, y0, z, z);
    auto v4 = [](const Vec4& v) { return json::array({v[0], v[1], v[2], v[3]}); };
    json ledger = {{"mode", l.mode},
                   {"A0", v4(l.core.A0)}, {"A1", v4(l.core.A1)}, {"A2", v4(l.core.A2)}, {"A3", v4(l.core.A3)},
                   {"B_x", l.core.Bx}, {"C_x", l.core.Cx}, {"C_x_m1", l.core.Cx1},
                   {"B_y", l.core.By}, {"B_y_m1", l.core.By1}, {"C_y", l.core.Cy},
                   {"C_y_m1", l.core.Cy1}, {"C_y_m2", l.core.Cy2}, {"C_sigma_theta", l.core.C_sigma_theta},
                   {"Q_x", l.Qx}, {"Q_y", l.Qy}, {"gamma_x", l.gamma_x}, {"gamma_y", l.gamma_y},
                   {"Xi1_x", l.xi1x}, {"Xi1_y", l.xi1y}, {"Xi2_x", l.xi2x}, {"Xi2_y", l.xi2y},
                   {"Xi3_x", l.xi3x}, {"Xi3_y", l.xi3y}, {"Xi1", l.xi1}, {"Xi2", l.xi2}, {"Xi3", l.xi3},
                   {"C", l.C}, {"D", l.D}, {"nu_x", nu_x}, {"nu_y", nu_y}};
    json qs = json::array(), rs = json::array();
    for (int n : p["ns"].get<std::vector<int>>())
        for (double pp : p["ps"].get<std::vector<double>>()) {
            qs.push_back({{"n", n}, {"p", pp}, {"q", q_bound(l, sp.rho, n, pp)}});
            const RiskBounds b = risk_bounds(l, sp.rho, n, pp, r);
            rs.push_back({{"n", n}, {"p", pp}, {"r", r}, {"cvar", b.cvar}, {"evar", b.evar}, {"chi2", b.chi2}});
        }
    json cx = json::array();
    const double W0 = pc.mu_x * dx * dx + pc.mu_y * dy * dy;
    for (double e : p["eps_list"].get<std::vector<double>>()) {
        const Complexity k = complexity_n(e, c.p, pc, nu_x, nu_y, W0);
        cx.push_back({{"eps", e}, {"theta", k.theta}, {"n", k.n}, {"factor", k.factor}});
    }
    json summary = {{"command", "certify"}, {"schema", 1}, {"feasible", cert.feasible}, {"min_eig", cert.min_eig},
                    {"thresholds", {{"theta1", th.theta1}, {"theta2", th.theta2}, {"beta", th.beta}}},
                    {"selection", selection},
                    {"params", {{"tau", sp.tau}, {"sigma", sp.sigma}, {"theta", sp.theta},
                                {"rho", sp.rho}, {"alpha", sp.alpha}}},
                    {"ledger", ledger}, {"q_bound", qs}, {"risk_bounds", rs}, {"complexity", cx}};
    Writer w(c);
    w.json_file("certificate.json", summary);
    return {summary, w.files};
}

CommandResult cmd_risk(const ExperimentConfig& c) {
    const json& p = c.problem;
    std::vector<double> samples;
    if (p.contains("samples")) {
        samples = p["samples"].get<std::vector<double>>();
    } else if (p.contains("csv")) {
        std::ifstream f(p["csv"].get<std::string>());
        if (!f) throw DomainError("cannot open " + p["csv"].get<std::string>());
        const int col = p.value("column", 0);
        std::string line;
        int lineno = 0;
        while (std::getline(f, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#') continue;
            std::stringstream ss(line);
            std::string cell;
            for (int i = 0; i <= col; ++i)
                if (!std::getline(ss, cell, ',')) throw DomainError("risk csv: short line " + std::to_string(lineno));
            try {
                samples.push_back(std::stod(cell));
            } catch (const std::exception&) {
                if (lineno > 1) throw DomainError("risk csv: bad number at line " + std::to_string(lineno));
            }
        }
    } else {
        throw DomainError("risk: problem.samples or problem.csv required");
    }
    const SampleSet s(samples);
    const double r = getd(p, "r");
    json reps = json::array();
    for (double pp : p["ps"].get<std::vector<double>>()) reps.push_back(risk_json(risk_report(s, pp, r)));
    json summary = {{"command", "risk"}, {"reports", reps}};
    Writer w(c);
    w.json_file("risk.json", summary);
    return {summary, w.files};
}

CommandResult dispatch(const ExperimentConfig& c) {
    if (c.command == "toy") return cmd_toy(c);
    if (c.command == "bilinear") return cmd_bilinear(c);
    if (c.command == "quadcov") return cmd_quadcov(c);
    if (c.command == "drlr") return cmd_drlr(c);
    if (c.command == "certify") return cmd_certify(c);
    if (c.command == "risk") return cmd_risk(c);
    throw DomainError("unknown command '" + c.command + "'");
}

int run(int argc, char** argv) {
    CLI::App app{"sapd-lab: stochastic accelerated primal-dual experiments"};
    std::string command, config_path, out;
    std::uint64_t seed = 0;
    int runs = 0, iterations = 0, workers = -1;
    std::vector<double> thetas;
    bool quiet = false;
    app.add_option("command", command, "toy|bilinear|quadcov|drlr|certify|risk")
        ->required()
        ->check(CLI::IsMember({"toy", "bilinear", "quadcov", "drlr", "certify", "risk"}));
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--out", out, "output directory");
    auto* seed_opt = app.add_option("--seed", seed, "master seed");
    app.add_option("--runs", runs, "number of runs");
    app.add_option("--iterations", iterations, "iterations per run");
    app.add_option("--theta", thetas, "momentum parameter (repeatable)");
    app.add_option("--workers", workers, "worker threads (0 = all cores)");
    app.add_flag("--quiet", quiet, "suppress the JSON summary on stdout");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }
    try {
        json j = json::object();
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) throw DomainError("cannot open config " + config_path);
            try {
                j = json::parse(f);
            } catch (const json::parse_error& e) {
                throw DomainError(std::string("config parse error: ") + e.what());
            }
        }
        ExperimentConfig c = config_from_json(j);
        if (!c.command.empty() && c.command != command)
            throw DomainError("config command '" + c.command + "' does not match '" + command + "'");
        c.command = command;
        if (!out.empty()) c.out_dir = out;
        if (*seed_opt) c.seed = seed;
        if (runs > 0) c.runs = runs;
        if (iterations > 0) c.iterations = iterations;
        if (workers >= 0) c.workers = workers;
        if (!thetas.empty()) c.thetas = thetas;
        apply_defaults(c);
        const CommandResult res = dispatch(c);
        if (!quiet) std::cout << res.summary.dump(2) << "\n";
        return kExitOk;
    } catch (const DomainError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
}

}  // namespace sapd::cli
