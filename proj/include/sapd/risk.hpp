#pragma once

#include <vector>

namespace sapd {

// Empirical sample with a sorted cache. Quantiles use the left-continuous
// convention Q_p = inf{t : F(t) >= p}.
class SampleSet {
public:
    explicit SampleSet(std::vector<double> values);

    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& sorted() const { return sorted_; }
    std::size_t size() const { return values_.size(); }

private:
    std::vector<double> values_;
    std::vector<double> sorted_;
};

double var_p(const SampleSet& s, double p);
double cvar_p(const SampleSet& s, double p);

struct EvarResult {
    double value = 0.0;
    double eta = 0.0;
    bool at_boundary = false;  // minimizer binds the search bracket
};

EvarResult evar_detail(const SampleSet& s, double p);
double evar_p(const SampleSet& s, double p);
double chi2_risk(const SampleSet& s, double r);

struct RiskReport {
    double p = 0.0;
    double r = 0.0;
    double var = 0.0;
    double cvar = 0.0;
    double evar = 0.0;
    double chi2 = 0.0;
    std::size_t n = 0;
};

RiskReport risk_report(const SampleSet& s, double p, double r);

}  // namespace sapd
