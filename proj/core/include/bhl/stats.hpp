#pragma once

#include "bhl/syntax.hpp"
#include "bhl/value.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

namespace bhl::stats {

// A p-value, with a standard error when it was estimated by simulation.
struct PValue {
    double value = 1.0;
    std::optional<double> mc_stderr;
};

enum class Combination { Disjunctive, Conjunctive };

// Standard normal distribution function, 0.5 * erfc(-x / sqrt 2).
double std_normal_cdf(double x);
double normal_logpdf(double x, double mean, double var);

// (mean(y1) - mean(y2)) / (sigma * sqrt(1/|y1| + 1/|y2|))
double z_statistic(const std::vector<double>& y1, const std::vector<double>& y2, double sigma);

// The likeliness relation: is t at most as likely as t_obs under the tail?
bool at_most_as_likely(Tail tail, double t, double t_obs);

// Pr[t ⪯ t_obs] for t drawn from the standard normal.
double std_normal_p_value(Tail tail, double t_obs);

// p-value of a combined test under the independent product coupling.
double combine_p_values(Combination kind, double p1, double p2);

// Likelihood ratio prod q(y_i) / prod p(y_i), and its logarithm.
double log_likelihood_ratio(const std::vector<double>& y, const Dist& p, const Dist& q);
double likelihood_ratio_statistic(const std::vector<double>& y, const Dist& p, const Dist& q);

// Density of y under y_i | z ~ N(z, sigma2), z ~ N(mu0, tau2) (the closed-form normal marginal).
double normal_marginal_logpdf(const std::vector<double>& y, double mu0, double tau2, double sigma2);

struct NormalPrior {
    double mu0 = 0.0;
    double tau2 = 1.0;
};

// Ratio of marginal likelihoods: null model over alternative model.
double bayes_factor(const std::vector<double>& y, NormalPrior null_prior, NormalPrior alt_prior, double sigma2);

// Monte-Carlo estimate of Pr[T ⪯ t_obs] where `draw` samples the statistic
// under the null.  Deterministic given the seed.
PValue mc_null_p_value(const std::function<double(std::mt19937_64&)>& draw, double t_obs, Tail tail,
                       int samples, std::uint64_t seed);

// Draw from a distribution descriptor.
double draw(const Dist& d, std::mt19937_64& rng);

// p-value of the likelihood-ratio test: closed form for equal-variance
// normal candidates, seeded simulation otherwise (or when forced).
PValue lr_p_value(const TestDecl& t, const std::vector<double>& y, bool force_simulation = false);

// p-value of the conjugate Bayesian test (always simulated).
PValue bf_p_value(const TestDecl& t, const std::vector<double>& y);

// p-value of a declared test applied to a data value: a pair of datasets
// for Z tests, one dataset for LR/BF, a pair of component data for combined
// tests.  Results are memoised per (test, data).
PValue p_value(const Decls& d, const std::string& test, const Value& data);

} // namespace bhl::stats
