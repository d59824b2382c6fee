#include "bhl/stats.hpp"

#include "bhl/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>

namespace bhl::stats {

double std_normal_cdf(double x) {
    if (std::isnan(x)) fail(Error::Kind::Eval, "normal cdf of NaN");
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_logpdf(double x, double mean, double var) {
    if (!(var > 0)) fail(Error::Kind::Eval, "normal density needs a positive variance");
    double z = x - mean;
    return -0.5 * (std::log(2 * std::numbers::pi * var) + z * z / var);
}

static double mean_of(const std::vector<double>& y) { return std::accumulate(y.begin(), y.end(), 0.0) / y.size(); }

double z_statistic(const std::vector<double>& y1, const std::vector<double>& y2, double sigma) {
    if (y1.empty() || y2.empty()) fail(Error::Kind::Eval, "Z statistic of an empty dataset");
    if (!(sigma > 0)) fail(Error::Kind::Eval, "Z statistic needs sigma > 0");
    double se = sigma * std::sqrt(1.0 / y1.size() + 1.0 / y2.size());
    return (mean_of(y1) - mean_of(y2)) / se;
}

bool at_most_as_likely(Tail tail, double t, double t_obs) {
    switch (tail) {
    case Tail::Two: return std::fabs(t) >= std::fabs(t_obs);
    case Tail::Upper: return t >= t_obs;
    case Tail::Lower: return t <= t_obs;
    }
    return false;
}

double std_normal_p_value(Tail tail, double t) {
    if (std::isnan(t)) fail(Error::Kind::Eval, "p-value of a NaN statistic");
    switch (tail) {
    case Tail::Two: return std::erfc(std::fabs(t) / std::numbers::sqrt2);
    case Tail::Upper: return 0.5 * std::erfc(t / std::numbers::sqrt2);
    case Tail::Lower: return 0.5 * std::erfc(-t / std::numbers::sqrt2);
    }
    return 1.0;
}

double combine_p_values(Combination kind, double p1, double p2) {
    double p = kind == Combination::Disjunctive ? 1.0 - (1.0 - p1) * (1.0 - p2) : p1 * p2;
    return std::clamp(p, 0.0, 1.0);
}

static double dist_logpdf(double x, const Dist& d) {
    if (d.kind == Dist::Kind::Normal) return normal_logpdf(x, d.a, d.b);
    if (x < d.a || x > d.b || !(d.b > d.a)) return -std::numeric_limits<double>::infinity();
    return -std::log(d.b - d.a);
}

double log_likelihood_ratio(const std::vector<double>& y, const Dist& p, const Dist& q) {
    double s = 0.0;
    for (double x : y) {
        double lp = dist_logpdf(x, p), lq = dist_logpdf(x, q);
        if (std::isinf(lp) || std::isinf(lq)) fail(Error::Kind::Eval, "zero density at data point " + format_real(x));
        s += lq - lp;
    }
    return s;
}

double likelihood_ratio_statistic(const std::vector<double>& y, const Dist& p, const Dist& q) {
    return std::exp(log_likelihood_ratio(y, p, q));
}

double normal_marginal_logpdf(const std::vector<double>& y, double mu0, double tau2, double sigma2) {
    if (!(sigma2 > 0) || !(tau2 >= 0)) fail(Error::Kind::Eval, "marginal likelihood needs positive variances");
    // y ~ N(mu0 1, sigma2 I + tau2 1 1^T); determinant and inverse by Sherman-Morrison.
    double n = static_cast<double>(y.size());
    double ss = 0.0, s = 0.0;
    for (double x : y) {
        ss += (x - mu0) * (x - mu0);
        s += x - mu0;
    }
    double denom = sigma2 + n * tau2;
    double quad = (ss - tau2 * s * s / denom) / sigma2;
    double logdet = (n - 1) * std::log(sigma2) + std::log(denom);
    return -0.5 * (n * std::log(2 * std::numbers::pi) + logdet + quad);
}

double bayes_factor(const std::vector<double>& y, NormalPrior null_prior, NormalPrior alt_prior, double sigma2) {
    return std::exp(normal_marginal_logpdf(y, null_prior.mu0, null_prior.tau2, sigma2) -
                    normal_marginal_logpdf(y, alt_prior.mu0, alt_prior.tau2, sigma2));
}

double draw(const Dist& d, std::mt19937_64& rng) {
    if (d.kind == Dist::Kind::Normal) return std::normal_distribution<double>(d.a, std::sqrt(d.b))(rng);
    return std::uniform_real_distribution<double>(d.a, d.b)(rng);
}

PValue mc_null_p_value(const std::function<double(std::mt19937_64&)>& draw_statistic, double t_obs, Tail tail,
                       int samples, std::uint64_t seed) {
    if (!draw_statistic) fail(Error::Kind::Eval, "simulated p-value needs a generator for the null population");
    if (samples < 1) fail(Error::Kind::Eval, "simulated p-value needs at least one sample");
    std::mt19937_64 rng(seed);
    std::int64_t hits = 0;
    for (int i = 0; i < samples; ++i)
        if (at_most_as_likely(tail, draw_statistic(rng), t_obs)) ++hits;
    double p = static_cast<double>(hits) / samples;
    return {p, std::sqrt(p * (1 - p) / samples)};
}

PValue lr_p_value(const TestDecl& t, const std::vector<double>& y, bool force_simulation) {
    if (y.empty()) fail(Error::Kind::Eval, "likelihood-ratio test of an empty dataset");
    double t_obs = log_likelihood_ratio(y, t.p, t.q);
    bool normal_pair = t.p.kind == Dist::Kind::Normal && t.q.kind == Dist::Kind::Normal && t.p.b == t.q.b;
    if (normal_pair && t.tail != Tail::Two && !force_simulation) {
        // log LR = (mq - mp) / (2v) * (2 S - n (mp + mq)) is affine in S = sum(y),
        // and S ~ N(n mq, n v) under the null density q.
        double n = static_cast<double>(y.size()), v = t.q.b, slope = t.q.a - t.p.a;
        if (slope == 0) return {1.0, std::nullopt};
        double s = std::accumulate(y.begin(), y.end(), 0.0);
        double zs = (s - n * t.q.a) / std::sqrt(n * v);
        bool lower_in_s = (t.tail == Tail::Lower) == (slope > 0);
        return {lower_in_s ? std_normal_cdf(zs) : std_normal_cdf(-zs), std::nullopt};
    }
    size_t n = y.size();
    auto gen = [&](std::mt19937_64& rng) {
        double s = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double x = draw(t.q, rng);
            s += dist_logpdf(x, t.q) - dist_logpdf(x, t.p);
        }
        return s;
    };
    if (t.tail == Tail::Two) {
        auto raw = [&](std::mt19937_64& rng) { return std::exp(gen(rng)); };
        return mc_null_p_value(raw, std::exp(t_obs), Tail::Two, t.mc_samples, t.seed);
    }
    return mc_null_p_value(gen, t_obs, t.tail, t.mc_samples, t.seed);
}

PValue bf_p_value(const TestDecl& t, const std::vector<double>& y) {
    if (y.empty()) fail(Error::Kind::Eval, "Bayesian test of an empty dataset");
    NormalPrior null_prior{t.null_mu0, t.null_tau2}, alt_prior{t.alt_mu0, t.alt_tau2};
    auto log_bf = [&](const std::vector<double>& d) {
        return normal_marginal_logpdf(d, null_prior.mu0, null_prior.tau2, t.bf_sigma2) -
               normal_marginal_logpdf(d, alt_prior.mu0, alt_prior.tau2, t.bf_sigma2);
    };
    double t_obs = log_bf(y);
    std::vector<double> buf(y.size());
    auto gen = [&](std::mt19937_64& rng) {
        double z = std::normal_distribution<double>(null_prior.mu0, std::sqrt(null_prior.tau2))(rng);
        std::normal_distribution<double> lik(z, std::sqrt(t.bf_sigma2));
        for (auto& x : buf) x = lik(rng);
        return log_bf(buf);
    };
    Tail tail = t.tail == Tail::Two ? Tail::Lower : t.tail;
    return mc_null_p_value(gen, t_obs, tail, t.mc_samples, t.seed);
}

namespace {

std::string decl_key(const TestDecl& t) {
    std::string k = t.id + "|" + std::to_string(static_cast<int>(t.kind)) + "|" + tail_str(t.tail);
    for (double x : {t.p.a, t.p.b, t.q.a, t.q.b, t.bf_sigma2, t.null_mu0, t.null_tau2, t.alt_mu0, t.alt_tau2})
        k += "|" + format_real(x);
    k += "|" + std::to_string(static_cast<int>(t.p.kind)) + std::to_string(static_cast<int>(t.q.kind));
    return k + "|" + std::to_string(t.mc_samples) + "|" + std::to_string(t.seed);
}

std::mutex cache_mu;
std::map<std::string, PValue>& cache() {
    static std::map<std::string, PValue> c;
    return c;
}

const std::vector<Value>& pair_of(const Value& data, const std::string& test) {
    if (data.kind() != Value::Kind::Tuple || data.elems().size() != 2)
        fail(Error::Kind::Eval, "test '" + test + "' expects a pair of data, got " + data.str());
    return data.elems();
}

} // namespace

PValue p_value(const Decls& d, const std::string& test, const Value& data) {
    const TestDecl& t = d.test(test);
    switch (t.kind) {
    case TestDecl::Kind::Z: {
        const auto& xs = pair_of(data, test);
        double z = z_statistic(xs[0].as_reals(), xs[1].as_reals(), t.sigma);
        return {std_normal_p_value(t.tail, z), std::nullopt};
    }
    case TestDecl::Kind::LR:
    case TestDecl::Kind::BF: {
        if (data.kind() != Value::Kind::List)
            fail(Error::Kind::Eval, "test '" + test + "' expects one dataset, got " + data.str());
        std::string key = decl_key(t) + "#" + data.str();
        {
            std::lock_guard<std::mutex> lock(cache_mu);
            if (auto it = cache().find(key); it != cache().end()) return it->second;
        }
        PValue p = t.kind == TestDecl::Kind::LR ? lr_p_value(t, data.as_reals()) : bf_p_value(t, data.as_reals());
        std::lock_guard<std::mutex> lock(cache_mu);
        cache().emplace(key, p);
        return p;
    }
    case TestDecl::Kind::Or:
    case TestDecl::Kind::And: {
        const auto& xs = pair_of(data, test);
        PValue a = p_value(d, t.c1, xs[0]), b = p_value(d, t.c2, xs[1]);
        bool disj = t.kind == TestDecl::Kind::Or;
        PValue out{combine_p_values(disj ? Combination::Disjunctive : Combination::Conjunctive, a.value, b.value),
                   std::nullopt};
        if (a.mc_stderr || b.mc_stderr) {
            double s1 = a.mc_stderr.value_or(0.0), s2 = b.mc_stderr.value_or(0.0);
            double g1 = disj ? 1 - b.value : b.value, g2 = disj ? 1 - a.value : a.value;
            out.mc_stderr = std::hypot(g1 * s1, g2 * s2);
        }
        return out;
    }
    }
    return {};
}

} // namespace bhl::stats
