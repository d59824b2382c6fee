#include <doctest.h>

#include "bhl/stats.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace bhl;
using namespace bhl::stats;

namespace {

// Independent oracle: composite Simpson integration of the standard normal
// density from -12 to x.
double phi_by_quadrature(double x) {
    const int n = 200000;
    double a = -12.0, h = (x - a) / n, s = 0.0;
    auto f = [](double t) { return std::exp(-t * t / 2) / std::sqrt(2 * std::numbers::pi); };
    for (int i = 0; i <= n; ++i) s += f(a + i * h) * (i == 0 || i == n ? 1 : (i % 2 ? 4 : 2));
    return s * h / 3;
}

TestDecl z_two() {
    TestDecl t;
    t.id = "z";
    t.kind = TestDecl::Kind::Z;
    return t;
}

} // namespace

TEST_CASE("normal cdf: symmetry, frozen values and the quadrature oracle") {
    CHECK(std_normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(std_normal_cdf(3.0) == doctest::Approx(0.998650101968369905).epsilon(1e-13));
    for (double x : {-4.0, -1.96, -0.3, 0.0, 0.7, 1.8, 3.0, 5.0})
        CHECK(std::fabs(std_normal_cdf(x) - phi_by_quadrature(x)) < 1e-12);
    CHECK_THROWS_AS(std_normal_cdf(std::nan("")), Error);
}

TEST_CASE("Z statistic by hand arithmetic") {
    CHECK(z_statistic({5, 5}, {3, 3}, 1.0) == doctest::Approx(2.0));
    CHECK(z_statistic({1, 2, 3}, {1, 2, 3}, 2.0) == 0.0);
    CHECK(z_statistic({1}, {0}, 1.0) == doctest::Approx(1 / std::sqrt(2.0)));
    CHECK_THROWS_AS(z_statistic({}, {1}, 1.0), Error);
    CHECK_THROWS_AS(z_statistic({1}, {1}, 0.0), Error);
}

TEST_CASE("two-tailed Z p-values") {
    CHECK(std::fabs(std_normal_p_value(Tail::Two, 1.96) - 0.05) < 1e-3);
    CHECK(std_normal_p_value(Tail::Two, 3.0) == doctest::Approx(0.00269979606326018906).epsilon(1e-11));
    CHECK(std_normal_p_value(Tail::Two, 1.8) == doctest::Approx(0.0718606382258516009).epsilon(1e-11));
    CHECK(std_normal_p_value(Tail::Two, 3.0) < 0.05);
    CHECK(std_normal_p_value(Tail::Two, 1.8) > 0.05);
}

TEST_CASE("p-value properties over fuzzed statistics") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd(0.0, 3.0);
    for (int i = 0; i < 2000; ++i) {
        double t = nd(rng), u = nd(rng);
        for (Tail tail : {Tail::Two, Tail::Upper, Tail::Lower}) {
            double p = std_normal_p_value(tail, t);
            CHECK((p >= 0.0 && p <= 1.0));
        }
        double two = std_normal_p_value(Tail::Two, t);
        double split = std_normal_p_value(Tail::Upper, std::fabs(t)) + std_normal_p_value(Tail::Lower, -std::fabs(t));
        CHECK(std::fabs(two - split) <= 1e-12);
        if (std::fabs(t) <= std::fabs(u)) CHECK(std_normal_p_value(Tail::Two, t) >= std_normal_p_value(Tail::Two, u));
    }
}

TEST_CASE("combined p-values respect the union and minimum bounds") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        double p1 = ud(rng), p2 = ud(rng);
        CHECK(combine_p_values(Combination::Disjunctive, p1, p2) <= p1 + p2 + 1e-12);
        CHECK(combine_p_values(Combination::Conjunctive, p1, p2) <= std::min(p1, p2) + 1e-12);
    }
}

TEST_CASE("likelihood ratio by hand evaluation of Gaussian densities") {
    Dist p{Dist::Kind::Normal, 0.0, 1.0}, q{Dist::Kind::Normal, 1.0, 1.0};
    CHECK(likelihood_ratio_statistic({0.3, -1.2}, p, p) == doctest::Approx(1.0));
    CHECK(likelihood_ratio_statistic({0.0}, p, q) == doctest::Approx(0.606530659712633424).epsilon(1e-14));
    CHECK(likelihood_ratio_statistic({0.0, 0.0}, p, q) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    Dist u{Dist::Kind::Uniform, 0.0, 1.0};
    CHECK_THROWS_AS(log_likelihood_ratio({2.0}, u, p), Error);
    // long datasets stay finite in log space
    std::vector<double> many(5000, 0.0);
    CHECK(std::isfinite(log_likelihood_ratio(many, p, q)));
}

TEST_CASE("likelihood-ratio p-value: closed form agrees with simulation") {
    TestDecl t;
    t.kind = TestDecl::Kind::LR;
    t.tail = Tail::Lower;
    t.p = {Dist::Kind::Normal, 0.0, 1.0};
    t.q = {Dist::Kind::Normal, 1.0, 1.0};
    t.mc_samples = 40000;
    t.seed = 3;
    for (std::vector<double> y : {std::vector<double>{0.2, 0.4, 1.1}, {1.0, 1.0}, {-0.5}}) {
        PValue exact = lr_p_value(t, y);
        PValue sim = lr_p_value(t, y, true);
        REQUIRE(sim.mc_stderr.has_value());
        CHECK(std::fabs(exact.value - sim.value) <= 4 * *sim.mc_stderr + 1e-3);
    }
    // data at the null median gives one half
    CHECK(lr_p_value(t, {1.0}).value == doctest::Approx(0.5));
}

TEST_CASE("simulated p-values: median, determinism and calibration") {
    auto gen = [](std::mt19937_64& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); };
    PValue a = mc_null_p_value(gen, 0.0, Tail::Lower, 20000, 42);
    PValue b = mc_null_p_value(gen, 0.0, Tail::Lower, 20000, 42);
    CHECK(a.value == b.value);
    CHECK(std::fabs(a.value - 0.5) <= 3 * *a.mc_stderr);
    for (double t : {0.5, 1.2, 2.0}) {
        PValue m = mc_null_p_value(gen, t, Tail::Two, 20000, 5);
        CHECK(std::fabs(m.value - std_normal_p_value(Tail::Two, t)) <= 4 * *m.mc_stderr);
    }
    CHECK_THROWS_AS(mc_null_p_value(nullptr, 0.0, Tail::Lower, 10, 1), Error);

    // Under mu1 = mu2 the simulated two-sample p-value rejects at about the nominal rate.
    TestDecl z = z_two();
    std::mt19937_64 rng(99);
    std::normal_distribution<double> nd(0.0, 1.0);
    int rejections = 0, trials = 400;
    for (int i = 0; i < trials; ++i) {
        std::vector<double> y1(5), y2(5);
        for (auto& x : y1) x = nd(rng);
        for (auto& x : y2) x = nd(rng);
        double t = z_statistic(y1, y2, 1.0);
        auto draw_t = [&](std::mt19937_64& g) {
            std::vector<double> d1(5), d2(5);
            for (auto& x : d1) x = nd(g);
            for (auto& x : d2) x = nd(g);
            return z_statistic(d1, d2, 1.0);
        };
        if (mc_null_p_value(draw_t, t, Tail::Two, 1000, 1000 + i).value <= 0.05) ++rejections;
    }
    double rate = static_cast<double>(rejections) / trials, se = std::sqrt(0.05 * 0.95 / trials);
    CHECK(std::fabs(rate - 0.05) <= 3 * se + 0.01);
}

TEST_CASE("Bayes factor from the closed-form normal marginal") {
    CHECK(bayes_factor({0.4, 1.3}, {0.0, 1.0}, {0.0, 1.0}, 1.0) == doctest::Approx(1.0));
    CHECK(bayes_factor({0.0}, {0.0, 1.0}, {1.0, 1.0}, 1.0) == doctest::Approx(1.28402541668774148).epsilon(1e-13));
    // marginal density against quadrature of prior times likelihood
    std::vector<double> y{0.3, -0.2, 1.1};
    double mu0 = 0.5, tau2 = 2.0, s2 = 0.7;
    const int n = 200000;
    double a = -30, b = 30, h = (b - a) / n, acc = 0;
    for (int i = 0; i <= n; ++i) {
        double z = a + i * h;
        double v = std::exp(normal_logpdf(z, mu0, tau2));
        for (double x : y) v *= std::exp(normal_logpdf(x, z, s2));
        acc += v * (i == 0 || i == n ? 1 : (i % 2 ? 4 : 2));
    }
    acc *= h / 3;
    CHECK(std::fabs(std::exp(normal_marginal_logpdf(y, mu0, tau2, s2)) - acc) < 1e-8);
}

TEST_CASE("p_value dispatches on declarations and combines components") {
    Decls d;
    parse_header_into(R"(
      observable y1, y2, y3 : list(real);
      test z12 = Z(two, sigma = 1.0);
      test z13 = Z(two, sigma = 1.0);
      test any = or(z12, z13);
      test both = and(z12, z13);
    )", d);
    Value y1 = Value::reals({3, 3}), y2 = Value::reals({0, 0}), y3 = Value::reals({1.2, 1.2});
    double p12 = p_value(d, "z12", Value::tuple({y1, y2})).value;
    double p13 = p_value(d, "z13", Value::tuple({y1, y3})).value;
    CHECK(p12 == doctest::Approx(0.00269979606326018906).epsilon(1e-11));
    Value pair = Value::tuple({Value::tuple({y1, y2}), Value::tuple({y1, y3})});
    CHECK(p_value(d, "any", pair).value == doctest::Approx(1 - (1 - p12) * (1 - p13)));
    CHECK(p_value(d, "both", pair).value == doctest::Approx(p12 * p13));
    CHECK_THROWS_AS(p_value(d, "z12", y1), Error);
}
