#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "fecsim/engine.hpp"
#include "fecsim/service_models.hpp"

using namespace fecsim;

TEST_CASE("identical stream keys replay identical draws") {
    RngStream a(42, {3, hash_label("service"), 17, 2});
    RngStream b(42, {3, hash_label("service"), 17, 2});
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_uniform() == b.next_uniform());
}

TEST_CASE("distinct stream keys diverge") {
    RngStream a(42, {3, hash_label("service")});
    RngStream b(42, {4, hash_label("service")});
    RngStream c(43, {3, hash_label("service")});
    int equal_ab = 0, equal_ac = 0;
    for (int i = 0; i < 1000; ++i) {
        const double ua = a.next_uniform();
        if (ua == b.next_uniform()) ++equal_ab;
        if (ua == c.next_uniform()) ++equal_ac;
    }
    CHECK(equal_ab == 0);
    CHECK(equal_ac == 0);
}

TEST_CASE("uniforms stay inside the open unit interval and look uniform") {
    RngStream s(7, {0});
    double sum = 0.0;
    for (int i = 0; i < 200000; ++i) {
        const double u = s.next_uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK_THAT(sum / 200000, Catch::Matchers::WithinAbs(0.5, 0.005));
}

TEST_CASE("deterministic model always returns its constant") {
    ServiceTimeModel model = Deterministic{5.0};
    RngStream s(1, {0});
    for (int i = 0; i < 100; ++i) CHECK(sample(model, s) == 5.0);
}

TEST_CASE("two-point model empirical mean matches p0*v0 + (1-p0)*v1") {
    ServiceTimeModel model = TwoPoint{2.0 / 3.0, 0.0, 3000.0};
    RngStream s(11, {0});
    double sum = 0.0;
    const int draws = 1000000;
    for (int i = 0; i < draws; ++i) sum += sample(model, s);
    CHECK_THAT(sum / draws, Catch::Matchers::WithinAbs(1000.0, 10.0));
}

TEST_CASE("exponential model empirical mean matches 1/mu") {
    ServiceTimeModel model = Exponential{0.01};
    RngStream s(12, {0});
    double sum = 0.0;
    const int draws = 1000000;
    for (int i = 0; i < draws; ++i) sum += sample(model, s);
    CHECK_THAT(sum / draws, Catch::Matchers::WithinAbs(100.0, 1.0));
}

TEST_CASE("analytic means are exact per variant") {
    CHECK(mean(ServiceTimeModel{Exponential{0.01}}) == 100.0);
    CHECK(mean(ServiceTimeModel{Deterministic{7.5}}) == 7.5);
    CHECK(mean(ServiceTimeModel{TwoPoint{2.0 / 3.0, 0.0, 3000.0}}) ==
          Catch::Approx(1000.0).margin(1e-9));
    CHECK(mean(ServiceTimeModel{ShiftedExponential{100.0, 0.01}}) == 200.0);
    auto samples = std::make_shared<const std::vector<double>>(
        std::vector<double>{1.0, 2.0, 3.0});
    CHECK(mean(ServiceTimeModel{Empirical{samples, "inline"}}) == 2.0);
}

TEST_CASE("model validation flags bad parameters") {
    CHECK(validate_model(Exponential{0.0}).size() == 1);
    CHECK(validate_model(TwoPoint{1.5, 0.0, 1.0}).size() == 1);
    CHECK(validate_model(ShiftedExponential{-1.0, 1.0}).size() == 1);
    CHECK(validate_model(Empirical{nullptr, ""}).size() == 1);
    auto negative = std::make_shared<const std::vector<double>>(
        std::vector<double>{1.0, -2.0});
    CHECK(validate_model(Empirical{negative, ""}).size() == 1);
}

TEST_CASE("min of L exponential draws pools to rate L*mu") {
    // Mean within 1% of 1/(L*mu) and CCDF within 0.01 of exp(-L*mu*t).
    const std::uint32_t threads = 16;
    const double mu = 0.01;
    const ServiceTimeModel model = Exponential{mu};
    RngStream s(5, {hash_label("lemma")});
    const int trials = 1000000;
    std::vector<double> mins(trials);
    double sum = 0.0;
    for (int i = 0; i < trials; ++i) {
        double m = sample(model, s);
        for (std::uint32_t l = 1; l < threads; ++l) m = std::min(m, sample(model, s));
        mins[i] = m;
        sum += m;
    }
    const double pooled_mean = 1.0 / (threads * mu);
    CHECK_THAT(sum / trials,
               Catch::Matchers::WithinAbs(pooled_mean, 0.01 * pooled_mean));

    std::sort(mins.begin(), mins.end());
    double sup = 0.0;
    for (int i = 1; i <= 100; ++i) {
        const double t = 5.0 * pooled_mean * i / 100.0;
        const auto above =
            mins.end() - std::upper_bound(mins.begin(), mins.end(), t);
        const double empirical = static_cast<double>(above) / trials;
        sup = std::max(sup, std::abs(empirical - std::exp(-(threads * mu) * t)));
    }
    CHECK(sup < 0.01);
}

TEST_CASE("model CDFs") {
    CHECK(cdf(ServiceTimeModel{Deterministic{5.0}}, 4.999) == 0.0);
    CHECK(cdf(ServiceTimeModel{Deterministic{5.0}}, 5.0) == 1.0);
    const ServiceTimeModel tp = TwoPoint{2.0 / 3.0, 0.0, 3000.0};
    CHECK(cdf(tp, -0.5) == 0.0);
    CHECK(cdf(tp, 0.0) == Catch::Approx(2.0 / 3.0));
    CHECK(cdf(tp, 2999.0) == Catch::Approx(2.0 / 3.0));
    CHECK(cdf(tp, 3000.0) == 1.0);
    const ServiceTimeModel se = ShiftedExponential{100.0, 0.01};
    CHECK(cdf(se, 99.0) == 0.0);
    CHECK(cdf(se, 100.0) == 0.0);
    CHECK(cdf(se, 200.0) == Catch::Approx(-std::expm1(-1.0)));
    auto samples = std::make_shared<const std::vector<double>>(
        std::vector<double>{1.0, 2.0, 3.0, 4.0});
    const ServiceTimeModel emp = Empirical{samples, ""};
    CHECK(cdf(emp, 2.5) == 0.5);
    CHECK(cdf(emp, 0.5) == 0.0);
    CHECK(cdf(emp, 4.0) == 1.0);
}

TEST_CASE("arrival gaps are i.i.d. exponential with the configured rate") {
    RngStream s(101, {hash_label("arrivals")});
    auto times = arrival_times(50.0, 62500, s);
    REQUIRE(times.size() == 62500);
    for (std::size_t i = 1; i < times.size(); ++i) REQUIRE(times[i] > times[i - 1]);
    const double mean_gap = times.back() / 62500.0;
    CHECK_THAT(mean_gap, Catch::Matchers::WithinAbs(0.02, 0.0002));  // 1%

    // Kolmogorov-Smirnov against the analytic exponential CDF.
    RngStream s2(102, {hash_label("arrivals")});
    auto times2 = arrival_times(50.0, 100000, s2);
    std::vector<double> gaps(times2.size());
    gaps[0] = times2[0];
    for (std::size_t i = 1; i < times2.size(); ++i)
        gaps[i] = times2[i] - times2[i - 1];
    std::sort(gaps.begin(), gaps.end());
    double ks = 0.0;
    const double n = static_cast<double>(gaps.size());
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        const double f = -std::expm1(-50.0 * gaps[i]);
        ks = std::max(ks, std::abs((i + 1) / n - f));
        ks = std::max(ks, std::abs(f - i / n));
    }
    CHECK(ks < 0.01);
}

TEST_CASE("single arrival time equals its first gap") {
    RngStream s(7, {hash_label("arrivals")});
    auto times = arrival_times(2.0, 1, s);
    REQUIRE(times.size() == 1);
    RngStream replay(7, {hash_label("arrivals")});
    CHECK(times[0] == -std::log1p(-replay.next_uniform()) / 2.0);
}

TEST_CASE("crn sampler keys draws by request and attempt") {
    const ServiceTimeModel model = Exponential{1.0};
    ServiceSampler a(model, 9, 0, true);
    ServiceSampler b(model, 9, 0, true);
    // Same keys, any call order.
    const double a_r3_a2 = a.sample(3, 2);
    const double a_r1_a0 = a.sample(1, 0);
    CHECK(b.sample(1, 0) == a_r1_a0);
    CHECK(b.sample(3, 2) == a_r3_a2);
    // Sequential mode depends on call order instead.
    ServiceSampler c(model, 9, 0, false);
    ServiceSampler d(model, 9, 0, false);
    const double c1 = c.sample(3, 2);
    const double d1 = d.sample(1, 0);
    CHECK(c1 == d1);
}
