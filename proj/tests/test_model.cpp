#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "ecmlab/path.hpp"

using namespace ecmlab;

namespace {

double log_mispricing(const PathStep& s) { return std::log(s.price / s.normal_price); }

ModelParams random_params(RandomStream& rng) {
    ModelParams p;
    p.discount_rate = rng.uniform(-2e-3, 2e-3);
    p.normal_growth_rate = p.discount_rate;
    p.volatility = rng.uniform(0.0, 0.05);
    p.jump_prob = rng.uniform(0.0, 0.2);
    p.mean_jump_size = rng.uniform(-0.5, 1.5);
    p.jump_size_std = rng.uniform(0.0, 0.5);
    p.initial_price = rng.uniform(0.1, 10.0);
    return p;
}

}  // namespace

TEST_CASE("base parameter set") {
    const auto p = ModelParams::base();
    REQUIRE(p.discount_rate == Catch::Approx(2.6848670029291612e-04).epsilon(1e-15));
    REQUIRE(p.normal_growth_rate == p.discount_rate);
    REQUIRE(p.volatility == Catch::Approx(0.010708993401928105).epsilon(1e-15));
    REQUIRE(p.volatility == 0.17 / std::sqrt(252.0));
    REQUIRE(p.jump_prob == 0.01);
    REQUIRE(p.mean_jump_size == 0.3);
    REQUIRE(p.jump_size_std == 0.2);
    REQUIRE(p.risk_free_rate == 0.0);
    REQUIRE(p.initial_price == 1.0);
    p.validate();
}

TEST_CASE("parameter validation rejects out-of-range values") {
    auto p = ModelParams::base();
    p.jump_prob = 1.2;
    REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
    p = ModelParams::base();
    p.jump_prob = 1.0;
    REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
    p = ModelParams::base();
    p.volatility = -0.1;
    REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
    p = ModelParams::base();
    p.initial_price = 0.0;
    REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("expected return at the anchor points") {
    const auto base = ModelParams::base();
    REQUIRE(expected_return(base, 1.0) == base.discount_rate);

    auto no_jumps = base;
    no_jumps.jump_prob = 0.0;
    REQUIRE(expected_return(no_jumps, 0.37) == no_jumps.discount_rate);
    REQUIRE(expected_return(no_jumps, 2.9) == no_jumps.discount_rate);

    // direct evaluation at q = 0.9, recomputed independently in extended precision
    REQUIRE(expected_return(base, 0.9) == Catch::Approx(5.87760990165117e-04).epsilon(1e-13));

    REQUIRE_THROWS_AS(expected_return(base, 0.0), std::domain_error);
    REQUIRE_THROWS_AS(expected_return(base, -1.0), std::domain_error);
}

TEST_CASE("rational-expectations identity holds for random parameters") {
    RandomStream rng(11, 0);
    for (int i = 0; i < 10000; ++i) {
        const auto p = random_params(rng);
        const double q = std::exp(rng.uniform(-3.0, 3.0));
        const double rbar = expected_return(p, q);
        const double lhs = (1.0 - p.jump_prob) * rbar +
                           p.jump_prob * (p.mean_jump_size * std::log(q) + p.discount_rate);
        REQUIRE(std::abs(lhs - p.discount_rate) < 1e-12);
    }
}

TEST_CASE("deterministic limit: no noise, no jumps") {
    auto p = ModelParams::base();
    p.volatility = 0.0;
    p.jump_prob = 0.0;
    RandomStream s(1, 0);
    const auto path = generate_path(p, 100, s);
    REQUIRE(path.ok());
    for (std::size_t t = 0; t < path.steps.size(); ++t) {
        REQUIRE(path.steps[t].price ==
                Catch::Approx(p.initial_price * std::exp(p.discount_rate * t)).epsilon(1e-13));
    }
}

TEST_CASE("a full efficient crash returns the price to the normal price") {
    auto p = ModelParams::base();
    p.volatility = 0.0;
    PathStep state;
    state.price = 1.8;  // bubble state
    state.normal_price = 1.2;
    state.mispricing_ratio = state.normal_price / state.price;
    const auto next = step(p, state, 0.0, 0.0, 1.0);  // jump branch, kappa = 1
    REQUIRE(next.branch == Branch::jump);
    REQUIRE(next.kappa == 1.0);
    REQUIRE(std::abs(log_mispricing(next)) < 1e-14);
}

TEST_CASE("mispricing recursions at zero volatility") {
    auto p = ModelParams::base();
    p.volatility = 0.0;
    const double slope = 1.0 + p.jump_prob * p.mean_jump_size / (1.0 - p.jump_prob);
    RandomStream rng(5, 1);
    for (int i = 0; i < 10; ++i) {
        const double m = rng.uniform(-1.0, 1.0);
        PathStep state;
        state.normal_price = 1.3;
        state.price = state.normal_price * std::exp(m);
        state.mispricing_ratio = state.normal_price / state.price;

        const auto grown = step(p, state, 1.0, 0.0, 0.0);  // no-jump branch
        REQUIRE(log_mispricing(grown) == Catch::Approx(slope * m).epsilon(1e-12).margin(1e-14));

        const double kappa = rng.uniform(-0.5, 1.5);
        const auto jumped = step(p, state, 0.0, 0.0, kappa);  // jump branch
        REQUIRE(log_mispricing(jumped) ==
                Catch::Approx((1.0 - kappa) * m).epsilon(1e-12).margin(1e-14));
    }
}

TEST_CASE("mirror symmetry of the mispricing dynamics") {
    // with symmetric noise, negating the mispricing and the gaussian draw
    // mirrors the path exactly
    auto p = ModelParams::base();
    RandomStream rng(17, 3);
    PathStep a, b;
    a.normal_price = b.normal_price = 1.0;
    a.price = std::exp(0.25);
    b.price = std::exp(-0.25);
    a.mispricing_ratio = 1.0 / a.price;
    b.mispricing_ratio = 1.0 / b.price;
    for (int t = 0; t < 200; ++t) {
        const double u = rng.uniform01();
        const double eps = rng.gaussian();
        const double kappa = p.mean_jump_size + p.jump_size_std * rng.gaussian();
        a = step(p, a, u, eps, kappa);
        b = step(p, b, u, -eps, kappa);
        REQUIRE(log_mispricing(a) ==
                Catch::Approx(-log_mispricing(b)).epsilon(1e-11).margin(1e-12));
    }
}

TEST_CASE("path generation is bit-reproducible") {
    const auto p = ModelParams::base();
    RandomStream s1(99, 4), s2(99, 4);
    const auto a = generate_path(p, 1250, s1);
    const auto b = generate_path(p, 1250, s2);
    REQUIRE(a.ok());
    REQUIRE(a.steps.size() == b.steps.size());
    for (std::size_t t = 0; t < a.steps.size(); ++t) {
        REQUIRE(a.steps[t].price == b.steps[t].price);
        REQUIRE(a.steps[t].normal_price == b.steps[t].normal_price);
        REQUIRE(a.steps[t].eps == b.steps[t].eps);
        REQUIRE((a.steps[t].branch == b.steps[t].branch));
    }
}

TEST_CASE("initial state is the no-bubble state") {
    const auto p = ModelParams::base();
    RandomStream s(3, 0);
    const auto path = generate_path(p, 10, s);
    REQUIRE(path.steps[0].price == p.initial_price);
    REQUIRE(path.steps[0].normal_price == p.initial_price);
    REQUIRE(path.steps[0].mispricing_ratio == 1.0);
    REQUIRE(path.steps[0].branch == Branch::no_jump);
    REQUIRE_FALSE(path.steps[0].kappa.has_value());
}

TEST_CASE("normal price follows the closed form") {
    const auto p = ModelParams::base();
    RandomStream s(8, 2);
    const auto path = generate_path(p, 2000, s);
    for (std::size_t t = 0; t < path.steps.size(); t += 97) {
        const double want = p.initial_price * std::exp(p.normal_growth_rate * t);
        REQUIRE(path.steps[t].normal_price == Catch::Approx(want).epsilon(1e-12));
        REQUIRE(path.steps[t].mispricing_ratio ==
                path.steps[t].normal_price / path.steps[t].price);
    }
}

TEST_CASE("GBM reduction: moments match at 3 standard errors") {
    auto p = ModelParams::base();
    p.jump_prob = 0.0;
    const std::size_t horizon = 10000;
    RandomStream s(123, 0);
    const auto path = generate_path(p, horizon, s);
    REQUIRE(path.ok());
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t t = 1; t <= horizon; ++t) {
        const double r = std::log(path.steps[t].price / path.steps[t - 1].price);
        sum += r;
        sum2 += r * r;
    }
    const double n = static_cast<double>(horizon);
    const double mean = sum / n;
    const double sd = std::sqrt((sum2 - n * mean * mean) / (n - 1.0));
    REQUIRE(std::abs(mean - p.discount_rate) < 3.0 * p.volatility / std::sqrt(n));
    REQUIRE(std::abs(sd - p.volatility) < 3.0 * p.volatility / std::sqrt(2.0 * n));
}

TEST_CASE("jump frequency matches the jump probability") {
    const auto p = ModelParams::base();
    std::size_t jumps = 0, total = 0;
    for (std::uint64_t j = 0; j < 50; ++j) {
        RandomStream s(321, j);
        const auto path = generate_path(p, 2000, s);
        REQUIRE(path.ok());
        for (std::size_t t = 1; t < path.steps.size(); ++t) {
            total += 1;
            if (path.steps[t].branch == Branch::jump) jumps += 1;
        }
    }
    const double freq = static_cast<double>(jumps) / static_cast<double>(total);
    const double se = std::sqrt(p.jump_prob * (1.0 - p.jump_prob) / static_cast<double>(total));
    REQUIRE(std::abs(freq - p.jump_prob) < 3.0 * se);
}

TEST_CASE("ensemble paths depend only on (master seed, index)") {
    const auto p = ModelParams::base();
    const auto ensemble = generate_ensemble(p, 100, 8, 777);
    REQUIRE(ensemble.size() == 8);
    // regenerating one member standalone gives the identical path
    RandomStream s(777, 5, StreamPurpose::path_noise);
    const auto solo = generate_path(p, 100, s);
    for (std::size_t t = 0; t < solo.steps.size(); ++t)
        REQUIRE(solo.steps[t].price == ensemble[5].steps[t].price);
    REQUIRE(ensemble[5].seed.master_seed == 777);
    REQUIRE(ensemble[5].seed.sim_index == 5);
}

TEST_CASE("terminal-price quartiles are stable across master seeds") {
    const auto p = ModelParams::base();
    std::vector<double> medians;
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        std::vector<double> terminal;
        for (std::uint64_t j = 0; j < 200; ++j) {
            RandomStream s(seed, j);
            const auto path = generate_path(p, 1250, s);
            terminal.push_back(std::log(path.steps.back().price));
        }
        std::sort(terminal.begin(), terminal.end());
        medians.push_back(terminal[terminal.size() / 2]);
    }
    // medians of ln P_T cluster near 1250 * discount_rate
    const double expect = 1250 * p.discount_rate;
    for (double m : medians) REQUIRE(std::abs(m - expect) < 0.15);
}

TEST_CASE("runaway price is reported as a generation failure") {
    auto p = ModelParams::base();
    p.discount_rate = 1.0;  // overflows near step 709
    p.normal_growth_rate = 1.0;
    p.volatility = 0.0;
    p.jump_prob = 0.0;
    RandomStream s(1, 0);
    const auto path = generate_path(p, 2000, s);
    REQUIRE_FALSE(path.ok());
    REQUIRE(path.failure_step.has_value());
    REQUIRE(*path.failure_step < 800);
    REQUIRE(path.steps.size() == *path.failure_step);  // steps before the failure remain
    for (const auto& st : path.steps) REQUIRE(std::isfinite(st.price));
}

TEST_CASE("step rejects a non-positive price") {
    PathStep bad;
    bad.price = 0.0;
    REQUIRE_THROWS_AS(step(ModelParams::base(), bad, 0.5, 0.0, 0.0), std::invalid_argument);
}
