#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ecmlab/params.hpp"
#include "ecmlab/rng.hpp"

namespace ecmlab {

// One-step expected log return of the risky asset under no jump, fixed by
// the rational-expectations condition: the probability-weighted mean over
// both branches equals the discount rate at every mispricing.
inline double expected_return_log_mispricing(const ModelParams& p, double log_mispricing) {
    return p.discount_rate -
           p.jump_prob * p.mean_jump_size * log_mispricing / (1.0 - p.jump_prob);
}

inline double expected_return(const ModelParams& p, double mispricing_ratio) {
    if (!(mispricing_ratio > 0.0))
        throw std::domain_error("expected_return: mispricing ratio must be > 0");
    if (!(p.jump_prob < 1.0))
        throw std::domain_error("expected_return: jump_prob must be < 1");
    return expected_return_log_mispricing(p, std::log(mispricing_ratio));
}

enum class Branch : std::uint8_t { no_jump, jump };

// One state of a simulated trajectory. For t >= 1 the draw fields describe
// the transition that produced this step; step 0 is the initial state.
struct PathStep {
    double price = 1.0;
    double normal_price = 1.0;
    double mispricing_ratio = 1.0;  // normal_price / price
    double eps = 0.0;               // gaussian draw of the transition
    double expected_return = 0.0;   // no-jump drift used (from the previous state)
    Branch branch = Branch::no_jump;
    std::optional<double> kappa;    // jump size, present iff branch == jump
};

struct SeedInfo {
    std::uint64_t master_seed = 0;
    std::uint64_t sim_index = 0;
};

struct PricePath {
    std::vector<PathStep> steps;  // length horizon+1 when generation succeeded
    ModelParams params;
    SeedInfo seed;
    std::optional<std::size_t> failure_step;  // set when the price left the normal range

    bool ok() const { return !failure_step.has_value(); }
    std::size_t horizon() const { return steps.empty() ? 0 : steps.size() - 1; }
};

// One transition of the price process. Draw convention: `uniform_draw` picks
// the branch (jump iff uniform_draw <= jump_prob), `gauss_draw` is the
// standard normal noise, `kappa_draw` is the realized jump size (consulted
// only on the jump branch).
inline PathStep step(const ModelParams& p, const PathStep& state, double uniform_draw,
                     double gauss_draw, double kappa_draw) {
    if (!(state.price > 0.0)) throw std::invalid_argument("step: price must be > 0");

    const double q = state.normal_price / state.price;
    const double lnq = std::log(q);

    PathStep next;
    next.eps = gauss_draw;
    next.expected_return = expected_return_log_mispricing(p, lnq);
    if (uniform_draw > p.jump_prob) {
        next.branch = Branch::no_jump;
        next.price = state.price * std::exp(next.expected_return + p.volatility * gauss_draw);
    } else {
        next.branch = Branch::jump;
        next.kappa = kappa_draw;
        next.price = state.price *
                     std::exp(p.discount_rate + kappa_draw * lnq + p.volatility * gauss_draw);
    }
    next.normal_price = state.normal_price * std::exp(p.normal_growth_rate);
    next.mispricing_ratio = next.normal_price / next.price;
    return next;
}

namespace detail {
inline bool price_in_range(double price) {
    return std::isfinite(price) && price >= std::numeric_limits<double>::min() &&
           price <= std::numeric_limits<double>::max();
}
}  // namespace detail

// Streaming generator: one step at a time, consuming draws in the fixed
// order (uniform, gaussian, kappa-if-jump) so replay is bit-reproducible.
class PathGenerator {
public:
    PathGenerator(const ModelParams& params, RandomStream& stream)
        : params_(params), stream_(&stream) {
        params_.validate();
        current_.price = params.initial_price;
        current_.normal_price = params.initial_price;
        current_.mispricing_ratio = 1.0;
    }

    const PathStep& current() const { return current_; }
    std::size_t steps_done() const { return steps_done_; }
    bool failed() const { return failed_; }

    // Advances one step; returns false (and stops) on numeric failure.
    bool advance() {
        if (failed_) return false;
        const double u = stream_->uniform01();
        const double g = stream_->gaussian();
        double kappa = 0.0;
        if (u <= params_.jump_prob)
            kappa = params_.mean_jump_size + params_.jump_size_std * stream_->gaussian();
        PathStep next = step(params_, current_, u, g, kappa);
        ++steps_done_;
        if (!detail::price_in_range(next.price) || !detail::price_in_range(next.normal_price)) {
            failed_ = true;
            return false;
        }
        current_ = next;
        return true;
    }

private:
    ModelParams params_;
    RandomStream* stream_;
    PathStep current_;
    std::size_t steps_done_ = 0;
    bool failed_ = false;
};

inline PricePath generate_path(const ModelParams& params, std::size_t horizon,
                               RandomStream& stream, SeedInfo seed = {}) {
    if (horizon < 1) throw std::invalid_argument("generate_path: horizon must be >= 1");
    PricePath path;
    path.params = params;
    path.seed = seed;
    path.steps.reserve(horizon + 1);

    PathGenerator gen(params, stream);
    path.steps.push_back(gen.current());
    for (std::size_t t = 0; t < horizon; ++t) {
        if (!gen.advance()) {
            path.failure_step = gen.steps_done();
            break;
        }
        path.steps.push_back(gen.current());
    }
    return path;
}

// Path j depends only on (master_seed, j): results are independent of
// execution order and worker count. Failed paths are kept with their
// failure position so callers can account for them.
inline std::vector<PricePath> generate_ensemble(const ModelParams& params, std::size_t horizon,
                                                std::size_t count, std::uint64_t master_seed) {
    if (count < 1) throw std::invalid_argument("generate_ensemble: count must be >= 1");
    std::vector<PricePath> paths;
    paths.reserve(count);
    for (std::size_t j = 0; j < count; ++j) {
        RandomStream stream(master_seed, j, StreamPurpose::path_noise);
        paths.push_back(generate_path(params, horizon, stream, SeedInfo{master_seed, j}));
    }
    return paths;
}

}  // namespace ecmlab
