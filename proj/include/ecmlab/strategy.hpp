#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ecmlab/kelly.hpp"
#include "ecmlab/lambda_table.hpp"
#include "ecmlab/path.hpp"

namespace ecmlab {

enum class StrategyKind { buy_and_hold, fixed_fraction, classical_kelly, eco_kelly };
enum class EcoSolver { numeric, approx };

struct StrategySpec {
    StrategyKind kind = StrategyKind::buy_and_hold;
    double fraction = 1.0;  // fixed_fraction only
    LambdaBounds bounds = LambdaBounds::unconstrained();
    DriftConvention drift = DriftConvention::log_drift;  // classical_kelly only
    EcoSolver solver = EcoSolver::numeric;               // eco_kelly only
    std::string label;

    static StrategySpec buy_and_hold() { return {StrategyKind::buy_and_hold, 1.0,
                                                 LambdaBounds::range(1.0, 1.0),
                                                 DriftConvention::log_drift,
                                                 EcoSolver::numeric, "BH"}; }
    static StrategySpec fixed_fraction(double f, std::string label = "") {
        StrategySpec s;
        s.kind = StrategyKind::fixed_fraction;
        s.fraction = f;
        s.bounds = LambdaBounds::range(f, f);
        s.label = label.empty() ? "FF" + std::to_string(f) : std::move(label);
        return s;
    }
    static StrategySpec classical_kelly(LambdaBounds b, DriftConvention drift, std::string label) {
        StrategySpec s;
        s.kind = StrategyKind::classical_kelly;
        s.bounds = b;
        s.drift = drift;
        s.label = std::move(label);
        return s;
    }
    static StrategySpec eco_kelly(LambdaBounds b, EcoSolver solver, std::string label) {
        StrategySpec s;
        s.kind = StrategyKind::eco_kelly;
        s.bounds = b;
        s.solver = solver;
        s.label = std::move(label);
        return s;
    }
};

// The six benchmark strategies: buy and hold, the 60/40 portfolio, classical
// Kelly and the crash-aware Kelly, the latter two both leverage-limited to
// [-1,2] and unconstrained.
inline std::vector<StrategySpec> six_standard_strategies(
    DriftConvention ck_drift = DriftConvention::log_drift) {
    return {
        StrategySpec::buy_and_hold(),
        StrategySpec::fixed_fraction(0.6, "FF60"),
        StrategySpec::classical_kelly(LambdaBounds::leverage_limited(), ck_drift, "CK-bounded"),
        StrategySpec::classical_kelly(LambdaBounds::unconstrained(), ck_drift, "CK-unbounded"),
        StrategySpec::eco_kelly(LambdaBounds::leverage_limited(), EcoSolver::numeric,
                                "ECO-bounded"),
        StrategySpec::eco_kelly(LambdaBounds::unconstrained(), EcoSolver::numeric,
                                "ECO-unbounded"),
    };
}

struct AllocationOptions {
    int jump_nodes = 7;
    int gauss_nodes = 21;
    bool use_table = true;
    LambdaTableOptions table;
};

// Investment-fraction oracle for a belief parameter set. The crash-aware
// fraction is served from a shared interpolation table when one is attached
// (beliefs equal across simulations), or solved directly otherwise
// (per-simulation perturbed beliefs).
class AllocationEngine {
public:
    using Options = AllocationOptions;

    explicit AllocationEngine(const ModelParams& beliefs, Options opt = {})
        : beliefs_(beliefs), opt_(opt),
          menu_(discretize_jump_distribution(beliefs.mean_jump_size, beliefs.jump_size_std,
                                             opt.jump_nodes)),
          gauss_(normal_quadrature(opt.gauss_nodes)) {
        beliefs_.validate();
        if (opt_.use_table) {
            opt_.table.gauss_nodes = opt_.gauss_nodes;
            table_ = std::make_shared<LambdaTable>(beliefs_, menu_, LambdaBounds::unconstrained(),
                                                   opt_.table);
        }
    }

    const ModelParams& beliefs() const { return beliefs_; }
    const JumpMenu& menu() const { return menu_; }

    // Unconstrained crash-aware optimum at the given mispricing; bounded
    // variants clip this value (exact for a concave objective).
    double eco_unconstrained(double mispricing_ratio) const {
        if (table_) return table_->at_mispricing_ratio(mispricing_ratio);
        return optimal_lambda_numeric(beliefs_, mispricing_ratio, menu_,
                                      LambdaBounds::unconstrained(), gauss_, 1e-6);
    }

    double allocate(const StrategySpec& spec, double mispricing_ratio) const {
        switch (spec.kind) {
            case StrategyKind::buy_and_hold:
                return 1.0;
            case StrategyKind::fixed_fraction:
                return spec.fraction;
            case StrategyKind::classical_kelly:
                return classical_kelly_for(beliefs_, spec.drift, spec.bounds);
            case StrategyKind::eco_kelly:
                if (spec.solver == EcoSolver::approx)
                    return optimal_lambda_approx(beliefs_, mispricing_ratio, spec.bounds);
                return spec.bounds.clip(eco_unconstrained(mispricing_ratio));
        }
        throw std::logic_error("allocate: unknown strategy kind");
    }

private:
    ModelParams beliefs_;
    Options opt_;
    JumpMenu menu_;
    NormalQuadrature gauss_;
    std::shared_ptr<LambdaTable> table_;
};

inline double allocate(const StrategySpec& spec, const ModelParams& params,
                       double mispricing_ratio) {
    AllocationEngine engine(params, {.use_table = false});
    return engine.allocate(spec, mispricing_ratio);
}

// Wealth and allocation series of one strategy over one price path.
struct PortfolioPath {
    std::vector<double> wealth;  // W_0 = 1, length horizon+1
    std::vector<double> lambda;  // length horizon; zero after a default
    std::optional<std::size_t> default_step;
    StrategySpec strategy;
    std::string error;  // nonempty when the strategy could not run

    bool defaulted() const { return default_step.has_value(); }
};

inline double wealth_multiplier(double lambda, double price_growth, double rf_growth) {
    return lambda * price_growth + (1.0 - lambda) * rf_growth;
}

// Iterates the wealth recursion W_{t+1} = W_t (lambda_t g_t + (1-lambda_t) e^rf)
// with g_t the realized price growth. A non-positive multiplier is a default:
// wealth freezes at zero from that step on.
inline PortfolioPath simulate_portfolio(const StrategySpec& spec, const AllocationEngine& engine,
                                        const PricePath& path) {
    const std::size_t horizon = path.horizon();
    PortfolioPath out;
    out.strategy = spec;
    out.wealth.assign(horizon + 1, 0.0);
    out.lambda.assign(horizon, 0.0);
    out.wealth[0] = 1.0;

    const double rf_growth = std::exp(path.params.risk_free_rate);
    bool dead = false;
    for (std::size_t t = 0; t < horizon; ++t) {
        if (dead) break;  // arrays already zero-filled
        const double lam = engine.allocate(spec, path.steps[t].mispricing_ratio);
        const double growth = path.steps[t + 1].price / path.steps[t].price;
        const double mult = wealth_multiplier(lam, growth, rf_growth);
        out.lambda[t] = lam;
        if (mult <= 0.0) {
            out.default_step = t + 1;
            dead = true;
        } else {
            out.wealth[t + 1] = out.wealth[t] * mult;
        }
    }
    return out;
}

// Runs all six standard strategies on one path; a failing strategy is
// reported in its slot without aborting the others.
inline std::vector<PortfolioPath> run_all_strategies(
    const ModelParams& params, const PricePath& path,
    const AllocationEngine* shared_engine = nullptr,
    DriftConvention ck_drift = DriftConvention::log_drift) {
    std::optional<AllocationEngine> local;
    const AllocationEngine* engine = shared_engine;
    if (!engine) {
        local.emplace(params);
        engine = &*local;
    }
    std::vector<PortfolioPath> result;
    for (const auto& spec : six_standard_strategies(ck_drift)) {
        try {
            result.push_back(simulate_portfolio(spec, *engine, path));
        } catch (const std::exception& e) {
            PortfolioPath failed;
            failed.strategy = spec;
            failed.error = e.what();
            result.push_back(std::move(failed));
        }
    }
    return result;
}

}  // namespace ecmlab
