#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace ecmlab {

inline constexpr double kTradingDaysPerYear = 252.0;

// Per-step parameter set of the crash-aware price process plus the
// risk-free rate. All rates and volatilities are per business day;
// annualized human units are converted at the config boundary only.
struct ModelParams {
    double discount_rate = 0.0;       // per-step log drift of the risky asset
    double normal_growth_rate = 0.0;  // per-step log growth of the normal price
    double volatility = 0.0;          // per-step Gaussian std dev
    double jump_prob = 0.0;           // probability of a corrective jump per step, in [0,1)
    double mean_jump_size = 0.0;      // mean relative jump size
    double jump_size_std = 0.0;       // std dev of the jump-size distribution
    double risk_free_rate = 0.0;      // per-step log risk-free rate
    double initial_price = 1.0;       // > 0

    // Reference parameter set: 7% yearly growth at 17% annual volatility,
    // one jump expected per 100 trading days, jumps correcting ~30% of the
    // mispricing with 0.2 spread, zero risk-free rate, unit initial price.
    static ModelParams base() {
        ModelParams p;
        p.discount_rate = std::log1p(0.07) / kTradingDaysPerYear;
        p.normal_growth_rate = p.discount_rate;
        p.volatility = 0.17 / std::sqrt(kTradingDaysPerYear);
        p.jump_prob = 0.01;
        p.mean_jump_size = 0.3;
        p.jump_size_std = 0.2;
        p.risk_free_rate = 0.0;
        p.initial_price = 1.0;
        return p;
    }

    void validate() const {
        if (!(jump_prob >= 0.0 && jump_prob < 1.0))
            throw std::invalid_argument("jump_prob must lie in [0,1), got " +
                                        std::to_string(jump_prob));
        if (!(volatility >= 0.0))
            throw std::invalid_argument("volatility must be >= 0");
        if (!(jump_size_std >= 0.0))
            throw std::invalid_argument("jump_size_std must be >= 0");
        if (!(initial_price > 0.0))
            throw std::invalid_argument("initial_price must be > 0");
        if (!std::isfinite(discount_rate) || !std::isfinite(normal_growth_rate) ||
            !std::isfinite(risk_free_rate))
            throw std::invalid_argument("rates must be finite");
    }

    bool operator==(const ModelParams&) const = default;
};

}  // namespace ecmlab
