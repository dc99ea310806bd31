#pragma once

#include <cmath>
#include <mutex>
#include <shared_mutex>
#include <vector>

#include "ecmlab/kelly.hpp"

namespace ecmlab {

struct LambdaTableOptions {
    double step = 1.0 / 2048.0;      // lattice spacing in ln q (power of two)
    double initial_half_span = 1.0;  // initial coverage of |ln q|
    double max_half_span = 12.0;     // growth cap
    double solver_tol = 1e-9;
    int gauss_nodes = 21;
};

// Memoized optimal fraction as a function of log mispricing. The optimum
// depends on time only through the mispricing, so per-step solves are
// replaced by linear interpolation on a fixed lattice. The table stores the
// unconstrained maximizer; bounds are applied after interpolation, which by
// concavity equals the bounded optimum and keeps the tabulated function
// kink-free. Queries outside the lattice grow it (never extrapolate); beyond
// the growth cap each query is solved exactly.
class LambdaTable {
public:
    using Options = LambdaTableOptions;

    LambdaTable(const ModelParams& params, JumpMenu menu, LambdaBounds query_bounds,
                Options opt = {})
        : params_(params), menu_(std::move(menu)), bounds_(query_bounds), opt_(opt),
          gauss_(normal_quadrature(opt.gauss_nodes)) {
        params_.validate();
        menu_.validate();
        const long half = static_cast<long>(std::ceil(opt_.initial_half_span / opt_.step));
        lo_index_ = -half;
        values_.resize(2 * half + 1);
        for (long k = lo_index_; k <= half; ++k) values_[k - lo_index_] = solve_node(k);
    }

    double at_log_mispricing(double log_mispricing) const {
        if (std::abs(log_mispricing) > opt_.max_half_span)
            return bounds_.clip(solve_exact(log_mispricing));

        const double pos = log_mispricing / opt_.step;
        long k = static_cast<long>(std::floor(pos));
        {
            std::shared_lock lock(mutex_);
            const long hi_index = lo_index_ + static_cast<long>(values_.size()) - 1;
            if (k >= lo_index_ && k + 1 <= hi_index) return bounds_.clip(lerp(k, pos, lock));
        }
        grow_to(k);
        std::shared_lock lock(mutex_);
        return bounds_.clip(lerp(k, pos, lock));
    }

    double at_mispricing_ratio(double q) const {
        if (!(q > 0.0)) throw std::domain_error("LambdaTable: mispricing ratio must be > 0");
        return at_log_mispricing(std::log(q));
    }

    std::size_t node_count() const {
        std::shared_lock lock(mutex_);
        return values_.size();
    }

    const LambdaBounds& bounds() const { return bounds_; }

private:
    template <typename Lock>
    double lerp(long k, double pos, const Lock&) const {
        const double f = pos - static_cast<double>(k);
        const std::size_t i = static_cast<std::size_t>(k - lo_index_);
        return values_[i] * (1.0 - f) + values_[i + 1] * f;
    }

    double solve_exact(double log_mispricing) const {
        return optimal_lambda_numeric(params_, std::exp(log_mispricing), menu_,
                                      LambdaBounds::unconstrained(), gauss_, opt_.solver_tol);
    }

    double solve_node(long k) const { return solve_exact(static_cast<double>(k) * opt_.step); }

    void grow_to(long k) const {
        std::unique_lock lock(mutex_);
        constexpr long chunk = 256;
        long hi_index = lo_index_ + static_cast<long>(values_.size()) - 1;
        if (k < lo_index_) {
            const long new_lo = k - chunk;
            std::vector<double> prefix;
            prefix.reserve(lo_index_ - new_lo);
            for (long j = new_lo; j < lo_index_; ++j) prefix.push_back(solve_node(j));
            values_.insert(values_.begin(), prefix.begin(), prefix.end());
            lo_index_ = new_lo;
        } else if (k + 1 > hi_index) {
            const long new_hi = k + 1 + chunk;
            for (long j = hi_index + 1; j <= new_hi; ++j) values_.push_back(solve_node(j));
        }
    }

    ModelParams params_;
    JumpMenu menu_;
    LambdaBounds bounds_;
    Options opt_;
    NormalQuadrature gauss_;
    mutable std::shared_mutex mutex_;
    mutable std::vector<double> values_;
    mutable long lo_index_ = 0;
};

}  // namespace ecmlab
