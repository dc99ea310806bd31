#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "ecmlab/fast_log.hpp"
#include "ecmlab/jump_menu.hpp"
#include "ecmlab/params.hpp"
#include "ecmlab/path.hpp"
#include "ecmlab/quadrature.hpp"

namespace ecmlab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Admissible range for the risky-asset fraction.
struct LambdaBounds {
    double lo = -kInf;
    double hi = kInf;

    static LambdaBounds unconstrained() { return {-kInf, kInf}; }
    static LambdaBounds range(double lo, double hi) {
        if (lo > hi) throw std::invalid_argument("LambdaBounds: lo > hi");
        return {lo, hi};
    }
    // max 200% long / 100% short
    static LambdaBounds leverage_limited() { return {-1.0, 2.0}; }

    double clip(double x) const { return std::min(hi, std::max(lo, x)); }
    bool degenerate() const { return lo == hi; }
};

// Expected one-step log growth of wealth at fraction lambda, with the jump
// size discretized by `menu` and the Gaussian by a fixed-order quadrature.
// Finite exactly on an open interval of lambda; -inf marks ruin under the
// discretized measure.
class KellyObjective {
public:
    KellyObjective(const ModelParams& params, double log_mispricing, const JumpMenu& menu,
                   const NormalQuadrature& gauss)
        : rf_(params.risk_free_rate), rf_growth_(std::exp(params.risk_free_rate)) {
        const double rho = params.jump_prob;
        const double sigma = params.volatility;

        std::vector<std::pair<double, double>> branches;  // (weight, log-return offset)
        if (1.0 - rho > 0.0)
            branches.emplace_back(1.0 - rho,
                                  expected_return_log_mispricing(params, log_mispricing));
        if (rho > 0.0)
            for (const auto& e : menu.entries)
                branches.emplace_back(rho * e.prob,
                                      e.size * log_mispricing + params.discount_rate);

        const std::size_t count = branches.size() * gauss.nodes.size();
        weight_.reserve(count);
        log_growth_.reserve(count);
        growth_.reserve(count);
        for (const auto& [w, a] : branches) {
            for (std::size_t h = 0; h < gauss.nodes.size(); ++h) {
                const double s = a + sigma * gauss.nodes[h];
                const double g = std::exp(s);
                if (std::isinf(g)) {
                    overflow_weight_.push_back(w * gauss.weights[h]);
                    overflow_log_growth_.push_back(s);
                    continue;
                }
                weight_.push_back(w * gauss.weights[h]);
                log_growth_.push_back(s);
                growth_.push_back(g);
            }
        }

        feasible_lo_ = -kInf;
        feasible_hi_ = kInf;
        for (const double g : growth_) {
            if (g < rf_growth_) feasible_hi_ = std::min(feasible_hi_, rf_growth_ / (rf_growth_ - g));
            if (g > rf_growth_) feasible_lo_ = std::max(feasible_lo_, -rf_growth_ / (g - rf_growth_));
        }
        if (!overflow_weight_.empty()) feasible_lo_ = std::max(feasible_lo_, 0.0);
    }

    KellyObjective(const ModelParams& params, double log_mispricing, const JumpMenu& menu,
                   int gauss_nodes)
        : KellyObjective(params, log_mispricing, menu, normal_quadrature(gauss_nodes)) {}

    double operator()(double lambda) const {
        if (lambda == 0.0) return rf_;  // no risky allocation
        if (lambda == 1.0) {            // fully invested: plain mean log growth
            double total = 0.0;
            for (std::size_t i = 0; i < weight_.size(); ++i)
                total += weight_[i] * log_growth_[i];
            for (std::size_t i = 0; i < overflow_weight_.size(); ++i)
                total += overflow_weight_[i] * overflow_log_growth_[i];
            return total;
        }
        const double cash = (1.0 - lambda) * rf_growth_;
        double total = 0.0;
        double worst = kInf;
        for (std::size_t i = 0; i < weight_.size(); ++i) {
            const double ratio = lambda * growth_[i] + cash;
            worst = std::min(worst, ratio);
            total += weight_[i] * fast_log(ratio);
        }
        if (!(worst > 0.0)) return -kInf;
        for (std::size_t i = 0; i < overflow_weight_.size(); ++i) {
            // overflowed node: wealth ratio ~ lambda * e^s
            if (lambda < 0.0) return -kInf;
            total += overflow_weight_[i] * (overflow_log_growth_[i] + fast_log(lambda));
        }
        return total;
    }

    // Open interval on which the objective is finite.
    double feasible_lo() const { return feasible_lo_; }
    double feasible_hi() const { return feasible_hi_; }

private:
    std::vector<double> weight_;
    std::vector<double> log_growth_;
    std::vector<double> growth_;
    std::vector<double> overflow_weight_;      // nodes whose exp(s) overflows
    std::vector<double> overflow_log_growth_;
    double rf_;
    double rf_growth_;
    double feasible_lo_;
    double feasible_hi_;
};

inline double expected_log_growth(const ModelParams& params, double mispricing_ratio,
                                  double lambda, const JumpMenu& menu, int gauss_nodes = 21) {
    if (!(mispricing_ratio > 0.0))
        throw std::domain_error("expected_log_growth: mispricing ratio must be > 0");
    if (gauss_nodes < 3) throw std::invalid_argument("expected_log_growth: need gauss_nodes >= 3");
    return KellyObjective(params, std::log(mispricing_ratio), menu, gauss_nodes)(lambda);
}

namespace detail {

template <typename F>
double golden_section_max(F&& f, double lo, double hi, double tol) {
    constexpr double inv_phi = 0.6180339887498948482;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    int iter = 0;
    while (b - a > tol && ++iter < 400) {
        if (fc < fd) {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        } else {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        }
    }
    return 0.5 * (a + b);
}

// An "unconstrained" search is still confined to this range: the discretized
// objective is unbounded above only for degenerate volatility-free beliefs,
// where any cap produces the same portfolio outcome (immediate maximal
// leverage).
inline constexpr double kLambdaSearchLimit = 1e3;

}  // namespace detail

// Maximizer of the discretized expected log growth over bounds intersected
// with the finite-objective interval, by golden-section search to |dlambda| <
// tol. Sits tol inside the ruin boundary when the optimum presses against it.
inline double optimal_lambda_numeric(const ModelParams& params, double mispricing_ratio,
                                     const JumpMenu& menu, const LambdaBounds& bounds,
                                     const NormalQuadrature& gauss, double tol = 1e-9) {
    if (!(mispricing_ratio > 0.0))
        throw std::domain_error("optimal_lambda_numeric: mispricing ratio must be > 0");
    if (!(tol > 0.0)) throw std::invalid_argument("optimal_lambda_numeric: tol must be > 0");

    const KellyObjective obj(params, std::log(mispricing_ratio), menu, gauss);

    if (bounds.degenerate()) {
        if (std::isinf(obj(bounds.lo)))
            throw std::domain_error("optimal_lambda_numeric: degenerate bounds hit ruin region");
        return bounds.lo;
    }

    double lo = std::max({bounds.lo, obj.feasible_lo() + tol, -detail::kLambdaSearchLimit});
    double hi = std::min({bounds.hi, obj.feasible_hi() - tol, detail::kLambdaSearchLimit});
    if (!(lo < hi)) {
        if (lo == hi) return lo;
        throw std::domain_error("optimal_lambda_numeric: empty feasible interval");
    }
    return detail::golden_section_max(obj, lo, hi, tol);
}

inline double optimal_lambda_numeric(const ModelParams& params, double mispricing_ratio,
                                     const JumpMenu& menu, const LambdaBounds& bounds,
                                     double tol = 1e-9, int gauss_nodes = 21) {
    return optimal_lambda_numeric(params, mispricing_ratio, menu, bounds,
                                  normal_quadrature(gauss_nodes), tol);
}

// Closed-form series coefficients for the approximate optimal fraction.
struct ApproxSolutionTerms {
    double a;   // exp(rbar - rf)
    double b;   // exp(mean_jump * ln q + discount - rf)
    double d;   // (1-rho) a + rho b
    double h2;  // (2((1-rho)a^2 + rho b^2) - d) sigma^2
    double h3;  // ((1-rho)a^2 + rho b^2) (3/4) sigma^4

    static ApproxSolutionTerms from(const ModelParams& p, double mispricing_ratio) {
        if (!(mispricing_ratio > 0.0))
            throw std::domain_error("ApproxSolutionTerms: mispricing ratio must be > 0");
        const double lnq = std::log(mispricing_ratio);
        const double rho = p.jump_prob;
        const double s2 = p.volatility * p.volatility;
        ApproxSolutionTerms t;
        t.a = std::exp(expected_return_log_mispricing(p, lnq) - p.risk_free_rate);
        t.b = std::exp(p.mean_jump_size * lnq + p.discount_rate - p.risk_free_rate);
        t.d = (1.0 - rho) * t.a + rho * t.b;
        const double sq = (1.0 - rho) * t.a * t.a + rho * t.b * t.b;
        t.h2 = (2.0 * sq - t.d) * s2;
        // H3 carries sigma^4: a sigma^2 weight would make the small-rate
        // denominator 1.75*sigma^2 instead of the sigma^2 of the reduced
        // form (r_D - r_f + sigma^2/2) / (sigma^2 + ...).
        t.h3 = sq * 0.75 * s2 * s2;
        return t;
    }
};

inline double optimal_lambda_approx(const ModelParams& params, double mispricing_ratio,
                                    const LambdaBounds& bounds) {
    const auto t = ApproxSolutionTerms::from(params, mispricing_ratio);
    const double rho = params.jump_prob;
    const double s2 = params.volatility * params.volatility;
    const double numer = t.d * (1.0 + s2 / 2.0) - 1.0;
    const double denom =
        (1.0 - rho) * (t.a - 1.0) * (t.a - 1.0) + rho * (t.b - 1.0) * (t.b - 1.0) + t.h2 + t.h3;
    if (denom == 0.0) {
        std::ostringstream msg;
        msg << "optimal_lambda_approx: zero denominator (A=" << t.a << " B=" << t.b
            << " D=" << t.d << " H2=" << t.h2 << " H3=" << t.h3 << ")";
        throw std::domain_error(msg.str());
    }
    return bounds.clip(numer / denom);
}

enum class DriftConvention {
    log_drift,         // mu = discount rate (log growth of the normal price)
    arithmetic_drift,  // mu = discount rate + sigma^2/2
};

inline double classical_kelly_lambda(double mu, double risk_free, double sigma,
                                     const LambdaBounds& bounds) {
    if (!(sigma > 0.0)) throw std::domain_error("classical_kelly_lambda: sigma must be > 0");
    return bounds.clip((mu - risk_free) / (sigma * sigma));
}

inline double classical_kelly_for(const ModelParams& p, DriftConvention drift,
                                  const LambdaBounds& bounds) {
    const double mu = drift == DriftConvention::log_drift
                          ? p.discount_rate
                          : p.discount_rate + 0.5 * p.volatility * p.volatility;
    return classical_kelly_lambda(mu, p.risk_free_rate, p.volatility, bounds);
}

}  // namespace ecmlab
