#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ecmlab/params.hpp"
#include "ecmlab/strategy.hpp"

namespace ecmlab {

// Per-path reduction of one strategy run. Metrics that need the whole series
// are folded incrementally so ensembles can be streamed path by path.
struct PathSummary {
    double terminal_log_wealth = 0.0;  // -inf when defaulted
    double outperf = 0.0;              // ln(W_T / P_T); meaningless when defaulted
    double uptime = 0.0;               // fraction of steps with W_t > P_t
    double mean_lambda = 0.0;
    bool defaulted = false;
    std::optional<double> sharpe_ann;
    std::optional<double> calmar_mon;
    std::optional<double> sdrsr_ann;
    std::optional<double> cagr_pct;  // per-year percent growth
};

inline constexpr std::size_t kStepsPerMonth = 21;

// Incremental fold of wealth/price series into a PathSummary. add_step is
// called once per step with the allocation applied over [t, t+1) and the
// realized price growth; snapshots may be taken at any intermediate horizon.
class PortfolioAccumulator {
public:
    explicit PortfolioAccumulator(double rf_growth) : rf_growth_(rf_growth) {}

    void add_step(double lambda, double price_growth) {
        log_price_ += std::log(price_growth);
        ++steps_;
        if (defaulted_) return;
        const double mult = wealth_multiplier(lambda, price_growth, rf_growth_);
        if (mult <= 0.0) {
            defaulted_ = true;
            default_step_ = steps_;
            return;
        }
        const double r = std::log(mult);
        log_wealth_ += r;
        lambda_sum_ += lambda;
        sum_r_ += r;
        sum_r2_ += r * r;
        const double neg = std::min(r, 0.0);
        sum_neg_r2_ += neg * neg;
        if (log_wealth_ > log_price_) ++up_steps_;
        if (steps_ % kStepsPerMonth == 0) {
            const double month_ret = log_wealth_ - month_anchor_;
            month_anchor_ = log_wealth_;
            ++months_;
            month_sum_ += month_ret;
            worst_month_ = std::min(worst_month_, month_ret);
        }
    }

    bool defaulted() const { return defaulted_; }
    double log_wealth() const { return log_wealth_; }
    double log_price() const { return log_price_; }

    PathSummary summary() const {
        PathSummary s;
        s.defaulted = defaulted_;
        if (defaulted_) {
            s.terminal_log_wealth = -std::numeric_limits<double>::infinity();
            s.uptime = steps_ ? static_cast<double>(up_steps_) / static_cast<double>(steps_) : 0.0;
            s.mean_lambda = default_step_ > 1
                                ? lambda_sum_ / static_cast<double>(default_step_ - 1)
                                : 0.0;
            return s;
        }
        const double n = static_cast<double>(steps_);
        s.terminal_log_wealth = log_wealth_;
        s.outperf = log_wealth_ - log_price_;
        s.uptime = steps_ ? static_cast<double>(up_steps_) / n : 0.0;
        s.mean_lambda = steps_ ? lambda_sum_ / n : 0.0;
        if (steps_ >= 2) {
            const double mean = sum_r_ / n;
            const double var = (sum_r2_ - n * mean * mean) / (n - 1.0);
            // cancellation floor: a constant series must report no variance
            const double var_floor = 1e-12 * (sum_r2_ / n);
            if (var > var_floor && var > 0.0)
                s.sharpe_ann = std::sqrt(kTradingDaysPerYear) * mean / std::sqrt(var);
            // doubled downside variance, same divisor as the Sharpe denominator
            const double dd = 2.0 * sum_neg_r2_ / (n - 1.0);
            if (dd > 0.0)
                s.sdrsr_ann = std::sqrt(kTradingDaysPerYear) * mean / std::sqrt(dd);
        }
        if (months_ >= 1 && worst_month_ < 0.0)
            s.calmar_mon = (month_sum_ / static_cast<double>(months_)) / -worst_month_;
        if (steps_ >= 1)
            s.cagr_pct =
                100.0 * (std::exp(log_wealth_ * kTradingDaysPerYear / n) - 1.0);
        return s;
    }

private:
    double rf_growth_;
    std::size_t steps_ = 0;
    double log_wealth_ = 0.0;
    double log_price_ = 0.0;
    double lambda_sum_ = 0.0;
    std::size_t up_steps_ = 0;
    bool defaulted_ = false;
    std::size_t default_step_ = 0;
    double sum_r_ = 0.0;
    double sum_r2_ = 0.0;
    double sum_neg_r2_ = 0.0;
    double month_anchor_ = 0.0;
    double month_sum_ = 0.0;
    double worst_month_ = 0.0;
    std::size_t months_ = 0;
};

inline PathSummary summarize(const PortfolioPath& portfolio, const PricePath& path) {
    if (portfolio.wealth.size() != path.steps.size())
        throw std::invalid_argument("summarize: horizon mismatch");
    PortfolioAccumulator acc(std::exp(path.params.risk_free_rate));
    for (std::size_t t = 0; t + 1 < path.steps.size(); ++t)
        acc.add_step(portfolio.lambda[t], path.steps[t + 1].price / path.steps[t].price);
    return acc.summary();
}

// Log-outperformance sample over an ensemble; defaulted runs are excluded
// from the values and counted separately.
struct OutperformanceSample {
    std::vector<double> values;
    std::size_t excluded_defaults = 0;
};

inline OutperformanceSample outperformance(const std::vector<PathSummary>& summaries) {
    OutperformanceSample sample;
    sample.values.reserve(summaries.size());
    for (const auto& s : summaries) {
        if (s.defaulted)
            ++sample.excluded_defaults;
        else
            sample.values.push_back(s.outperf);
    }
    return sample;
}

inline OutperformanceSample outperformance(const std::vector<PortfolioPath>& portfolios,
                                           const std::vector<PricePath>& paths) {
    if (portfolios.size() != paths.size())
        throw std::invalid_argument("outperformance: ensemble size mismatch");
    std::vector<PathSummary> summaries;
    summaries.reserve(portfolios.size());
    for (std::size_t i = 0; i < portfolios.size(); ++i)
        summaries.push_back(summarize(portfolios[i], paths[i]));
    return outperformance(summaries);
}

// Linear-interpolated quantile of a sorted sample.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
    if (sorted.size() == 1) return sorted.front();
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    if (i + 1 >= sorted.size()) return sorted.back();
    const double f = pos - static_cast<double>(i);
    return sorted[i] * (1.0 - f) + sorted[i + 1] * f;
}

inline double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    return quantile_sorted(values, 0.5);
}

struct EnsembleCounts {
    std::size_t total = 0;     // simulations attempted
    std::size_t failures = 0;  // path generation failures
    std::size_t defaults = 0;
    std::size_t included = 0;  // non-defaulted, successfully generated

    bool reconciles() const { return failures + defaults + included == total; }
};

// The nine performance numbers for one strategy over one ensemble.
// Per-path quantities (uptime, Sharpe, CALMAR, SDRSR, CAGR) are aggregated
// by their median over non-defaulted runs, matching the reference results;
// outperformance statistics use the sample mean as defined.
struct MetricsReport {
    double prob_outperf_pct = 0.0;
    std::optional<double> avg_odds;
    std::optional<double> mean_outperf;
    double prob_default_pct = 0.0;
    std::optional<double> uptime_pct;
    std::optional<double> sharpe_ann;
    std::optional<double> calmar_mon;
    std::optional<double> sdrsr_ann;
    std::optional<double> cagr_pct;
    EnsembleCounts counts;
};

namespace detail {
inline std::optional<double> median_of(std::vector<double>& values) {
    if (values.empty()) return std::nullopt;
    std::sort(values.begin(), values.end());
    return quantile_sorted(values, 0.5);
}
}  // namespace detail

inline MetricsReport compute_metrics(const std::vector<PathSummary>& summaries,
                                     std::size_t generation_failures = 0) {
    MetricsReport rep;
    rep.counts.total = summaries.size() + generation_failures;
    rep.counts.failures = generation_failures;

    const double m = static_cast<double>(summaries.size());
    if (summaries.empty()) return rep;

    std::size_t outperform = 0;
    double pos_sum = 0.0, neg_sum = 0.0;
    std::size_t pos_count = 0, neg_count = 0;
    double outperf_sum = 0.0;
    std::vector<double> uptime, sharpe, calmar, sdrsr, cagr;
    for (const auto& s : summaries) {
        if (s.defaulted) {
            ++rep.counts.defaults;
            continue;
        }
        ++rep.counts.included;
        if (s.outperf > 0.0) {
            ++outperform;
            pos_sum += s.outperf;
            ++pos_count;
        } else if (s.outperf < 0.0) {
            neg_sum += s.outperf;
            ++neg_count;
        }
        outperf_sum += s.outperf;
        uptime.push_back(s.uptime);
        if (s.sharpe_ann) sharpe.push_back(*s.sharpe_ann);
        if (s.calmar_mon) calmar.push_back(*s.calmar_mon);
        if (s.sdrsr_ann) sdrsr.push_back(*s.sdrsr_ann);
        if (s.cagr_pct) cagr.push_back(*s.cagr_pct);
    }

    rep.prob_outperf_pct = 100.0 * static_cast<double>(outperform) / m;
    rep.prob_default_pct = 100.0 * static_cast<double>(rep.counts.defaults) / m;
    if (rep.counts.included > 0)
        rep.mean_outperf = outperf_sum / static_cast<double>(rep.counts.included);
    if (pos_count > 0 && neg_count > 0 && neg_sum != 0.0) {
        const double pos_mean = pos_sum / static_cast<double>(pos_count);
        const double neg_mean = neg_sum / static_cast<double>(neg_count);
        rep.avg_odds = pos_mean / std::abs(neg_mean);
    }
    if (auto u = detail::median_of(uptime)) rep.uptime_pct = 100.0 * *u;
    rep.sharpe_ann = detail::median_of(sharpe);
    rep.calmar_mon = detail::median_of(calmar);
    rep.sdrsr_ann = detail::median_of(sdrsr);
    rep.cagr_pct = detail::median_of(cagr);
    return rep;
}

// Upper bound on the per-trade fee that keeps a strategy with the given
// yearly growth profitable when rebalancing every rebalance_days days.
struct FeeBound {
    double rebalance_days = 1.0;
    double max_fee_bp = 0.0;  // basis points per trade, unrounded

    int rounded_bp() const { return static_cast<int>(std::lround(max_fee_bp)); }
};

inline FeeBound max_fee(double cagr_pct, double rebalance_days) {
    if (!(cagr_pct >= 0.0)) throw std::domain_error("max_fee: cagr must be >= 0");
    const double growth = std::pow(1.0 + cagr_pct / 100.0, rebalance_days / 250.0) - 1.0;
    return FeeBound{rebalance_days, growth * 1e4};
}

// Plot-ready histogram with the marker statistics: mean, median, and the
// conditional means of the negative and positive sides.
struct Histogram {
    std::vector<double> edges;   // bin_count + 1
    std::vector<std::size_t> counts;
    double mean = 0.0;
    double median_value = 0.0;
    std::optional<double> neg_mean;
    std::optional<double> pos_mean;
    std::size_t excluded_defaults = 0;

    std::size_t total_count() const {
        std::size_t n = 0;
        for (auto c : counts) n += c;
        return n;
    }
};

inline Histogram build_histogram(const OutperformanceSample& sample, std::size_t bins = 60) {
    if (bins < 1) throw std::invalid_argument("build_histogram: need bins >= 1");
    Histogram h;
    h.excluded_defaults = sample.excluded_defaults;
    if (sample.values.empty()) return h;

    std::vector<double> sorted = sample.values;
    std::sort(sorted.begin(), sorted.end());
    double lo = sorted.front(), hi = sorted.back();
    if (lo == hi) {  // single point: one unit-width bin
        lo -= 0.5;
        hi += 0.5;
        bins = 1;
    }
    h.edges.resize(bins + 1);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + width * static_cast<double>(i);
    h.counts.assign(bins, 0);

    double pos_sum = 0.0, neg_sum = 0.0, sum = 0.0;
    std::size_t pos_n = 0, neg_n = 0;
    for (const double v : sample.values) {
        auto idx = static_cast<std::size_t>((v - lo) / width);
        if (idx >= bins) idx = bins - 1;
        ++h.counts[idx];
        sum += v;
        if (v > 0.0) {
            pos_sum += v;
            ++pos_n;
        } else if (v < 0.0) {
            neg_sum += v;
            ++neg_n;
        }
    }
    h.mean = sum / static_cast<double>(sample.values.size());
    h.median_value = quantile_sorted(sorted, 0.5);
    if (pos_n) h.pos_mean = pos_sum / static_cast<double>(pos_n);
    if (neg_n) h.neg_mean = neg_sum / static_cast<double>(neg_n);
    return h;
}

}  // namespace ecmlab
