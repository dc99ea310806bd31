#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ecmlab/metrics.hpp"
#include "ecmlab/path.hpp"
#include "ecmlab/strategy.hpp"

namespace ecmlab {

enum class Family { histogram, window_sweep, param_sensitivity, error_scan, sign_test };

enum class TargetParam { discount_rate, normal_growth_rate, volatility, jump_prob,
                         mean_jump_size };

inline const char* target_param_name(TargetParam t) {
    switch (t) {
        case TargetParam::discount_rate: return "discount_rate";
        case TargetParam::normal_growth_rate: return "normal_growth_rate";
        case TargetParam::volatility: return "volatility";
        case TargetParam::jump_prob: return "jump_prob";
        case TargetParam::mean_jump_size: return "mean_jump_size";
    }
    return "?";
}

// Estimation-error injection: the examined parameter is replaced per
// simulation by (1 + eps) * true value, eps ~ N(0, sigma_e^2), clipped to its
// natural range. The jump probability is clipped strictly below 1 so the
// optimizer stays defined; the no-jump branch weight then vanishes smoothly.
struct ErrorSpec {
    TargetParam target = TargetParam::discount_rate;
    std::vector<double> sigma_e;
};

inline constexpr double kMaxJumpProbBelief = 1.0 - 0x1p-20;

inline ModelParams perturb_param(const ModelParams& base, TargetParam target, double factor) {
    ModelParams p = base;
    switch (target) {
        case TargetParam::discount_rate:
            p.discount_rate *= factor;
            break;
        case TargetParam::normal_growth_rate:
            p.normal_growth_rate *= factor;
            break;
        case TargetParam::volatility:
            p.volatility = std::max(0.0, p.volatility * factor);
            break;
        case TargetParam::jump_prob:
            p.jump_prob = std::min(kMaxJumpProbBelief, std::max(0.0, p.jump_prob * factor));
            break;
        case TargetParam::mean_jump_size:
            p.mean_jump_size = std::max(0.0, p.mean_jump_size * factor);
            break;
    }
    return p;
}

// Drift-sign experiment: the true annual rate is uniform on [-limit, limit];
// the estimate magnitude is uniform on [0, 2|rate|] and carries either the
// correct or the flipped sign.
struct SignTestSpec {
    double annual_rate_limit = 0.10;
};

struct ExperimentPlan {
    Family family = Family::histogram;
    ModelParams params = ModelParams::base();
    std::size_t sims = 10000;
    std::vector<std::size_t> horizons;   // histogram / window sweep / sign test
    TargetParam sweep_param = TargetParam::volatility;
    std::vector<double> sweep_values;    // param_sensitivity
    ErrorSpec error;                     // error_scan
    SignTestSpec sign;                   // sign_test
    std::vector<StrategySpec> strategies;
    DriftConvention ck_drift = DriftConvention::log_drift;
    std::uint64_t master_seed = 1;
    int workers = 1;
    int jump_nodes = 7;
    int gauss_nodes = 21;
    std::size_t histogram_bins = 60;
};

inline std::vector<std::size_t> default_histogram_horizons() { return {500, 2500}; }

inline std::vector<std::size_t> default_window_horizons() {
    std::vector<std::size_t> h;
    for (std::size_t t = 250; t <= 10000; t += 250) h.push_back(t);
    return h;
}

inline std::vector<double> default_sensitivity_values(TargetParam target) {
    auto linspace = [](double lo, double hi, int n) {
        std::vector<double> v(n);
        for (int i = 0; i < n; ++i)
            v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        return v;
    };
    switch (target) {
        case TargetParam::discount_rate:
        case TargetParam::normal_growth_rate:
            return linspace(0.0, std::log(1.20) / kTradingDaysPerYear, 11);
        case TargetParam::volatility:
            return linspace(0.05 / std::sqrt(kTradingDaysPerYear),
                            0.50 / std::sqrt(kTradingDaysPerYear), 10);
        case TargetParam::jump_prob:
            return linspace(0.0, 0.05, 11);
        case TargetParam::mean_jump_size:
            return linspace(0.0, 1.0, 11);
    }
    return {};
}

inline std::vector<double> default_error_sigmas() {
    std::vector<double> v(11);
    for (int i = 0; i < 11; ++i) v[i] = std::pow(10.0, -3.0 + 0.5 * i);
    return v;
}

// ECO pair used by the sensitivity / error / sign scans.
inline std::vector<StrategySpec> eco_pair() {
    return {StrategySpec::eco_kelly(LambdaBounds::leverage_limited(), EcoSolver::numeric,
                                    "ECO-bounded"),
            StrategySpec::eco_kelly(LambdaBounds::unconstrained(), EcoSolver::numeric,
                                    "ECO-unbounded")};
}

struct Quartiles {
    double q25 = 0.0, median = 0.0, q75 = 0.0;
};

inline Quartiles quartiles_of(std::vector<double> values) {
    Quartiles q;
    if (values.empty()) return q;
    std::sort(values.begin(), values.end());
    q.q25 = quantile_sorted(values, 0.25);
    q.median = quantile_sorted(values, 0.5);
    q.q75 = quantile_sorted(values, 0.75);
    return q;
}

struct StrategyCellStats {
    std::string label;
    Quartiles terminal_log_wealth, uptime_pct, mean_lambda;
    double prob_default_pct = 0.0;
    EnsembleCounts counts;
    std::optional<MetricsReport> report;       // histogram family
    std::optional<Histogram> outperf_hist;     // histogram family
};

struct SweepCell {
    std::string axis;
    double axis_value = 0.0;
    std::string variant;  // sign test: "correct-sign" / "flipped-sign"
    std::vector<StrategyCellStats> strategies;
};

struct SweepResult {
    Family family = Family::histogram;
    std::uint64_t master_seed = 0;
    std::size_t sims = 0;
    std::vector<SweepCell> cells;
};

// Chunked parallel loop over simulation indices. Results must be written to
// per-index slots; with per-simulation streams this reproduces the
// sequential outcome for any worker count.
template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        constexpr std::size_t chunk = 16;
        for (;;) {
            const std::size_t begin = next.fetch_add(chunk);
            if (begin >= count) return;
            const std::size_t end = std::min(begin + chunk, count);
            for (std::size_t i = begin; i < end; ++i) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

namespace detail {

// Per-(cell,strategy,sim) slot for quartile families.
struct CompactSummary {
    double terminal_log_wealth = 0.0;
    double uptime = 0.0;
    double mean_lambda = 0.0;
    std::uint8_t status = 0;  // 0 = generation failed, 1 = ok, 2 = defaulted
};

inline CompactSummary compact(const PathSummary& s) {
    CompactSummary c;
    c.terminal_log_wealth = s.terminal_log_wealth;
    c.uptime = s.uptime;
    c.mean_lambda = s.mean_lambda;
    c.status = s.defaulted ? 2 : 1;
    return c;
}

inline StrategyCellStats reduce_compact(const std::string& label,
                                        const std::vector<CompactSummary>& slots) {
    StrategyCellStats out;
    out.label = label;
    std::vector<double> lw, up, ml;
    for (const auto& c : slots) {
        ++out.counts.total;
        if (c.status == 0) {
            ++out.counts.failures;
        } else if (c.status == 2) {
            ++out.counts.defaults;
        } else {
            ++out.counts.included;
            lw.push_back(c.terminal_log_wealth);
            up.push_back(100.0 * c.uptime);
            ml.push_back(c.mean_lambda);
        }
    }
    const auto simulated = out.counts.total - out.counts.failures;
    out.prob_default_pct =
        simulated ? 100.0 * static_cast<double>(out.counts.defaults) / simulated : 0.0;
    out.terminal_log_wealth = quartiles_of(std::move(lw));
    out.uptime_pct = quartiles_of(std::move(up));
    out.mean_lambda = quartiles_of(std::move(ml));
    return out;
}

inline StrategyCellStats reduce_full(const std::string& label,
                                     const std::vector<PathSummary>& summaries,
                                     const std::vector<std::uint8_t>& generated,
                                     std::size_t histogram_bins) {
    StrategyCellStats out;
    out.label = label;
    std::vector<PathSummary> valid;
    valid.reserve(summaries.size());
    std::size_t failures = 0;
    std::vector<double> lw, up, ml;
    for (std::size_t i = 0; i < summaries.size(); ++i) {
        if (!generated[i]) {
            ++failures;
            continue;
        }
        valid.push_back(summaries[i]);
        if (!summaries[i].defaulted) {
            lw.push_back(summaries[i].terminal_log_wealth);
            up.push_back(100.0 * summaries[i].uptime);
            ml.push_back(summaries[i].mean_lambda);
        }
    }
    out.report = compute_metrics(valid, failures);
    out.counts = out.report->counts;
    out.prob_default_pct = out.report->prob_default_pct;
    out.outperf_hist = build_histogram(outperformance(valid), histogram_bins);
    out.terminal_log_wealth = quartiles_of(std::move(lw));
    out.uptime_pct = quartiles_of(std::move(up));
    out.mean_lambda = quartiles_of(std::move(ml));
    return out;
}

// Constant fraction of a strategy, if it has one (everything except the
// crash-aware Kelly, whose fraction varies with the mispricing).
inline std::optional<double> constant_fraction(const StrategySpec& spec,
                                               const AllocationEngine& engine) {
    switch (spec.kind) {
        case StrategyKind::buy_and_hold: return 1.0;
        case StrategyKind::fixed_fraction: return spec.fraction;
        case StrategyKind::classical_kelly: return engine.allocate(spec, 1.0);
        case StrategyKind::eco_kelly: return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace detail

// Shared driver for families whose cells are nested horizons of one run
// (fixed-horizon histograms and window sweeps): each simulation walks the
// longest horizon once and snapshots every cell on the way. With streams
// keyed by (master seed, sim), each snapshot is bit-identical to a separate
// run at that horizon.
inline SweepResult run_horizon_family(const ExperimentPlan& plan,
                                      const std::vector<std::size_t>& horizons,
                                      bool full_metrics) {
    if (plan.sims < 1) throw std::invalid_argument("run: sims must be >= 1");
    if (horizons.empty()) throw std::invalid_argument("run: empty horizon grid");
    plan.params.validate();

    const auto strategies = plan.strategies.empty() ? six_standard_strategies(plan.ck_drift)
                                                    : plan.strategies;
    AllocationEngine engine(plan.params, {.jump_nodes = plan.jump_nodes,
                                          .gauss_nodes = plan.gauss_nodes,
                                          .use_table = true});

    const std::size_t n_cells = horizons.size();
    const std::size_t n_strat = strategies.size();
    const std::size_t max_horizon = *std::max_element(horizons.begin(), horizons.end());

    std::vector<std::optional<double>> const_lambda(n_strat);
    bool any_eco = false;
    for (std::size_t s = 0; s < n_strat; ++s) {
        const_lambda[s] = detail::constant_fraction(strategies[s], engine);
        if (!const_lambda[s]) any_eco = true;
    }

    // slot layout: [cell][strategy][sim]
    std::vector<std::vector<std::vector<PathSummary>>> full_slots;
    std::vector<std::vector<std::vector<detail::CompactSummary>>> compact_slots;
    std::vector<std::vector<std::uint8_t>> generated(n_cells,
                                                     std::vector<std::uint8_t>(plan.sims, 0));
    if (full_metrics)
        full_slots.assign(n_cells, std::vector<std::vector<PathSummary>>(
                                       n_strat, std::vector<PathSummary>(plan.sims)));
    else
        compact_slots.assign(n_cells, std::vector<std::vector<detail::CompactSummary>>(
                                          n_strat, std::vector<detail::CompactSummary>(plan.sims)));

    const double rf_growth = std::exp(plan.params.risk_free_rate);

    parallel_for(plan.sims, plan.workers, [&](std::size_t sim) {
        RandomStream stream(plan.master_seed, sim, StreamPurpose::path_noise);
        PathGenerator gen(plan.params, stream);
        std::vector<PortfolioAccumulator> accums(n_strat, PortfolioAccumulator(rf_growth));
        std::size_t next_cell = 0;
        for (std::size_t t = 1; t <= max_horizon && next_cell < n_cells; ++t) {
            const double q = gen.current().mispricing_ratio;
            const double prev_price = gen.current().price;
            double eco_lambda = 0.0;
            if (any_eco) eco_lambda = engine.eco_unconstrained(q);
            if (!gen.advance()) break;  // cells at or past this horizon count as failed
            const double growth = gen.current().price / prev_price;
            for (std::size_t s = 0; s < n_strat; ++s) {
                const double lam = const_lambda[s] ? *const_lambda[s]
                                                   : strategies[s].bounds.clip(eco_lambda);
                accums[s].add_step(lam, growth);
            }
            while (next_cell < n_cells && horizons[next_cell] == t) {
                generated[next_cell][sim] = 1;
                for (std::size_t s = 0; s < n_strat; ++s) {
                    if (full_metrics)
                        full_slots[next_cell][s][sim] = accums[s].summary();
                    else
                        compact_slots[next_cell][s][sim] = detail::compact(accums[s].summary());
                }
                ++next_cell;
            }
        }
    });

    SweepResult result;
    result.family = plan.family;
    result.master_seed = plan.master_seed;
    result.sims = plan.sims;
    for (std::size_t c = 0; c < n_cells; ++c) {
        SweepCell cell;
        cell.axis = "horizon";
        cell.axis_value = static_cast<double>(horizons[c]);
        for (std::size_t s = 0; s < n_strat; ++s) {
            if (full_metrics) {
                cell.strategies.push_back(detail::reduce_full(
                    strategies[s].label, full_slots[c][s], generated[c], plan.histogram_bins));
            } else {
                auto slots = compact_slots[c][s];
                for (std::size_t i = 0; i < plan.sims; ++i)
                    if (!generated[c][i]) slots[i].status = 0;
                cell.strategies.push_back(detail::reduce_compact(strategies[s].label, slots));
            }
        }
        result.cells.push_back(std::move(cell));
    }
    return result;
}

inline SweepResult run_histogram(const ExperimentPlan& plan) {
    const auto horizons = plan.horizons.empty() ? default_histogram_horizons() : plan.horizons;
    auto sorted = horizons;
    std::sort(sorted.begin(), sorted.end());
    return run_horizon_family(plan, sorted, /*full_metrics=*/true);
}

inline SweepResult run_window_sweep(const ExperimentPlan& plan) {
    const auto horizons = plan.horizons.empty() ? default_window_horizons() : plan.horizons;
    auto sorted = horizons;
    std::sort(sorted.begin(), sorted.end());
    return run_horizon_family(plan, sorted, /*full_metrics=*/false);
}

// Parameter sensitivity: one cell per parameter value, true parameters known
// to the allocator. The discount-rate axis moves both process rates
// together; simulation streams are shared across cells so that cells differ
// only through the parameter.
inline SweepResult run_sensitivity(const ExperimentPlan& plan) {
    if (plan.sims < 1) throw std::invalid_argument("run_sensitivity: sims must be >= 1");
    const auto values = plan.sweep_values.empty() ? default_sensitivity_values(plan.sweep_param)
                                                  : plan.sweep_values;
    if (values.empty()) throw std::invalid_argument("run_sensitivity: empty value grid");
    const std::size_t horizon = plan.horizons.empty() ? 2500 : plan.horizons.front();
    const auto strategies = plan.strategies.empty() ? eco_pair() : plan.strategies;
    const std::size_t n_strat = strategies.size();

    SweepResult result;
    result.family = plan.family;
    result.master_seed = plan.master_seed;
    result.sims = plan.sims;

    for (const double value : values) {
        ModelParams cell_params = plan.params;
        switch (plan.sweep_param) {
            case TargetParam::discount_rate:
            case TargetParam::normal_growth_rate:
                cell_params.discount_rate = value;
                cell_params.normal_growth_rate = value;
                break;
            case TargetParam::volatility:
                cell_params.volatility = value;
                break;
            case TargetParam::jump_prob:
                cell_params.jump_prob = value;
                break;
            case TargetParam::mean_jump_size:
                cell_params.mean_jump_size = value;
                break;
        }
        cell_params.validate();
        AllocationEngine engine(cell_params, {.jump_nodes = plan.jump_nodes,
                                              .gauss_nodes = plan.gauss_nodes,
                                              .use_table = true});
        const double rf_growth = std::exp(cell_params.risk_free_rate);

        std::vector<std::vector<detail::CompactSummary>> slots(
            n_strat, std::vector<detail::CompactSummary>(plan.sims));

        parallel_for(plan.sims, plan.workers, [&](std::size_t sim) {
            RandomStream stream(plan.master_seed, sim, StreamPurpose::path_noise);
            PathGenerator gen(cell_params, stream);
            std::vector<PortfolioAccumulator> accums(n_strat, PortfolioAccumulator(rf_growth));
            bool ok = true;
            for (std::size_t t = 1; t <= horizon; ++t) {
                const double q = gen.current().mispricing_ratio;
                const double prev_price = gen.current().price;
                const double eco_lambda = engine.eco_unconstrained(q);
                if (!gen.advance()) {
                    ok = false;
                    break;
                }
                const double growth = gen.current().price / prev_price;
                for (std::size_t s = 0; s < n_strat; ++s)
                    accums[s].add_step(strategies[s].bounds.clip(eco_lambda), growth);
            }
            for (std::size_t s = 0; s < n_strat; ++s) {
                slots[s][sim] = ok ? detail::compact(accums[s].summary())
                                   : detail::CompactSummary{};
            }
        });

        SweepCell cell;
        cell.axis = target_param_name(plan.sweep_param);
        cell.axis_value = value;
        for (std::size_t s = 0; s < n_strat; ++s)
            cell.strategies.push_back(detail::reduce_compact(strategies[s].label, slots[s]));
        result.cells.push_back(std::move(cell));
    }
    return result;
}

// Estimation-error robustness: paths are generated at the true parameters;
// the allocator believes a per-simulation perturbed value. One standard
// gaussian is drawn per simulation and scaled by each cell's sigma_e, so
// cells are coupled through both the path and the error draw.
inline SweepResult run_error_scan(const ExperimentPlan& plan, const ErrorSpec& spec) {
    if (plan.sims < 1) throw std::invalid_argument("run_error_scan: sims must be >= 1");
    const auto sigmas = spec.sigma_e.empty() ? default_error_sigmas() : spec.sigma_e;
    const std::size_t horizon = plan.horizons.empty() ? 2500 : plan.horizons.front();
    const auto strategies = plan.strategies.empty() ? eco_pair() : plan.strategies;
    const std::size_t n_strat = strategies.size();
    plan.params.validate();
    const double rf_growth = std::exp(plan.params.risk_free_rate);

    SweepResult result;
    result.family = plan.family;
    result.master_seed = plan.master_seed;
    result.sims = plan.sims;

    for (const double sigma_e : sigmas) {
        std::vector<std::vector<detail::CompactSummary>> slots(
            n_strat, std::vector<detail::CompactSummary>(plan.sims));

        parallel_for(plan.sims, plan.workers, [&](std::size_t sim) {
            RandomStream estimation(plan.master_seed, sim, StreamPurpose::estimation);
            const double eps = sigma_e * estimation.gaussian();
            const ModelParams belief = perturb_param(plan.params, spec.target, 1.0 + eps);
            AllocationEngine engine(belief, {.jump_nodes = plan.jump_nodes,
                                             .gauss_nodes = plan.gauss_nodes,
                                             .use_table = false});

            RandomStream stream(plan.master_seed, sim, StreamPurpose::path_noise);
            PathGenerator gen(plan.params, stream);
            std::vector<PortfolioAccumulator> accums(n_strat, PortfolioAccumulator(rf_growth));
            bool ok = true;
            for (std::size_t t = 1; t <= horizon; ++t) {
                const double q = gen.current().mispricing_ratio;
                const double prev_price = gen.current().price;
                const double eco_lambda = engine.eco_unconstrained(q);
                if (!gen.advance()) {
                    ok = false;
                    break;
                }
                const double growth = gen.current().price / prev_price;
                for (std::size_t s = 0; s < n_strat; ++s)
                    accums[s].add_step(strategies[s].bounds.clip(eco_lambda), growth);
            }
            for (std::size_t s = 0; s < n_strat; ++s)
                slots[s][sim] = ok ? detail::compact(accums[s].summary())
                                   : detail::CompactSummary{};
        });

        SweepCell cell;
        cell.axis = "sigma_e";
        cell.axis_value = sigma_e;
        cell.variant = target_param_name(spec.target);
        for (std::size_t s = 0; s < n_strat; ++s)
            cell.strategies.push_back(detail::reduce_compact(strategies[s].label, slots[s]));
        result.cells.push_back(std::move(cell));
    }
    return result;
}

// Drift-sign robustness: the true process rates are drawn per simulation,
// the allocator sees an error-laden magnitude with either the correct or the
// flipped sign. Both variants run on the same paths.
inline SweepResult run_sign_test(const ExperimentPlan& plan, const SignTestSpec& spec) {
    if (plan.sims < 1) throw std::invalid_argument("run_sign_test: sims must be >= 1");
    const auto horizons = [&] {
        auto h = plan.horizons.empty() ? default_window_horizons() : plan.horizons;
        std::sort(h.begin(), h.end());
        return h;
    }();
    const std::size_t max_horizon = horizons.back();
    const auto strategies = plan.strategies.empty() ? eco_pair() : plan.strategies;
    const std::size_t n_strat = strategies.size();
    const std::size_t n_cells = horizons.size();
    plan.params.validate();
    const double rf_growth = std::exp(plan.params.risk_free_rate);

    // variant index 0 = correct sign, 1 = flipped sign
    std::vector<std::vector<std::vector<detail::CompactSummary>>> slots(
        2, std::vector<std::vector<detail::CompactSummary>>(
               n_cells * n_strat, std::vector<detail::CompactSummary>(plan.sims)));
    std::vector<std::vector<std::uint8_t>> generated(n_cells,
                                                     std::vector<std::uint8_t>(plan.sims, 0));

    parallel_for(plan.sims, plan.workers, [&](std::size_t sim) {
        RandomStream estimation(plan.master_seed, sim, StreamPurpose::estimation);
        const double annual_true =
            estimation.uniform(-spec.annual_rate_limit, spec.annual_rate_limit);
        const double annual_err = estimation.uniform(0.0, 2.0 * std::abs(annual_true));
        const double sign = annual_true < 0.0 ? -1.0 : 1.0;

        ModelParams true_params = plan.params;
        true_params.discount_rate = std::log1p(annual_true) / kTradingDaysPerYear;
        true_params.normal_growth_rate = true_params.discount_rate;

        ModelParams belief_correct = plan.params;
        belief_correct.discount_rate = std::log1p(sign * annual_err) / kTradingDaysPerYear;
        belief_correct.normal_growth_rate = belief_correct.discount_rate;
        ModelParams belief_flipped = plan.params;
        belief_flipped.discount_rate = std::log1p(-sign * annual_err) / kTradingDaysPerYear;
        belief_flipped.normal_growth_rate = belief_flipped.discount_rate;

        const AllocationEngine::Options opts{.jump_nodes = plan.jump_nodes,
                                             .gauss_nodes = plan.gauss_nodes,
                                             .use_table = false};
        const AllocationEngine engines[2] = {AllocationEngine(belief_correct, opts),
                                             AllocationEngine(belief_flipped, opts)};

        RandomStream stream(plan.master_seed, sim, StreamPurpose::path_noise);
        PathGenerator gen(true_params, stream);
        std::vector<PortfolioAccumulator> accums(
            2 * n_strat, PortfolioAccumulator(rf_growth));
        std::size_t next_cell = 0;
        for (std::size_t t = 1; t <= max_horizon && next_cell < n_cells; ++t) {
            const double q = gen.current().mispricing_ratio;
            const double prev_price = gen.current().price;
            const double eco_lambda[2] = {engines[0].eco_unconstrained(q),
                                          engines[1].eco_unconstrained(q)};
            if (!gen.advance()) break;
            const double growth = gen.current().price / prev_price;
            for (int v = 0; v < 2; ++v)
                for (std::size_t s = 0; s < n_strat; ++s)
                    accums[v * n_strat + s].add_step(strategies[s].bounds.clip(eco_lambda[v]),
                                                     growth);
            while (next_cell < n_cells && horizons[next_cell] == t) {
                generated[next_cell][sim] = 1;
                for (int v = 0; v < 2; ++v)
                    for (std::size_t s = 0; s < n_strat; ++s)
                        slots[v][next_cell * n_strat + s][sim] =
                            detail::compact(accums[v * n_strat + s].summary());
                ++next_cell;
            }
        }
    });

    SweepResult result;
    result.family = plan.family;
    result.master_seed = plan.master_seed;
    result.sims = plan.sims;
    const char* variant_name[2] = {"correct-sign", "flipped-sign"};
    for (std::size_t c = 0; c < n_cells; ++c) {
        for (int v = 0; v < 2; ++v) {
            SweepCell cell;
            cell.axis = "horizon";
            cell.axis_value = static_cast<double>(horizons[c]);
            cell.variant = variant_name[v];
            for (std::size_t s = 0; s < n_strat; ++s) {
                auto cell_slots = slots[v][c * n_strat + s];
                for (std::size_t i = 0; i < plan.sims; ++i)
                    if (!generated[c][i]) cell_slots[i].status = 0;
                cell.strategies.push_back(
                    detail::reduce_compact(strategies[s].label, cell_slots));
            }
            result.cells.push_back(std::move(cell));
        }
    }
    return result;
}

// Dispatcher matching the plan's family.
inline SweepResult run_experiment(const ExperimentPlan& plan) {
    switch (plan.family) {
        case Family::histogram: return run_histogram(plan);
        case Family::window_sweep: return run_window_sweep(plan);
        case Family::param_sensitivity: return run_sensitivity(plan);
        case Family::error_scan: return run_error_scan(plan, plan.error);
        case Family::sign_test: return run_sign_test(plan, plan.sign);
    }
    throw std::logic_error("run_experiment: unknown family");
}

}  // namespace ecmlab
