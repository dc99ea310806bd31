#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ecmlab/harness.hpp"
#include "ecmlab/metrics.hpp"

using namespace ecmlab;

namespace {

ExperimentPlan small_plan(Family family) {
    ExperimentPlan plan;
    plan.family = family;
    plan.sims = 120;
    plan.master_seed = 91;
    plan.workers = 1;
    return plan;
}

bool cells_identical(const SweepResult& a, const SweepResult& b) {
    if (a.cells.size() != b.cells.size()) return false;
    for (std::size_t c = 0; c < a.cells.size(); ++c) {
        const auto& ca = a.cells[c];
        const auto& cb = b.cells[c];
        if (ca.axis_value != cb.axis_value || ca.strategies.size() != cb.strategies.size())
            return false;
        for (std::size_t s = 0; s < ca.strategies.size(); ++s) {
            const auto& sa = ca.strategies[s];
            const auto& sb = cb.strategies[s];
            if (sa.label != sb.label) return false;
            if (sa.terminal_log_wealth.q25 != sb.terminal_log_wealth.q25 ||
                sa.terminal_log_wealth.median != sb.terminal_log_wealth.median ||
                sa.terminal_log_wealth.q75 != sb.terminal_log_wealth.q75)
                return false;
            if (sa.uptime_pct.median != sb.uptime_pct.median) return false;
            if (sa.mean_lambda.median != sb.mean_lambda.median) return false;
            if (sa.prob_default_pct != sb.prob_default_pct) return false;
            if (sa.counts.defaults != sb.counts.defaults ||
                sa.counts.failures != sb.counts.failures ||
                sa.counts.included != sb.counts.included)
                return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("worker count does not change any result") {
    auto plan = small_plan(Family::window_sweep);
    plan.horizons = {100, 200, 400};
    plan.workers = 1;
    const auto one = run_window_sweep(plan);
    plan.workers = 4;
    const auto four = run_window_sweep(plan);
    plan.workers = 16;
    const auto sixteen = run_window_sweep(plan);
    REQUIRE(cells_identical(one, four));
    REQUIRE(cells_identical(one, sixteen));
}

TEST_CASE("a one-cell window sweep reduces to the fixed-horizon run") {
    auto plan = small_plan(Family::window_sweep);
    plan.horizons = {300};
    const auto sweep = run_window_sweep(plan);

    auto hplan = plan;
    hplan.family = Family::histogram;
    const auto hist = run_histogram(hplan);

    REQUIRE(sweep.cells.size() == 1);
    REQUIRE(hist.cells.size() == 1);
    for (std::size_t s = 0; s < sweep.cells[0].strategies.size(); ++s) {
        const auto& a = sweep.cells[0].strategies[s];
        const auto& b = hist.cells[0].strategies[s];
        REQUIRE(a.label == b.label);
        REQUIRE(a.terminal_log_wealth.median == b.terminal_log_wealth.median);
        REQUIRE(a.uptime_pct.q75 == b.uptime_pct.q75);
        REQUIRE(a.prob_default_pct == b.prob_default_pct);
    }
}

TEST_CASE("nested horizons are coupled: the same cell appears in both runs") {
    auto plan = small_plan(Family::window_sweep);
    plan.horizons = {150, 350};
    const auto both = run_window_sweep(plan);
    plan.horizons = {150};
    const auto single = run_window_sweep(plan);
    REQUIRE(both.cells[0].strategies[0].terminal_log_wealth.median ==
            single.cells[0].strategies[0].terminal_log_wealth.median);
}

TEST_CASE("harness snapshots equal the materialized pipeline") {
    auto plan = small_plan(Family::histogram);
    plan.sims = 5;
    plan.horizons = {80};
    const auto result = run_histogram(plan);

    // rebuild by hand: same streams, same engine configuration
    AllocationEngine engine(plan.params);
    const auto strategies = six_standard_strategies();
    for (std::size_t s = 0; s < strategies.size(); ++s) {
        std::vector<PathSummary> summaries;
        for (std::size_t j = 0; j < plan.sims; ++j) {
            RandomStream stream(plan.master_seed, j, StreamPurpose::path_noise);
            const auto path = generate_path(plan.params, 80, stream);
            REQUIRE(path.ok());
            summaries.push_back(summarize(simulate_portfolio(strategies[s], engine, path), path));
        }
        const auto want = compute_metrics(summaries);
        const auto& got = *result.cells[0].strategies[s].report;
        REQUIRE(got.prob_outperf_pct == want.prob_outperf_pct);
        REQUIRE(got.prob_default_pct == want.prob_default_pct);
        if (want.cagr_pct)
            REQUIRE(got.cagr_pct.value() == want.cagr_pct.value());
        if (want.sharpe_ann)
            REQUIRE(got.sharpe_ann.value() == want.sharpe_ann.value());
        if (want.uptime_pct)
            REQUIRE(got.uptime_pct.value() == want.uptime_pct.value());
    }
}

TEST_CASE("histogram cells carry reports, bins, and reconciled counts") {
    auto plan = small_plan(Family::histogram);
    plan.horizons = {120, 240};
    const auto result = run_histogram(plan);
    REQUIRE(result.cells.size() == 2);
    for (const auto& cell : result.cells) {
        REQUIRE(cell.strategies.size() == 6);
        for (const auto& s : cell.strategies) {
            REQUIRE(s.report.has_value());
            REQUIRE(s.outperf_hist.has_value());
            REQUIRE(s.counts.reconciles());
            REQUIRE(s.outperf_hist->total_count() == s.counts.included);
        }
    }
}

TEST_CASE("single-simulation histogram collapses to a point") {
    auto plan = small_plan(Family::histogram);
    plan.sims = 1;
    plan.horizons = {60};
    const auto result = run_histogram(plan);
    const auto& hist = *result.cells[0].strategies[1].outperf_hist;  // FF60
    REQUIRE(hist.total_count() == 1);
    REQUIRE(hist.mean == hist.median_value);
}

TEST_CASE("perturbation clipping honours the natural parameter ranges") {
    const auto base = ModelParams::base();
    RandomStream rng(3, 1);
    for (int i = 0; i < 20000; ++i) {
        const double factor = 1.0 + 100.0 * rng.gaussian();
        const auto sig = perturb_param(base, TargetParam::volatility, factor);
        REQUIRE(sig.volatility >= 0.0);
        const auto rho = perturb_param(base, TargetParam::jump_prob, factor);
        REQUIRE(rho.jump_prob >= 0.0);
        REQUIRE(rho.jump_prob < 1.0);
        const auto kb = perturb_param(base, TargetParam::mean_jump_size, factor);
        REQUIRE(kb.mean_jump_size >= 0.0);
        const auto rd = perturb_param(base, TargetParam::discount_rate, factor);
        REQUIRE(rd.normal_growth_rate == base.normal_growth_rate);  // only the target moves
        rho.validate();
        sig.validate();
        kb.validate();
    }
}

TEST_CASE("error scan runs every sigma without solver errors") {
    auto plan = small_plan(Family::error_scan);
    plan.sims = 40;
    plan.horizons = {120};
    for (const auto target : {TargetParam::jump_prob, TargetParam::volatility,
                              TargetParam::discount_rate}) {
        ErrorSpec spec;
        spec.target = target;
        spec.sigma_e = {1e-3, 1.0, 1e2};
        const auto result = run_error_scan(plan, spec);
        REQUIRE(result.cells.size() == 3);
        for (const auto& cell : result.cells) {
            REQUIRE(cell.strategies.size() == 2);
            for (const auto& s : cell.strategies) REQUIRE(s.counts.reconciles());
        }
    }
}

TEST_CASE("a vanishing error level reproduces the perfect-knowledge run") {
    auto plan = small_plan(Family::error_scan);
    plan.sims = 150;
    plan.horizons = {250};
    ErrorSpec spec;
    spec.target = TargetParam::mean_jump_size;
    spec.sigma_e = {1e-9};
    const auto scan = run_error_scan(plan, spec);

    auto wplan = plan;
    wplan.family = Family::window_sweep;
    wplan.strategies = eco_pair();
    wplan.horizons = {250};
    const auto perfect = run_window_sweep(wplan);

    for (std::size_t s = 0; s < 2; ++s) {
        const double got = scan.cells[0].strategies[s].terminal_log_wealth.median;
        const double want = perfect.cells[0].strategies[s].terminal_log_wealth.median;
        REQUIRE(got == Catch::Approx(want).margin(1e-5));
    }
}

TEST_CASE("error draws are coupled across sigma cells") {
    // the same per-simulation standard draw scales with sigma_e, so the
    // perturbed parameter moves monotonically with the cell's sigma
    const auto base = ModelParams::base();
    for (std::uint64_t sim = 0; sim < 50; ++sim) {
        RandomStream a(7, sim, StreamPurpose::estimation);
        RandomStream b(7, sim, StreamPurpose::estimation);
        REQUIRE(a.gaussian() == b.gaussian());
    }
}

TEST_CASE("sign test: correct-sign beats flipped-sign uptime at every horizon") {
    auto plan = small_plan(Family::sign_test);
    plan.sims = 300;
    plan.horizons = {250, 500};
    const auto result = run_sign_test(plan, SignTestSpec{});
    REQUIRE(result.cells.size() == 4);  // 2 horizons x 2 variants
    for (std::size_t h = 0; h < 2; ++h) {
        const auto& correct = result.cells[2 * h];
        const auto& flipped = result.cells[2 * h + 1];
        REQUIRE(correct.variant == "correct-sign");
        REQUIRE(flipped.variant == "flipped-sign");
        for (std::size_t s = 0; s < correct.strategies.size(); ++s) {
            REQUIRE(correct.strategies[s].uptime_pct.median >
                    flipped.strategies[s].uptime_pct.median);
        }
    }
}

TEST_CASE("sign test error magnitudes stay within twice the true rate") {
    SignTestSpec spec;
    for (std::uint64_t sim = 0; sim < 2000; ++sim) {
        RandomStream estimation(91, sim, StreamPurpose::estimation);
        const double annual_true =
            estimation.uniform(-spec.annual_rate_limit, spec.annual_rate_limit);
        const double annual_err = estimation.uniform(0.0, 2.0 * std::abs(annual_true));
        REQUIRE(std::abs(annual_err) <= 2.0 * std::abs(annual_true));
    }
}

TEST_CASE("sensitivity sweep: the no-jump cell behaves like the pure diffusion") {
    auto plan = small_plan(Family::param_sensitivity);
    plan.sims = 100;
    plan.horizons = {200};
    plan.sweep_param = TargetParam::jump_prob;
    plan.sweep_values = {0.0, 0.02};
    const auto result = run_sensitivity(plan);
    REQUIRE(result.cells.size() == 2);
    REQUIRE(result.cells[0].axis == "jump_prob");
    // at rho = 0 no defaults occur for the bounded variant at these horizons
    REQUIRE(result.cells[0].strategies[0].prob_default_pct == 0.0);
    for (const auto& cell : result.cells)
        for (const auto& s : cell.strategies) REQUIRE(s.counts.reconciles());
}

TEST_CASE("default sensitivity grids match the documented ranges") {
    const auto rates = default_sensitivity_values(TargetParam::discount_rate);
    REQUIRE(rates.size() == 11);
    REQUIRE(rates.front() == 0.0);
    REQUIRE(rates.back() == Catch::Approx(std::log(1.20) / 252.0));
    const auto vols = default_sensitivity_values(TargetParam::volatility);
    REQUIRE(vols.size() == 10);
    REQUIRE(vols.front() == Catch::Approx(0.05 / std::sqrt(252.0)));
    REQUIRE(vols.back() == Catch::Approx(0.50 / std::sqrt(252.0)));
    const auto sigmas = default_error_sigmas();
    REQUIRE(sigmas.size() == 11);
    REQUIRE(sigmas.front() == Catch::Approx(1e-3));
    REQUIRE(sigmas.back() == Catch::Approx(1e2));
}

TEST_CASE("generation failures are counted per cell") {
    auto plan = small_plan(Family::window_sweep);
    plan.sims = 10;
    plan.horizons = {400, 1200};
    plan.params.discount_rate = 1.0;  // price overflows around step 709
    plan.params.normal_growth_rate = 1.0;
    plan.params.volatility = 0.0;
    plan.params.jump_prob = 0.0;
    plan.strategies = {StrategySpec::buy_and_hold()};
    const auto result = run_window_sweep(plan);
    REQUIRE(result.cells[0].strategies[0].counts.failures == 0);   // before the overflow
    REQUIRE(result.cells[1].strategies[0].counts.failures == 10);  // all paths blow up
    REQUIRE(result.cells[1].strategies[0].counts.reconciles());
}
