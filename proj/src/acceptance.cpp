#include "prefstein/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "prefstein/chain.hpp"
#include "prefstein/csv.hpp"
#include "prefstein/error.hpp"
#include "prefstein/graphsim.hpp"
#include "prefstein/grid.hpp"
#include "prefstein/htable.hpp"
#include "prefstein/limitlaw.hpp"
#include "prefstein/numeric.hpp"
#include "prefstein/outdegree.hpp"
#include "prefstein/random.hpp"
#include "prefstein/stein.hpp"

namespace prefstein {

std::vector<std::pair<std::string, AttachmentRule>> test_battery() {
    return {
        {"Constant(0.5)", AttachmentRule::constant(0.5)},
        {"Constant(0.9)", AttachmentRule::constant(0.9)},
        {"Constant(1.0)", AttachmentRule::constant(1.0)},
        {"Affine(0.5,0.5)", AttachmentRule::affine(0.5, 0.5)},
        {"Affine(1,0.5)", AttachmentRule::affine(1.0, 0.5)},
        {"Power(0.8,0.5,0.8)", AttachmentRule::power(0.8, 0.5, 0.8)},
    };
}

namespace {

struct Outcome {
    bool passed = true;
    std::string detail;
};

constexpr double kQuartileRatio = 1.5;

Outcome oracle_equivalence() {
    double worst = 0.0, worst_total = 0.0;
    for (const auto& [name, rule] : test_battery())
        for (std::size_t n = 1; n <= 4; ++n) {
            const auto chain = evolve(rule, n);
            const auto oracle = enumerate_exact(rule, n);
            worst = std::max(worst, tv_between(chain.pmf, oracle.pmf) * 2.0);
            for (std::size_t k = 0; k < std::max(chain.pmf.size(), oracle.pmf.size()); ++k)
                worst = std::max(worst, std::abs(chain.prob(k) - (k < oracle.pmf.size() ? oracle.pmf[k] : 0.0)));
            worst_total = std::max(worst_total, std::abs(oracle.total_probability - 1.0));
        }
    return {worst <= 1e-14 && worst_total <= 1e-13,
            fmt::format("max |chain - enumeration| = {:.3g} (tol 1e-14), max |total - 1| = {:.3g}", worst,
                        worst_total)};
}

Outcome rate_rows(const std::vector<std::pair<std::string, AttachmentRule>>& rules, RateRegime regime) {
    const auto grid = powers_of_two(7, 14);
    Outcome out;
    for (const auto& [name, rule] : rules) {
        const auto table = certify_rate(rule, grid, regime);
        double worst_err = 0.0;
        for (const auto& r : table.rows) worst_err = std::max(worst_err, r.err_bar / r.d_tv);
        const bool ok = std::isfinite(table.summary.sup) && table.summary.ratio() <= kQuartileRatio;
        out.passed &= ok;
        out.detail += fmt::format("{}{}: sup {:.4g}, last/first quartile {:.4f} (<= {}), max err_bar/d_tv {:.2g}",
                                  out.detail.empty() ? "" : "; ", name, table.summary.sup, table.summary.ratio(),
                                  kQuartileRatio, worst_err);
    }
    return out;
}

Outcome theorem_log_rate() {
    return rate_rows({{"Affine(0.5,0.5)", AttachmentRule::affine(0.5, 0.5)},
                      {"Constant(0.9)", AttachmentRule::constant(0.9)}},
                     RateRegime::log_over_n());
}

Outcome theorem_power_rate() {
    Outcome out;
    for (double g : {0.3, 0.5, 0.7}) {
        const auto sub = rate_rows({{fmt::format("k+{}", g), AttachmentRule::affine(1.0, g)}}, RateRegime::power_law(g));
        out.passed &= sub.passed;
        out.detail += (out.detail.empty() ? "" : "; ") + sub.detail;
    }
    return out;
}

Outcome h_properties() {
    constexpr std::size_t L = 500;
    Outcome out;
    std::size_t checks = 0;
    for (const auto& [name, rule] : test_battery()) {
        const auto table = build(rule, L);
        const auto cls = classify(rule, L);
        const auto rep = verify_properties(table, cls);
        double min_h = 0.0, worst_iv = -1.0, worst_v = 0.0;
        for (std::size_t l = 1; l <= L; ++l) {
            const auto r = table.row(l);
            const double sup = *std::max_element(r.begin(), r.end());
            min_h = std::min(min_h, *std::min_element(r.begin(), r.end()));
            if (rep.inverse_l_bound.applicable) worst_iv = std::max(worst_iv, static_cast<double>(l) * sup - rep.C_explicit);
            if (rep.gamma) worst_v = std::max(worst_v, r[l - 1] / gamma_row_bound(l, *rep.gamma));
        }
        bool ok = rep.all_passed() && min_h >= -1e-12;
        if (rep.inverse_l_bound.applicable) ok &= worst_iv <= 1e-9;
        if (rep.gamma) ok &= worst_v <= 1.0 + 1e-9;
        for (const auto* c : {&rep.nonnegative, &rep.nondecreasing, &rep.unimodal, &rep.inverse_l_bound,
                              &rep.gamma_bound})
            checks += c->applicable;
        out.passed &= ok;
        std::string parts = fmt::format("min h {:.2g}", min_h);
        if (rep.nondecreasing.applicable) parts += fmt::format(", (ii) K={} {}", rep.monotone_K, rep.nondecreasing.passed ? "ok" : "FAIL");
        if (rep.unimodal.applicable) parts += fmt::format(", (iii) {}", rep.unimodal.passed ? "ok" : "FAIL");
        if (rep.inverse_l_bound.applicable)
            parts += fmt::format(", (iv) C={:.4g} sup l*h={:.4g}", rep.C_explicit, rep.empirical_C);
        if (rep.gamma) parts += fmt::format(", (v) max ratio {:.6f}", worst_v);
        out.detail += fmt::format("{}{}: {}", out.detail.empty() ? "" : "; ", name, parts);
    }
    out.detail = fmt::format("{} applicable checks; ", checks) + out.detail;
    return out;
}

IndexSet random_set(std::uint64_t seed, std::uint64_t index) {
    PhiloxStream rng(seed, index, 0x5E7u);
    const double density = rng.uniform();
    const std::size_t top = 150 + rng.below(101);  // members drawn from [0, top]
    std::vector<std::size_t> members;
    for (std::size_t k = 0; k <= top; ++k)
        if (rng.uniform() < density) members.push_back(k);
    return index % 2 == 0 ? IndexSet::finite(std::move(members)) : IndexSet::complement_of(std::move(members));
}

Outcome stein_suite(std::uint64_t seed) {
    constexpr std::size_t kSets = 200, kMax = 200, n = 200;
    double max_v = 0.0, max_res = 0.0, max_triple = 0.0;
    for (const auto& [name, rule] : test_battery()) {
        const SteinSolver solver(rule, compute_mu(rule, kDefaultEpsilon, 260));
        const HTable table = build(rule, n);
        const ChainLaw law = evolve(rule, n + 1);
        for (std::size_t s = 0; s < kSets; ++s) {
            const auto A = random_set(seed, s);
            const auto fv = set_function(solver, A, kMax);
            for (std::size_t k = 0; k <= kMax; ++k) {
                max_v = std::max(max_v, std::abs(fv.v[k]));
                max_res = std::max(max_res, std::abs(stein_residual(solver, fv, A, k)));
            }
            max_triple = std::max(max_triple, triple_sum_check(solver, table, law, A).max_disagreement());
        }
    }
    return {max_v <= 1.0 + 1e-12 && max_res <= 1e-9 && max_triple <= 1e-9,
            fmt::format("{} sets x {} rules: max |v_A| = {:.15g}, max residual = {:.3g}, max triple-sum "
                        "disagreement = {:.3g}",
                        kSets, test_battery().size(), max_v, max_res, max_triple)};
}

Outcome duality() {
    double worst = 0.0;
    for (const auto& [name, rule] : test_battery()) worst = std::max(worst, definition_gap(rule, build(rule, 200)));
    return {worst <= 1e-11, fmt::format("max |h_recursion - h_definition| = {:.3g} (tol 1e-11)", worst)};
}

Outcome theorem_outdegree() {
    Outcome out;
    std::vector<std::size_t> all;
    for (std::size_t n = 2; n <= 2048; ++n) all.push_back(n);
    const auto quartile_grid = powers_of_two(4, 11);
    for (double g : {0.3, 0.5, 0.7}) {
        const double beta = 1.0 - g;
        const auto rule = AttachmentRule::affine(g, beta);
        const auto table = outdegree_rate_report(rule, all);
        std::size_t bh_violations = 0;
        double worst_gap = 0.0, worst_slack = 0.0;
        std::vector<double> normalized;
        for (const auto& r : table.rows) {
            bh_violations += r.exact_tv > r.bh_bound;
            worst_slack = std::max(worst_slack, r.exact_tv / r.bh_bound);
            worst_gap = std::max(worst_gap, r.lambda_gap);
            if (std::binary_search(quartile_grid.begin(), quartile_grid.end(), r.n)) normalized.push_back(r.normalized);
        }
        const auto q = summarize_quartiles(normalized);
        const auto lam = lambda_recursion_check(g, beta, 2048);
        const bool ok = bh_violations == 0 && q.ratio() <= kQuartileRatio && lam.max_disagreement <= 1e-10 &&
                        lam.bound_holds && worst_gap <= 1e-10;
        out.passed &= ok;
        out.detail += fmt::format(
            "{}gamma={}: BH violations {} (max exact/BH {:.3f}), normalized sup {:.4g}, quartile ratio {:.4f}, "
            "max |lambda-bar| n^(1-gamma) {:.4f}, product vs chain {:.2g}, lambda_n vs E f(W) {:.2g}",
            out.detail.empty() ? "" : "; ", g, bh_violations, worst_slack, q.sup, q.ratio(), lam.max_normalized,
            lam.max_disagreement, worst_gap);
    }
    return out;
}

Outcome d0_coupling() {
    const auto grid = powers_of_two(4, 12);
    auto rules = test_battery();
    rules.emplace_back("FixedOutdegree(0)", AttachmentRule::fixed_outdegree(0.0));
    rules.emplace_back("FixedOutdegree(0.5)", AttachmentRule::fixed_outdegree(0.5));
    std::size_t cases = 0, violations = 0;
    double worst = 0.0;
    std::string skipped;
    for (int d0 = 1; d0 <= 3; ++d0)
        for (const auto& [name, rule] : rules) {
            if (!validate(rule.with_d0(d0), static_cast<std::size_t>(d0) + grid.back()).valid) {
                skipped += fmt::format(" {}@d0={}", name, d0);
                continue;
            }
            for (std::size_t n : grid) {
                const double gap = d0_coupling_gap(rule, d0, n);
                ++cases;
                violations += gap > 1.0 / static_cast<double>(n);
                worst = std::max(worst, gap * static_cast<double>(n));
            }
        }
    return {violations == 0 && cases > 0,
            fmt::format("{} (rule, d0, n) cases, {} violations, max n*d_TV = {:.4f}; outside f(k) <= max{{k+1-d0,1}}:{}",
                        cases, violations, worst, skipped)};
}

std::string histogram_csv(const Histogram& h) {
    std::ostringstream os;
    CsvWriter csv(os, {"k", "count"});
    for (std::size_t k = 0; k < h.counts.size(); ++k) csv.row(k, h.counts[k]);
    return os.str();
}

Outcome monte_carlo(std::uint64_t seed, std::uint64_t trials) {
    constexpr std::size_t n = 200;
    Outcome out;
    {
        const auto rule = AttachmentRule::affine(0.5, 0.5);
        const auto h = empirical_uniform_indegree(RandomOutdegree{rule}, n, trials, seed);
        const auto c = compare_histogram(h, evolve(rule, n).pmf);
        out.passed &= c.max_z <= 4.0 && !c.impossible_bin_hit;
        out.detail += fmt::format("random outdegree Affine(0.5,0.5): max z {:.3f}, {:.1f}% of {} bins within 2 sigma",
                                  c.max_z, 100.0 * c.share_within_2sigma, c.bins);
    }
    {
        const auto rule = AttachmentRule::fixed_outdegree(0.0);
        const auto h = empirical_uniform_indegree(FixedOutdegree{0.0}, n, trials, seed);
        const auto c = compare_histogram(h, evolve(rule, n, 1).pmf);
        out.passed &= c.max_z <= 4.0 && !c.impossible_bin_hit;
        out.detail += fmt::format("; fixed outdegree delta=0: max z {:.3f}, {:.1f}% of {} bins within 2 sigma", c.max_z,
                                  100.0 * c.share_within_2sigma, c.bins);
    }
    {
        const Spatial model{2, 1.0, 1.0, 0.5};
        const auto s = spatial_marginal_check(model, 50, trials, seed);
        out.passed &= s.max_z <= s.familywise_threshold() && std::abs(s.pooled_z) <= 3.0;
        out.detail += fmt::format(
            "; spatial (m=2, A1=A2=1, p=0.5, n=50): pooled z {:.3f} (|z| <= 3), max z {:.3f} over {} degree bins "
            "(family-wise 3 sigma: {:.3f})",
            s.pooled_z, s.max_z, s.bins_tested, s.familywise_threshold());
    }
    {
        const auto a = histogram_csv(empirical_uniform_indegree(RandomOutdegree{AttachmentRule::constant(1.0)}, 50,
                                                                2000, seed));
        const auto b = histogram_csv(empirical_uniform_indegree(RandomOutdegree{AttachmentRule::constant(1.0)}, 50,
                                                                2000, seed));
        std::ostringstream e1, e2;
        write_edge_list(e1, simulate(Spatial{}, 100, seed, 7, true));
        write_edge_list(e2, simulate(Spatial{}, 100, seed, 7, true));
        const bool same = a == b && e1.str() == e2.str();
        out.passed &= same;
        out.detail += fmt::format("; repeated seeded runs {}", same ? "byte-identical" : "DIFFER");
    }
    return out;
}

Outcome hitting_identity() {
    constexpr std::size_t J = 200;
    double worst = 0.0;
    for (const auto& [name, rule] : test_battery()) {
        const auto mu = compute_mu(rule, kDefaultEpsilon, J);
        const auto times = hitting_times(rule, J);
        for (std::size_t j = 0; j <= J; ++j)
            worst = std::max(worst, std::abs(mu.mass(j) * (1.0 + rule(j)) * times.return_times[j] - 1.0));
    }
    return {worst <= 1e-10, fmt::format("max_j |mu_j (1+f(j)) E[tau_jj] - 1| = {:.3g} (tol 1e-10)", worst)};
}

}  // namespace

std::vector<CriterionResult> run_acceptance(std::ostream& log, const AcceptanceOptions& options) {
    struct Spec {
        int id;
        const char* name;
        double limit;
        std::function<Outcome()> body;
    };
    const std::vector<Spec> specs = {
        {1, "oracle equivalence", 1.0, oracle_equivalence},
        {2, "log(n)/n rate", 60.0, theorem_log_rate},
        {3, "n^-(1-gamma) rate", 0.0, theorem_power_rate},
        {4, "h-table properties", 5.0, h_properties},
        {5, "Stein suite", 30.0, [&] { return stein_suite(options.seed); }},
        {6, "definition/recursion duality", 0.0, duality},
        {7, "outdegree Poisson approximation", 600.0, theorem_outdegree},
        {8, "d0 coupling", 0.0, d0_coupling},
        {9, "Monte Carlo consistency", 0.0, [&] { return monte_carlo(options.seed, options.trials); }},
        {10, "hitting-time identity", 0.0, hitting_identity},
    };
    std::vector<CriterionResult> results;
    for (const auto& s : specs) {
        if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), s.id) == options.only.end())
            continue;
        CriterionResult r;
        r.id = s.id;
        r.name = s.name;
        r.time_limit = s.limit;
        const auto start = std::chrono::steady_clock::now();
        try {
            const auto o = s.body();
            r.passed = o.passed;
            r.detail = o.detail;
        } catch (const Error& e) {
            r.passed = false;
            r.detail = fmt::format("{}: {}", e.kind(), e.what());
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (r.time_limit > 0.0 && r.seconds > r.time_limit) {
            r.passed = false;
            r.detail += fmt::format(" [over time limit {}s]", r.time_limit);
        }
        log << fmt::format("{} #{} {} ({:.2f}s{}): {}\n", r.passed ? "PASS" : "FAIL", r.id, r.name, r.seconds,
                           r.time_limit > 0.0 ? fmt::format(", limit {:g}s", r.time_limit) : "", r.detail);
        log.flush();
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace prefstein
