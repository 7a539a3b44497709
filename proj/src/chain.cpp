#include "prefstein/chain.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "prefstein/csv.hpp"
#include "prefstein/error.hpp"
#include "prefstein/numeric.hpp"

namespace prefstein {

ChainEvolver::ChainEvolver(const AttachmentRule& rule, std::size_t start_value) : rule_(rule) {
    law_.n = 1;
    law_.start_value = start_value;
    law_.pmf.assign(start_value + 1, 0.0);
    law_.pmf[start_value] = 1.0;
}

double ChainEvolver::f(std::size_t k) {
    while (f_cache_.size() <= k) f_cache_.push_back(rule_(f_cache_.size()));
    return f_cache_[k];
}

void ChainEvolver::step() {
    auto& pmf = law_.pmf;
    const std::size_t size = pmf.size();
    const double n = static_cast<double>(law_.n);
    const double inv = 1.0 / (n + 1.0);
    f(size);

    CompensatedSum reset;
    for (std::size_t k = 1; k < size; ++k) reset.add(pmf[k]);

    pmf.push_back(0.0);
    for (std::size_t k = size; k >= 1; --k)
        pmf[k] = pmf[k] * ((n - f_cache_[k]) * inv) + pmf[k - 1] * (f_cache_[k - 1] * inv);
    pmf[0] = pmf[0] * (1.0 - f_cache_[0] * inv) + reset.value() * inv;
    ++law_.n;

    const double total = compensated_sum(pmf);
    max_conservation_error_ = std::max(max_conservation_error_, std::abs(total - 1.0));
}

void ChainEvolver::advance_to(std::size_t n) {
    while (law_.n < n) step();
}

ChainLaw evolve(const AttachmentRule& rule, std::size_t n, std::size_t start_value) {
    if (n < 1) throw ParamOutOfRange("chain time n must be >= 1");
    require_valid(rule, start_value + n);
    ChainEvolver ev(rule, start_value);
    ev.advance_to(n);
    return ev.law();
}

void evolve(const AttachmentRule& rule, std::span<const std::size_t> snapshots, std::size_t start_value,
            const std::function<void(const ChainLaw&)>& on_snapshot) {
    std::vector<std::size_t> times(snapshots.begin(), snapshots.end());
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    if (times.empty()) return;
    if (times.front() < 1) throw ParamOutOfRange("snapshot times must be >= 1");
    require_valid(rule, start_value + times.back());
    ChainEvolver ev(rule, start_value);
    for (std::size_t t : times) {
        ev.advance_to(t);
        on_snapshot(ev.law());
    }
}

double expected_f(const ChainLaw& law, const AttachmentRule& rule) {
    CompensatedSum acc;
    for (std::size_t k = 0; k < law.pmf.size(); ++k) acc.add(rule(k) * law.pmf[k]);
    return acc.value();
}

double tv_distance(const ChainLaw& a, const ChainLaw& b) { return tv_between(a.pmf, b.pmf); }

TvEstimate tv_to_limit(const ChainLaw& law, const LimitLaw& mu) {
    const std::size_t support = law.pmf.size();
    const std::size_t last = std::min(support - 1, mu.truncation_K);
    CompensatedSum diff;
    for (std::size_t k = 0; k <= last; ++k) diff.add(std::abs(law.pmf[k] - mu.masses[k]));

    CompensatedSum law_beyond;
    for (std::size_t k = last + 1; k < support; ++k) law_beyond.add(law.pmf[k]);
    const double a = law_beyond.value();
    const double b = mu.tail_at[last + 1];
    // Beyond `last` only the two total masses are known: |a-b| <= sum |p-q| <= |a-b| + 2 min(a,b).
    diff.add(std::abs(a - b));
    return {0.5 * diff.value(), std::min(a, b)};
}

double RateRegime::normalizer(std::size_t n) const {
    const double x = static_cast<double>(n);
    if (kind == Kind::LogOverN) return std::log(x) / x;
    return std::pow(x, -(1.0 - gamma));
}

QuartileSummary summarize_quartiles(std::span<const double> normalized) {
    QuartileSummary s;
    if (normalized.empty()) return s;
    const std::size_t m = normalized.size();
    const std::size_t q = std::max<std::size_t>(1, (m + 3) / 4);
    s.sup = *std::max_element(normalized.begin(), normalized.end());
    s.first_quartile_sup = *std::max_element(normalized.begin(), normalized.begin() + q);
    s.last_quartile_sup = *std::max_element(normalized.end() - q, normalized.end());
    return s;
}

RateTable certify_rate(const AttachmentRule& rule, std::span<const std::size_t> n_grid, RateRegime regime,
                       double epsilon) {
    if (n_grid.empty()) throw ParamOutOfRange("rate grid is empty");
    const std::size_t n_max = *std::max_element(n_grid.begin(), n_grid.end());
    const auto cls = classify(rule, n_max);
    if (regime.kind == RateRegime::Kind::LogOverN) {
        if (!cls.k_star)
            throw RegimeMismatch(fmt::format("{}: log(n)/n regime needs k* (f(k) > k below, f(k) <= k above)",
                                             rule.describe()));
        if (*std::min_element(n_grid.begin(), n_grid.end()) < 2)
            throw ParamOutOfRange("log(n)/n normalisation needs n >= 2");
    } else {
        if (!cls.theorem2_gamma || std::abs(*cls.theorem2_gamma - regime.gamma) > 1e-12)
            throw RegimeMismatch(fmt::format("{}: f(k) in [k, k+{}] does not hold on the grid horizon",
                                             rule.describe(), regime.gamma));
    }

    const LimitLaw mu = compute_mu(rule, epsilon, n_max);
    RateTable table;
    evolve(rule, n_grid, 0, [&](const ChainLaw& law) {
        const auto tv = tv_to_limit(law, mu);
        RateRow row;
        row.n = law.n;
        row.d_tv = tv.value;
        row.err_bar = tv.err_bar;
        row.normalizer = regime.normalizer(law.n);
        row.normalized = row.d_tv / row.normalizer;
        table.rows.push_back(row);
    });
    std::vector<double> normalized;
    for (const auto& r : table.rows) normalized.push_back(r.normalized);
    table.summary = summarize_quartiles(normalized);
    return table;
}

double d0_coupling_gap(const AttachmentRule& rule, int d0, std::size_t n) {
    if (d0 < 0) throw ParamOutOfRange("d0 must be >= 0");
    if (d0 == 0) return 0.0;
    const auto shifted = rule.with_d0(d0);
    require_valid(shifted, static_cast<std::size_t>(d0) + n);
    const auto from_zero = evolve(shifted, n, 0);
    const auto from_d0 = evolve(shifted, n, static_cast<std::size_t>(d0));
    return tv_distance(from_zero, from_d0);
}

void write_rate_csv(std::ostream& os, const RateTable& table) {
    CsvWriter csv(os, {"n", "d_tv", "err_bar", "normalizer", "normalized"});
    for (const auto& r : table.rows) csv.row(r.n, r.d_tv, r.err_bar, r.normalizer, r.normalized);
}

}  // namespace prefstein
