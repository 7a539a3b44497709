#include "prefstein/outdegree.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "prefstein/csv.hpp"
#include "prefstein/error.hpp"
#include "prefstein/numeric.hpp"

namespace prefstein {

namespace {

// One time step t -> t+1 of the pure-birth degree chain, in place.
void birth_step(std::vector<double>& pmf, const std::vector<double>& f, std::size_t t) {
    const double inv = 1.0 / static_cast<double>(t);
    pmf.push_back(0.0);
    for (std::size_t d = pmf.size() - 1; d > 0; --d) pmf[d] = pmf[d] * (1.0 - f[d] * inv) + pmf[d - 1] * f[d - 1] * inv;
    pmf[0] *= 1.0 - f[0] * inv;
}

double mean_of(const std::vector<double>& pmf, const std::vector<double>& f) {
    CompensatedSum s;
    for (std::size_t d = 0; d < pmf.size(); ++d) s.add(pmf[d] * f[d]);
    return s.value();
}

void check_connection_rule(const AttachmentRule& rule, std::size_t m) {
    // f(d) <= d+1 keeps f(d)/t a probability for d <= t-1
    const auto f = rule.values(m + 1);
    for (std::size_t d = 0; d <= m; ++d)
        if (!(f[d] > 0.0) || f[d] > static_cast<double>(d + 1))
            throw ViolationAt(d, fmt::format("random-outdegree model needs 0 < f(d) <= d+1; f({}) = {}", d, f[d]));
}

}  // namespace

std::vector<double> vertex_degree_law(const AttachmentRule& rule, std::size_t i, std::size_t m) {
    if (i == 0 || i > m) throw ParamOutOfRange(fmt::format("need 1 <= i <= m, got i = {}, m = {}", i, m));
    check_connection_rule(rule, m - i);
    const auto f = rule.values(m - i + 1);
    std::vector<double> pmf{1.0};
    pmf.reserve(m - i + 1);
    for (std::size_t t = i; t < m; ++t) birth_step(pmf, f, t);
    return pmf;
}

OutdegreeSweep::OutdegreeSweep(const AttachmentRule& rule, std::size_t n_max) : n_max_(n_max) {
    if (n_max < 2) throw ParamOutOfRange("outdegree sweep needs n_max >= 2");
    check_connection_rule(rule, n_max);
    const auto f = rule.values(n_max + 1);
    const std::size_t top = n_max - 1;  // largest m needed
    mean_f_.resize(top);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t i = 1; i <= top; ++i) {
        auto& out = mean_f_[i - 1];
        out.reserve(top - i + 1);
        std::vector<double> pmf{1.0};
        pmf.reserve(top - i + 2);
        out.push_back(f[0]);
        for (std::size_t t = i; t < top; ++t) {
            birth_step(pmf, f, t);
            out.push_back(mean_of(pmf, f));
        }
    }
}

double OutdegreeSweep::mean_f(std::size_t i, std::size_t m) const {
    if (i == 0 || i > m || m >= n_max_)
        throw ParamOutOfRange(fmt::format("mean_f({}, {}) outside the sweep (n_max = {})", i, m, n_max_));
    return mean_f_[i - 1][m - i];
}

double OutdegreeLaw::lambda_gap() const { return std::abs(lambda_n - chain_lambda); }

std::vector<double> poisson_binomial(std::span<const double> p) {
    std::vector<double> pmf{1.0};
    pmf.reserve(p.size() + 1);
    for (double q : p) {
        pmf.push_back(0.0);
        for (std::size_t d = pmf.size() - 1; d > 0; --d) pmf[d] = pmf[d] * (1.0 - q) + pmf[d - 1] * q;
        pmf[0] *= 1.0 - q;
    }
    return pmf;
}

OutdegreeLaw build_outdegree(const OutdegreeSweep& sweep, const AttachmentRule& rule, std::size_t n,
                             const ChainLaw& law_before) {
    if (n < 2 || n > sweep.n_max())
        throw ParamOutOfRange(fmt::format("outdegree law needs 2 <= n <= {}, got {}", sweep.n_max(), n));
    if (law_before.n != n - 1 || law_before.start_value != 0)
        throw ParamOutOfRange(fmt::format("need the start-0 chain at time {}", n - 1));
    OutdegreeLaw out;
    out.n = n;
    out.p.resize(n - 1);
    for (std::size_t i = 1; i < n; ++i) out.p[i - 1] = sweep.p(i, n);
    out.lambda_n = compensated_sum(out.p);
    out.pmf = poisson_binomial(out.p);
    out.chain_lambda = expected_f(law_before, rule);
    return out;
}

OutdegreeLaw build_outdegree(const AttachmentRule& rule, std::size_t n) {
    const OutdegreeSweep sweep(rule, n);
    return build_outdegree(sweep, rule, n, evolve(rule, n - 1));
}

PoissonTv poisson_tv(const OutdegreeLaw& law) {
    const double lam = law.lambda_n;
    if (!(lam > 0.0)) throw ParamOutOfRange("Poisson approximation needs lambda_n > 0");
    auto po = [lam](std::size_t k) {
        return std::exp(-lam + static_cast<double>(k) * std::log(lam) - std::lgamma(static_cast<double>(k) + 1.0));
    };
    CompensatedSum diff;
    for (std::size_t k = 0; k < law.pmf.size(); ++k) diff.add(std::abs(law.pmf[k] - po(k)));
    // Poisson mass beyond the support of D_n
    for (std::size_t k = law.pmf.size();; ++k) {
        const double t = po(k);
        diff.add(t);
        if (static_cast<double>(k) > lam && t < 1e-18) break;
    }
    CompensatedSum sq;
    for (double q : law.p) sq.add(q * q);
    PoissonTv out;
    out.exact = 0.5 * diff.value();
    out.barbour_hall = std::min(1.0, 1.0 / lam) * sq.value();
    out.sharp = -std::expm1(-lam) / lam * sq.value();
    return out;
}

double outdegree_normalizer(double gamma, std::size_t n) {
    const double dn = static_cast<double>(n);
    if (gamma < 0.5) return 1.0 / (dn + 1.0);
    if (gamma == 0.5) return std::log(dn) / dn;
    return std::pow(dn, -2.0 * (1.0 - gamma));
}

OutdegreeRateTable outdegree_rate_report(const AttachmentRule& rule, std::span<const std::size_t> n_grid) {
    if (n_grid.empty()) throw ParamOutOfRange("empty n grid");
    std::vector<std::size_t> grid(n_grid.begin(), n_grid.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (grid.front() < 2) throw ParamOutOfRange("outdegree grid needs n >= 2");
    const std::size_t n_max = grid.back();

    const auto cls = classify(rule, n_max);
    if (!cls.theorem3_gamma || *cls.theorem3_gamma >= 1.0)
        throw RegimeMismatch(
            fmt::format("{} is not bounded by gamma*k + 1 with gamma < 1 on [0, {}]", rule.describe(), n_max));

    OutdegreeRateTable table;
    table.gamma = *cls.theorem3_gamma;
    const OutdegreeSweep sweep(rule, n_max);

    std::vector<std::size_t> before(grid.size());
    std::transform(grid.begin(), grid.end(), before.begin(), [](std::size_t n) { return n - 1; });
    std::vector<ChainLaw> chain_laws;
    chain_laws.reserve(grid.size());
    evolve(rule, before, 0, [&](const ChainLaw& law) { chain_laws.push_back(law); });

    table.rows.resize(grid.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const std::size_t n = grid[j];
        const auto law = build_outdegree(sweep, rule, n, chain_laws[j]);
        const auto tv = poisson_tv(law);
        auto& row = table.rows[j];
        row.n = n;
        row.lambda_n = law.lambda_n;
        row.exact_tv = tv.exact;
        row.bh_bound = tv.barbour_hall;
        row.normalizer = outdegree_normalizer(table.gamma, n);
        row.normalized = tv.barbour_hall / row.normalizer;
        row.lambda_gap = law.lambda_gap();
    }
    std::vector<double> normalized;
    for (const auto& r : table.rows) normalized.push_back(r.normalized);
    table.summary = summarize_quartiles(normalized);
    return table;
}

LambdaCheck lambda_recursion_check(double gamma, double beta, std::size_t n_max) {
    if (!(gamma > 0.0 && gamma < 1.0) || !(beta > 0.0 && beta <= 1.0))
        throw ParamOutOfRange(fmt::format("lambda recursion needs gamma in (0,1), beta in (0,1]; got {}, {}", gamma,
                                          beta));
    if (n_max < 2) throw ParamOutOfRange("lambda recursion needs n_max >= 2");
    const auto rule = AttachmentRule::affine(gamma, beta);
    LambdaCheck out;
    out.lambda = beta / (1.0 - gamma);
    const double bar2 = beta - out.lambda;

    std::vector<std::size_t> times;
    for (std::size_t n = 2; n <= n_max; ++n) times.push_back(n - 1);
    double product = bar2;
    std::size_t n = 2;
    evolve(rule, times, 0, [&](const ChainLaw& law) {
        LambdaRow row;
        row.n = n;
        if (n > 2) product *= 1.0 - (1.0 - gamma) / static_cast<double>(n - 1);
        row.product_form = product;
        row.chain_form = expected_f(law, rule) - out.lambda;
        const double scale = std::pow(static_cast<double>(n), 1.0 - gamma);
        row.normalized = std::abs(product) * scale;
        row.bound = std::abs(bar2) * std::exp(1.0 - gamma) / scale;
        out.max_disagreement = std::max(out.max_disagreement, std::abs(row.product_form - row.chain_form));
        out.max_normalized = std::max(out.max_normalized, row.normalized);
        if (std::abs(row.product_form) > row.bound * (1.0 + 1e-12)) out.bound_holds = false;
        out.rows.push_back(row);
        ++n;
    });
    return out;
}

double moment_bound_ratio(const OutdegreeSweep& sweep, double gamma) {
    double worst = 0.0;
    for (std::size_t i = 1; i < sweep.n_max(); ++i)
        for (std::size_t m = i; m < sweep.n_max(); ++m)
            worst = std::max(worst, sweep.mean_f(i, m) /
                                        std::pow(static_cast<double>(m) / static_cast<double>(i), gamma));
    return worst;
}

void write_outdegree_csv(std::ostream& os, const OutdegreeRateTable& table) {
    CsvWriter csv(os, {"n", "lambda_n", "exact_tv", "bh_bound", "normalized"});
    for (const auto& r : table.rows) csv.row(r.n, r.lambda_n, r.exact_tv, r.bh_bound, r.normalized);
}

}  // namespace prefstein
