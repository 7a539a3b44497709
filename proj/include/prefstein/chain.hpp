#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "prefstein/attachment.hpp"
#include "prefstein/limitlaw.hpp"

namespace prefstein {

// Exact law of X_n, the indegree of a uniformly chosen vertex at time n.
// pmf[k] = P(X_n = k) on k = 0..start_value+n-1.
struct ChainLaw {
    std::size_t n = 1;
    std::vector<double> pmf;
    std::size_t start_value = 0;

    double prob(std::size_t k) const { return k < pmf.size() ? pmf[k] : 0.0; }
};

// Forward dynamic program for the uniform-vertex indegree chain. From time n
// to n+1 a state k >= 1 moves up with probability f(k)/(n+1), resets to 0
// with probability 1/(n+1) and stays otherwise; state 0 moves up with
// probability f(0)/(n+1). Only the current pmf is kept.
class ChainEvolver {
public:
    explicit ChainEvolver(const AttachmentRule& rule, std::size_t start_value = 0);

    void step();
    void advance_to(std::size_t n);

    const ChainLaw& law() const noexcept { return law_; }
    std::size_t time() const noexcept { return law_.n; }
    // Largest |sum(pmf) - 1| seen after any step.
    double max_conservation_error() const noexcept { return max_conservation_error_; }

private:
    double f(std::size_t k);

    AttachmentRule rule_;
    std::vector<double> f_cache_;
    ChainLaw law_;
    double max_conservation_error_ = 0.0;
};

// Law at time n. The rule must satisfy f(k) <= max{k+1-d0, 1} up to start_value + n.
ChainLaw evolve(const AttachmentRule& rule, std::size_t n, std::size_t start_value = 0);

// One pass up to max(snapshots); `on_snapshot` is called at every requested time (ascending).
void evolve(const AttachmentRule& rule, std::span<const std::size_t> snapshots, std::size_t start_value,
            const std::function<void(const ChainLaw&)>& on_snapshot);

// E[f(X_n)].
double expected_f(const ChainLaw& law, const AttachmentRule& rule);

double tv_distance(const ChainLaw& a, const ChainLaw& b);

// d_TV(X_n, W) with an additive error bar covering mass that lies beyond the
// truncation of mu: the exact distance is in [value, value + err_bar].
struct TvEstimate {
    double value = 0.0;
    double err_bar = 0.0;
};

TvEstimate tv_to_limit(const ChainLaw& law, const LimitLaw& mu);

struct RateRegime {
    enum class Kind { LogOverN, PowerLaw };
    Kind kind = Kind::LogOverN;
    double gamma = 0.0;  // PowerLaw only

    static RateRegime log_over_n() { return {Kind::LogOverN, 0.0}; }
    static RateRegime power_law(double gamma) { return {Kind::PowerLaw, gamma}; }
    // log(n)/n or n^{-(1-gamma)}
    double normalizer(std::size_t n) const;
};

struct RateRow {
    std::size_t n = 0;
    double d_tv = 0.0;
    double err_bar = 0.0;
    double normalizer = 0.0;
    double normalized = 0.0;  // d_tv / normalizer
};

// Boundedness summary of a normalized column: the sup over the grid and the
// sups over its first and last quarter (by row index, at least one row each).
struct QuartileSummary {
    double sup = 0.0;
    double first_quartile_sup = 0.0;
    double last_quartile_sup = 0.0;
    double ratio() const { return last_quartile_sup / first_quartile_sup; }
};

QuartileSummary summarize_quartiles(std::span<const double> normalized);

struct RateTable {
    std::vector<RateRow> rows;
    QuartileSummary summary;
};

// Exact d_TV(W_n, W) on the grid with one O(max n^2) pass. Throws
// RegimeMismatch when the rule's classification contradicts the regime.
RateTable certify_rate(const AttachmentRule& rule, std::span<const std::size_t> n_grid, RateRegime regime,
                       double epsilon = kDefaultEpsilon);

// Exact d_TV between the chains started at 0 and at d0, both at time n.
// The coupling through the first reset gives the bound 1/n.
double d0_coupling_gap(const AttachmentRule& rule, int d0, std::size_t n);

// Columns n, d_tv, err_bar, normalizer, normalized.
void write_rate_csv(std::ostream& os, const RateTable& table);

}  // namespace prefstein
