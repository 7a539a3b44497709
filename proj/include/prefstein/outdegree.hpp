#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "prefstein/attachment.hpp"
#include "prefstein/chain.hpp"

namespace prefstein {

// Law of deg_m(i), the indegree of vertex i at time m in the random-outdegree
// model: from time t to t+1 the degree d gains one with probability f(d)/t.
// pmf over d = 0..m-i.
std::vector<double> vertex_degree_law(const AttachmentRule& rule, std::size_t i, std::size_t m);

// E[f(deg_m(i))] for all 1 <= i <= m < n_max, from one forward pass per vertex
// (parallel over i). Connection probabilities p_{i,n} = E[f(deg_{n-1}(i))]/(n-1).
class OutdegreeSweep {
public:
    OutdegreeSweep(const AttachmentRule& rule, std::size_t n_max);

    std::size_t n_max() const noexcept { return n_max_; }
    double mean_f(std::size_t i, std::size_t m) const;
    // P(edge n -> i), 1 <= i < n <= n_max
    double p(std::size_t i, std::size_t n) const { return mean_f(i, n - 1) / static_cast<double>(n - 1); }

private:
    std::size_t n_max_;
    std::vector<std::vector<double>> mean_f_;  // mean_f_[i-1][m-i]
};

// Outdegree D_n of vertex n, a sum of independent Bernoulli(p_{i,n}), i < n.
struct OutdegreeLaw {
    std::size_t n = 2;
    std::vector<double> p;      // p[i-1] = p_{i,n}
    double lambda_n = 0.0;      // sum of p, the exact mean of D_n
    std::vector<double> pmf;    // P(D_n = d), d = 0..n-1
    double chain_lambda = 0.0;  // E[f(W_{n-1})] from the uniform-vertex chain
    double lambda_gap() const;  // |lambda_n - chain_lambda|
};

// Poisson-binomial masses by sequential convolution.
std::vector<double> poisson_binomial(std::span<const double> p);

OutdegreeLaw build_outdegree(const AttachmentRule& rule, std::size_t n);
// Same, reusing a sweep with n <= sweep.n_max() and the chain law at time n-1.
OutdegreeLaw build_outdegree(const OutdegreeSweep& sweep, const AttachmentRule& rule, std::size_t n,
                             const ChainLaw& law_before);

struct PoissonTv {
    double exact = 0.0;         // d_TV(D_n, Po(lambda_n))
    double barbour_hall = 0.0;  // min(1, 1/lambda) sum p^2
    double sharp = 0.0;         // (1 - e^{-lambda})/lambda sum p^2
};

PoissonTv poisson_tv(const OutdegreeLaw& law);

struct OutdegreeRateRow {
    std::size_t n = 0;
    double lambda_n = 0.0;
    double exact_tv = 0.0;
    double bh_bound = 0.0;
    double normalizer = 0.0;  // 1/(n+1), log(n)/n or n^{-2(1-gamma)}
    double normalized = 0.0;  // bh_bound / normalizer
    double lambda_gap = 0.0;
};

struct OutdegreeRateTable {
    double gamma = 0.0;
    std::vector<OutdegreeRateRow> rows;
    QuartileSummary summary;  // of the normalized column
};

// Normalizer for the gamma regime of the Barbour-Hall bound.
double outdegree_normalizer(double gamma, std::size_t n);

// Exact laws on the grid (n >= 2). Throws RegimeMismatch unless
// f(k) <= gamma k + 1 for some gamma < 1 on the grid's range.
OutdegreeRateTable outdegree_rate_report(const AttachmentRule& rule, std::span<const std::size_t> n_grid);

// lambda-bar_n = lambda_n - beta/(1-gamma) for affine rules, n >= 2.
struct LambdaRow {
    std::size_t n = 0;
    double product_form = 0.0;  // (f(0) - lambda) prod_{m=2}^{n-1} (1 - (1-gamma)/m)
    double chain_form = 0.0;    // E[f(W_{n-1})] - lambda
    double normalized = 0.0;    // |product_form| n^{1-gamma}
    double bound = 0.0;         // |lambda-bar_2| e^{1-gamma} n^{-(1-gamma)}
};

struct LambdaCheck {
    double lambda = 0.0;
    std::vector<LambdaRow> rows;
    double max_disagreement = 0.0;
    double max_normalized = 0.0;
    bool bound_holds = true;
};

// Requires gamma in (0,1), beta in (0,1].
LambdaCheck lambda_recursion_check(double gamma, double beta, std::size_t n_max);

// max over 1 <= i <= m < n_max of E[f(deg_m(i))] / (m/i)^gamma.
double moment_bound_ratio(const OutdegreeSweep& sweep, double gamma);

// Columns n, lambda_n, exact_tv, bh_bound, normalized.
void write_outdegree_csv(std::ostream& os, const OutdegreeRateTable& table);

}  // namespace prefstein
