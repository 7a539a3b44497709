#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "prefstein/attachment.hpp"

namespace prefstein {

// Independent connections: vertex t+1 links to each i <= t with probability f(deg(i))/t.
struct RandomOutdegree {
    AttachmentRule rule;
};

// One out-edge per arrival; vertex 1 carries a self-loop. The new vertex picks
// a uniform vertex with probability (1+delta)/(2+delta) and otherwise the head
// of a uniform existing edge, so j is chosen with probability
// (deg(j) + delta)/(t(2+delta)) in total degree.
struct FixedOutdegree {
    double delta = 0.0;
};

// Vertices uniform on the dim-torus [0,1)^dim, dim in 1..3; j's sphere of
// influence at time t is the torus-metric ball of volume (a1 deg(j) + a2)/t,
// and a newcomer inside it links with probability p. Volumes of at least 1
// cover the torus.
struct Spatial {
    int dim = 2;
    double a1 = 1.0;
    double a2 = 1.0;
    double p = 0.5;
};

// Volume of the torus-metric ball of radius r in [0,1)^dim; equals the
// Euclidean ball volume while r <= 1/2.
double torus_ball_volume(double r, int dim);
// Inverse of torus_ball_volume in r; the torus diameter for volume >= 1.
double torus_ball_radius(double volume, int dim);

using Model = std::variant<RandomOutdegree, FixedOutdegree, Spatial>;

// The attachment rule a model induces on indegrees (FixedOutdegree has d0 = 1).
AttachmentRule induced_rule(const Model& model);
void validate_model(const Model& model, std::size_t n);

struct GraphState {
    std::size_t n = 0;
    std::vector<std::uint32_t> indegrees;  // indegrees[j-1] = deg^-_n(j)
    std::uint32_t outdegree_of_last = 0;
    int dim = 0;
    std::vector<double> positions;                              // spatial: n * dim coordinates
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // (src, dst), 1-based, if recorded
};

// One trajectory up to time n; deterministic in (seed, trial).
GraphState simulate(const Model& model, std::size_t n, std::uint64_t seed, std::uint64_t trial = 0,
                    bool record_edges = false);

void write_edge_list(std::ostream& os, const GraphState& g);

struct Histogram {
    std::uint64_t trials = 0;
    std::vector<std::uint64_t> counts;

    double frequency(std::size_t k) const;
    // Binomial standard error of bin k under the reference probability p.
    double sigma(double p) const;
};

// Indegree of a uniform vertex at time n over independent trials (parallel over trials).
Histogram empirical_uniform_indegree(const Model& model, std::size_t n, std::uint64_t trials, std::uint64_t seed);

// Outdegree of vertex n in the random-outdegree model.
Histogram empirical_outdegree(const AttachmentRule& rule, std::size_t n, std::uint64_t trials, std::uint64_t seed);

// Largest standardized deviation |freq - p| / sigma over bins, and the share of
// bins within two sigma. Bins expecting fewer than kMinExpectedCount hits are
// pooled into one tail bin, tested when the pool reaches that count. Bins
// where the reference mass is zero must be empty.
inline constexpr double kMinExpectedCount = 5.0;

struct HistogramComparison {
    double max_z = 0.0;
    double share_within_2sigma = 1.0;
    std::size_t bins = 0;  // tested bins, the pooled tail included
    bool pooled_tail = false;
    bool impossible_bin_hit = false;
};

HistogramComparison compare_histogram(const Histogram& h, const std::vector<double>& pmf);

// Law of the indegree of a uniform vertex at time n <= 5 in the
// random-outdegree model, by enumerating every edge set.
struct EnumerationResult {
    std::vector<double> pmf;
    double total_probability = 0.0;
    std::size_t outcomes = 0;
};

EnumerationResult enumerate_exact(const AttachmentRule& rule, std::size_t n);

// Connection frequencies of vertex n+1 to old vertices in the spatial model,
// binned by the old vertex's indegree. `expected` is p min(1, (a1 d + a2)/n).
// Observations within one trial share the newcomer's position.
struct SpatialMarginalRow {
    std::uint32_t degree = 0;
    std::uint64_t observations = 0;
    std::uint64_t connections = 0;
    double expected = 0.0;
    double z = 0.0;
};

struct SpatialMarginalCheck {
    std::vector<SpatialMarginalRow> rows;
    double max_z = 0.0;     // over bins with at least min_observations
    std::size_t bins_tested = 0;
    double pooled_z = 0.0;  // total connections against the summed expectations
    // Per-bin threshold keeping the family-wise two-sided error at that of a single 3-sigma test.
    double familywise_threshold() const;
};

// z with P(|Z| > z) = P(|Z| > sigmas) / bins for standard normal Z.
double bonferroni_z(double sigmas, std::size_t bins);

SpatialMarginalCheck spatial_marginal_check(const Spatial& model, std::size_t n, std::uint64_t trials,
                                            std::uint64_t seed, std::uint64_t min_observations = 100);

// Sample covariance of 1{n -> i} and 1{n -> j} in the random-outdegree model, with its standard error.
struct CovarianceEstimate {
    double covariance = 0.0;
    double std_error = 0.0;
};

CovarianceEstimate edge_covariance(const AttachmentRule& rule, std::size_t n, std::size_t i, std::size_t j,
                                   std::uint64_t trials, std::uint64_t seed);

}  // namespace prefstein
