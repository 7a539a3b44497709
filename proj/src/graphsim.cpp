#include "prefstein/graphsim.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <ostream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include "prefstein/error.hpp"
#include "prefstein/numeric.hpp"
#include "prefstein/random.hpp"

namespace prefstein {

namespace {

constexpr std::uint32_t kSelectionStep = 0xFFFFFFFFu;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double torus_distance(const double* a, const double* b, int dim) {
    double s = 0.0;
    for (int c = 0; c < dim; ++c) {
        double d = std::abs(a[c] - b[c]);
        d = std::min(d, 1.0 - d);
        s += d * d;
    }
    return std::sqrt(s);
}

// Called for every old vertex j at the step that creates vertex n+1.
using StepObserver = std::function<void(std::uint32_t degree_before, bool connected)>;

GraphState run(const Model& model, std::size_t n, std::uint64_t seed, std::uint64_t trial, bool record_edges,
               std::size_t observe_step, const StepObserver& observer) {
    GraphState g;
    g.n = n;
    g.indegrees.assign(n, 0);

    std::visit(
        Overloaded{
            [&](const RandomOutdegree& m) {
                const auto f = m.rule.values(static_cast<std::size_t>(m.rule.d0()) + n + 1);
                g.indegrees[0] = static_cast<std::uint32_t>(m.rule.d0());
                for (std::uint32_t d = 0; d < g.indegrees[0] && record_edges; ++d) g.edges.emplace_back(1, 1);
                for (std::size_t t = 1; t < n; ++t) {
                    PhiloxStream rng(seed, trial, static_cast<std::uint32_t>(t));
                    const double inv = 1.0 / static_cast<double>(t);
                    std::uint32_t out = 0;
                    for (std::size_t i = 0; i < t; ++i) {
                        const std::uint32_t before = g.indegrees[i];
                        const bool hit = rng.bernoulli(f[before] * inv);
                        if (t == observe_step) observer(before, hit);
                        if (!hit) continue;
                        ++g.indegrees[i];
                        ++out;
                        if (record_edges) g.edges.emplace_back(t + 1, i + 1);
                    }
                    g.outdegree_of_last = out;
                }
            },
            [&](const FixedOutdegree& m) {
                const double uniform_share = (1.0 + m.delta) / (2.0 + m.delta);
                std::vector<std::uint32_t> heads{0};  // vertex 1's self-loop
                heads.reserve(n);
                g.indegrees[0] = 1;
                g.outdegree_of_last = 1;
                if (record_edges) g.edges.emplace_back(1, 1);
                for (std::size_t t = 1; t < n; ++t) {
                    PhiloxStream rng(seed, trial, static_cast<std::uint32_t>(t));
                    const bool by_vertex = rng.uniform() < uniform_share;
                    const std::uint64_t pick = rng.below(t);
                    const std::uint32_t target = by_vertex ? static_cast<std::uint32_t>(pick) : heads[pick];
                    if (t == observe_step)
                        for (std::size_t i = 0; i < t; ++i) observer(g.indegrees[i], i == target);
                    ++g.indegrees[target];
                    heads.push_back(target);
                    if (record_edges) g.edges.emplace_back(t + 1, target + 1);
                }
            },
            [&](const Spatial& m) {
                g.dim = m.dim;
                g.positions.resize(n * static_cast<std::size_t>(m.dim));
                {
                    PhiloxStream rng(seed, trial, 0);
                    for (int c = 0; c < m.dim; ++c) g.positions[c] = rng.uniform();
                }
                for (std::size_t t = 1; t < n; ++t) {
                    PhiloxStream rng(seed, trial, static_cast<std::uint32_t>(t));
                    double* x = g.positions.data() + t * m.dim;
                    for (int c = 0; c < m.dim; ++c) x[c] = rng.uniform();
                    std::uint32_t out = 0;
                    for (std::size_t j = 0; j < t; ++j) {
                        const std::uint32_t before = g.indegrees[j];
                        const double volume = (m.a1 * before + m.a2) / static_cast<double>(t);
                        const bool inside = volume >= 1.0 ||
                                            torus_distance(x, g.positions.data() + j * m.dim, m.dim) <=
                                                torus_ball_radius(volume, m.dim);
                        const bool coin = rng.bernoulli(m.p);
                        const bool hit = inside && coin;
                        if (t == observe_step) observer(before, hit);
                        if (!hit) continue;
                        ++g.indegrees[j];
                        ++out;
                        if (record_edges) g.edges.emplace_back(t + 1, j + 1);
                    }
                    g.outdegree_of_last = out;
                }
            },
        },
        model);
    return g;
}

template <class PerTrial>
Histogram parallel_histogram(std::uint64_t trials, PerTrial per_trial) {
    Histogram h;
    h.trials = trials;
#pragma omp parallel
    {
        std::vector<std::uint64_t> local;
#pragma omp for schedule(static)
        for (std::uint64_t trial = 0; trial < trials; ++trial) {
            const std::size_t k = per_trial(trial);
            if (k >= local.size()) local.resize(k + 1, 0);
            ++local[k];
        }
#pragma omp critical
        {
            if (local.size() > h.counts.size()) h.counts.resize(local.size(), 0);
            for (std::size_t k = 0; k < local.size(); ++k) h.counts[k] += local[k];
        }
    }
    return h;
}

}  // namespace

double torus_ball_volume(double r, int dim) {
    using std::numbers::pi;
    if (r <= 0.0) return 0.0;
    switch (dim) {
        case 1:
            return std::min(2.0 * r, 1.0);
        case 2:
            if (r <= 0.5) return pi * r * r;
            if (r >= std::numbers::sqrt2 / 2.0) return 1.0;
            // disc minus the four caps beyond the lines |x| = 1/2, |y| = 1/2
            return pi * r * r - 4.0 * (r * r * std::acos(0.5 / r) - 0.5 * std::sqrt(r * r - 0.25));
        case 3: {
            if (r <= 0.5) return 4.0 / 3.0 * pi * r * r * r;
            if (r >= std::sqrt(3.0) / 2.0) return 1.0;
            // slice along z; the planar area has kinks where the slice radius crosses 1/2 and sqrt(2)/2
            auto slice = [r](double z) { return torus_ball_volume(std::sqrt(std::max(r * r - z * z, 0.0)), 2); };
            std::vector<double> cuts{0.0, 0.5};
            for (double rho : {0.5, std::numbers::sqrt2 / 2.0})
                if (r > rho && std::sqrt(r * r - rho * rho) < 0.5) cuts.push_back(std::sqrt(r * r - rho * rho));
            std::sort(cuts.begin(), cuts.end());
            double half = 0.0;
            for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
                half += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(slice, cuts[i], cuts[i + 1], 15,
                                                                                       1e-14);
            return 2.0 * half;
        }
        default:
            throw ParamOutOfRange(fmt::format("torus balls are implemented for dimensions 1..3, got {}", dim));
    }
}

double torus_ball_radius(double volume, int dim) {
    if (volume <= 0.0) return 0.0;
    const double m = dim;
    const double unwrapped =
        std::pow(volume * std::tgamma(m / 2.0 + 1.0) / std::pow(std::numbers::pi, m / 2.0), 1.0 / m);
    if (unwrapped <= 0.5) return unwrapped;
    const double diameter = std::sqrt(m) / 2.0;
    if (volume >= 1.0) return diameter;
    // The ball wraps around the torus; invert the exact volume. Rates are rational in
    // (degree, time), so each thread remembers the radii it has solved.
    thread_local std::map<std::pair<int, double>, double> cache;
    if (const auto it = cache.find({dim, volume}); it != cache.end()) return it->second;
    double lo = 0.5, hi = diameter;
    for (int it = 0; it < 100 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        (torus_ball_volume(mid, dim) < volume ? lo : hi) = mid;
    }
    return cache[{dim, volume}] = 0.5 * (lo + hi);
}

AttachmentRule induced_rule(const Model& model) {
    return std::visit(Overloaded{
                          [](const RandomOutdegree& m) { return m.rule; },
                          [](const FixedOutdegree& m) { return AttachmentRule::fixed_outdegree(m.delta); },
                          [](const Spatial& m) { return AttachmentRule::affine(m.p * m.a1, m.p * m.a2); },
                      },
                      model);
}

void validate_model(const Model& model, std::size_t n) {
    if (n == 0) throw ParamOutOfRange("graph needs n >= 1");
    if (n > 0xFFFFFFF0u) throw ParamOutOfRange("graph size exceeds the RNG step range");
    std::visit(Overloaded{
                   [&](const RandomOutdegree& m) { require_valid(m.rule, n); },
                   [&](const FixedOutdegree& m) {
                       if (!(m.delta > -1.0)) throw ParamOutOfRange(fmt::format("delta = {} must exceed -1", m.delta));
                   },
                   [&](const Spatial& m) {
                       if (m.dim < 1 || m.dim > 3) throw ParamOutOfRange("spatial dimension must be 1, 2 or 3");
                       if (!(m.a1 >= 0.0) || !(m.a2 > 0.0))
                           throw ParamOutOfRange("spatial model needs a1 >= 0 and a2 > 0");
                       if (!(m.p > 0.0 && m.p <= 1.0)) throw ParamOutOfRange("spatial p must lie in (0, 1]");
                       if (m.p * m.a1 > 1.0 || m.p * m.a2 > 1.0)
                           throw ParamOutOfRange("spatial model needs p*a1 <= 1 and p*a2 <= 1");
                   },
               },
               model);
}

GraphState simulate(const Model& model, std::size_t n, std::uint64_t seed, std::uint64_t trial, bool record_edges) {
    validate_model(model, n);
    return run(model, n, seed, trial, record_edges, 0, {});
}

void write_edge_list(std::ostream& os, const GraphState& g) {
    for (const auto& [src, dst] : g.edges) os << src << ' ' << dst << '\n';
}

double Histogram::frequency(std::size_t k) const {
    return k < counts.size() ? static_cast<double>(counts[k]) / static_cast<double>(trials) : 0.0;
}

double Histogram::sigma(double p) const { return std::sqrt(p * (1.0 - p) / static_cast<double>(trials)); }

Histogram empirical_uniform_indegree(const Model& model, std::size_t n, std::uint64_t trials, std::uint64_t seed) {
    if (trials == 0) throw ParamOutOfRange("trials must be >= 1");
    validate_model(model, n);
    return parallel_histogram(trials, [&](std::uint64_t trial) {
        const auto g = run(model, n, seed, trial, false, 0, {});
        PhiloxStream pick(seed, trial, kSelectionStep);
        return static_cast<std::size_t>(g.indegrees[pick.below(n)]);
    });
}

Histogram empirical_outdegree(const AttachmentRule& rule, std::size_t n, std::uint64_t trials, std::uint64_t seed) {
    if (trials == 0) throw ParamOutOfRange("trials must be >= 1");
    const Model model = RandomOutdegree{rule};
    validate_model(model, n);
    return parallel_histogram(trials, [&](std::uint64_t trial) {
        return static_cast<std::size_t>(run(model, n, seed, trial, false, 0, {}).outdegree_of_last);
    });
}

HistogramComparison compare_histogram(const Histogram& h, const std::vector<double>& pmf) {
    HistogramComparison out;
    const double N = static_cast<double>(h.trials);
    const std::size_t bins = std::max(h.counts.size(), pmf.size());
    std::size_t within = 0;
    double sparse_p = 0.0, sparse_freq = 0.0;
    auto z_of = [&](double freq, double p) { return std::abs(freq - p) / h.sigma(p); };
    for (std::size_t k = 0; k < bins; ++k) {
        const double p = k < pmf.size() ? pmf[k] : 0.0;
        const double freq = h.frequency(k);
        if (p <= 0.0) {
            if (freq > 0.0) out.impossible_bin_hit = true;
            continue;
        }
        if (p * N < kMinExpectedCount) {
            sparse_p += p;
            sparse_freq += freq;
            continue;
        }
        const double z = z_of(freq, p);
        out.max_z = std::max(out.max_z, z);
        ++out.bins;
        within += z <= 2.0;
    }
    if (sparse_p * N >= kMinExpectedCount) {
        out.pooled_tail = true;
        const double z = z_of(sparse_freq, sparse_p);
        out.max_z = std::max(out.max_z, z);
        ++out.bins;
        within += z <= 2.0;
    }
    out.share_within_2sigma = out.bins ? static_cast<double>(within) / static_cast<double>(out.bins) : 1.0;
    return out;
}

EnumerationResult enumerate_exact(const AttachmentRule& rule, std::size_t n) {
    if (n == 0 || n > 5) throw ParamOutOfRange(fmt::format("enumeration supports 1 <= n <= 5, got {}", n));
    require_valid(rule, n);
    const auto f = rule.values(static_cast<std::size_t>(rule.d0()) + n + 1);
    EnumerationResult out;
    out.pmf.assign(static_cast<std::size_t>(rule.d0()) + n, 0.0);
    std::vector<CompensatedSum> acc(out.pmf.size());
    CompensatedSum total;

    std::vector<std::size_t> deg(n, 0);
    deg[0] = static_cast<std::size_t>(rule.d0());
    std::function<void(std::size_t, double)> recurse = [&](std::size_t t, double prob) {
        if (t == n) {
            ++out.outcomes;
            total.add(prob);
            for (std::size_t v = 0; v < n; ++v) acc[deg[v]].add(prob / static_cast<double>(n));
            return;
        }
        // vertex t+1 arrives; every subset of {1..t} is a possible out-neighbourhood
        const std::vector<std::size_t> saved(deg.begin(), deg.begin() + t);
        for (std::uint32_t mask = 0; mask < (1u << t); ++mask) {
            double q = prob;
            for (std::size_t i = 0; i < t; ++i) {
                const double p = f[saved[i]] / static_cast<double>(t);
                q *= (mask >> i & 1u) ? p : 1.0 - p;
            }
            for (std::size_t i = 0; i < t; ++i) deg[i] = saved[i] + (mask >> i & 1u);
            recurse(t + 1, q);
        }
        std::copy(saved.begin(), saved.end(), deg.begin());
    };
    recurse(1, 1.0);

    for (std::size_t k = 0; k < acc.size(); ++k) out.pmf[k] = acc[k].value();
    out.total_probability = total.value();
    return out;
}

SpatialMarginalCheck spatial_marginal_check(const Spatial& model, std::size_t n, std::uint64_t trials,
                                            std::uint64_t seed, std::uint64_t min_observations) {
    if (trials == 0) throw ParamOutOfRange("trials must be >= 1");
    validate_model(model, n + 1);
    // bins indexed by degree: observations, connections
    std::vector<std::uint64_t> obs, con;
#pragma omp parallel
    {
        std::vector<std::uint64_t> lobs, lcon;
        StepObserver record = [&](std::uint32_t d, bool hit) {
            if (d >= lobs.size()) {
                lobs.resize(d + 1, 0);
                lcon.resize(d + 1, 0);
            }
            ++lobs[d];
            lcon[d] += hit;
        };
#pragma omp for schedule(static)
        for (std::uint64_t trial = 0; trial < trials; ++trial) run(model, n + 1, seed, trial, false, n, record);
#pragma omp critical
        {
            if (lobs.size() > obs.size()) {
                obs.resize(lobs.size(), 0);
                con.resize(lobs.size(), 0);
            }
            for (std::size_t d = 0; d < lobs.size(); ++d) {
                obs[d] += lobs[d];
                con[d] += lcon[d];
            }
        }
    }

    SpatialMarginalCheck out;
    double pooled_expected = 0.0, pooled_var = 0.0, pooled_hits = 0.0;
    for (std::size_t d = 0; d < obs.size(); ++d) {
        if (obs[d] == 0) continue;
        SpatialMarginalRow row;
        row.degree = static_cast<std::uint32_t>(d);
        row.observations = obs[d];
        row.connections = con[d];
        const double volume = (model.a1 * d + model.a2) / static_cast<double>(n);
        row.expected = model.p * std::min(1.0, volume);
        const double N = static_cast<double>(obs[d]);
        const double var = row.expected * (1.0 - row.expected) / N;
        row.z = var > 0.0 ? (static_cast<double>(con[d]) / N - row.expected) / std::sqrt(var) : 0.0;
        if (obs[d] >= min_observations) {
            out.max_z = std::max(out.max_z, std::abs(row.z));
            ++out.bins_tested;
            pooled_expected += N * row.expected;
            pooled_var += N * row.expected * (1.0 - row.expected);
            pooled_hits += static_cast<double>(con[d]);
        }
        out.rows.push_back(row);
    }
    out.pooled_z = pooled_var > 0.0 ? (pooled_hits - pooled_expected) / std::sqrt(pooled_var) : 0.0;
    return out;
}

double bonferroni_z(double sigmas, std::size_t bins) {
    const double target = std::erfc(sigmas / std::numbers::sqrt2) / static_cast<double>(std::max<std::size_t>(bins, 1));
    double lo = sigmas, hi = 40.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (std::erfc(mid / std::numbers::sqrt2) > target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double SpatialMarginalCheck::familywise_threshold() const { return bonferroni_z(3.0, bins_tested); }

CovarianceEstimate edge_covariance(const AttachmentRule& rule, std::size_t n, std::size_t i, std::size_t j,
                                   std::uint64_t trials, std::uint64_t seed) {
    if (i == 0 || j == 0 || i == j || i >= n || j >= n)
        throw ParamOutOfRange(fmt::format("need distinct 1 <= i, j < n; got {}, {}, n = {}", i, j, n));
    if (trials < 2) throw ParamOutOfRange("covariance needs at least two trials");
    const Model model = RandomOutdegree{rule};
    validate_model(model, n);
    std::uint64_t sx = 0, sy = 0, sxy = 0;
#pragma omp parallel for reduction(+ : sx, sy, sxy) schedule(static)
    for (std::uint64_t trial = 0; trial < trials; ++trial) {
        const auto g = run(model, n, seed, trial, true, 0, {});
        bool x = false, y = false;
        for (const auto& [src, dst] : g.edges) {
            if (src != n) continue;
            x |= dst == i;
            y |= dst == j;
        }
        sx += x;
        sy += y;
        sxy += x && y;
    }
    const double N = static_cast<double>(trials);
    const double px = sx / N, py = sy / N;
    CovarianceEstimate out;
    out.covariance = sxy / N - px * py;
    out.std_error = std::sqrt(std::max(px * (1 - px) * py * (1 - py), 1.0 / (N * N)) / N);
    return out;
}

}  // namespace prefstein
