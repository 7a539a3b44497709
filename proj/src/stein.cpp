#include "prefstein/stein.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "prefstein/error.hpp"
#include "prefstein/numeric.hpp"

namespace prefstein {

IndexSet::IndexSet(std::vector<std::size_t> members, bool complement)
    : members_(std::move(members)), complement_(complement) {
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
}

IndexSet IndexSet::interval(std::size_t lo, std::size_t hi) {
    std::vector<std::size_t> m;
    for (std::size_t k = lo; k <= hi; ++k) m.push_back(k);
    return finite(std::move(m));
}

IndexSet IndexSet::at_least(std::size_t lo) {
    std::vector<std::size_t> m;
    for (std::size_t k = 0; k < lo; ++k) m.push_back(k);
    return complement_of(std::move(m));
}

bool IndexSet::contains(std::size_t k) const {
    return std::binary_search(members_.begin(), members_.end(), k) != complement_;
}

SteinSolver::SteinSolver(AttachmentRule rule, LimitLaw mu) : rule_(std::move(rule)), mu_(std::move(mu)) {
    f_ = rule_.values(mu_.truncation_K + 2);
}

double SteinSolver::mass_ratio(std::size_t j, std::size_t k) const {
    if (j > mu_.truncation_K) throw TailUnderflow(j, fmt::format("index {} beyond limit-law truncation K = {}", j,
                                                                mu_.truncation_K));
    return std::exp(mu_.log_masses[j] - mu_.log_tail[k]);
}

double SteinSolver::delta_g(std::size_t j, std::size_t k) const {
    const std::size_t K = mu_.truncation_K;
    if (j > K || k > K)
        throw TailUnderflow(std::max(j, k), fmt::format("delta_g({}, {}) beyond limit-law truncation K = {}", j, k, K));
    const double fk = f_[k];
    if (j == k) return 1.0 / (1.0 + fk);
    if (j < k) return 0.0;
    return -std::exp(mu_.log_masses[j] - mu_.log_masses[k]) / (fk * (1.0 + fk));
}

double SteinSolver::v_set(const IndexSet& A, std::size_t k) const {
    if (k >= mu_.truncation_K)
        throw TailUnderflow(k, fmt::format("v_A({}) needs mu beyond truncation K = {}", k, mu_.truncation_K));
    const double fk = f_[k];
    const double up = fk / (1.0 + fk);  // mu([k+1,inf)) / mu([k,inf))

    CompensatedSum listed;  // sum over listed members j >= k+1 of mu_j / mu([k,inf))
    const auto& m = A.members();
    for (auto it = std::upper_bound(m.begin(), m.end(), k); it != m.end(); ++it) listed.add(mass_ratio(*it, k));
    const double above = A.is_complement() ? up - listed.value() : listed.value();
    return -above + (A.contains(k) ? up : 0.0);
}

double SteinSolver::measure(const IndexSet& A) const {
    CompensatedSum s;
    for (std::size_t j : A.members()) {
        if (j > mu_.truncation_K)
            throw TailUnderflow(j, fmt::format("mu({{{}}}) beyond limit-law truncation K = {}", j, mu_.truncation_K));
        s.add(mu_.masses[j]);
    }
    return A.is_complement() ? 1.0 - s.value() : s.value();
}

SetFunctionV set_function(const SteinSolver& solver, const IndexSet& A, std::size_t k_max) {
    SetFunctionV out;
    out.v.reserve(k_max + 1);
    out.g_minus_g0.reserve(k_max + 1);
    CompensatedSum g;
    for (std::size_t k = 0; k <= k_max; ++k) {
        out.g_minus_g0.push_back(g.value());
        out.v.push_back(solver.v_set(A, k));
        g.add(out.v.back() / solver.f(k));
    }
    return out;
}

double stein_residual(const SteinSolver& solver, const SetFunctionV& fv, const IndexSet& A, std::size_t k) {
    const double target = (A.contains(k) ? 1.0 : 0.0) - solver.measure(A);
    return fv.v.at(k) - fv.g_minus_g0.at(k) - target;
}

double stein_residual(const SteinSolver& solver, const IndexSet& A, std::size_t k) {
    return stein_residual(solver, set_function(solver, A, k), A, k);
}

double TripleSum::max_disagreement() const {
    return std::max({std::abs(lhs - rhs), std::abs(lhs - law_difference), std::abs(rhs - law_difference)});
}

TripleSum triple_sum_check(const SteinSolver& solver, const HTable& table, const ChainLaw& law_next,
                           const IndexSet& A) {
    if (law_next.start_value != 0) throw ParamOutOfRange("triple-sum identity needs the chain started at 0");
    const std::size_t n = law_next.n - 1;
    if (table.rows() < n)
        throw ParamOutOfRange(fmt::format("h-table has {} rows, triple sum needs {}", table.rows(), n));
    const auto fv = set_function(solver, A, n);

    TripleSum out;
    CompensatedSum lhs;
    for (std::size_t k = 0; k < law_next.pmf.size(); ++k) lhs.add(law_next.pmf[k] * (fv.v[k] - fv.g_minus_g0[k]));
    out.lhs = lhs.value();

    CompensatedSum rhs;
    for (std::size_t l = 1; l <= n; ++l)
        for (std::size_t k = 0; k < l; ++k) rhs.add((fv.v[k + 1] - fv.v[k]) * table(k, l));
    rhs.add(fv.v[0]);
    out.rhs = rhs.value() / static_cast<double>(n + 1);

    CompensatedSum in_listed;
    for (std::size_t j : A.members()) in_listed.add(law_next.prob(j));
    const double p_in = A.is_complement() ? 1.0 - in_listed.value() : in_listed.value();
    out.law_difference = p_in - solver.measure(A);
    return out;
}

TripleSum triple_sum_check(const AttachmentRule& rule, const IndexSet& A, std::size_t n) {
    std::size_t need = n + 2;
    for (std::size_t j : A.members()) need = std::max(need, j + 1);
    SteinSolver solver(rule, compute_mu(rule, kDefaultEpsilon, need));
    const HTable table = build(rule, n);
    const ChainLaw law = evolve(rule, n + 1, 0);
    return triple_sum_check(solver, table, law, A);
}

}  // namespace prefstein
