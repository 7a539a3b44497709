#pragma once

#include <cstddef>
#include <vector>

#include "prefstein/attachment.hpp"
#include "prefstein/chain.hpp"
#include "prefstein/htable.hpp"
#include "prefstein/limitlaw.hpp"

namespace prefstein {

// A subset of N0 given as a sorted finite member list, or as the complement
// of one.
class IndexSet {
public:
    static IndexSet empty() { return IndexSet({}, false); }
    static IndexSet all() { return IndexSet({}, true); }
    static IndexSet finite(std::vector<std::size_t> members) { return IndexSet(std::move(members), false); }
    static IndexSet complement_of(std::vector<std::size_t> members) { return IndexSet(std::move(members), true); }
    // {lo, ..., hi}
    static IndexSet interval(std::size_t lo, std::size_t hi);
    // {lo, lo+1, ...}
    static IndexSet at_least(std::size_t lo);

    bool contains(std::size_t k) const;
    bool is_complement() const noexcept { return complement_; }
    const std::vector<std::size_t>& members() const noexcept { return members_; }

private:
    IndexSet(std::vector<std::size_t> members, bool complement);

    std::vector<std::size_t> members_;
    bool complement_;
};

// Closed-form Stein solutions for the birth-with-reset generator
//   A g(k) = f(k)(g(k+1) - g(k)) + g(0) - g(k),
// whose stationary law is mu. All indices must lie within mu's truncation.
class SteinSolver {
public:
    SteinSolver(AttachmentRule rule, LimitLaw mu);

    const AttachmentRule& rule() const noexcept { return rule_; }
    const LimitLaw& mu() const noexcept { return mu_; }
    std::size_t max_index() const noexcept { return mu_.truncation_K; }
    double f(std::size_t k) const { return f_.at(k); }

    // Delta g_j(k) = g_j(k+1) - g_j(k) for the solution of A g = 1{j} - mu_j:
    //   -(mu_j/mu_k) / (f(k)(1+f(k)))  for j >= k+1,
    //   1/(1+f(k))                     for j == k,
    //   0                              for j <= k-1.
    double delta_g(std::size_t j, std::size_t k) const;

    // v_A(k) = f(k) Delta g_A(k) = -mu(A cap [k+1,inf)) / mu([k,inf)) + f(k)/(1+f(k)) 1{k in A}.
    // Throws TailUnderflow for k beyond the truncation.
    double v_set(const IndexSet& A, std::size_t k) const;

    // mu(A)
    double measure(const IndexSet& A) const;

private:
    double mass_ratio(std::size_t j, std::size_t k) const;  // mu_j / mu([k,inf))

    AttachmentRule rule_;
    LimitLaw mu_;
    std::vector<double> f_;
};

// v_A(0..k_max) and the solution increments sum_{i<k} Delta g_A(i) = g_A(k) - g_A(0).
struct SetFunctionV {
    std::vector<double> v;
    std::vector<double> g_minus_g0;
};

SetFunctionV set_function(const SteinSolver& solver, const IndexSet& A, std::size_t k_max);

// f(k) Delta g_A(k) + g_A(0) - g_A(k) - (1_A(k) - mu(A)); zero for the exact solution.
double stein_residual(const SteinSolver& solver, const IndexSet& A, std::size_t k);
double stein_residual(const SteinSolver& solver, const SetFunctionV& fv, const IndexSet& A, std::size_t k);

// Three evaluations of E[A g_A(X_{n+1})] for the start-0 chain.
struct TripleSum {
    double lhs = 0.0;           // sum_k P(X_{n+1}=k) A g_A(k)
    double rhs = 0.0;           // (1/(n+1)) (sum_{l<=n} sum_{k<l} Delta v_A(k) h(k,l) + v_A(0))
    double law_difference = 0.0;  // P(X_{n+1} in A) - mu(A)
    double max_disagreement() const;
};

// `law_next` is the chain law at time n+1 and `table` must cover rows 1..n.
TripleSum triple_sum_check(const SteinSolver& solver, const HTable& table, const ChainLaw& law_next,
                           const IndexSet& A);
TripleSum triple_sum_check(const AttachmentRule& rule, const IndexSet& A, std::size_t n);

}  // namespace prefstein
