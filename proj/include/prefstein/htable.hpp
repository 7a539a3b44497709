#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prefstein/attachment.hpp"

namespace prefstein {

// h(k,l) = f(k) P(X_l = k) - P(X_l >= k+1) for the start-0 chain, built by
//   h(k,l+1) = ((l - f(k))/(l+1)) h(k,l) + (f(k)/(l+1)) h(k-1,l),   h(-1,l) = 0,
// from h(0,1) = f(0). Row l holds k = 0..l-1; h vanishes for k >= l.
class HTable {
public:
    HTable() = default;

    std::size_t rows() const noexcept { return L_; }
    // h(k,l) for l in 1..L, any k >= 0 (zero for k >= l).
    double operator()(std::size_t k, std::size_t l) const;
    // Row l as a span of length l.
    std::span<const double> row(std::size_t l) const;
    // h(k+1,l) - h(k,l)
    double increment(std::size_t k, std::size_t l) const { return (*this)(k + 1, l) - (*this)(k, l); }
    double f(std::size_t k) const { return f_.at(k); }

private:
    friend HTable build(const AttachmentRule& rule, std::size_t L);
    static std::size_t offset(std::size_t l) { return (l - 1) * l / 2; }

    std::size_t L_ = 0;
    std::vector<double> data_;
    std::vector<double> f_;
};

// O(L^2). Requires 0 < f(k) <= k+1 on [0, L]; throws ViolationAt otherwise.
HTable build(const AttachmentRule& rule, std::size_t L);

inline constexpr double kHTableTolerance = 1e-12;

struct PropertyCheck {
    bool applicable = false;
    bool passed = true;
    std::size_t k = 0;  // first violation (row-major), if !passed
    std::size_t l = 0;
    std::string detail;
};

struct PropertyReport {
    PropertyCheck nonnegative;      // (i)
    PropertyCheck nondecreasing;    // (ii) rows l <= K+1
    PropertyCheck unimodal;         // (iii)
    PropertyCheck inverse_l_bound;  // (iv) h <= C/l
    PropertyCheck gamma_bound;      // (v)
    std::size_t monotone_K = 0;     // largest K with k <= f(k) <= k+1 on [0,K] (capped at L-1)
    bool monotone_K_exists = false;
    double C_explicit = 0.0;        // (iv)'s constant, when k_star exists
    double empirical_C = 0.0;       // max over the table of l * h(k,l)
    std::optional<double> gamma;    // (v)'s gamma, when applicable
    std::vector<std::size_t> turning_points;  // I(l) for l = 1..L, filled under (iii)

    bool all_passed() const;
};

PropertyReport verify_properties(const HTable& table, const RuleClassification& classification,
                                 double tol = kHTableTolerance);

// Throws PropertyViolation for the first failed applicable check.
void require_properties(const PropertyReport& report);

// I(l) for l = 1..L: the first k with h(k+1,l) - h(k,l) < -tol. Throws
// NotUnimodal when an increment above tol follows it.
std::vector<std::size_t> turning_points(const HTable& table, double tol = kHTableTolerance);

// max |h_table(k,l) - (f(k) P(X_l=k) - P(X_l>=k+1))| over k < l <= L, the
// probabilities taken from the forward chain.
double definition_gap(const AttachmentRule& rule, const HTable& table);

// max over l < L, k <= l-1 of the residual in
//   D h(k,l+1) = ((l - f(k+1))/(l+1)) D h(k,l) + (f(k)/(l+1)) D h(k-1,l),   D h(-1,l) = h(0,l).
double increment_recursion_residual(const HTable& table);

// sum_{k<l} v[k+1] (h(k+1,l) - h(k,l)); v needs l+1 entries.
double signed_increment_sum(const HTable& table, std::size_t l, std::span<const double> v);

// Gamma(l+gamma) / (Gamma(gamma) Gamma(l+1)), via log-gamma.
double gamma_row_bound(std::size_t l, double gamma);

// Columns l, sup, I, l_times_sup, bound. `bound` is (v)'s when applicable,
// else C/l under (iv), else empty.
void write_htable_csv(std::ostream& os, const HTable& table, const PropertyReport& report);

}  // namespace prefstein
