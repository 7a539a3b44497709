#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "prefstein/attachment.hpp"

namespace prefstein {

// Truncated exact representation of the limiting indegree law
//   mu_k = 1/(1+f(k)) * prod_{i<k} f(i)/(1+f(i)).
//
// Masses are stored for k = 0..K and tails mu([k,inf)) for k = 0..K+1. The
// tails are built multiplicatively, so tail_at[k+1] = f(k) * masses[k] holds
// to rounding. log_tail mirrors tail_at in log space and stays finite where
// tail_at underflows (stretched-exponential laws at large k).
struct LimitLaw {
    std::vector<double> masses;
    std::vector<double> tail_at;
    std::vector<double> log_tail;
    std::vector<double> log_masses;
    std::size_t truncation_K = 0;
    double truncation_mass = 0.0;  // mu([K+1, inf))
    double epsilon_used = 0.0;
    bool epsilon_capped = false;  // requested epsilon was raised for a 1/k-type tail

    double mass(std::size_t k) const { return k < masses.size() ? masses[k] : 0.0; }
    double tail(std::size_t k) const { return tail_at.at(k); }
    double log_mass(std::size_t k) const { return log_masses.at(k); }
};

inline constexpr double kDefaultEpsilon = 1e-12;
inline constexpr std::size_t kDefaultHardCap = 10'000'000;
// Epsilon floor for rules whose tail decays like 1/k (f(k) >= k throughout).
inline constexpr double kHeavyTailEpsilon = 1e-6;

// K is the least index with mu([K+1,inf)) < epsilon, raised to at least min_K.
// Throws TruncationFailure if K would exceed hard_cap.
LimitLaw compute_mu(const AttachmentRule& rule, double epsilon = kDefaultEpsilon, std::size_t min_K = 0,
                    std::size_t hard_cap = kDefaultHardCap);

struct CertifiedValue {
    double value = 0.0;
    double error_bound = 0.0;
};

// E[f(W)] for W ~ mu. The tail beyond K is bounded through a linear envelope
// f(k) <= a k + b (a < 1) on k > K:  sum_{k>K} f(k) mu_k <= (a(K+1)+b)/(1-a) * mu([K+1,inf)).
// Throws ToleranceNotMet when that bound exceeds `tolerance` or no envelope exists.
CertifiedValue mean_f_of_W(const LimitLaw& law, const AttachmentRule& rule, double tolerance = 1e-9);

// Expected hitting times of the birth-with-reset jump process with generator
// A g(k) = f(k)(g(k+1)-g(k)) + g(0) - g(k).
struct HittingTimes {
    std::vector<double> up_steps;      // E[tau_{k,k+1}], k = 0..K
    std::vector<double> return_times;  // E[tau_{j,j}],   j = 0..K
};

HittingTimes hitting_times(const AttachmentRule& rule, std::size_t K);

struct TailRow {
    std::size_t k = 0;
    double mu_k = 0.0;
    double log_mu_k = 0.0;
    // Affine: C k^{-(1+1/gamma)}. Power: the limit constant 1/(gamma(1-alpha)).
    double predicted = 0.0;
    // Affine: mu_k / predicted. Power: (-log mu_k / k^{1-alpha}) / predicted. Both tend to 1.
    double ratio = 0.0;
};

// Log-spaced comparison of mu_k with its tail asymptote, k in [1, K].
// Throws NotApplicable for rules other than affine (gamma in (0,1]) and power.
std::vector<TailRow> tail_asymptote_report(const AttachmentRule& rule, const LimitLaw& law,
                                           std::size_t points = 32);

// Columns k, mu_k, tail_k, E_tau_up_k for k = 0..K.
void write_limit_csv(std::ostream& os, const LimitLaw& law, const HittingTimes& times);

}  // namespace prefstein
