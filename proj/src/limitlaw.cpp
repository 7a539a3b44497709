#include "prefstein/limitlaw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "prefstein/csv.hpp"
#include "prefstein/error.hpp"
#include "prefstein/numeric.hpp"

namespace prefstein {

namespace {

bool has_harmonic_tail(const AttachmentRule& rule) {
    for (std::size_t k = 0; k <= 1000; ++k)
        if (rule(k) < static_cast<double>(k)) return false;
    return true;
}

}  // namespace

LimitLaw compute_mu(const AttachmentRule& rule, double epsilon, std::size_t min_K, std::size_t hard_cap) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw ParamOutOfRange(fmt::format("epsilon must lie in (0,1) (got {})", epsilon));

    LimitLaw law;
    law.epsilon_used = epsilon;
    if (epsilon < kHeavyTailEpsilon && has_harmonic_tail(rule)) {
        law.epsilon_used = kHeavyTailEpsilon;
        law.epsilon_capped = true;
    }

    law.tail_at.push_back(1.0);
    law.log_tail.push_back(0.0);
    CompensatedSum log_acc;
    for (std::size_t k = 0;; ++k) {
        if (k > hard_cap)
            throw TruncationFailure(fmt::format("{}: tail mass still {} at K = {} (epsilon {})", rule.describe(),
                                                law.tail_at.back(), hard_cap, law.epsilon_used));
        const double f = rule(k);
        const double tail = law.tail_at[k];
        law.masses.push_back(tail / (1.0 + f));
        law.log_masses.push_back(law.log_tail[k] - std::log1p(f));
        law.tail_at.push_back(tail * (f / (1.0 + f)));
        log_acc.add(-std::log1p(1.0 / f));
        law.log_tail.push_back(log_acc.value());
        if (law.tail_at.back() < law.epsilon_used && k >= min_K) break;
    }
    law.truncation_K = law.masses.size() - 1;
    law.truncation_mass = law.tail_at.back();
    return law;
}

CertifiedValue mean_f_of_W(const LimitLaw& law, const AttachmentRule& rule, double tolerance) {
    CompensatedSum acc;
    for (std::size_t k = 0; k < law.masses.size(); ++k) acc.add(rule(k) * law.masses[k]);

    const std::size_t first_out = law.truncation_K + 1;
    double bound = std::numeric_limits<double>::infinity();
    if (law.truncation_mass == 0.0) {
        bound = 0.0;
    } else if (const auto env = rule.envelope_from(first_out); env && env->slope < 1.0) {
        bound = (env->slope * static_cast<double>(first_out) + env->intercept) / (1.0 - env->slope) *
                law.truncation_mass;
    }
    if (!(bound <= tolerance))
        throw ToleranceNotMet(fmt::format("{}: E[f(W)] tail bound {} exceeds tolerance {} at K = {}",
                                          rule.describe(), bound, tolerance, law.truncation_K));
    return {acc.value(), bound};
}

HittingTimes hitting_times(const AttachmentRule& rule, std::size_t K) {
    HittingTimes t;
    t.up_steps.reserve(K + 1);
    t.return_times.reserve(K + 1);
    // E[tau_{j,j}] = 1 + E[tau_{0,j}] and E[tau_{0,j}] = sum_{i<j} E[tau_{i,i+1}].
    CompensatedSum from_zero;
    for (std::size_t k = 0; k <= K; ++k) {
        const double ret = 1.0 + from_zero.value();
        t.return_times.push_back(ret);
        t.up_steps.push_back(ret / rule(k));
        from_zero.add(t.up_steps.back());
    }
    return t;
}

std::vector<TailRow> tail_asymptote_report(const AttachmentRule& rule, const LimitLaw& law, std::size_t points) {
    const auto* affine = std::get_if<AffineRule>(&rule.kind());
    const auto* power = std::get_if<PowerRule>(&rule.kind());
    if (!(affine && affine->gamma > 0.0 && affine->gamma <= 1.0) && !power)
        throw NotApplicable(fmt::format("{}: tail asymptotics are defined for affine and power rules only",
                                        rule.describe()));
    const std::size_t K = law.truncation_K;
    if (K < 1) throw NotApplicable("limit law truncated at K = 0");

    std::vector<std::size_t> grid;
    const double ratio = points > 1 ? std::pow(static_cast<double>(K), 1.0 / static_cast<double>(points - 1)) : 1.0;
    double x = 1.0;
    for (std::size_t i = 0; i < points; ++i, x *= ratio) {
        const auto k = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(x)), 1, K);
        if (grid.empty() || grid.back() != k) grid.push_back(k);
    }

    std::vector<TailRow> rows;
    for (std::size_t k : grid) {
        TailRow row;
        row.k = k;
        row.mu_k = law.mass(k);
        row.log_mu_k = law.log_mass(k);
        const double kd = static_cast<double>(k);
        if (affine) {
            const double g = affine->gamma;
            const double b = affine->beta;
            const double log_c = std::lgamma((b + 1.0) / g) - std::log(g) - std::lgamma(b / g);
            const double log_pred = log_c - (1.0 + 1.0 / g) * std::log(kd);
            row.predicted = std::exp(log_pred);
            row.ratio = std::exp(row.log_mu_k - log_pred);
        } else {
            row.predicted = 1.0 / (power->gamma * (1.0 - power->alpha));
            row.ratio = (-row.log_mu_k / std::pow(kd, 1.0 - power->alpha)) / row.predicted;
        }
        rows.push_back(row);
    }
    return rows;
}

void write_limit_csv(std::ostream& os, const LimitLaw& law, const HittingTimes& times) {
    CsvWriter csv(os, {"k", "mu_k", "tail_k", "E_tau_up_k"});
    for (std::size_t k = 0; k < law.masses.size(); ++k)
        csv.row(k, law.masses[k], law.tail_at[k], k < times.up_steps.size() ? times.up_steps[k] : NAN);
}

}  // namespace prefstein
