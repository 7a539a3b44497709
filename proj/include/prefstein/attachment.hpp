#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace prefstein {

// f(k) = gamma * k + beta
struct AffineRule {
    double gamma;
    double beta;
};

// f(k) = c
struct ConstantRule {
    double c;
};

// f(0) = f0, f(k) = gamma * k^alpha for k >= 1
struct PowerRule {
    double gamma;
    double alpha;
    double f0;
};

struct RepeatLast {};

// Explicit values f(0..size-1); beyond the table either the last value is
// repeated or the affine extension gamma*k + beta is used.
struct TableRule {
    std::vector<double> values;
    std::variant<RepeatLast, AffineRule> tail;
};

using RuleKind = std::variant<AffineRule, ConstantRule, PowerRule, TableRule>;

// Upper bound f(k) <= slope * k + intercept valid for all k at or beyond some index.
struct LinearEnvelope {
    double slope;
    double intercept;
};

// An attachment rule f : N0 -> (0, inf) together with the number d0 of
// initial self-edges of vertex 1. Parameters are checked on construction so
// that f is positive everywhere; the upper bound f(k) <= max{k+1-d0, 1} is a
// horizon-dependent property checked by `validate`.
class AttachmentRule {
public:
    explicit AttachmentRule(RuleKind kind, int d0 = 0);

    static AttachmentRule affine(double gamma, double beta, int d0 = 0);
    static AttachmentRule constant(double c, int d0 = 0);
    static AttachmentRule power(double gamma, double alpha, double f0, int d0 = 0);
    static AttachmentRule table(std::vector<double> values, std::variant<RepeatLast, AffineRule> tail,
                                int d0 = 0);
    // Fixed-outdegree model: f(k) = (k + 1 + delta) / (2 + delta), d0 = 1.
    static AttachmentRule fixed_outdegree(double delta);

    double operator()(std::size_t k) const;

    const RuleKind& kind() const noexcept { return kind_; }
    int d0() const noexcept { return d0_; }
    AttachmentRule with_d0(int d0) const { return AttachmentRule(kind_, d0); }

    // f(0), ..., f(count-1)
    std::vector<double> values(std::size_t count) const;

    // A linear bound on f valid for every k >= from, if the rule's closed form provides one.
    std::optional<LinearEnvelope> envelope_from(std::size_t from) const;

    std::string describe() const;

    nlohmann::json to_json() const;
    // Throws ConfigError naming the offending field.
    static AttachmentRule from_json(const nlohmann::json& j);

private:
    RuleKind kind_;
    int d0_;
};

inline double eval(const AttachmentRule& rule, std::size_t k) { return rule(k); }

struct ValidationReport {
    bool valid = true;
    std::size_t horizon = 0;
    std::optional<std::size_t> violation;  // first k with f(k) <= 0 or f(k) > max{k+1-d0, 1}
    double value = 0.0;                    // f at the violation
    double bound = 0.0;                    // max{k+1-d0, 1} at the violation
};

ValidationReport validate(const AttachmentRule& rule, std::size_t horizon);

// Throws ViolationAt when `validate` reports a violation.
void require_valid(const AttachmentRule& rule, std::size_t horizon);

struct RuleClassification {
    std::size_t horizon = 0;
    // f(k) > k for k < k_star and f(k) <= k for k_star <= k <= horizon.
    std::optional<std::size_t> k_star;
    bool theorem1_applicable = false;
    // sup_k (f(k) - k) when 0 <= f(k) - k for every checked k and the sup lies in (0, 1).
    std::optional<double> theorem2_gamma;
    // least gamma with f(k) <= gamma*k + 1; 0 means every gamma > 0 works.
    std::optional<double> theorem3_gamma;
    // The k_star verdict provably extends past the horizon.
    bool whole_domain = false;
};

RuleClassification classify(const AttachmentRule& rule, std::size_t horizon);

}  // namespace prefstein
