#include "prefstein/attachment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "prefstein/error.hpp"

namespace prefstein {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

void check_affine(const AffineRule& a, const char* what) {
    if (!std::isfinite(a.gamma) || a.gamma < 0.0)
        throw ParamOutOfRange(fmt::format("{}: gamma must be finite and >= 0 (got {})", what, a.gamma));
    if (!positive_finite(a.beta))
        throw ParamOutOfRange(fmt::format("{}: beta must be > 0 so that f(0) > 0 (got {})", what, a.beta));
}

void check_kind(const RuleKind& kind) {
    std::visit(Overloaded{
                   [](const AffineRule& a) { check_affine(a, "affine"); },
                   [](const ConstantRule& c) {
                       if (!positive_finite(c.c))
                           throw ParamOutOfRange(fmt::format("constant: c must be > 0 (got {})", c.c));
                   },
                   [](const PowerRule& p) {
                       if (!positive_finite(p.gamma))
                           throw ParamOutOfRange(fmt::format("power: gamma must be > 0 (got {})", p.gamma));
                       if (!(p.alpha > 0.0 && p.alpha < 1.0))
                           throw ParamOutOfRange(fmt::format("power: alpha must lie in (0,1) (got {})", p.alpha));
                       if (!positive_finite(p.f0))
                           throw ParamOutOfRange(fmt::format("power: f0 must be > 0 (got {})", p.f0));
                   },
                   [](const TableRule& t) {
                       if (t.values.empty()) throw ParamOutOfRange("table: values must be non-empty");
                       for (std::size_t k = 0; k < t.values.size(); ++k)
                           if (!positive_finite(t.values[k]))
                               throw ParamOutOfRange(fmt::format("table: values[{}] must be > 0", k));
                       if (const auto* a = std::get_if<AffineRule>(&t.tail)) {
                           if (!std::isfinite(a->gamma) || a->gamma < 0.0)
                               throw ParamOutOfRange("table: affine tail gamma must be >= 0");
                           const double first = a->gamma * static_cast<double>(t.values.size()) + a->beta;
                           if (!positive_finite(first))
                               throw ParamOutOfRange("table: affine tail must be positive beyond the table");
                       }
                   },
               },
               kind);
}

}  // namespace

AttachmentRule::AttachmentRule(RuleKind kind, int d0) : kind_(std::move(kind)), d0_(d0) {
    if (d0_ < 0) throw ParamOutOfRange(fmt::format("d0 must be >= 0 (got {})", d0_));
    check_kind(kind_);
}

AttachmentRule AttachmentRule::affine(double gamma, double beta, int d0) {
    return AttachmentRule(AffineRule{gamma, beta}, d0);
}

AttachmentRule AttachmentRule::constant(double c, int d0) { return AttachmentRule(ConstantRule{c}, d0); }

AttachmentRule AttachmentRule::power(double gamma, double alpha, double f0, int d0) {
    return AttachmentRule(PowerRule{gamma, alpha, f0}, d0);
}

AttachmentRule AttachmentRule::table(std::vector<double> values, std::variant<RepeatLast, AffineRule> tail,
                                     int d0) {
    return AttachmentRule(TableRule{std::move(values), tail}, d0);
}

AttachmentRule AttachmentRule::fixed_outdegree(double delta) {
    if (!(delta > -1.0) || !std::isfinite(delta))
        throw ParamOutOfRange(fmt::format("fixed outdegree: delta must exceed -1 (got {})", delta));
    return affine(1.0 / (2.0 + delta), (1.0 + delta) / (2.0 + delta), 1);
}

double AttachmentRule::operator()(std::size_t k) const {
    const double x = static_cast<double>(k);
    return std::visit(Overloaded{
                          [x](const AffineRule& a) { return a.gamma * x + a.beta; },
                          [](const ConstantRule& c) { return c.c; },
                          [k, x](const PowerRule& p) { return k == 0 ? p.f0 : p.gamma * std::pow(x, p.alpha); },
                          [k, x](const TableRule& t) {
                              if (k < t.values.size()) return t.values[k];
                              return std::visit(Overloaded{
                                                    [&t](const RepeatLast&) { return t.values.back(); },
                                                    [x](const AffineRule& a) { return a.gamma * x + a.beta; },
                                                },
                                                t.tail);
                          },
                      },
                      kind_);
}

std::vector<double> AttachmentRule::values(std::size_t count) const {
    std::vector<double> out(count);
    for (std::size_t k = 0; k < count; ++k) out[k] = (*this)(k);
    return out;
}

std::optional<LinearEnvelope> AttachmentRule::envelope_from(std::size_t from) const {
    return std::visit(
        Overloaded{
            [](const AffineRule& a) -> std::optional<LinearEnvelope> { return LinearEnvelope{a.gamma, a.beta}; },
            [](const ConstantRule& c) -> std::optional<LinearEnvelope> { return LinearEnvelope{0.0, c.c}; },
            [from](const PowerRule& p) -> std::optional<LinearEnvelope> {
                // Tangent line of the concave map k -> gamma k^alpha at m = max(from, 1).
                const double m = static_cast<double>(std::max<std::size_t>(from, 1));
                const double slope = p.gamma * p.alpha * std::pow(m, p.alpha - 1.0);
                double intercept = p.gamma * std::pow(m, p.alpha) - slope * m;
                if (from == 0) intercept = std::max(intercept, p.f0);
                return LinearEnvelope{slope, intercept};
            },
            [from](const TableRule& t) -> std::optional<LinearEnvelope> {
                LinearEnvelope env = std::visit(
                    Overloaded{
                        [&t](const RepeatLast&) { return LinearEnvelope{0.0, t.values.back()}; },
                        [](const AffineRule& a) { return LinearEnvelope{a.gamma, a.beta}; },
                    },
                    t.tail);
                for (std::size_t k = from; k < t.values.size(); ++k)
                    env.intercept = std::max(env.intercept, t.values[k] - env.slope * static_cast<double>(k));
                return env;
            },
        },
        kind_);
}

std::string AttachmentRule::describe() const {
    const std::string body = std::visit(
        Overloaded{
            [](const AffineRule& a) { return fmt::format("affine(gamma={}, beta={})", a.gamma, a.beta); },
            [](const ConstantRule& c) { return fmt::format("constant(c={})", c.c); },
            [](const PowerRule& p) {
                return fmt::format("power(gamma={}, alpha={}, f0={})", p.gamma, p.alpha, p.f0);
            },
            [](const TableRule& t) {
                const std::string tail = std::visit(
                    Overloaded{
                        [](const RepeatLast&) { return std::string("repeat-last"); },
                        [](const AffineRule& a) { return fmt::format("affine({}, {})", a.gamma, a.beta); },
                    },
                    t.tail);
                return fmt::format("table(size={}, tail={})", t.values.size(), tail);
            },
        },
        kind_);
    return d0_ == 0 ? body : fmt::format("{} d0={}", body, d0_);
}

nlohmann::json AttachmentRule::to_json() const {
    nlohmann::json j = std::visit(
        Overloaded{
            [](const AffineRule& a) {
                return nlohmann::json{{"kind", "affine"}, {"gamma", a.gamma}, {"beta", a.beta}};
            },
            [](const ConstantRule& c) { return nlohmann::json{{"kind", "constant"}, {"c", c.c}}; },
            [](const PowerRule& p) {
                return nlohmann::json{{"kind", "power"}, {"gamma", p.gamma}, {"alpha", p.alpha}, {"f0", p.f0}};
            },
            [](const TableRule& t) {
                nlohmann::json tail = std::visit(
                    Overloaded{
                        [](const RepeatLast&) { return nlohmann::json("repeat-last"); },
                        [](const AffineRule& a) {
                            return nlohmann::json{{"kind", "affine"}, {"gamma", a.gamma}, {"beta", a.beta}};
                        },
                    },
                    t.tail);
                return nlohmann::json{{"kind", "table"}, {"values", t.values}, {"tail", tail}};
            },
        },
        kind_);
    j["d0"] = d0_;
    return j;
}

namespace {

double number_field(const nlohmann::json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) throw ConfigError(path + key, fmt::format("missing field '{}{}'", path, key));
    const auto& v = j.at(key);
    if (!v.is_number()) throw ConfigError(path + key, fmt::format("field '{}{}' must be a number", path, key));
    return v.get<double>();
}

}  // namespace

AttachmentRule AttachmentRule::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("rule", "rule descriptor must be a JSON object");
    if (!j.contains("kind") || !j.at("kind").is_string())
        throw ConfigError("kind", "rule descriptor needs a string field 'kind'");
    int d0 = 0;
    if (j.contains("d0")) {
        const auto& v = j.at("d0");
        if (!v.is_number_integer() || v.get<long long>() < 0)
            throw ConfigError("d0", "field 'd0' must be a nonnegative integer");
        d0 = v.get<int>();
    }
    const auto kind = j.at("kind").get<std::string>();
    try {
        if (kind == "affine") return affine(number_field(j, "gamma", ""), number_field(j, "beta", ""), d0);
        if (kind == "constant") return constant(number_field(j, "c", ""), d0);
        if (kind == "power")
            return power(number_field(j, "gamma", ""), number_field(j, "alpha", ""), number_field(j, "f0", ""), d0);
        if (kind == "table") {
            if (!j.contains("values") || !j.at("values").is_array())
                throw ConfigError("values", "table rule needs an array field 'values'");
            std::vector<double> values;
            for (const auto& v : j.at("values")) {
                if (!v.is_number()) throw ConfigError("values", "table values must be numbers");
                values.push_back(v.get<double>());
            }
            std::variant<RepeatLast, AffineRule> tail = RepeatLast{};
            if (j.contains("tail")) {
                const auto& t = j.at("tail");
                if (t.is_string() && t.get<std::string>() == "repeat-last") {
                    tail = RepeatLast{};
                } else if (t.is_object() && t.value("kind", "") == "affine") {
                    tail = AffineRule{number_field(t, "gamma", "tail."), number_field(t, "beta", "tail.")};
                } else {
                    throw ConfigError("tail", "table tail must be \"repeat-last\" or {\"kind\":\"affine\",...}");
                }
            }
            return table(std::move(values), tail, d0);
        }
    } catch (const ParamOutOfRange& e) {
        throw ConfigError(kind, e.what());
    }
    throw ConfigError("kind", fmt::format("unknown rule kind '{}'", kind));
}

ValidationReport validate(const AttachmentRule& rule, std::size_t horizon) {
    ValidationReport report;
    report.horizon = horizon;
    const double d0 = rule.d0();
    for (std::size_t k = 0; k <= horizon; ++k) {
        const double f = rule(k);
        const double bound = std::max(static_cast<double>(k) + 1.0 - d0, 1.0);
        // Relative slack absorbs rounding in parametrisations such as (k+1+delta)/(2+delta).
        if (!positive_finite(f) || f > bound * (1.0 + 1e-12)) {
            report.valid = false;
            report.violation = k;
            report.value = f;
            report.bound = bound;
            break;
        }
    }
    return report;
}

void require_valid(const AttachmentRule& rule, std::size_t horizon) {
    const auto report = validate(rule, horizon);
    if (!report.valid)
        throw ViolationAt(*report.violation,
                          fmt::format("{}: f({}) = {} violates 0 < f(k) <= max{{k+1-d0,1}} = {}", rule.describe(),
                                      *report.violation, report.value, report.bound));
}

namespace {

std::optional<std::size_t> scan_k_star(const AttachmentRule& rule, std::size_t horizon) {
    std::optional<std::size_t> first;
    for (std::size_t k = 0; k <= horizon; ++k) {
        const bool at_most_k = rule(k) <= static_cast<double>(k);
        if (!first) {
            if (at_most_k) first = k;
        } else if (!at_most_k) {
            return std::nullopt;
        }
    }
    return first;
}

double scan_gamma3(const AttachmentRule& rule, std::size_t from, std::size_t to) {
    double sup = 0.0;
    for (std::size_t k = std::max<std::size_t>(from, 1); k <= to; ++k)
        sup = std::max(sup, (rule(k) - 1.0) / static_cast<double>(k));
    return sup;
}

}  // namespace

RuleClassification classify(const AttachmentRule& rule, std::size_t horizon) {
    RuleClassification c;
    c.horizon = horizon;
    c.k_star = scan_k_star(rule, horizon);
    c.theorem1_applicable = c.k_star.has_value();

    double min_diff = std::numeric_limits<double>::infinity();
    double max_diff = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k <= horizon; ++k) {
        const double d = rule(k) - static_cast<double>(k);
        min_diff = std::min(min_diff, d);
        max_diff = std::max(max_diff, d);
    }
    if (min_diff >= 0.0 && max_diff > 0.0 && max_diff < 1.0) c.theorem2_gamma = max_diff;

    const std::size_t h = horizon;
    std::optional<double> gamma3;
    if (rule(0) <= 1.0) {
        gamma3 = std::visit(
            Overloaded{
                [](const AffineRule& a) { return a.gamma; },
                [](const ConstantRule&) { return 0.0; },
                [&](const PowerRule& p) {
                    // (gamma k^alpha - 1)/k peaks at k = (1/(gamma(1-alpha)))^(1/alpha).
                    const double peak = std::pow(1.0 / (p.gamma * (1.0 - p.alpha)), 1.0 / p.alpha);
                    const auto reach = static_cast<std::size_t>(std::min(peak, 1e7)) + 2;
                    return scan_gamma3(rule, 1, std::max(h, reach));
                },
                [&](const TableRule& t) {
                    const double scanned = scan_gamma3(rule, 1, std::max(h, t.values.size()));
                    if (const auto* a = std::get_if<AffineRule>(&t.tail)) return std::max(scanned, a->gamma);
                    return scanned;
                },
            },
            rule.kind());
        if (*gamma3 >= 1.0) gamma3.reset();
    }
    c.theorem3_gamma = gamma3;

    c.whole_domain = std::visit(
        Overloaded{
            [&](const AffineRule& a) { return a.gamma <= 1.0 && (c.k_star.has_value() || a.gamma == 1.0); },
            [&](const ConstantRule&) { return c.k_star.has_value(); },
            [&](const PowerRule&) {
                // gamma k^alpha - k is concave on k >= 1: decreasing at the horizon means decreasing beyond.
                return c.k_star.has_value() && rule(h + 1) - 1.0 <= rule(h);
            },
            [&](const TableRule& t) {
                if (!c.k_star || h < t.values.size()) return false;
                if (const auto* a = std::get_if<AffineRule>(&t.tail)) return a->gamma <= 1.0;
                return true;
            },
        },
        rule.kind());
    return c;
}

}  // namespace prefstein
