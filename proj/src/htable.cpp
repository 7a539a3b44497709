#include "prefstein/htable.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "prefstein/chain.hpp"
#include "prefstein/csv.hpp"
#include "prefstein/error.hpp"
#include "prefstein/numeric.hpp"

namespace prefstein {

double HTable::operator()(std::size_t k, std::size_t l) const {
    if (l == 0 || l > L_) throw ParamOutOfRange(fmt::format("h-table row {} outside 1..{}", l, L_));
    return k < l ? data_[offset(l) + k] : 0.0;
}

std::span<const double> HTable::row(std::size_t l) const {
    if (l == 0 || l > L_) throw ParamOutOfRange(fmt::format("h-table row {} outside 1..{}", l, L_));
    return {data_.data() + offset(l), l};
}

HTable build(const AttachmentRule& rule, std::size_t L) {
    if (L == 0) throw ParamOutOfRange("h-table needs L >= 1");
    HTable t;
    t.L_ = L;
    t.f_ = rule.values(L + 1);
    for (std::size_t k = 0; k <= L; ++k) {
        const double fk = t.f_[k];
        if (!(fk > 0.0) || fk > static_cast<double>(k + 1))
            throw ViolationAt(k, fmt::format("h-table needs 0 < f(k) <= k+1; f({}) = {}", k, fk));
    }
    t.data_.assign(HTable::offset(L + 1), 0.0);
    t.data_[0] = t.f_[0];
    for (std::size_t l = 1; l < L; ++l) {
        const double* cur = t.data_.data() + HTable::offset(l);
        double* next = t.data_.data() + HTable::offset(l + 1);
        const double inv = 1.0 / static_cast<double>(l + 1);
        const double dl = static_cast<double>(l);
        for (std::size_t k = 0; k <= l; ++k) {
            const double fk = t.f_[k];
            const double here = k < l ? cur[k] : 0.0;
            const double below = k > 0 ? cur[k - 1] : 0.0;
            next[k] = (dl - fk) * inv * here + fk * inv * below;
        }
    }
    return t;
}

bool PropertyReport::all_passed() const {
    for (const auto* c : {&nonnegative, &nondecreasing, &unimodal, &inverse_l_bound, &gamma_bound})
        if (c->applicable && !c->passed) return false;
    return true;
}

namespace {

void fail(PropertyCheck& c, std::size_t k, std::size_t l, std::string detail) {
    if (!c.passed) return;
    c.passed = false;
    c.k = k;
    c.l = l;
    c.detail = std::move(detail);
}

}  // namespace

std::vector<std::size_t> turning_points(const HTable& table, double tol) {
    std::vector<std::size_t> out;
    out.reserve(table.rows());
    for (std::size_t l = 1; l <= table.rows(); ++l) {
        const auto r = table.row(l);
        auto inc = [&](std::size_t k) { return (k + 1 < l ? r[k + 1] : 0.0) - r[k]; };
        std::size_t I = 0;
        while (I < l && inc(I) >= -tol) ++I;
        // h(l,l) = 0 < h(l-1,l), so a strict descent always exists unless h(l-1,l) <= tol
        if (I == l) I = l - 1;
        for (std::size_t k = I + 1; k < l; ++k)
            if (inc(k) > tol)
                throw NotUnimodal(l, fmt::format("row {} rises again at k = {} after turning at {} (increment {})",
                                                 l, k, I, inc(k)));
        out.push_back(I);
    }
    return out;
}

PropertyReport verify_properties(const HTable& table, const RuleClassification& cls, double tol) {
    PropertyReport rep;
    const std::size_t L = table.rows();

    // (i)
    rep.nonnegative.applicable = true;
    for (std::size_t l = 1; l <= L && rep.nonnegative.passed; ++l) {
        const auto r = table.row(l);
        for (std::size_t k = 0; k < l; ++k) {
            if (r[k] < -tol) {
                fail(rep.nonnegative, k, l, fmt::format("h({},{}) = {}", k, l, r[k]));
                break;
            }
            rep.empirical_C = std::max(rep.empirical_C, static_cast<double>(l) * r[k]);
        }
    }

    // (ii) on rows l <= K+1, K the largest with k <= f(k) <= k+1 on [0,K]
    {
        std::size_t K = 0;
        bool any = false;
        for (std::size_t k = 0; k < L; ++k) {
            const double fk = table.f(k);
            if (fk < static_cast<double>(k) || fk > static_cast<double>(k + 1)) break;
            K = k;
            any = true;
        }
        rep.monotone_K = K;
        rep.monotone_K_exists = any;
        rep.nondecreasing.applicable = any;
        if (any) {
            for (std::size_t l = 2; l <= std::min(K + 1, L) && rep.nondecreasing.passed; ++l)
                for (std::size_t k = 0; k + 2 <= l; ++k) {
                    const double d = table.increment(k, l);
                    if (d < -tol) {
                        fail(rep.nondecreasing, k, l, fmt::format("h({},{}) - h({},{}) = {}", k + 1, l, k, l, d));
                        break;
                    }
                }
        }
    }

    // (iii) and (iv)
    if (cls.k_star) {
        const std::size_t ks = *cls.k_star;
        rep.unimodal.applicable = true;
        try {
            rep.turning_points = turning_points(table, tol);
            for (std::size_t l = 1; l < rep.turning_points.size(); ++l) {
                const std::size_t a = rep.turning_points[l - 1], b = rep.turning_points[l];
                if (b != a && b != a + 1) {
                    fail(rep.unimodal, b, l + 1, fmt::format("I({}) = {} but I({}) = {}", l, a, l + 1, b));
                    break;
                }
            }
        } catch (const NotUnimodal& e) {
            fail(rep.unimodal, 0, e.row(), e.what());
        }

        double best = 1.0, prod = 1.0;
        for (std::size_t k = 1; k <= ks; ++k) {
            prod *= table.f(k) / static_cast<double>(k);
            best = std::max(best, prod);
        }
        rep.C_explicit = table.f(0) * best;
        rep.inverse_l_bound.applicable = true;
        for (std::size_t l = 1; l <= L && rep.inverse_l_bound.passed; ++l) {
            const auto r = table.row(l);
            const double bound = rep.C_explicit / static_cast<double>(l);
            for (std::size_t k = 0; k < l; ++k)
                if (r[k] > bound * (1.0 + tol) + tol) {
                    fail(rep.inverse_l_bound, k, l, fmt::format("h({},{}) = {} > C/l = {}", k, l, r[k], bound));
                    break;
                }
        }
    }

    // (v)
    if (cls.theorem2_gamma) {
        const double g = *cls.theorem2_gamma;
        rep.gamma = g;
        rep.gamma_bound.applicable = true;
        for (std::size_t l = 1; l <= L && rep.gamma_bound.passed; ++l) {
            const auto r = table.row(l);
            const double top = *std::max_element(r.begin(), r.end());
            const double last = r[l - 1];
            const double bound = gamma_row_bound(l, g);
            if (top - last > tol)
                fail(rep.gamma_bound, l - 1, l, fmt::format("row {} peaks above h(l-1,l) by {}", l, top - last));
            else if (last > bound * (1.0 + tol) + tol)
                fail(rep.gamma_bound, l - 1, l, fmt::format("h({},{}) = {} > {}", l - 1, l, last, bound));
        }
    }
    return rep;
}

void require_properties(const PropertyReport& report) {
    const std::pair<const PropertyCheck*, const char*> checks[] = {
        {&report.nonnegative, "i"},     {&report.nondecreasing, "ii"}, {&report.unimodal, "iii"},
        {&report.inverse_l_bound, "iv"}, {&report.gamma_bound, "v"}};
    for (const auto& [c, name] : checks)
        if (c->applicable && !c->passed)
            throw PropertyViolation(name, c->k, c->l, fmt::format("property ({}) fails: {}", name, c->detail));
}

double definition_gap(const AttachmentRule& rule, const HTable& table) {
    std::vector<std::size_t> times(table.rows());
    std::iota(times.begin(), times.end(), std::size_t{1});
    double gap = 0.0;
    evolve(rule, times, 0, [&](const ChainLaw& law) {
        const std::size_t l = law.n;
        const auto r = table.row(l);
        // P(X_l >= k+1) accumulated from the top
        double above = 0.0;
        for (std::size_t k = l; k-- > 0;) {
            const double h = table.f(k) * law.prob(k) - above;
            gap = std::max(gap, std::abs(h - r[k]));
            above += law.prob(k);
        }
    });
    return gap;
}

double increment_recursion_residual(const HTable& table) {
    double worst = 0.0;
    for (std::size_t l = 1; l < table.rows(); ++l) {
        const double dl = static_cast<double>(l);
        for (std::size_t k = 0; k < l; ++k) {
            const double lower = k == 0 ? table(0, l) : table.increment(k - 1, l);
            const double rhs = (dl - table.f(k + 1)) / (dl + 1.0) * table.increment(k, l) +
                               table.f(k) / (dl + 1.0) * lower;
            worst = std::max(worst, std::abs(table.increment(k, l + 1) - rhs));
        }
    }
    return worst;
}

double signed_increment_sum(const HTable& table, std::size_t l, std::span<const double> v) {
    if (v.size() < l + 1) throw ParamOutOfRange(fmt::format("need {} weights, got {}", l + 1, v.size()));
    CompensatedSum s;
    for (std::size_t k = 0; k < l; ++k) s.add(v[k + 1] * table.increment(k, l));
    return s.value();
}

double gamma_row_bound(std::size_t l, double gamma) {
    const double dl = static_cast<double>(l);
    return std::exp(std::lgamma(dl + gamma) - std::lgamma(gamma) - std::lgamma(dl + 1.0));
}

void write_htable_csv(std::ostream& os, const HTable& table, const PropertyReport& report) {
    CsvWriter csv(os, {"l", "sup", "I", "l_times_sup", "bound"});
    for (std::size_t l = 1; l <= table.rows(); ++l) {
        const auto r = table.row(l);
        const double sup = *std::max_element(r.begin(), r.end());
        const std::string I =
            l <= report.turning_points.size() ? std::to_string(report.turning_points[l - 1]) : std::string();
        std::string bound;
        if (report.gamma_bound.applicable)
            bound = CsvWriter::format(gamma_row_bound(l, *report.gamma));
        else if (report.inverse_l_bound.applicable)
            bound = CsvWriter::format(report.C_explicit / static_cast<double>(l));
        csv.row(l, sup, I, static_cast<double>(l) * sup, bound);
    }
}

}  // namespace prefstein
