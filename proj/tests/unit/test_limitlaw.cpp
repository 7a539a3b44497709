#include <doctest.h>

#include <cmath>
#include <sstream>

#include "prefstein/error.hpp"
#include "prefstein/limitlaw.hpp"

using namespace prefstein;

TEST_CASE("closed-form limit laws") {
    const auto geo = compute_mu(AttachmentRule::constant(1.0));
    CHECK(geo.mass(0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(geo.mass(3) == doctest::Approx(0.0625).epsilon(1e-15));
    CHECK(geo.tail(0) == 1.0);
    CHECK(geo.truncation_mass < kDefaultEpsilon);

    // f(k) = k+1: mu_k = 1/((k+1)(k+2)), a 1/k tail.
    const auto heavy = compute_mu(AttachmentRule::affine(1.0, 1.0));
    CHECK(heavy.epsilon_capped);
    for (std::size_t k = 0; k < 50; ++k)
        CHECK(heavy.mass(k) == doctest::Approx(1.0 / ((k + 1.0) * (k + 2.0))).epsilon(1e-13));
}

TEST_CASE("tail identity and normalization") {
    for (const auto& rule : {AttachmentRule::constant(0.9), AttachmentRule::affine(0.5, 0.5),
                             AttachmentRule::power(0.8, 0.5, 0.8), AttachmentRule::affine(0.3, 0.7)}) {
        const auto law = compute_mu(rule);
        CHECK(law.tail(0) == 1.0);
        double max_gap = 0.0, total = 0.0;
        for (std::size_t k = 0; k <= law.truncation_K; ++k) {
            max_gap = std::max(max_gap, std::abs(law.tail(k + 1) - rule(k) * law.mass(k)));
            total += law.mass(k);
        }
        CHECK(max_gap <= 1e-14);
        CHECK(std::abs(total + law.truncation_mass - 1.0) <= 1e-10);
        CHECK(law.truncation_mass < kDefaultEpsilon);
    }
}

TEST_CASE("min_K and the hard cap") {
    const auto law = compute_mu(AttachmentRule::constant(0.5), 1e-12, 400);
    CHECK(law.truncation_K >= 400);
    CHECK_THROWS_AS(compute_mu(AttachmentRule::affine(1.0, 1.0), 1e-12, 0, 1000), TruncationFailure);
}

TEST_CASE("mean of f under mu") {
    // lambda = beta/(1-gamma); the certified error bar must cover the gap.
    for (const auto& rule : {AttachmentRule::affine(0.5, 0.5), AttachmentRule::affine(0.2, 0.8)}) {
        const auto m = mean_f_of_W(compute_mu(rule), rule, 1e-5);
        CHECK(std::abs(m.value - 1.0) <= m.error_bound + 1e-12);
    }
    CHECK_THROWS_AS(mean_f_of_W(compute_mu(AttachmentRule::affine(0.5, 0.5)), AttachmentRule::affine(0.5, 0.5)),
                    ToleranceNotMet);
    const auto c = AttachmentRule::constant(0.7);
    CHECK(mean_f_of_W(compute_mu(c), c).value == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("Stein characterization at stationarity") {
    // E[A g(W)] = 0 for finitely supported g.
    const auto rule = AttachmentRule::affine(0.5, 0.5);
    const auto law = compute_mu(rule);
    const std::vector<double> g{0.3, -1.0, 2.0, 0.5, 0.0, 1.5, -0.7};
    auto gv = [&](std::size_t k) { return k < g.size() ? g[k] : 0.0; };
    double s = 0.0;
    for (std::size_t k = 0; k <= law.truncation_K; ++k)
        s += law.mass(k) * (rule(k) * (gv(k + 1) - gv(k)) + gv(0) - gv(k));
    CHECK(std::abs(s) <= 1e-10 + 3.0 * law.truncation_mass);
}

TEST_CASE("hitting times") {
    const auto one = hitting_times(AttachmentRule::constant(1.0), 10);
    CHECK(one.up_steps[0] == 1.0);
    CHECK(one.up_steps[1] == doctest::Approx(2.0));
    CHECK(one.return_times[0] == 1.0);

    const auto rule = AttachmentRule::affine(0.5, 0.5);
    const auto law = compute_mu(rule);
    const auto t = hitting_times(rule, 60);
    CHECK(t.up_steps[0] == doctest::Approx(1.0 / rule(0)));
    for (std::size_t j = 0; j <= 60; ++j)
        CHECK(law.mass(j) * (1.0 + rule(j)) * t.return_times[j] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("tail asymptotes") {
    CHECK_THROWS_AS(tail_asymptote_report(AttachmentRule::constant(1.0), compute_mu(AttachmentRule::constant(1.0))),
                    NotApplicable);

    const auto aff = AttachmentRule::affine(0.5, 0.5);
    const auto rows = tail_asymptote_report(aff, compute_mu(aff, 1e-9));
    REQUIRE(rows.size() > 4);
    CHECK(std::abs(rows.back().ratio - 1.0) < std::abs(rows.front().ratio - 1.0) + 1e-12);
    CHECK(rows.back().ratio == doctest::Approx(1.0).epsilon(0.05));

    const auto pw = AttachmentRule::power(1.0, 0.5, 1.0);
    const auto prow = tail_asymptote_report(pw, compute_mu(pw));
    REQUIRE(!prow.empty());
    CHECK(prow.back().predicted == doctest::Approx(2.0));
    CHECK(prow.back().ratio == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("limit csv header") {
    const auto rule = AttachmentRule::constant(1.0);
    const auto law = compute_mu(rule);
    std::ostringstream os;
    write_limit_csv(os, law, hitting_times(rule, law.truncation_K));
    CHECK(os.str().rfind("k,mu_k,tail_k,E_tau_up_k\n0,0.5,1,1\n", 0) == 0);
}
