#include <doctest.h>

#include <cmath>
#include <vector>

#include "prefstein/chain.hpp"
#include "prefstein/error.hpp"
#include "prefstein/graphsim.hpp"
#include "prefstein/numeric.hpp"

using namespace prefstein;

TEST_CASE("Constant(1) at n = 3 matches the enumerated law") {
    const auto law = evolve(AttachmentRule::constant(1.0), 3);
    REQUIRE(law.pmf.size() == 3);
    CHECK(law.pmf[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(law.pmf[1] == doctest::Approx(1.0 / 3).epsilon(1e-15));
    CHECK(law.pmf[2] == doctest::Approx(1.0 / 6).epsilon(1e-15));

    const auto tv = tv_to_limit(law, compute_mu(AttachmentRule::constant(1.0)));
    CHECK(tv.value == doctest::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("chain equals brute-force enumeration for n <= 4") {
    for (const auto& rule : {AttachmentRule::constant(1.0), AttachmentRule::constant(0.5),
                             AttachmentRule::affine(0.5, 0.5), AttachmentRule::power(0.8, 0.5, 0.8),
                             AttachmentRule::table({0.9, 1.7, 0.4, 2.5}, RepeatLast{})}) {
        for (std::size_t n = 1; n <= 4; ++n) {
            const auto chain = evolve(rule, n);
            const auto exact = enumerate_exact(rule, n);
            CHECK(exact.total_probability == doctest::Approx(1.0).epsilon(1e-14));
            CHECK(tv_between(chain.pmf, exact.pmf) <= 1e-14);
        }
    }
}

TEST_CASE("start values") {
    const auto law = evolve(AttachmentRule::constant(1.0), 1, 2);
    CHECK(law.prob(2) == 1.0);
    CHECK(law.prob(0) == 0.0);

    CHECK(d0_coupling_gap(AttachmentRule::constant(1.0), 1, 1) == 1.0);
    CHECK(d0_coupling_gap(AttachmentRule::constant(1.0), 0, 37) == 0.0);
    CHECK(d0_coupling_gap(AttachmentRule::constant(1.0, 1), 1, 64) <= 1.0 / 64);
}

TEST_CASE("tv_to_limit trivial cases") {
    const auto mu = compute_mu(AttachmentRule::constant(1.0));
    const auto point = evolve(AttachmentRule::constant(1.0), 1);
    CHECK(tv_to_limit(point, mu).value == doctest::Approx(0.5));
    const auto law = evolve(AttachmentRule::constant(0.9), 40);
    CHECK(tv_distance(law, law) == 0.0);
}

TEST_CASE("conservation and snapshots") {
    const auto rule = AttachmentRule::affine(0.5, 0.5);
    ChainEvolver ev(rule);
    ev.advance_to(500);
    CHECK(ev.max_conservation_error() <= 1e-12);

    const std::vector<std::size_t> snaps{3, 10, 100};
    std::vector<ChainLaw> seen;
    evolve(rule, snaps, 0, [&](const ChainLaw& l) { seen.push_back(l); });
    REQUIRE(seen.size() == 3);
    CHECK(tv_distance(seen[2], evolve(rule, 100)) == 0.0);
    CHECK(seen[0].n == 3);

    // E[f(X_n)] via the pmf agrees with the definition.
    double ef = 0.0;
    for (std::size_t k = 0; k < seen[1].pmf.size(); ++k) ef += seen[1].pmf[k] * rule(k);
    CHECK(expected_f(seen[1], rule) == doctest::Approx(ef).epsilon(1e-14));
}

TEST_CASE("certify_rate") {
    const std::vector<std::size_t> one{2};
    const auto t = certify_rate(AttachmentRule::constant(0.9), one, RateRegime::log_over_n());
    REQUIRE(t.rows.size() == 1);
    CHECK(std::isfinite(t.rows[0].normalized));

    const std::vector<std::size_t> grid{64, 128, 256, 512, 1024};
    const auto table = certify_rate(AttachmentRule::affine(1.0, 0.5), grid, RateRegime::power_law(0.5));
    for (const auto& r : table.rows) {
        CHECK(r.normalizer == doctest::Approx(std::pow(double(r.n), -0.5)));
        CHECK(r.err_bar == 0.0);
    }
    CHECK(table.summary.ratio() <= 1.5);
    CHECK_THROWS_AS(certify_rate(AttachmentRule::constant(0.9), grid, RateRegime::power_law(0.5)), RegimeMismatch);
}

TEST_CASE("quartile summary") {
    const std::vector<double> xs{1, 4, 2, 2, 3, 1, 1, 2};
    const auto s = summarize_quartiles(xs);
    CHECK(s.sup == 4);
    CHECK(s.first_quartile_sup == 4);
    CHECK(s.last_quartile_sup == 2);
    CHECK(s.ratio() == 0.5);
}

// Measured sups of n d_TV / log n on 2^4..2^11, frozen as regression baselines.
TEST_CASE("rate regression baselines") {
    const auto grid = std::vector<std::size_t>{16, 32, 64, 128, 256, 512, 1024, 2048};
    const auto a = certify_rate(AttachmentRule::constant(0.9), grid, RateRegime::log_over_n());
    const auto b = certify_rate(AttachmentRule::affine(0.5, 0.5), grid, RateRegime::log_over_n());
    CHECK(a.summary.sup == doctest::Approx(0.0762661).epsilon(1e-5));
    CHECK(b.summary.sup == doctest::Approx(0.0868098).epsilon(1e-5));
    CHECK(a.summary.ratio() <= 1.5);
    CHECK(b.summary.ratio() <= 1.5);
}
