#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "prefstein/error.hpp"
#include "prefstein/outdegree.hpp"

using namespace prefstein;

TEST_CASE("vertex degree law") {
    const auto point = vertex_degree_law(AttachmentRule::constant(0.5), 4, 4);
    REQUIRE(point.size() == 1);
    CHECK(point[0] == 1.0);

    const auto one = vertex_degree_law(AttachmentRule::constant(0.7), 1, 2);
    CHECK(one[1] == doctest::Approx(0.7));

    const auto two = vertex_degree_law(AttachmentRule::constant(0.5), 1, 3);
    CHECK(two[0] == doctest::Approx(0.375).epsilon(1e-15));
    CHECK(std::accumulate(two.begin(), two.end(), 0.0) == doctest::Approx(1.0));
}

TEST_CASE("outdegree law at small n") {
    const auto n2 = build_outdegree(AttachmentRule::constant(0.3), 2);
    REQUIRE(n2.pmf.size() == 2);
    CHECK(n2.pmf[0] == doctest::Approx(0.7));
    CHECK(n2.pmf[1] == doctest::Approx(0.3));

    const auto law = build_outdegree(AttachmentRule::constant(0.5), 3);
    CHECK(law.p[0] == doctest::Approx(0.25));
    CHECK(law.p[1] == doctest::Approx(0.25));
    CHECK(law.pmf[0] == doctest::Approx(0.5625).epsilon(1e-15));
    CHECK(law.pmf[1] == doctest::Approx(0.375).epsilon(1e-15));
    CHECK(law.pmf[2] == doctest::Approx(0.0625).epsilon(1e-15));
    CHECK(poisson_tv(law).barbour_hall == doctest::Approx(0.125));
}

TEST_CASE("Poisson distance of a single Bernoulli") {
    const auto law = build_outdegree(AttachmentRule::constant(0.5), 2);
    const auto tv = poisson_tv(law);
    CHECK(tv.exact == doctest::Approx(0.1967346701436833).epsilon(1e-13));
    CHECK(tv.exact <= tv.barbour_hall);
    CHECK(tv.sharp <= tv.barbour_hall);
}

TEST_CASE("Le Cam regime: equal tiny probabilities") {
    const std::vector<double> p(200, 1e-3);
    OutdegreeLaw law;
    law.n = 201;
    law.p = p;
    law.lambda_n = 0.2;
    law.pmf = poisson_binomial(p);
    const auto tv = poisson_tv(law);
    CHECK(tv.exact <= tv.barbour_hall);
    CHECK(tv.exact >= 0.05 * tv.barbour_hall);
}

TEST_CASE("lambda_n equals the chain's mean of f") {
    for (const auto& rule : {AttachmentRule::affine(0.5, 0.5), AttachmentRule::constant(0.8),
                             AttachmentRule::power(0.8, 0.5, 0.8)}) {
        const OutdegreeSweep sweep(rule, 300);
        ChainEvolver ev(rule);
        for (std::size_t n = 2; n <= 300; n += 37) {
            ev.advance_to(n - 1);
            const auto law = build_outdegree(sweep, rule, n, ev.law());
            CHECK(law.lambda_gap() <= 1e-10);
            CHECK(std::accumulate(law.pmf.begin(), law.pmf.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(poisson_tv(law).exact <= poisson_tv(law).barbour_hall);
        }
    }
}

TEST_CASE("lambda recursion") {
    const auto c = lambda_recursion_check(0.5, 0.5, 400);
    CHECK(c.lambda == doctest::Approx(1.0));
    REQUIRE(c.rows.size() >= 2);
    CHECK(c.rows[0].n == 2);
    CHECK(c.rows[0].product_form == doctest::Approx(-0.5));
    CHECK(c.rows[1].product_form == doctest::Approx(-0.375));
    CHECK(c.max_disagreement <= 1e-10);
    CHECK(c.bound_holds);
    for (std::size_t r = 1; r < c.rows.size(); ++r)
        CHECK(std::abs(c.rows[r].product_form) <= std::abs(c.rows[r - 1].product_form));
    CHECK(c.max_normalized <= 1.0);
}

TEST_CASE("moment bound") {
    for (double g : {0.3, 0.5, 0.7}) {
        const OutdegreeSweep sweep(AttachmentRule::affine(g, 1 - g), 200);
        CHECK(moment_bound_ratio(sweep, g) <= 1.0 + 1e-12);
    }
    // f(k) <= gamma k + 1 alone is not enough.
    const OutdegreeSweep sweep(AttachmentRule::affine(0.5, 1.0), 3);
    CHECK(sweep.mean_f(1, 2) == doctest::Approx(1.5));
    CHECK(moment_bound_ratio(sweep, 0.5) > 1.0);
}

TEST_CASE("outdegree normalizers and regimes") {
    CHECK(outdegree_normalizer(0.3, 99) == doctest::Approx(0.01));
    CHECK(outdegree_normalizer(0.5, 100) == doctest::Approx(std::log(100.0) / 100));
    CHECK(outdegree_normalizer(0.7, 100) == doctest::Approx(std::pow(100.0, -0.6)));

    const std::vector<std::size_t> grid{64, 128, 256, 512, 1024};
    const auto t = outdegree_rate_report(AttachmentRule::affine(0.3, 0.7), grid);
    REQUIRE(t.rows.size() == grid.size());
    for (const auto& r : t.rows) CHECK(r.exact_tv <= r.bh_bound);
    CHECK(t.summary.ratio() <= 1.5);
    CHECK_THROWS_AS(outdegree_rate_report(AttachmentRule::affine(1.0, 0.5), grid), RegimeMismatch);

    std::ostringstream os;
    write_outdegree_csv(os, t);
    CHECK(os.str().rfind("n,lambda_n,exact_tv,bh_bound,normalized\n64,", 0) == 0);
}
