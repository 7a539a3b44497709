#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "prefstein/chain.hpp"
#include "prefstein/error.hpp"
#include "prefstein/graphsim.hpp"

using namespace prefstein;

TEST_CASE("enumeration at n = 2 and n = 3") {
    const auto rule = AttachmentRule::constant(0.6);
    const auto e2 = enumerate_exact(rule, 2);
    CHECK(e2.pmf[0] == doctest::Approx(1 - 0.3));
    CHECK(e2.pmf[1] == doctest::Approx(0.3));

    const auto e3 = enumerate_exact(AttachmentRule::constant(1.0), 3);
    CHECK(e3.outcomes == 8);
    CHECK(e3.pmf[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(e3.pmf[1] == doctest::Approx(1.0 / 3).epsilon(1e-15));
    CHECK(e3.pmf[2] == doctest::Approx(1.0 / 6).epsilon(1e-15));
}

TEST_CASE("simulate structure") {
    const auto g1 = simulate(RandomOutdegree{AttachmentRule::constant(1.0)}, 1, 1, 0, true);
    CHECK(g1.n == 1);
    CHECK(g1.edges.empty());
    CHECK(g1.indegrees.at(0) == 0);

    for (std::size_t n : {2u, 5u, 60u}) {
        const auto g = simulate(FixedOutdegree{0.5}, n, 3, 7, true);
        CHECK(g.outdegree_of_last == 1);
        std::size_t from_last = 0, total = 0;
        for (const auto& [src, dst] : g.edges) {
            from_last += src == n;
            CHECK(dst <= src);
        }
        for (auto d : g.indegrees) total += d;
        CHECK(from_last == 1);
        CHECK(total == n);  // one edge per arrival plus the self-loop at vertex 1
    }

    const auto r = simulate(RandomOutdegree{AttachmentRule::constant(1.0, 2)}, 40, 9, 1);
    for (auto d : r.indegrees) CHECK(d <= 2 + 40 - 1);
}

TEST_CASE("simulation is deterministic in (seed, trial)") {
    const Model m = Spatial{2, 1.0, 1.0, 0.5};
    const auto a = simulate(m, 80, 11, 4, true);
    const auto b = simulate(m, 80, 11, 4, true);
    const auto c = simulate(m, 80, 11, 5, true);
    std::ostringstream sa, sb, sc;
    write_edge_list(sa, a);
    write_edge_list(sb, b);
    write_edge_list(sc, c);
    CHECK(sa.str() == sb.str());
    CHECK(sa.str() != sc.str());

    const auto h1 = empirical_uniform_indegree(FixedOutdegree{0.0}, 30, 2000, 5);
    const auto h2 = empirical_uniform_indegree(FixedOutdegree{0.0}, 30, 2000, 5);
    CHECK(h1.counts == h2.counts);
}

TEST_CASE("n = 1 histogram sits at d0") {
    const auto h = empirical_uniform_indegree(FixedOutdegree{0.0}, 1, 100, 1);
    CHECK(h.frequency(1) == 1.0);
}

TEST_CASE("Monte Carlo agrees with the chain") {
    const auto rule = AttachmentRule::constant(1.0);
    const auto h = empirical_uniform_indegree(RandomOutdegree{rule}, 3, 200000, 20240611);
    const auto cmp = compare_histogram(h, evolve(rule, 3).pmf);
    CHECK(cmp.max_z <= 4.0);
    CHECK_FALSE(cmp.impossible_bin_hit);

    const auto fixed = empirical_uniform_indegree(FixedOutdegree{0.0}, 50, 50000, 3);
    const auto cf = compare_histogram(fixed, evolve(AttachmentRule::fixed_outdegree(0.0), 50, 1).pmf);
    CHECK(cf.max_z <= 4.0);

    const auto od = empirical_outdegree(AttachmentRule::constant(0.5), 3, 100000, 8);
    const std::vector<double> pmf{0.5625, 0.375, 0.0625};
    CHECK(compare_histogram(od, pmf).max_z <= 4.0);
}

TEST_CASE("sparse bins are pooled") {
    Histogram h;
    h.trials = 1000;
    h.counts = {500, 499, 0, 1};
    const std::vector<double> pmf{0.5, 0.4999, 0.00005, 0.00005};
    const auto cmp = compare_histogram(h, pmf);
    CHECK(cmp.bins == 2);
    CHECK_FALSE(cmp.pooled_tail);
    CHECK(cmp.max_z < 1.0);

    h.counts = {500, 499, 0, 1};
    const std::vector<double> zero_tail{0.5, 0.5, 0.0, 0.0};
    CHECK(compare_histogram(h, zero_tail).impossible_bin_hit);
}

TEST_CASE("random-outdegree edges are uncorrelated") {
    const auto rule = AttachmentRule::affine(0.5, 0.5);
    const auto cov = edge_covariance(rule, 20, 3, 11, 200000, 42);
    CHECK(std::abs(cov.covariance) <= 3.0 * cov.std_error);
}

TEST_CASE("torus ball volume") {
    CHECK(torus_ball_volume(0.3, 1) == doctest::Approx(0.6));
    CHECK(torus_ball_volume(0.7, 1) == 1.0);
    CHECK(torus_ball_volume(0.4, 2) == doctest::Approx(std::numbers::pi * 0.16));
    CHECK(torus_ball_volume(0.4, 3) == doctest::Approx(4.0 / 3 * std::numbers::pi * 0.064));
    CHECK(torus_ball_volume(std::sqrt(2.0) / 2 + 1e-9, 2) == 1.0);
    // Past r = 1/2 the ball overlaps itself; the square's inscribed region
    // of radius r in 2D is 4 (r^2 acos(1/(2r)) ... ) computed independently:
    const double r = 0.6;
    const double a = std::acos(0.5 / r);
    const double expected = std::numbers::pi * r * r - 4 * (r * r * a - 0.5 * std::sqrt(r * r - 0.25));
    CHECK(torus_ball_volume(r, 2) == doctest::Approx(expected).epsilon(1e-12));
    for (int dim = 1; dim <= 3; ++dim)
        for (double v : {0.01, 0.2, 0.6, 0.95}) CHECK(torus_ball_volume(torus_ball_radius(v, dim), dim) ==
                                                       doctest::Approx(v).epsilon(1e-9));
}

TEST_CASE("spatial model") {
    CHECK_THROWS(validate_model(Spatial{2, 3.0, 1.0, 0.5}, 10));
    CHECK_THROWS(validate_model(Spatial{4, 1.0, 1.0, 0.5}, 10));
    const auto rule = induced_rule(Spatial{2, 1.0, 1.0, 0.5});
    CHECK(rule(0) == 0.5);
    CHECK(rule(4) == 2.5);

    const auto chk = spatial_marginal_check(Spatial{2, 1.0, 1.0, 0.5}, 20, 20000, 77);
    CHECK(chk.bins_tested > 0);
    CHECK(chk.max_z <= chk.familywise_threshold());
    CHECK(std::abs(chk.pooled_z) <= 3.0);
}

TEST_CASE("bonferroni thresholds") {
    CHECK(bonferroni_z(3.0, 1) == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(bonferroni_z(3.0, 26) == doctest::Approx(3.881).epsilon(1e-3));
}
