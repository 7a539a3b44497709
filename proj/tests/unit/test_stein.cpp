#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "prefstein/error.hpp"
#include "prefstein/stein.hpp"

using namespace prefstein;

namespace {

SteinSolver solver_for(const AttachmentRule& rule) { return SteinSolver(rule, compute_mu(rule, kDefaultEpsilon, 420)); }

}  // namespace

TEST_CASE("delta_g cases") {
    const auto s = solver_for(AttachmentRule::constant(1.0));
    CHECK(s.delta_g(3, 3) == doctest::Approx(0.5));
    CHECK(s.delta_g(1, 4) == 0.0);
    // j >= k+1: -(mu_j/mu_k)/(f(k)(1+f(k))); for Constant(1), mu_2/mu_0 = 1/4.
    CHECK(s.delta_g(2, 0) == doctest::Approx(-0.125).epsilon(1e-14));
}

TEST_CASE("v_set special sets") {
    for (const auto& rule : {AttachmentRule::constant(1.0), AttachmentRule::affine(0.5, 0.5)}) {
        const auto s = solver_for(rule);
        for (std::size_t k = 0; k < 30; ++k) {
            CHECK(s.v_set(IndexSet::empty(), k) == 0.0);
            CHECK(std::abs(s.v_set(IndexSet::all(), k)) <= 1e-14);
        }
    }
    const auto s = solver_for(AttachmentRule::constant(1.0));
    CHECK(s.v_set(IndexSet::finite({0}), 0) == doctest::Approx(0.5));
    CHECK(s.measure(IndexSet::finite({0, 2})) == doctest::Approx(0.625));
    CHECK(s.measure(IndexSet::complement_of({0})) == doctest::Approx(0.5));
    CHECK_THROWS_AS(s.v_set(IndexSet::finite({0}), s.max_index() + 5), TailUnderflow);
}

TEST_CASE("v_set agrees with summed delta_g, and |v| < 1") {
    std::mt19937_64 gen(17);
    for (const auto& rule : {AttachmentRule::constant(0.9), AttachmentRule::affine(0.5, 0.5),
                             AttachmentRule::power(0.8, 0.5, 0.8)}) {
        const auto s = solver_for(rule);
        for (int rep = 0; rep < 20; ++rep) {
            std::vector<std::size_t> members;
            for (std::size_t j = 0; j <= 50; ++j)
                if (gen() & 1) members.push_back(j);
            const auto A = IndexSet::finite(members);
            for (std::size_t k = 0; k <= 50; ++k) {
                double direct = 0.0;
                for (auto j : members) direct += s.f(k) * s.delta_g(j, k);
                const double v = s.v_set(A, k);
                CHECK(v == doctest::Approx(direct).epsilon(1e-12));
                CHECK(std::abs(v) < 1.0);
                // Sign pattern: v >= 0 on A, v <= 0 off A.
                if (A.contains(k))
                    CHECK(v >= -1e-15);
                else
                    CHECK(v <= 1e-15);
                CHECK(std::abs(stein_residual(s, A, k)) <= 1e-9);
            }
        }
    }
}

TEST_CASE("complement sets and intervals") {
    const auto s = solver_for(AttachmentRule::affine(0.5, 0.5));
    const auto c = IndexSet::complement_of({1, 4});
    const auto fin = IndexSet::finite({1, 4});
    for (std::size_t k = 0; k < 40; ++k) {
        // v_A + v_{A^c} = v_{N0} = 0
        CHECK(s.v_set(c, k) + s.v_set(fin, k) == doctest::Approx(0.0).epsilon(1e-13));
        CHECK(std::abs(stein_residual(s, c, k)) <= 1e-10);
    }
    CHECK(IndexSet::interval(3, 5).contains(4));
    CHECK_FALSE(IndexSet::interval(3, 5).contains(6));
    CHECK(IndexSet::at_least(7).contains(1000));
    CHECK_FALSE(IndexSet::at_least(7).contains(6));
}

TEST_CASE("stein residual trivial cases") {
    const auto s = solver_for(AttachmentRule::constant(1.0));
    for (std::size_t k = 0; k < 10; ++k) CHECK(stein_residual(s, IndexSet::empty(), k) == 0.0);
    CHECK(std::abs(stein_residual(s, IndexSet::finite({0}), 0)) <= 1e-10);
}

TEST_CASE("increments of v_A sum to at most 2 in absolute value") {
    const auto s = solver_for(AttachmentRule::constant(0.9));
    const auto fv = set_function(s, IndexSet::finite({0, 3, 4, 9}), 40);
    CHECK(std::abs(fv.v.back() - fv.v.front()) <= 2.0);
}

TEST_CASE("E_mu[A g_A] = 0") {
    // Light tails only, so that mass beyond K is negligible.
    for (const auto& rule : {AttachmentRule::constant(0.9), AttachmentRule::power(0.8, 0.5, 0.8)}) {
        const auto s = solver_for(rule);
        const auto A = IndexSet::finite({0, 2, 5});
        const std::size_t K = 400;
        const auto fv = set_function(s, A, K);
        double e = 0.0;
        for (std::size_t k = 0; k < K; ++k) e += s.mu().mass(k) * (fv.v[k] - fv.g_minus_g0[k]);
        CHECK(std::abs(e) <= 1e-10);
    }
}

TEST_CASE("triple sum identity") {
    const auto empty = triple_sum_check(AttachmentRule::constant(1.0), IndexSet::empty(), 10);
    CHECK(empty.lhs == 0.0);
    CHECK(empty.rhs == 0.0);

    const auto t = triple_sum_check(AttachmentRule::constant(1.0), IndexSet::finite({0, 2}), 50);
    CHECK(t.max_disagreement() <= 1e-10);
    for (const auto& rule : {AttachmentRule::affine(0.5, 0.5), AttachmentRule::power(0.8, 0.5, 0.8)}) {
        const auto u = triple_sum_check(rule, IndexSet::interval(1, 3), 120);
        CHECK(u.max_disagreement() <= 1e-10);
    }
}
