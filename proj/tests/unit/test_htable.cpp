#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "prefstein/error.hpp"
#include "prefstein/htable.hpp"

using namespace prefstein;

TEST_CASE("low rows in closed form") {
    const auto rule = AttachmentRule::power(0.8, 0.5, 0.8);
    const auto h = build(rule, 60);
    CHECK(h(0, 1) == rule(0));
    CHECK(h(0, 2) == doctest::Approx(rule(0) * (1 - rule(0)) / 2).epsilon(1e-15));
    CHECK(h(1, 2) == doctest::Approx(rule(1) * rule(0) / 2).epsilon(1e-15));
    double prod = 1.0;
    for (std::size_t l = 1; l < 60; ++l) {
        prod *= rule(l - 1) / double(l + 1);
        CHECK(h(l, l + 1) == doctest::Approx(rule(l) * prod).epsilon(1e-12));
    }
    CHECK(h(10, 5) == 0.0);
    CHECK(h.row(7).size() == 7);
}

TEST_CASE("build rejects f(k) > k+1") {
    CHECK_THROWS_AS(build(AttachmentRule::constant(1.5), 10), ViolationAt);
}

TEST_CASE("table matches its definition through the chain") {
    for (const auto& rule : {AttachmentRule::constant(0.9), AttachmentRule::affine(1.0, 0.5)}) {
        const auto h = build(rule, 200);
        CHECK(definition_gap(rule, h) <= 1e-11);
        CHECK(increment_recursion_residual(h) <= 1e-12);
    }
}

TEST_CASE("Constant(0.9)") {
    const auto h = build(AttachmentRule::constant(0.9), 500);
    const auto report = verify_properties(h, classify(AttachmentRule::constant(0.9), 500));
    CHECK(report.nonnegative.passed);
    CHECK(report.unimodal.applicable);
    CHECK(report.unimodal.passed);
    CHECK(report.inverse_l_bound.passed);
    CHECK(report.C_explicit == doctest::Approx(0.9));
    CHECK_FALSE(report.gamma_bound.applicable);
    CHECK(report.all_passed());
    CHECK_NOTHROW(require_properties(report));

    const auto I = turning_points(h);
    REQUIRE(I.size() == 500);
    CHECK(I[0] == 0);
    for (std::size_t l = 1; l < I.size(); ++l) CHECK((I[l] == I[l - 1] || I[l] == I[l - 1] + 1));
}

TEST_CASE("f(k) = k + 0.5") {
    const auto rule = AttachmentRule::affine(1.0, 0.5);
    const auto h = build(rule, 500);
    const auto report = verify_properties(h, classify(rule, 500));
    CHECK(report.nonnegative.passed);
    CHECK(report.nondecreasing.applicable);
    CHECK(report.nondecreasing.passed);
    CHECK(report.gamma_bound.applicable);
    CHECK(report.gamma_bound.passed);
    // sup_k h(k,500) = h(499,500) ~ l^{-1/2}/Gamma(1/2)
    const double scaled = h(499, 500) * std::sqrt(500.0);
    CHECK(scaled <= 1.1 / std::tgamma(0.5));
    CHECK(h(499, 500) <= gamma_row_bound(500, 0.5) * (1 + 1e-12));

    // Nondecreasing rows turn at the last index.
    const auto I = turning_points(h);
    for (std::size_t l = 1; l <= 500; ++l) CHECK(I[l - 1] == l - 1);
}

TEST_CASE("gamma_row_bound") {
    CHECK(gamma_row_bound(1, 0.5) == doctest::Approx(0.5));
    CHECK(gamma_row_bound(1, 1.0) == doctest::Approx(1.0));
    CHECK(gamma_row_bound(10, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("signed increment sums stay within 2 sup") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (const auto& rule : {AttachmentRule::constant(0.9), AttachmentRule::affine(0.5, 0.5),
                             AttachmentRule::affine(1.0, 0.5)}) {
        const auto h = build(rule, 300);
        for (std::size_t l : {1u, 2u, 17u, 120u, 300u}) {
            double sup = 0.0;
            for (double x : h.row(l)) sup = std::max(sup, x);
            for (int rep = 0; rep < 20; ++rep) {
                std::vector<double> v(l + 1);
                for (auto& x : v) x = rep % 2 ? u(gen) : (gen() & 1 ? 1.0 : -1.0);
                CHECK(std::abs(signed_increment_sum(h, l, v)) <= 2.0 * sup + 1e-14);
            }
        }
    }
}

TEST_CASE("htable csv") {
    const auto rule = AttachmentRule::constant(0.9);
    const auto h = build(rule, 3);
    std::ostringstream os;
    write_htable_csv(os, h, verify_properties(h, classify(rule, 3)));
    CHECK(os.str().rfind("l,sup,I,l_times_sup,bound\n1,0.90000000000000002,0,0.90000000000000002,", 0) == 0);
}
