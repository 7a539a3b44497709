#include <doctest.h>

#include <sstream>
#include <vector>

#include "prefstein/csv.hpp"
#include "prefstein/error.hpp"
#include "prefstein/grid.hpp"
#include "prefstein/numeric.hpp"
#include "prefstein/random.hpp"

using namespace prefstein;

TEST_CASE("grid specs") {
    CHECK(parse_grid("16:128:geometric") == std::vector<std::size_t>{16, 32, 64, 128});
    CHECK(parse_grid("1:100:geometric:10") == std::vector<std::size_t>{1, 10, 100});
    CHECK(parse_grid("2:10:linear:4") == std::vector<std::size_t>{2, 6, 10});
    CHECK(parse_grid("5,3,5,9") == std::vector<std::size_t>{3, 5, 9});
    CHECK(powers_of_two(2, 4) == std::vector<std::size_t>{4, 8, 16});
    for (const char* bad : {"", "a,b", "10:1:linear", "1:10:cubic", "4:8:geometric:1"}) {
        try {
            parse_grid(bad);
            FAIL("accepted " << bad);
        } catch (const ConfigError& e) {
            CHECK(e.field() == "n-grid");
        }
    }
}

TEST_CASE("csv formatting round-trips doubles") {
    std::ostringstream os;
    CsvWriter w(os, {"k", "x", "tag"});
    w.row(std::size_t{3}, 0.1, "a");
    CHECK(os.str() == "k,x,tag\n3,0.10000000000000001,a\n");
    CHECK(std::stod("0.10000000000000001") == 0.1);
}

TEST_CASE("compensated summation") {
    std::vector<double> xs{1e16, 1.0, -1e16, 1.0};
    CHECK(compensated_sum(xs) == 2.0);
    const std::vector<double> p{0.5, 0.5}, q{1.0};
    CHECK(tv_between(p, q) == 0.5);
}

TEST_CASE("Philox4x32-10 known answers") {
    using A4 = std::array<std::uint32_t, 4>;
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("stream draws") {
    PhiloxStream a(1, 2, 3), b(1, 2, 3), c(1, 3, 3);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        differs |= x != c.next_u64();
    }
    CHECK(differs);
    PhiloxStream s(9, 0, 0);
    double mean = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = s.uniform();
        CHECK_FALSE((u < 0.0 || u >= 1.0));
        mean += u;
        CHECK(s.below(7) < 7);
    }
    CHECK(mean / 100000 == doctest::Approx(0.5).epsilon(0.01));
    CHECK(s.bernoulli(1.0));
    CHECK_FALSE(s.bernoulli(0.0));
}
