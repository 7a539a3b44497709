#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace prefstein {

// Grid specs:
//   "a:b:geometric[:r]"  a, a r, a r^2, ... up to b (r defaults to 2)
//   "a:b:linear[:s]"     a, a+s, ... up to b (s defaults to 1)
//   "n1,n2,..."          explicit list
// The result is sorted and deduplicated. Throws ConfigError("n-grid").
std::vector<std::size_t> parse_grid(std::string_view spec);

// 2^lo, ..., 2^hi
std::vector<std::size_t> powers_of_two(unsigned lo, unsigned hi);

}  // namespace prefstein
