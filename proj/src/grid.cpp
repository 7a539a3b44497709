#include "prefstein/grid.hpp"

#include <algorithm>
#include <charconv>
#include <string>

#include <fmt/format.h>

#include "prefstein/error.hpp"

namespace prefstein {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::size_t to_size(std::string_view token, std::string_view spec) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size() || token.empty())
        throw ConfigError("n-grid", fmt::format("bad integer '{}' in grid '{}'", token, spec));
    return v;
}

}  // namespace

std::vector<std::size_t> parse_grid(std::string_view spec) {
    std::vector<std::size_t> out;
    if (spec.find(':') != std::string_view::npos) {
        const auto parts = split(spec, ':');
        if (parts.size() < 3 || parts.size() > 4)
            throw ConfigError("n-grid", fmt::format("grid '{}' is not a:b:geometric[:r] or a:b:linear[:s]", spec));
        const std::size_t a = to_size(parts[0], spec), b = to_size(parts[1], spec);
        if (a == 0 || a > b) throw ConfigError("n-grid", fmt::format("grid '{}' needs 1 <= a <= b", spec));
        if (parts[2] == "geometric") {
            const std::size_t r = parts.size() == 4 ? to_size(parts[3], spec) : 2;
            if (r < 2) throw ConfigError("n-grid", "geometric ratio must be >= 2");
            for (std::size_t v = a; v <= b; v *= r) {
                out.push_back(v);
                if (v > b / r) break;
            }
        } else if (parts[2] == "linear") {
            const std::size_t s = parts.size() == 4 ? to_size(parts[3], spec) : 1;
            if (s == 0) throw ConfigError("n-grid", "linear step must be >= 1");
            for (std::size_t v = a; v <= b; v += s) out.push_back(v);
        } else {
            throw ConfigError("n-grid", fmt::format("unknown grid kind '{}'", parts[2]));
        }
    } else {
        for (auto token : split(spec, ',')) out.push_back(to_size(token, spec));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    if (out.empty()) throw ConfigError("n-grid", "empty grid");
    return out;
}

std::vector<std::size_t> powers_of_two(unsigned lo, unsigned hi) {
    std::vector<std::size_t> out;
    for (unsigned e = lo; e <= hi; ++e) out.push_back(std::size_t{1} << e);
    return out;
}

}  // namespace prefstein
