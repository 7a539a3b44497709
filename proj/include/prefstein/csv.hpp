#pragma once

#include <cstddef>
#include <initializer_list>
#include <ostream>
#include <string>
#include <type_traits>
#include <vector>

#include <fmt/format.h>

namespace prefstein {

// Minimal CSV writer. Reals are written with 17 significant digits so that
// identical inputs give byte-identical files.
class CsvWriter {
public:
    CsvWriter(std::ostream& os, std::initializer_list<std::string> header) : os_(os) {
        write_header(std::vector<std::string>(header));
    }
    CsvWriter(std::ostream& os, const std::vector<std::string>& header) : os_(os) { write_header(header); }

    template <class... Ts>
    void row(const Ts&... values) {
        bool first = true;
        ((os_ << (first ? "" : ",") << format(values), first = false), ...);
        os_ << '\n';
    }

    template <class T>
    static std::string format(const T& v) {
        if constexpr (std::is_floating_point_v<T>)
            return fmt::format("{:.17g}", static_cast<double>(v));
        else if constexpr (std::is_integral_v<T>)
            return fmt::format("{}", v);
        else
            return std::string(v);
    }

private:
    void write_header(const std::vector<std::string>& header) {
        for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
        os_ << '\n';
    }

    std::ostream& os_;
};

}  // namespace prefstein
