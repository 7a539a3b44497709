#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace prefstein {

// Neumaier's variant of Kahan summation.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    CompensatedSum& operator+=(double x) noexcept {
        add(x);
        return *this;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
    CompensatedSum s;
    for (double x : xs) s.add(x);
    return s.value();
}

// Gamma(x + a) / Gamma(x + b) through log-gamma.
inline double gamma_ratio(double x_plus_a, double x_plus_b) {
    return std::exp(std::lgamma(x_plus_a) - std::lgamma(x_plus_b));
}

// Half the L1 distance between two pmfs given on [0, size); missing entries are 0.
double tv_between(std::span<const double> p, std::span<const double> q);

}  // namespace prefstein
