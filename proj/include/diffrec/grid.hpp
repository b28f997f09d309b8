#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "diffrec/errors.hpp"

namespace diffrec {

/// Uniform time grid t_i = i * dt on [0, t_max], i = 0..n.
class TimeGrid {
public:
    TimeGrid() = default;

    TimeGrid(double t_max, std::size_t n) : t_max_(t_max), n_(n) {
        if (!(t_max > 0.0) || !std::isfinite(t_max))
            throw InvalidGrid("time grid requires t_max > 0");
        if (n < 2)
            throw InvalidGrid("time grid requires n >= 2");
    }

    double t_max() const noexcept { return t_max_; }
    std::size_t n() const noexcept { return n_; }
    std::size_t size() const noexcept { return n_ + 1; }
    double dt() const noexcept { return t_max_ / static_cast<double>(n_); }

    double node(std::size_t i) const noexcept {
        // last node exactly t_max, no accumulated rounding
        return i == n_ ? t_max_ : static_cast<double>(i) * dt();
    }

    std::vector<double> nodes() const {
        std::vector<double> out(size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = node(i);
        return out;
    }

    bool operator==(const TimeGrid& other) const noexcept {
        return t_max_ == other.t_max_ && n_ == other.n_;
    }

private:
    double t_max_ = 1.0;
    std::size_t n_ = 2;
};

inline TimeGrid build_time_grid(double t_max, std::size_t n) { return TimeGrid(t_max, n); }

/// Scalar samples on a TimeGrid (one value per node).
struct TimeSeries {
    TimeGrid grid;
    std::vector<double> values;

    TimeSeries() = default;
    TimeSeries(TimeGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
        if (values.size() != grid.size())
            throw InvalidGrid("time series sample count does not match grid");
    }

    double operator[](std::size_t i) const { return values[i]; }
    std::size_t size() const noexcept { return values.size(); }
};

inline double sup_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace diffrec
