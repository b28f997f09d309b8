#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "diffrec/errors.hpp"

namespace diffrec {

inline constexpr double pi = 3.14159265358979323846;

/// Concrete evaluable function used for problem data (boundary values,
/// initial value, source, coefficient).
///
/// Univariate kinds evaluate in their own argument:
///   constant c             -> c
///   polynomial c0 c1 ...   -> sum c_k s^k
///   exponential c lambda   -> c * exp(-lambda * s)
///   sinusoid a b omega     -> a + b * sin(omega * s)
///   sines (m_j, k_j)...    -> sum k_j * sin(m_j * s)
///   mode-source m          -> sqrt(2/pi) * sin(m * s)
///   table (s_j, v_j)...    -> linear interpolation
///
/// A source term f(x,t) is either one of the above (sines / mode-source read
/// as functions of x, time kinds as functions of t, constants as both) or a
/// separable product space_part(x) * time_part(t).
class FunctionSpec {
public:
    enum class Kind {
        constant,
        polynomial,
        exponential,
        sinusoid,
        sine_combination,
        mode_source,
        sample_table,
        product,
    };

    FunctionSpec() : kind_(Kind::constant), params_{0.0} {}

    static FunctionSpec constant(double c) {
        FunctionSpec f;
        f.kind_ = Kind::constant;
        f.params_ = {c};
        return f;
    }

    static FunctionSpec zero() { return constant(0.0); }

    /// coeffs[k] multiplies s^k.
    static FunctionSpec polynomial(std::vector<double> coeffs) {
        if (coeffs.empty()) coeffs.push_back(0.0);
        FunctionSpec f;
        f.kind_ = Kind::polynomial;
        f.params_ = std::move(coeffs);
        return f;
    }

    /// c * exp(-lambda * s)
    static FunctionSpec exponential(double c, double lambda) {
        FunctionSpec f;
        f.kind_ = Kind::exponential;
        f.params_ = {c, lambda};
        return f;
    }

    /// a + b * sin(omega * s)
    static FunctionSpec sinusoid(double a, double b, double omega) {
        FunctionSpec f;
        f.kind_ = Kind::sinusoid;
        f.params_ = {a, b, omega};
        return f;
    }

    /// sum_j k_j sin(m_j s); mode indices must be distinct positive integers.
    static FunctionSpec sine_combination(std::vector<std::pair<int, double>> terms) {
        for (std::size_t i = 0; i < terms.size(); ++i) {
            if (terms[i].first < 1)
                throw EvaluationError("sine-combination mode indices must be positive");
            for (std::size_t j = i + 1; j < terms.size(); ++j)
                if (terms[i].first == terms[j].first)
                    throw EvaluationError("sine-combination mode indices must be distinct");
        }
        FunctionSpec f;
        f.kind_ = Kind::sine_combination;
        f.modes_ = std::move(terms);
        return f;
    }

    /// sqrt(2/pi) * sin(m s): unit-norm Dirichlet eigenfunction as a source.
    static FunctionSpec mode_source(int m) {
        if (m < 1) throw EvaluationError("mode-source index must be positive");
        FunctionSpec f;
        f.kind_ = Kind::mode_source;
        f.params_ = {static_cast<double>(m)};
        return f;
    }

    /// Piecewise-linear table; abscissae must be strictly increasing.
    static FunctionSpec sample_table(std::vector<std::pair<double, double>> rows) {
        if (rows.size() < 2)
            throw EvaluationError("sample table needs at least two rows");
        for (std::size_t i = 1; i < rows.size(); ++i)
            if (!(rows[i].first > rows[i - 1].first))
                throw EvaluationError("sample table abscissae must be strictly increasing");
        FunctionSpec f;
        f.kind_ = Kind::sample_table;
        f.table_ = std::move(rows);
        return f;
    }

    /// Separable source space_part(x) * time_part(t).
    static FunctionSpec product(FunctionSpec space_part, FunctionSpec time_part) {
        if (space_part.kind_ == Kind::product || time_part.kind_ == Kind::product)
            throw EvaluationError("nested products are not supported");
        FunctionSpec f;
        f.kind_ = Kind::product;
        f.children_.push_back(std::move(space_part));
        f.children_.push_back(std::move(time_part));
        return f;
    }

    Kind kind() const noexcept { return kind_; }
    const std::vector<double>& params() const noexcept { return params_; }
    const std::vector<std::pair<int, double>>& sine_terms() const noexcept { return modes_; }
    const std::vector<std::pair<double, double>>& table() const noexcept { return table_; }
    const FunctionSpec& space_part() const { return children_.at(0); }
    const FunctionSpec& time_part() const { return children_.at(1); }

    /// Univariate evaluation.
    double operator()(double s) const {
        switch (kind_) {
        case Kind::constant:
            return params_[0];
        case Kind::polynomial: {
            double acc = 0.0;
            for (std::size_t k = params_.size(); k-- > 0;) acc = acc * s + params_[k];
            return acc;
        }
        case Kind::exponential:
            return params_[0] * std::exp(-params_[1] * s);
        case Kind::sinusoid:
            return params_[0] + params_[1] * std::sin(params_[2] * s);
        case Kind::sine_combination: {
            double acc = 0.0;
            for (const auto& [m, k] : modes_) acc += k * std::sin(m * s);
            return acc;
        }
        case Kind::mode_source:
            return std::sqrt(2.0 / pi) * std::sin(params_[0] * s);
        case Kind::sample_table:
            return interpolate(s);
        case Kind::product:
            throw EvaluationError("separable product is not a univariate function");
        }
        throw EvaluationError("unreachable function kind");
    }

    /// Bivariate evaluation for source terms.
    double operator()(double x, double t) const {
        switch (kind_) {
        case Kind::constant:
            return params_[0];
        case Kind::sine_combination:
        case Kind::mode_source:
            return (*this)(x);
        case Kind::exponential:
        case Kind::sinusoid:
        case Kind::sample_table:
            return (*this)(t);
        case Kind::polynomial:
            throw EvaluationError(
                "polynomial source term is ambiguous in (x,t); use an explicit "
                "'<space> * <time>' product");
        case Kind::product:
            return children_[0](x) * children_[1](t);
        }
        throw EvaluationError("unreachable function kind");
    }

    /// d/ds, analytic where the kind allows, central differences for tables.
    double derivative(double s) const {
        switch (kind_) {
        case Kind::constant:
            return 0.0;
        case Kind::polynomial: {
            double acc = 0.0;
            for (std::size_t k = params_.size(); k-- > 1;)
                acc = acc * s + static_cast<double>(k) * params_[k];
            return acc;
        }
        case Kind::exponential:
            return -params_[1] * params_[0] * std::exp(-params_[1] * s);
        case Kind::sinusoid:
            return params_[1] * params_[2] * std::cos(params_[2] * s);
        case Kind::sine_combination: {
            double acc = 0.0;
            for (const auto& [m, k] : modes_) acc += k * m * std::cos(m * s);
            return acc;
        }
        case Kind::mode_source:
            return std::sqrt(2.0 / pi) * params_[0] * std::cos(params_[0] * s);
        case Kind::sample_table: {
            const double lo = table_.front().first;
            const double hi = table_.back().first;
            double h = local_spacing(s);
            double a = std::max(lo, s - h);
            double b = std::min(hi, s + h);
            if (!(b > a)) throw EvaluationError("degenerate table for differentiation");
            return (interpolate(b) - interpolate(a)) / (b - a);
        }
        case Kind::product:
            throw EvaluationError("separable product has no univariate derivative");
        }
        throw EvaluationError("unreachable function kind");
    }

    bool is_identically_zero() const {
        switch (kind_) {
        case Kind::constant:
            return params_[0] == 0.0;
        case Kind::polynomial:
            return std::all_of(params_.begin(), params_.end(), [](double c) { return c == 0.0; });
        case Kind::exponential:
            return params_[0] == 0.0;
        case Kind::sinusoid:
            return params_[0] == 0.0 && params_[1] == 0.0;
        case Kind::sine_combination:
            return std::all_of(modes_.begin(), modes_.end(),
                               [](const auto& t) { return t.second == 0.0; });
        case Kind::mode_source:
            return false;
        case Kind::sample_table:
            return std::all_of(table_.begin(), table_.end(),
                               [](const auto& r) { return r.second == 0.0; });
        case Kind::product:
            return children_[0].is_identically_zero() || children_[1].is_identically_zero();
        }
        return false;
    }

    bool has_zero_derivative() const {
        switch (kind_) {
        case Kind::constant:
            return true;
        case Kind::polynomial:
            return params_.size() <= 1 ||
                   std::all_of(params_.begin() + 1, params_.end(),
                               [](double c) { return c == 0.0; });
        case Kind::sinusoid:
            return params_[1] == 0.0 || params_[2] == 0.0;
        case Kind::exponential:
            return params_[0] == 0.0 || params_[1] == 0.0;
        case Kind::sine_combination:
            return is_identically_zero();
        default:
            return is_identically_zero();
        }
    }

    /// True when the function is exactly sum k_j sin(m_j s).
    bool is_pure_sine_combination() const {
        return kind_ == Kind::sine_combination || kind_ == Kind::mode_source;
    }

    /// Plain sine coefficient k_m of sin(m s) for pure sine combinations.
    double plain_sine_coefficient(int m) const {
        if (kind_ == Kind::mode_source)
            return static_cast<int>(params_[0]) == m ? std::sqrt(2.0 / pi) : 0.0;
        if (kind_ == Kind::sine_combination) {
            for (const auto& [mj, kj] : modes_)
                if (mj == m) return kj;
            return 0.0;
        }
        throw EvaluationError("not a pure sine combination");
    }

    /// Largest mode index present (0 for the empty combination).
    int max_sine_mode() const {
        if (kind_ == Kind::mode_source) return static_cast<int>(params_[0]);
        int m = 0;
        for (const auto& [mj, kj] : modes_)
            if (kj != 0.0) m = std::max(m, mj);
        return m;
    }

private:
    double interpolate(double s) const {
        const double lo = table_.front().first;
        const double hi = table_.back().first;
        const double slack = 1e-12 * std::max(1.0, std::abs(hi - lo));
        if (s < lo - slack || s > hi + slack)
            throw EvaluationError("sample table does not cover evaluation point t=" +
                                  std::to_string(s));
        if (s <= lo) return table_.front().second;
        if (s >= hi) return table_.back().second;
        auto it = std::upper_bound(table_.begin(), table_.end(), s,
                                   [](double v, const auto& row) { return v < row.first; });
        const auto& [t1, v1] = *it;
        const auto& [t0, v0] = *(it - 1);
        const double w = (s - t0) / (t1 - t0);
        return v0 + w * (v1 - v0);
    }

    double local_spacing(double s) const {
        auto it = std::upper_bound(table_.begin(), table_.end(), s,
                                   [](double v, const auto& row) { return v < row.first; });
        if (it == table_.begin()) ++it;
        if (it == table_.end()) --it;
        return (*it).first - (*(it - 1)).first;
    }

    Kind kind_;
    std::vector<double> params_;
    std::vector<std::pair<int, double>> modes_;
    std::vector<std::pair<double, double>> table_;
    std::vector<FunctionSpec> children_;
};

} // namespace diffrec
