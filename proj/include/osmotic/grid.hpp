#ifndef OSMOTIC_GRID_HPP
#define OSMOTIC_GRID_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace osmotic {

using complexd = std::complex<double>;

/// Uniform mesh on [x_min, x_max] with both endpoints included.
struct Grid {
    double x_min = 0.0;
    double x_max = 0.0;
    std::size_t n = 0;
    double dx = 0.0;

    double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx; }
    std::size_t mid() const { return n / 2; }

    bool operator==(const Grid& other) const {
        return x_min == other.x_min && x_max == other.x_max && n == other.n;
    }
};

inline Grid make_grid(double x_min, double x_max, std::size_t n) {
    if (n < 16) throw std::invalid_argument("make_grid: need at least 16 points");
    if (!(x_max > x_min)) throw std::invalid_argument("make_grid: degenerate interval");
    Grid g;
    g.x_min = x_min;
    g.x_max = x_max;
    g.n = n;
    g.dx = (x_max - x_min) / static_cast<double>(n - 1);
    return g;
}

/// Field sampled on a Grid.  Values are stored by value; fields are treated
/// as immutable once filled.
template <typename T>
struct Field {
    Grid grid;
    std::vector<T> values;

    Field() = default;
    explicit Field(const Grid& g) : grid(g), values(g.n, T{}) {}
    Field(const Grid& g, std::vector<T> v) : grid(g), values(std::move(v)) {
        if (values.size() != grid.n)
            throw std::invalid_argument("Field: values length does not match grid");
    }

    std::size_t size() const { return values.size(); }
    T& operator[](std::size_t i) { return values[i]; }
    const T& operator[](std::size_t i) const { return values[i]; }
};

using RealField = Field<double>;
using ComplexField = Field<complexd>;

template <typename Fn>
RealField sample_real(const Grid& g, Fn&& f) {
    RealField out(g);
    for (std::size_t i = 0; i < g.n; ++i) out.values[i] = f(g.x(i));
    return out;
}

template <typename Fn>
ComplexField sample_complex(const Grid& g, Fn&& f) {
    ComplexField out(g);
    for (std::size_t i = 0; i < g.n; ++i) out.values[i] = f(g.x(i));
    return out;
}

inline void check_finite(const RealField& f, const char* what) {
    for (double v : f.values)
        if (!std::isfinite(v)) throw std::runtime_error(std::string(what) + ": non-finite sample");
}

inline void check_finite(const ComplexField& f, const char* what) {
    for (const auto& v : f.values)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw std::runtime_error(std::string(what) + ": non-finite sample");
}

enum class Quadrature { trapezoid, simpson };

namespace detail {

template <typename T>
T integrate_trapezoid(const std::vector<T>& v, double dx) {
    T acc{};
    for (std::size_t i = 1; i + 1 < v.size(); ++i) acc += v[i];
    acc += (v.front() + v.back()) * 0.5;
    return acc * dx;
}

// Composite Simpson; when the interval count is odd, the last three
// intervals use the 3/8 rule so any n is accepted.
template <typename T>
T integrate_simpson(const std::vector<T>& v, double dx) {
    const std::size_t n = v.size();
    const std::size_t intervals = n - 1;
    std::size_t last = (intervals % 2 == 0) ? intervals : intervals - 3;
    T acc{};
    for (std::size_t i = 0; i + 2 <= last; i += 2)
        acc += (v[i] + v[i + 1] * 4.0 + v[i + 2]) * (dx / 3.0);
    if (last != intervals) {
        const std::size_t i = last;
        acc += (v[i] + v[i + 1] * 3.0 + v[i + 2] * 3.0 + v[i + 3]) * (dx * 3.0 / 8.0);
    }
    return acc;
}

}  // namespace detail

template <typename T>
T integrate(const Field<T>& f, Quadrature rule = Quadrature::trapezoid) {
    if (f.values.size() != f.grid.n)
        throw std::invalid_argument("integrate: field/grid length mismatch");
    if (rule == Quadrature::simpson && f.grid.n >= 4)
        return detail::integrate_simpson(f.values, f.grid.dx);
    return detail::integrate_trapezoid(f.values, f.grid.dx);
}

/// Cumulative trapezoid antiderivative anchored at the grid midpoint:
/// F(x_mid) = 0.  Used to rebuild the phase S from p_c.
template <typename T>
Field<T> cumulative_from_mid(const Field<T>& f) {
    Field<T> out(f.grid);
    const std::size_t m = f.grid.mid();
    const double h = f.grid.dx;
    out.values[m] = T{};
    for (std::size_t i = m + 1; i < f.grid.n; ++i)
        out.values[i] = out.values[i - 1] + (f.values[i - 1] + f.values[i]) * (h * 0.5);
    for (std::size_t i = m; i-- > 0;)
        out.values[i] = out.values[i + 1] - (f.values[i] + f.values[i + 1]) * (h * 0.5);
    return out;
}

/// Central second-order first derivative; one-sided second order at the ends.
template <typename T>
Field<T> derivative(const Field<T>& f) {
    const std::size_t n = f.grid.n;
    if (n < 5) throw std::invalid_argument("derivative: need at least 5 points");
    const double h = f.grid.dx;
    Field<T> out(f.grid);
    const auto& v = f.values;
    out.values[0] = (v[0] * -3.0 + v[1] * 4.0 - v[2]) / (2.0 * h);
    for (std::size_t i = 1; i + 1 < n; ++i) out.values[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    out.values[n - 1] = (v[n - 1] * 3.0 - v[n - 2] * 4.0 + v[n - 3]) / (2.0 * h);
    return out;
}

/// Three-point second derivative; one-sided second order at the ends.
template <typename T>
Field<T> second_derivative(const Field<T>& f) {
    const std::size_t n = f.grid.n;
    if (n < 5) throw std::invalid_argument("second_derivative: need at least 5 points");
    const double h2 = f.grid.dx * f.grid.dx;
    Field<T> out(f.grid);
    const auto& v = f.values;
    out.values[0] = (v[0] * 2.0 - v[1] * 5.0 + v[2] * 4.0 - v[3]) / h2;
    for (std::size_t i = 1; i + 1 < n; ++i)
        out.values[i] = (v[i + 1] - v[i] * 2.0 + v[i - 1]) / h2;
    out.values[n - 1] = (v[n - 1] * 2.0 - v[n - 2] * 5.0 + v[n - 3] * 4.0 - v[n - 4]) / h2;
    return out;
}

/// Seven-point O(dx^6) first derivative on the interior.  The three points
/// next to each boundary fall back to the second-order stencils; all callers
/// sit on densities whose tails vanish there.
template <typename T>
Field<T> derivative6(const Field<T>& f) {
    const std::size_t n = f.grid.n;
    if (n < 16) throw std::invalid_argument("derivative6: need at least 16 points");
    const double h = f.grid.dx;
    Field<T> out = derivative(f);
    const auto& v = f.values;
    for (std::size_t i = 3; i + 3 < n; ++i) {
        out.values[i] = (v[i + 1] - v[i - 1]) * (45.0 / (60.0 * h)) +
                        (v[i - 2] - v[i + 2]) * (9.0 / (60.0 * h)) +
                        (v[i + 3] - v[i - 3]) * (1.0 / (60.0 * h));
    }
    return out;
}

/// Seven-point O(dx^6) second derivative on the interior.
template <typename T>
Field<T> second_derivative6(const Field<T>& f) {
    const std::size_t n = f.grid.n;
    if (n < 16) throw std::invalid_argument("second_derivative6: need at least 16 points");
    const double h2 = f.grid.dx * f.grid.dx;
    Field<T> out = second_derivative(f);
    const auto& v = f.values;
    for (std::size_t i = 3; i + 3 < n; ++i) {
        out.values[i] = (v[i] * -490.0 + (v[i + 1] + v[i - 1]) * 270.0 -
                         (v[i + 2] + v[i - 2]) * 27.0 + (v[i + 3] + v[i - 3]) * 2.0) /
                        (180.0 * h2);
    }
    return out;
}

inline RealField abs_squared(const ComplexField& psi) {
    RealField rho(psi.grid);
    for (std::size_t i = 0; i < psi.size(); ++i) rho.values[i] = std::norm(psi.values[i]);
    return rho;
}

inline double norm_squared(const ComplexField& psi) { return integrate(abs_squared(psi)); }

/// <a|b> = integral conj(a)*b dx.
inline complexd inner_product(const ComplexField& a, const ComplexField& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("inner_product: grid mismatch");
    ComplexField prod(a.grid);
    for (std::size_t i = 0; i < a.size(); ++i)
        prod.values[i] = std::conj(a.values[i]) * b.values[i];
    return integrate(prod);
}

/// Rescales psi so that integral |psi|^2 dx = 1.
inline ComplexField normalize(const ComplexField& psi) {
    const double n2 = norm_squared(psi);
    if (!(n2 > 0.0) || !std::isfinite(n2))
        throw std::invalid_argument("normalize: zero or non-finite norm");
    ComplexField out = psi;
    const double s = 1.0 / std::sqrt(n2);
    for (auto& v : out.values) v *= s;
    return out;
}

/// Relative height of the density at the grid endpoints; the moment and
/// residual routines expect this below ~1e-14.
inline double tail_level(const RealField& rho) {
    const double peak = *std::max_element(rho.values.begin(), rho.values.end());
    if (!(peak > 0.0)) return 0.0;
    return std::max(rho.values.front(), rho.values.back()) / peak;
}

}  // namespace osmotic

#endif
