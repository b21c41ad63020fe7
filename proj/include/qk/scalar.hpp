// scalar.hpp - exact rational and floating scalar support for the qk library.
//
// Generic code is templated on the scalar type T, with two instantiations:
//   qk::Rat  - exact arbitrary-precision rational (GMP mpq_class)
//   double   - floating mode, comparisons subject to the global tolerance
#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace qk {

using Rat = mpq_class;

// Error codes mirror the domain error names used throughout the library.
enum class errc {
    env_mismatch,
    kind_mismatch,
    dimension_mismatch,
    unknown_label,
    unknown_register,
    not_hermitian,
    negative_scalar,
    solver_failure,
    infeasible_output,
    infeasible_witness,
    idle_violation,
    blockdiag_violation,
    normalization_violation,
    truncation_too_small,
    iteration_limit,
    parse_error,
    io_error,
};

struct error : std::runtime_error {
    errc code;
    error(errc c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

const char* errc_name(errc c);

// Global float-mode tolerance. Set once at startup (QK_EPS for the CLI);
// rational mode ignores it.
double& float_eps();

// --------------------------------------------------------------------------
// scalar_traits

template <typename T>
struct scalar_traits;

template <>
struct scalar_traits<Rat> {
    static constexpr bool exact = true;
    static Rat zero() { return Rat(0); }
    static Rat one() { return Rat(1); }
    static Rat from_int(long v) { return Rat(v); }
    static Rat from_ratio(long n, long d) {
        Rat r(n, d);
        r.canonicalize();
        return r;
    }
    static double to_double(const Rat& v) { return v.get_d(); }
    static Rat abs(const Rat& v) { return v < 0 ? Rat(-v) : v; }
    // Exact mode: the comparison tolerance is zero.
    static Rat tol() { return Rat(0); }
    static bool is_zero(const Rat& v) { return v == 0; }
};

template <>
struct scalar_traits<double> {
    static constexpr bool exact = false;
    static double zero() { return 0.0; }
    static double one() { return 1.0; }
    static double from_int(long v) { return static_cast<double>(v); }
    static double from_ratio(long n, long d) { return static_cast<double>(n) / static_cast<double>(d); }
    static double to_double(double v) { return v; }
    static double abs(double v) { return std::fabs(v); }
    static double tol() { return float_eps(); }
    static bool is_zero(double v) { return std::fabs(v) <= float_eps(); }
};

// Parse "123", "-4/5", "0.18", "1.2e-3" into an exact rational.
Rat parse_rat(const std::string& s);

// Canonical text form: integers as "n"; terminating decimals (denominator
// 2^a*5^b, at most 18 fractional digits) as "0.18"-style strings; otherwise
// "num/den". parse_rat round-trips all three.
std::string format_rat(const Rat& v);

// --------------------------------------------------------------------------
// Minimal complex type usable with both double and Rat components.
// (std::complex is only specified for floating-point types.)

template <typename T>
struct Cx {
    T re{};
    T im{};

    Cx() = default;
    Cx(T r) : re(std::move(r)) {}
    Cx(T r, T i) : re(std::move(r)), im(std::move(i)) {}

    friend Cx operator+(const Cx& a, const Cx& b) { return {a.re + b.re, a.im + b.im}; }
    friend Cx operator-(const Cx& a, const Cx& b) { return {a.re - b.re, a.im - b.im}; }
    friend Cx operator-(const Cx& a) { return {-a.re, -a.im}; }
    friend Cx operator*(const Cx& a, const Cx& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend Cx operator*(const T& s, const Cx& a) { return {s * a.re, s * a.im}; }
    friend bool operator==(const Cx& a, const Cx& b) { return a.re == b.re && a.im == b.im; }

    Cx& operator+=(const Cx& o) {
        re += o.re;
        im += o.im;
        return *this;
    }
};

template <typename T>
Cx<T> conj(const Cx<T>& a) {
    return {a.re, -a.im};
}

template <typename T>
T norm_sq(const Cx<T>& a) {
    return a.re * a.re + a.im * a.im;
}

}  // namespace qk
