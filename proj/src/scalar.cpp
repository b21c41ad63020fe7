// scalar.cpp - rational parsing/formatting and the global float tolerance.

#include "qk/scalar.hpp"

#include <algorithm>
#include <cctype>

namespace qk {

double& float_eps() {
    static double eps = 1e-9;
    return eps;
}

const char* errc_name(errc c) {
    switch (c) {
        case errc::env_mismatch: return "env_mismatch";
        case errc::kind_mismatch: return "kind_mismatch";
        case errc::dimension_mismatch: return "dimension_mismatch";
        case errc::unknown_label: return "unknown_label";
        case errc::unknown_register: return "unknown_register";
        case errc::not_hermitian: return "not_hermitian";
        case errc::negative_scalar: return "negative_scalar";
        case errc::solver_failure: return "solver_failure";
        case errc::infeasible_output: return "infeasible_output";
        case errc::infeasible_witness: return "infeasible_witness";
        case errc::idle_violation: return "idle_violation";
        case errc::blockdiag_violation: return "blockdiag_violation";
        case errc::normalization_violation: return "normalization_violation";
        case errc::truncation_too_small: return "truncation_too_small";
        case errc::iteration_limit: return "iteration_limit";
        case errc::parse_error: return "parse_error";
        case errc::io_error: return "io_error";
    }
    return "unknown";
}

Rat parse_rat(const std::string& s) {
    std::string t;
    t.reserve(s.size());
    for (char ch : s)
        if (!std::isspace(static_cast<unsigned char>(ch))) t.push_back(ch);
    if (t.empty()) throw error(errc::parse_error, "empty number");

    // a/b form
    if (auto slash = t.find('/'); slash != std::string::npos) {
        try {
            Rat r(t);
            if (r.get_den() == 0) throw error(errc::parse_error, "zero denominator: " + s);
            r.canonicalize();
            return r;
        } catch (const std::invalid_argument&) {
            throw error(errc::parse_error, "bad rational: " + s);
        }
    }

    bool neg = false;
    std::size_t i = 0;
    if (i < t.size() && (t[i] == '+' || t[i] == '-')) {
        neg = t[i] == '-';
        ++i;
    }
    std::string digits;
    long frac_digits = 0;
    bool seen_point = false, seen_digit = false;
    long exponent = 0;
    for (; i < t.size(); ++i) {
        char ch = t[i];
        if (std::isdigit(static_cast<unsigned char>(ch))) {
            digits.push_back(ch);
            seen_digit = true;
            if (seen_point) ++frac_digits;
        } else if (ch == '.' && !seen_point) {
            seen_point = true;
        } else if ((ch == 'e' || ch == 'E') && seen_digit) {
            try {
                exponent = std::stol(t.substr(i + 1));
            } catch (...) {
                throw error(errc::parse_error, "bad exponent: " + s);
            }
            break;
        } else {
            throw error(errc::parse_error, "bad number: " + s);
        }
    }
    if (!seen_digit) throw error(errc::parse_error, "bad number: " + s);
    if (digits.empty()) digits = "0";

    mpz_class num(digits, 10);
    if (neg) num = -num;
    long p10 = exponent - frac_digits;
    mpz_class den(1);
    if (p10 >= 0) {
        mpz_class scale;
        mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(p10));
        num *= scale;
    } else {
        mpz_ui_pow_ui(den.get_mpz_t(), 10, static_cast<unsigned long>(-p10));
    }
    Rat r(num, den);
    r.canonicalize();
    return r;
}

std::string format_rat(const Rat& v) {
    const mpz_class& den = v.get_den();
    if (den == 1) return v.get_num().get_str();

    // Terminating decimal when den = 2^a * 5^b with few digits.
    mpz_class d = den;
    unsigned long twos = 0, fives = 0;
    while (mpz_divisible_ui_p(d.get_mpz_t(), 2)) {
        mpz_divexact_ui(d.get_mpz_t(), d.get_mpz_t(), 2);
        ++twos;
    }
    while (mpz_divisible_ui_p(d.get_mpz_t(), 5)) {
        mpz_divexact_ui(d.get_mpz_t(), d.get_mpz_t(), 5);
        ++fives;
    }
    unsigned long k = std::max(twos, fives);
    if (d == 1 && k <= 18) {
        mpz_class scale;
        mpz_ui_pow_ui(scale.get_mpz_t(), 10, k);
        mpz_class scaled = v.get_num() * (scale / den);
        bool neg = scaled < 0;
        std::string digits = (neg ? mpz_class(-scaled) : scaled).get_str();
        if (digits.size() <= k) digits.insert(0, k + 1 - digits.size(), '0');
        digits.insert(digits.size() - k, ".");
        return (neg ? "-" : "") + digits;
    }
    return v.get_num().get_str() + "/" + den.get_str();
}

}  // namespace qk
