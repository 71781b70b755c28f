#pragma once

#include <gmp.h>

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace sigmach {

// Exact rational scalar. Every value is kept canonical: denominator > 0 and
// gcd(|numerator|, denominator) == 1. All positions, speeds and times in the
// simulator are Rationals; there is no floating point anywhere in the
// semantics.
class Rational {
public:
    Rational() { mpq_init(q_); }
    Rational(long n) {
        mpq_init(q_);
        mpq_set_si(q_, n, 1);
    }
    Rational(long n, long d);
    Rational(const Rational& o) {
        mpq_init(q_);
        mpq_set(q_, o.q_);
    }
    Rational(Rational&& o) noexcept {
        mpq_init(q_);
        mpq_swap(q_, o.q_);
    }
    Rational& operator=(const Rational& o) {
        mpq_set(q_, o.q_);
        return *this;
    }
    Rational& operator=(Rational&& o) noexcept {
        mpq_swap(q_, o.q_);
        return *this;
    }
    ~Rational() { mpq_clear(q_); }

    // Accepts "p", "-p" and "p/q" with q > 0 (decimal digits only).
    static std::optional<Rational> parse(std::string_view text);

    Rational operator+(const Rational& o) const {
        Rational r;
        mpq_add(r.q_, q_, o.q_);
        return r;
    }
    Rational operator-(const Rational& o) const {
        Rational r;
        mpq_sub(r.q_, q_, o.q_);
        return r;
    }
    Rational operator*(const Rational& o) const {
        Rational r;
        mpq_mul(r.q_, q_, o.q_);
        return r;
    }
    Rational operator/(const Rational& o) const;  // o must be nonzero
    Rational operator-() const {
        Rational r;
        mpq_neg(r.q_, q_);
        return r;
    }
    Rational& operator+=(const Rational& o) {
        mpq_add(q_, q_, o.q_);
        return *this;
    }
    Rational& operator-=(const Rational& o) {
        mpq_sub(q_, q_, o.q_);
        return *this;
    }
    Rational& operator*=(const Rational& o) {
        mpq_mul(q_, q_, o.q_);
        return *this;
    }

    bool operator==(const Rational& o) const { return mpq_equal(q_, o.q_) != 0; }
    bool operator!=(const Rational& o) const { return !(*this == o); }
    bool operator<(const Rational& o) const { return mpq_cmp(q_, o.q_) < 0; }
    bool operator<=(const Rational& o) const { return mpq_cmp(q_, o.q_) <= 0; }
    bool operator>(const Rational& o) const { return mpq_cmp(q_, o.q_) > 0; }
    bool operator>=(const Rational& o) const { return mpq_cmp(q_, o.q_) >= 0; }

    int sign() const { return mpq_sgn(q_); }
    bool is_zero() const { return sign() == 0; }
    Rational abs() const {
        Rational r;
        mpq_abs(r.q_, q_);
        return r;
    }
    bool is_integer() const { return mpz_cmp_ui(mpq_denref(q_), 1) == 0; }

    // Canonical textual form: "p" when the denominator is 1, else "p/q".
    std::string str() const;
    std::string numerator_str() const;
    std::string denominator_str() const;

    // true when the internal representation satisfies the canonical-form
    // invariant; exposed so tests can assert closure under arithmetic.
    bool is_canonical() const;

    // Lossy; used only when emitting diagram coordinates.
    double to_double() const { return mpq_get_d(q_); }

    // The denominator (or |numerator|) as an integer-valued Rational.
    Rational denominator_value() const;
    Rational numerator_abs_value() const;

    // lcm of two integer-valued Rationals.
    static Rational integer_lcm(const Rational& a, const Rational& b);

    friend void swap(Rational& a, Rational& b) noexcept { mpq_swap(a.q_, b.q_); }

private:
    mpq_t q_;
};

inline Rational min(const Rational& a, const Rational& b) { return a < b ? a : b; }
inline Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

}  // namespace sigmach
