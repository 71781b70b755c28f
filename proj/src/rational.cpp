#include "sigmach/rational.hpp"

#include <cctype>
#include <stdexcept>

namespace sigmach {

Rational::Rational(long n, long d) {
    if (d == 0) throw std::invalid_argument("Rational: zero denominator");
    mpq_init(q_);
    mpq_set_si(q_, n, 1);
    mpq_t den;
    mpq_init(den);
    mpq_set_si(den, d, 1);
    mpq_div(q_, q_, den);
    mpq_clear(den);
}

Rational Rational::operator/(const Rational& o) const {
    if (o.is_zero()) throw std::invalid_argument("Rational: division by zero");
    Rational r;
    mpq_div(r.q_, q_, o.q_);
    return r;
}

std::optional<Rational> Rational::parse(std::string_view text) {
    if (text.empty()) return std::nullopt;
    size_t i = 0;
    bool neg = false;
    if (text[i] == '-') {
        neg = true;
        ++i;
    }
    auto digits = [&](std::string& out) {
        size_t start = i;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) out += text[i++];
        return i > start;
    };
    std::string num, den;
    if (!digits(num)) return std::nullopt;
    if (i < text.size()) {
        if (text[i] != '/') return std::nullopt;
        ++i;
        if (!digits(den) || i != text.size()) return std::nullopt;
    }
    Rational r;
    mpz_t n, d;
    mpz_init(n);
    mpz_init(d);
    mpz_set_str(n, num.c_str(), 10);
    if (den.empty())
        mpz_set_ui(d, 1);
    else
        mpz_set_str(d, den.c_str(), 10);
    if (mpz_sgn(d) == 0) {
        mpz_clear(n);
        mpz_clear(d);
        return std::nullopt;
    }
    if (neg) mpz_neg(n, n);
    mpq_set_num(r.q_, n);
    mpq_set_den(r.q_, d);
    mpq_canonicalize(r.q_);
    mpz_clear(n);
    mpz_clear(d);
    return r;
}

static std::string mpz_to_string(const mpz_t z) {
    char* s = mpz_get_str(nullptr, 10, z);
    std::string out(s);
    void (*freefunc)(void*, size_t);
    mp_get_memory_functions(nullptr, nullptr, &freefunc);
    freefunc(s, out.size() + 1);
    return out;
}

std::string Rational::str() const {
    std::string out = mpz_to_string(mpq_numref(q_));
    if (!is_integer()) {
        out += '/';
        out += mpz_to_string(mpq_denref(q_));
    }
    return out;
}

std::string Rational::numerator_str() const { return mpz_to_string(mpq_numref(q_)); }
std::string Rational::denominator_str() const { return mpz_to_string(mpq_denref(q_)); }

Rational Rational::denominator_value() const {
    Rational r;
    mpq_set_num(r.q_, mpq_denref(q_));
    mpz_set_ui(mpq_denref(r.q_), 1);
    return r;
}

Rational Rational::numerator_abs_value() const {
    Rational r;
    mpq_set_num(r.q_, mpq_numref(q_));
    mpz_abs(mpq_numref(r.q_), mpq_numref(r.q_));
    mpz_set_ui(mpq_denref(r.q_), 1);
    return r;
}

Rational Rational::integer_lcm(const Rational& a, const Rational& b) {
    if (!a.is_integer() || !b.is_integer()) throw std::invalid_argument("integer_lcm: operands must be integers");
    Rational r;
    mpz_lcm(mpq_numref(r.q_), mpq_numref(a.q_), mpq_numref(b.q_));
    mpz_set_ui(mpq_denref(r.q_), 1);
    return r;
}

bool Rational::is_canonical() const {
    if (mpz_sgn(mpq_denref(q_)) <= 0) return false;
    mpz_t g;
    mpz_init(g);
    mpz_gcd(g, mpq_numref(q_), mpq_denref(q_));
    bool ok = mpz_cmp_ui(g, 1) == 0;
    mpz_clear(g);
    return ok;
}

}  // namespace sigmach
