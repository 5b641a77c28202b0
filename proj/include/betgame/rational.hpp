#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace betgame {

// All measure and capital arithmetic is exact. BigInt/Rational are GMP types;
// rationals are kept canonical (lowest terms, positive denominator) as long as
// they are built through the helpers below or through arithmetic on canonical
// values.
using BigInt = mpz_class;
using Rational = mpq_class;

Rational rat(long num, long den = 1);
Rational rat(const BigInt& num, const BigInt& den);

// 2^e for possibly negative e.
Rational pow2(long e);

BigInt ipow(const BigInt& base, unsigned long exp);
BigInt binomial(unsigned long n, unsigned long k);

// Serialized form is always "num/den" with den > 0, e.g. "3/4", "-1/2", "5/1".
std::string to_string(const Rational& q);
std::string to_string(const BigInt& z);
Rational rational_from_string(const std::string& s);
BigInt bigint_from_string(const std::string& s);

bool is_perfect_square(const BigInt& x, BigInt* root = nullptr);

} // namespace betgame
