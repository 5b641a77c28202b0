#include "betgame/rational.hpp"

#include "betgame/errors.hpp"

namespace betgame {

Rational rat(long num, long den) {
  if (den == 0) throw Error("rational with zero denominator");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

Rational rat(const BigInt& num, const BigInt& den) {
  if (den == 0) throw Error("rational with zero denominator");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

Rational pow2(long e) {
  BigInt p;
  mpz_ui_pow_ui(p.get_mpz_t(), 2, static_cast<unsigned long>(e < 0 ? -e : e));
  return e >= 0 ? Rational(p) : rat(BigInt(1), p);
}

BigInt ipow(const BigInt& base, unsigned long exp) {
  BigInt r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), exp);
  return r;
}

BigInt binomial(unsigned long n, unsigned long k) {
  BigInt r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

std::string to_string(const Rational& q) {
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

std::string to_string(const BigInt& z) { return z.get_str(); }

Rational rational_from_string(const std::string& s) {
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) {
      Rational q{BigInt(s)};
      return q;
    }
    BigInt num(s.substr(0, slash));
    BigInt den(s.substr(slash + 1));
    return rat(num, den);
  } catch (const std::invalid_argument&) {
    throw ParseError("bad rational literal: " + s);
  }
}

BigInt bigint_from_string(const std::string& s) {
  try {
    return BigInt(s);
  } catch (const std::invalid_argument&) {
    throw ParseError("bad integer literal: " + s);
  }
}

bool is_perfect_square(const BigInt& x, BigInt* root) {
  if (x < 0) return false;
  BigInt r;
  mpz_sqrt(r.get_mpz_t(), x.get_mpz_t());
  bool ok = (r * r == x);
  if (ok && root) *root = r;
  return ok;
}

} // namespace betgame
