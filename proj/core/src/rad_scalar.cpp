// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "mdlab/rad_scalar.hpp"

#include <mpfr.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>

#include "mdlab/errors.hpp"

namespace mdlab {

namespace {

std::atomic<int> g_max_bits{256};
std::atomic<bool> g_symbolic{true};
std::atomic<int> g_symbolic_max{24};

constexpr unsigned kSieveBound = 1u << 16;

const std::vector<unsigned>& small_primes() {
  static const std::vector<unsigned> primes = [] {
    std::vector<bool> composite(kSieveBound, false);
    std::vector<unsigned> out;
    for (unsigned i = 2; i < kSieveBound; ++i) {
      if (composite[i]) continue;
      out.push_back(i);
      for (unsigned long j = static_cast<unsigned long>(i) * i; j < kSieveBound; j += i)
        composite[j] = true;
    }
    return out;
  }();
  return primes;
}

// RAII wrapper over mpfr_t.
class Mpfr {
 public:
  explicit Mpfr(mpfr_prec_t bits) { mpfr_init2(v_, bits); }
  ~Mpfr() { mpfr_clear(v_); }
  Mpfr(const Mpfr&) = delete;
  Mpfr& operator=(const Mpfr&) = delete;
  mpfr_ptr get() { return v_; }

 private:
  mpfr_t v_;
};

// Decides the sign with plain doubles when the rounding error is provably
// smaller than the magnitude of the result. Returns 2 when inconclusive.
int fast_sign(const std::vector<RadScalar::Term>& terms) {
  double sum = 0.0;
  double mag = 0.0;
  for (const auto& t : terms) {
    const double c = t.coef.get_d();
    const double k = t.key.get_d();
    const double v = c * std::sqrt(k);
    const double a = std::fabs(v);
    if (!(a > 1e-280) || !(a < 1e280)) return 2;
    sum += v;
    mag += a;
  }
  const double n = static_cast<double>(terms.size());
  const double bound = (n + 8.0) * std::ldexp(mag, -50);
  if (sum > bound) return 1;
  if (sum < -bound) return -1;
  return 2;
}

// High-precision evaluation with a rigorous error bound.
void mpfr_eval(const std::vector<RadScalar::Term>& terms, int bits, Mpfr& sum, Mpfr& bound) {
  Mpfr term(bits), root(bits), mag(bits);
  mpfr_set_zero(sum.get(), 1);
  mpfr_set_zero(mag.get(), 1);
  for (const auto& t : terms) {
    mpfr_set_z(root.get(), t.key.get_mpz_t(), MPFR_RNDN);
    mpfr_sqrt(root.get(), root.get(), MPFR_RNDN);
    mpfr_set_q(term.get(), t.coef.get_mpq_t(), MPFR_RNDN);
    mpfr_mul(term.get(), term.get(), root.get(), MPFR_RNDN);
    mpfr_add(sum.get(), sum.get(), term.get(), MPFR_RNDN);
    mpfr_abs(term.get(), term.get(), MPFR_RNDN);
    mpfr_add(mag.get(), mag.get(), term.get(), MPFR_RNDU);
  }
  // Each term carries at most 4 roundings, the sum n more: (n + 8) * 2^(1-bits) * sum|t|.
  mpfr_mul_ui(bound.get(), mag.get(), static_cast<unsigned long>(terms.size() + 8), MPFR_RNDU);
  mpfr_mul_2si(bound.get(), bound.get(), 1 - bits, MPFR_RNDU);
}

int mpfr_sign(const std::vector<RadScalar::Term>& terms, int bits) {
  Mpfr sum(bits), bound(bits);
  mpfr_eval(terms, bits, sum, bound);
  if (mpfr_cmp(sum.get(), bound.get()) > 0) return 1;
  mpfr_neg(bound.get(), bound.get(), MPFR_RNDN);
  if (mpfr_cmp(sum.get(), bound.get()) < 0) return -1;
  return 2;
}

// Pairwise coprime square-free integers whose products give every key.
std::vector<Integer> coprime_base(const std::vector<RadScalar::Term>& terms) {
  std::vector<Integer> base;
  for (const auto& t : terms)
    if (t.key != 1) base.push_back(t.key);
  bool changed = true;
  while (changed) {
    changed = false;
    std::sort(base.begin(), base.end());
    base.erase(std::unique(base.begin(), base.end()), base.end());
    for (std::size_t i = 0; i < base.size() && !changed; ++i) {
      for (std::size_t j = i + 1; j < base.size() && !changed; ++j) {
        Integer g = gcd(base[i], base[j]);
        if (g == 1) continue;
        Integer a = base[i] / g;
        Integer b = base[j] / g;
        base.erase(base.begin() + static_cast<long>(j));
        base.erase(base.begin() + static_cast<long>(i));
        for (Integer* v : {&g, &a, &b})
          if (*v != 1) base.push_back(*v);
        changed = true;
      }
    }
  }
  return base;
}

int sign_impl(const RadScalar& x, int radicals_budget);

// sign(A + B*sqrt(d)) where sqrt(d) is independent of every radical in A, B.
int symbolic_sign(const RadScalar& x, int radicals_budget) {
  const auto base = coprime_base(x.terms());
  if (base.empty()) return sgn(x.rational());
  if (static_cast<int>(base.size()) > radicals_budget)
    throw PrecisionError("sign undecidable: " + std::to_string(base.size()) +
                         " independent radicals exceed the symbolic budget");
  const Integer& d = base.front();
  std::vector<std::pair<Rational, Rational>> a_pairs;
  std::vector<std::pair<Rational, Rational>> b_pairs;
  for (const auto& t : x.terms()) {
    if (t.key % d == 0) {
      b_pairs.emplace_back(t.coef, Rational(Integer(t.key / d)));
    } else {
      a_pairs.emplace_back(t.coef, Rational(t.key));
    }
  }
  const RadScalar a = RadScalar::from_pairs(a_pairs);
  const RadScalar b = RadScalar::from_pairs(b_pairs);
  const int sa = sign_impl(a, radicals_budget);
  const int sb = sign_impl(b, radicals_budget);
  if (sb == 0) return sa;
  if (sa == 0) return sb;
  if (sa == sb) return sa;
  // Opposite signs: compare |A| with |B| sqrt(d) through A^2 - d B^2.
  const RadScalar diff = a.square() - Rational(d) * b.square();
  return sa * sign_impl(diff, radicals_budget);
}

int sign_impl(const RadScalar& x, int radicals_budget) {
  const auto& terms = x.terms();
  if (terms.empty()) return 0;
  if (terms.size() == 1) return sgn(terms.front().coef);
  if (const int s = fast_sign(terms); s != 2) return s;
  const int max_bits = std::max(64, g_max_bits.load());
  for (int bits = 64; bits <= max_bits; bits *= 2) {
    if (const int s = mpfr_sign(terms, bits); s != 2) return s;
    if (bits < max_bits && bits * 2 > max_bits) bits = max_bits / 2;
  }
  if (!g_symbolic.load())
    throw PrecisionError("sign undecidable at " + std::to_string(max_bits) +
                         " bits: " + x.to_string());
  return symbolic_sign(x, radicals_budget);
}

}  // namespace

PrecisionPolicy precision_policy() {
  return PrecisionPolicy{g_max_bits.load(), g_symbolic.load(), g_symbolic_max.load()};
}

void set_precision_policy(const PrecisionPolicy& policy) {
  if (policy.max_bits < 64) throw ValidationError("precision budget must be at least 64 bits");
  g_max_bits = policy.max_bits;
  g_symbolic = policy.symbolic_fallback;
  g_symbolic_max = policy.symbolic_max_radicals;
}

std::pair<Integer, Integer> squarefree_decompose(const Integer& n) {
  if (n <= 0) throw DomainError("squarefree_decompose needs a positive integer");
  Integer rest = n;
  Integer outside = 1;
  Integer core = 1;
  for (unsigned p : small_primes()) {
    if (Integer(p) * p > rest) break;
    unsigned e = 0;
    while (mpz_divisible_ui_p(rest.get_mpz_t(), p)) {
      mpz_divexact_ui(rest.get_mpz_t(), rest.get_mpz_t(), p);
      ++e;
    }
    if (e == 0) continue;
    for (unsigned i = 0; i < e / 2; ++i) outside *= p;
    if (e % 2 == 1) core *= p;
  }
  if (rest == 1) return {outside, core};
  const Integer bound(kSieveBound);
  if (rest < bound * bound) {
    core *= rest;  // no factor below the bound, so prime
  } else if (mpz_perfect_square_p(rest.get_mpz_t())) {
    Integer root;
    mpz_sqrt(root.get_mpz_t(), rest.get_mpz_t());
    outside *= root;
  } else if (rest < bound * bound * bound) {
    core *= rest;  // p or p*q with distinct large primes
  } else {
    throw PrecisionError("cannot certify radicand " + n.get_str() + " square-free");
  }
  return {outside, core};
}

RadScalar::RadScalar(const Rational& r) {
  if (r != 0) {
    terms_.push_back(Term{r, Integer(1)});
    terms_.back().coef.canonicalize();
  }
}

RadScalar::RadScalar(long v) {
  if (v != 0) terms_.push_back(Term{Rational(v), Integer(1)});
}

RadScalar RadScalar::sqrt_of(const Rational& q) { return scaled_sqrt(Rational(1), q); }

RadScalar RadScalar::scaled_sqrt(const Rational& coef, const Rational& q) {
  if (q < 0) throw DomainError("square root of a negative rational");
  RadScalar out;
  if (q == 0 || coef == 0) return out;
  // sqrt(a/b) = (sa/sb) sqrt(ka/kb) = sa/(sb kb) * sqrt(ka kb), gcd(ka, kb) = 1.
  const auto [sa, ka] = squarefree_decompose(q.get_num());
  const auto [sb, kb] = squarefree_decompose(q.get_den());
  Rational c(sa, sb * kb);
  c.canonicalize();
  out.terms_.push_back(Term{coef * c, ka * kb});
  return out;
}

bool RadScalar::is_rational() const {
  return terms_.empty() || (terms_.size() == 1 && terms_.front().key == 1);
}

Rational RadScalar::rational() const {
  if (!is_rational()) throw DomainError("value " + to_string() + " is not rational");
  return rational_part();
}

Rational RadScalar::rational_part() const {
  if (!terms_.empty() && terms_.front().key == 1) return terms_.front().coef;
  return Rational(0);
}

int RadScalar::sign() const { return sign_impl(*this, g_symbolic_max.load()); }

double RadScalar::approx() const {
  double s = 0.0;
  for (const auto& t : terms_) s += t.coef.get_d() * std::sqrt(t.key.get_d());
  return s;
}

CertifiedFloat RadScalar::certify(int bits) const {
  if (terms_.empty()) return {};
  bits = std::max(bits, 64);
  Mpfr sum(bits), bound(bits);
  mpfr_eval(terms_, bits, sum, bound);
  CertifiedFloat out;
  out.value = mpfr_get_d(sum.get(), MPFR_RNDN);
  // Rounding to double adds at most half an ulp.
  const double ulp = std::fabs(out.value) * std::numeric_limits<double>::epsilon();
  out.error = mpfr_get_d(bound.get(), MPFR_RNDU) + ulp;
  return out;
}

RadScalar RadScalar::operator-() const {
  RadScalar out = *this;
  for (auto& t : out.terms_) t.coef = -t.coef;
  return out;
}

RadScalar& RadScalar::operator+=(const RadScalar& o) {
  if (o.terms_.empty()) return *this;
  if (terms_.empty()) return *this = o;
  std::vector<Term> merged;
  merged.reserve(terms_.size() + o.terms_.size());
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < terms_.size() || j < o.terms_.size()) {
    if (j == o.terms_.size() || (i < terms_.size() && terms_[i].key < o.terms_[j].key)) {
      merged.push_back(std::move(terms_[i++]));
    } else if (i == terms_.size() || o.terms_[j].key < terms_[i].key) {
      merged.push_back(o.terms_[j++]);
    } else {
      Rational c = terms_[i].coef + o.terms_[j].coef;
      if (c != 0) merged.push_back(Term{std::move(c), std::move(terms_[i].key)});
      ++i;
      ++j;
    }
  }
  terms_ = std::move(merged);
  return *this;
}

RadScalar& RadScalar::operator-=(const RadScalar& o) { return *this += -o; }

RadScalar& RadScalar::operator*=(const RadScalar& o) { return *this = *this * o; }

RadScalar& RadScalar::operator*=(const Rational& r) {
  if (r == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& t : terms_) t.coef *= r;
  return *this;
}

RadScalar operator*(const RadScalar& a, const RadScalar& b) {
  RadScalar out;
  if (a.terms_.empty() || b.terms_.empty()) return out;
  if (b.terms_.size() == 1 && b.terms_.front().key == 1) return a * b.terms_.front().coef;
  if (a.terms_.size() == 1 && a.terms_.front().key == 1) return b * a.terms_.front().coef;
  out.terms_.reserve(a.terms_.size() * b.terms_.size());
  for (const auto& s : a.terms_) {
    for (const auto& t : b.terms_) {
      // sqrt(k1) sqrt(k2) = g sqrt((k1/g)(k2/g)), and (k1/g)(k2/g) stays square-free.
      if (s.key == 1 || t.key == 1) {
        out.terms_.push_back({s.coef * t.coef, s.key * t.key});
        continue;
      }
      Integer g = gcd(s.key, t.key);
      Integer key = (s.key / g) * (t.key / g);
      out.terms_.push_back({s.coef * t.coef * g, std::move(key)});
    }
  }
  out.normalize();
  return out;
}

RadScalar operator/(RadScalar a, const Rational& r) {
  if (r == 0) throw DomainError("division by zero");
  for (auto& t : a.terms_) t.coef /= r;
  return a;
}

bool operator==(const RadScalar& a, const RadScalar& b) {
  if (a.terms_.size() != b.terms_.size()) return false;
  for (std::size_t i = 0; i < a.terms_.size(); ++i) {
    if (a.terms_[i].key != b.terms_[i].key || a.terms_[i].coef != b.terms_[i].coef) return false;
  }
  return true;
}

std::strong_ordering operator<=>(const RadScalar& a, const RadScalar& b) {
  const int s = compare(a, b);
  if (s < 0) return std::strong_ordering::less;
  if (s > 0) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

void RadScalar::normalize() {
  std::sort(terms_.begin(), terms_.end(),
            [](const Term& x, const Term& y) { return x.key < y.key; });
  std::vector<Term> out;
  out.reserve(terms_.size());
  for (auto& t : terms_) {
    if (!out.empty() && out.back().key == t.key) {
      out.back().coef += t.coef;
    } else {
      if (!out.empty() && out.back().coef == 0) out.pop_back();
      out.push_back(std::move(t));
    }
  }
  if (!out.empty() && out.back().coef == 0) out.pop_back();
  terms_ = std::move(out);
}

std::string RadScalar::to_string() const {
  if (terms_.empty()) return "0/1";
  std::ostringstream os;
  bool first = true;
  for (const auto& t : terms_) {
    Rational c = t.coef;
    if (!first) {
      os << (c < 0 ? " - " : " + ");
      if (c < 0) c = -c;
    }
    os << mdlab::to_string(c);
    if (t.key != 1) os << "*sqrt(" << t.key.get_str() << ")";
    first = false;
  }
  return os.str();
}

std::vector<std::pair<Rational, Rational>> RadScalar::to_pairs() const {
  std::vector<std::pair<Rational, Rational>> out;
  out.reserve(terms_.size());
  for (const auto& t : terms_) out.emplace_back(t.coef, Rational(t.key));
  return out;
}

RadScalar RadScalar::from_pairs(const std::vector<std::pair<Rational, Rational>>& pairs) {
  RadScalar out;
  for (const auto& [r, q] : pairs) {
    if (q.get_den() == 1 && r != 0) {
      // Fast path for keys that are already canonical integers.
      const auto [s, k] = squarefree_decompose(q.get_num() == 0 ? Integer(1) : q.get_num());
      if (q == 0) continue;
      out.terms_.push_back(Term{r * s, k});
      continue;
    }
    out += scaled_sqrt(r, q);
  }
  out.normalize();
  return out;
}

RadScalar max(const RadScalar& a, const RadScalar& b) { return compare(a, b) >= 0 ? a : b; }
RadScalar min(const RadScalar& a, const RadScalar& b) { return compare(a, b) <= 0 ? a : b; }

int compare(const RadScalar& a, const RadScalar& b) {
  // Cheap exits for the common rational case.
  if (a.is_rational() && b.is_rational()) return sgn(a.rational_part() - b.rational_part());
  if (a == b) return 0;
  return (a - b).sign();
}

}  // namespace mdlab
