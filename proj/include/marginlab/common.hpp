#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace marginlab {

// Exact arithmetic. Expression templates are disabled so the type behaves like a
// plain value inside generic code.
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;

using Vector = std::vector<double>;
using Matrix = std::vector<Vector>;

// Malformed or out-of-contract input.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input that is well-formed but sits on a degenerate case (zero vector,
// single-point space, ...).
class DegenerateInputError : public InputError {
 public:
  using InputError::InputError;
};

// An iterative solver ran out of budget. Carries the best point seen.
class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, Vector best, double value, double gap)
      : std::runtime_error(what), best_(std::move(best)), value_(value), gap_(gap) {}

  const Vector& best() const noexcept { return best_; }
  double value() const noexcept { return value_; }
  double gap() const noexcept { return gap_; }

 private:
  Vector best_;
  double value_;
  double gap_;
};

enum class Arithmetic { Float, Rational };

// Scalar policy used by the templated kernels. Float comparisons go through an
// absolute epsilon; rational comparisons are exact.
template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  static constexpr bool exact = false;
  static constexpr double eps = 1e-9;
  static bool is_zero(double x) { return std::abs(x) <= eps; }
  static bool is_positive(double x) { return x > eps; }
  static bool is_negative(double x) { return x < -eps; }
  static double from_double(double x) { return x; }
  static double to_double(double x) { return x; }
};

template <>
struct ScalarTraits<Rational> {
  static constexpr bool exact = true;
  static bool is_zero(const Rational& x) { return x == 0; }
  static bool is_positive(const Rational& x) { return x > 0; }
  static bool is_negative(const Rational& x) { return x < 0; }
  static Rational from_double(double x) { return Rational(x); }
  static double to_double(const Rational& x) { return x.convert_to<double>(); }
};

// Exact conversion: every finite double is a dyadic rational.
inline Rational to_rational(double x) {
  if (!std::isfinite(x)) throw InputError("cannot convert non-finite value to rational");
  return Rational(x);
}

inline double to_double(const Rational& x) { return x.convert_to<double>(); }

// Parses "a/b", "a", or a decimal literal such as "0.25" into an exact rational.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  auto trim = [](std::string& t) {
    while (!t.empty() && std::isspace(static_cast<unsigned char>(t.front()))) t.erase(t.begin());
    while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back()))) t.pop_back();
  };
  trim(s);
  if (s.empty()) throw InputError("empty rational literal");
  try {
    auto slash = s.find('/');
    if (slash != std::string::npos) {
      Rational num(s.substr(0, slash));
      Rational den(s.substr(slash + 1));
      if (den == 0) throw InputError("zero denominator in '" + s + "'");
      return num / den;
    }
    auto dot = s.find('.');
    if (dot == std::string::npos && s.find_first_of("eE") == std::string::npos) return Rational(s);
    if (s.find_first_of("eE") != std::string::npos) return to_rational(std::stod(s));
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    if (digits.empty() || digits == "-" || digits == "+") throw InputError("bad decimal '" + s + "'");
    Rational scaled(digits);
    Rational den = 1;
    for (std::size_t i = dot + 1; i < s.size(); ++i) den *= 10;
    return scaled / den;
  } catch (const InputError&) {
    throw;
  } catch (const std::exception&) {
    throw InputError("malformed rational literal '" + s + "'");
  }
}

inline std::string rational_to_string(const Rational& x) { return x.str(); }

}  // namespace marginlab
