#pragma once

#include <span>
#include <string>
#include <vector>

namespace fracritz {

enum class Side { Left, Right };

/// Interval [a, b] plus the endpoint the power basis is anchored at.
/// Left uses s = x - a, Right uses s = b - x.
class Anchor {
 public:
  Anchor(Side side, double a, double b);

  Side side() const noexcept { return side_; }
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double length() const noexcept { return b_ - a_; }

  /// Shifted coordinate s(x). Throws InvalidArgument when x is outside [a, b]
  /// by more than a few ulps of the interval length.
  double shift(double x) const;

  /// ds/dx: +1 for Left, -1 for Right.
  double orientation() const noexcept { return side_ == Side::Left ? 1.0 : -1.0; }

  bool operator==(const Anchor&) const = default;

 private:
  Side side_;
  double a_;
  double b_;
};

/// Sum of c_i s^i with s the anchored coordinate.
class Polynomial {
 public:
  Polynomial(Anchor anchor, std::vector<double> coeffs);

  const Anchor& anchor() const noexcept { return anchor_; }
  std::span<const double> coeffs() const noexcept { return coeffs_; }
  /// Index of the last stored coefficient (trailing zeros included).
  int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }

  double evaluate(double x) const;
  /// Value in the shifted coordinate, no range check.
  double evaluate_shifted(double s) const;

  /// k-th derivative with respect to x, in the same anchored basis.
  Polynomial derivative(int k = 1) const;

  /// Drops trailing zero coefficients (keeps at least c_0).
  Polynomial normalized() const;

  Polynomial operator+(const Polynomial& other) const;
  Polynomial operator*(double scale) const;

 private:
  Anchor anchor_;
  std::vector<double> coeffs_;
};

struct Term {
  double coeff;
  double exponent;
};

/// Finite sum of c_k s^(p_k) with real exponents p_k > -1.
///
/// Construction normalizes: terms are sorted by exponent, exponents within
/// 1e-10 of each other are merged and zero coefficients are dropped.
class GeneralizedPolynomial {
 public:
  explicit GeneralizedPolynomial(Anchor anchor, std::vector<Term> terms = {});

  const Anchor& anchor() const noexcept { return anchor_; }
  std::span<const Term> terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }

  /// Throws SingularityError at the anchor endpoint when a negative exponent
  /// is present.
  double evaluate(double x) const;
  double evaluate_shifted(double s) const;

  static constexpr double kExponentMergeTol = 1e-10;

 private:
  Anchor anchor_;
  std::vector<Term> terms_;
};

enum class OperatorKind { RLIntegral, RLDerivative, CaputoDerivative };

/// One of the six fractional operators: {left, right} x {RL integral,
/// RL derivative, Caputo derivative} of order alpha > 0.
class FractionalOperator {
 public:
  FractionalOperator(OperatorKind kind, Side side, double alpha);

  OperatorKind kind() const noexcept { return kind_; }
  Side side() const noexcept { return side_; }
  double alpha() const noexcept { return alpha_; }
  /// ceil(alpha), the integer order n with n - 1 < alpha <= n.
  int integer_order() const noexcept { return order_; }

  bool operator==(const FractionalOperator&) const = default;

 private:
  OperatorKind kind_;
  Side side_;
  double alpha_;
  int order_;
};

std::string to_string(OperatorKind kind);
std::string to_string(Side side);

/// Closed-form image of a polynomial under a fractional operator.
///
/// Each term c_i s^i maps to
///   RL integral:   c_i Gamma(i+1)/Gamma(i+alpha+1) s^(i+alpha)
///   RL derivative: c_i Gamma(i+1)/Gamma(i-alpha+1) s^(i-alpha)
///   Caputo:        0 for i < ceil(alpha), otherwise as the RL derivative.
/// 1/Gamma at a pole is exactly zero. Throws InvalidArgument on side mismatch
/// and SingularityError when a non-zero term would get exponent <= -1.
GeneralizedPolynomial apply_fractional(const FractionalOperator& op,
                                       const Polynomial& p);

/// Caputo derivative computed as the RL derivative minus the boundary series
/// sum_{k<n} p^(k)(anchor) / Gamma(k - alpha + 1) s^(k - alpha).
/// Validation route only; the solver uses apply_fractional.
GeneralizedPolynomial caputo_from_rl(double alpha, const Polynomial& p);

namespace detail {

/// Fractional integral of a generalized polynomial by exponent arithmetic
/// (s^p -> Gamma(p+1)/Gamma(p+alpha+1) s^(p+alpha)). Used to check the
/// semigroup law on polynomial images; not part of the solver path.
GeneralizedPolynomial integrate_terms(double alpha,
                                      const GeneralizedPolynomial& g);

}  // namespace detail

}  // namespace fracritz
