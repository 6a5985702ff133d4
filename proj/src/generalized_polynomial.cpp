#include "fracritz/generalized_polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fracritz/errors.hpp"
#include "fracritz/special_functions.hpp"

namespace fracritz {

Anchor::Anchor(Side side, double a, double b) : side_(side), a_(a), b_(b) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
    std::ostringstream os;
    os << "interval endpoints must satisfy a < b, got [" << a << ", " << b << "]";
    throw InvalidArgument(os.str());
  }
}

double Anchor::shift(double x) const {
  const double slack = 1e-12 * (b_ - a_);
  if (!(x >= a_ - slack && x <= b_ + slack)) {
    std::ostringstream os;
    os << "point " << x << " outside interval [" << a_ << ", " << b_ << "]";
    throw InvalidArgument(os.str());
  }
  const double s = side_ == Side::Left ? x - a_ : b_ - x;
  return std::max(s, 0.0);
}

// --- Polynomial -------------------------------------------------------------

Polynomial::Polynomial(Anchor anchor, std::vector<double> coeffs)
    : anchor_(anchor), coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) coeffs_.push_back(0.0);
}

double Polynomial::evaluate_shifted(double s) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
    acc = acc * s + *it;
  }
  return acc;
}

double Polynomial::evaluate(double x) const {
  return evaluate_shifted(anchor_.shift(x));
}

Polynomial Polynomial::derivative(int k) const {
  if (k < 0) throw InvalidArgument("derivative order must be non-negative");
  std::vector<double> c = coeffs_;
  const double sign = anchor_.orientation();
  for (int step = 0; step < k; ++step) {
    if (c.size() <= 1) {
      c.assign(1, 0.0);
      break;
    }
    std::vector<double> next(c.size() - 1);
    for (std::size_t i = 1; i < c.size(); ++i) {
      next[i - 1] = sign * static_cast<double>(i) * c[i];
    }
    c = std::move(next);
  }
  return Polynomial(anchor_, std::move(c));
}

Polynomial Polynomial::normalized() const {
  std::vector<double> c = coeffs_;
  while (c.size() > 1 && c.back() == 0.0) c.pop_back();
  return Polynomial(anchor_, std::move(c));
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
  if (!(anchor_ == other.anchor_)) {
    throw InvalidArgument("cannot add polynomials with different anchors");
  }
  std::vector<double> c(std::max(coeffs_.size(), other.coeffs_.size()), 0.0);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) c[i] += coeffs_[i];
  for (std::size_t i = 0; i < other.coeffs_.size(); ++i) c[i] += other.coeffs_[i];
  return Polynomial(anchor_, std::move(c));
}

Polynomial Polynomial::operator*(double scale) const {
  std::vector<double> c = coeffs_;
  for (double& v : c) v *= scale;
  return Polynomial(anchor_, std::move(c));
}

// --- GeneralizedPolynomial --------------------------------------------------

GeneralizedPolynomial::GeneralizedPolynomial(Anchor anchor,
                                             std::vector<Term> terms)
    : anchor_(anchor) {
  std::stable_sort(terms.begin(), terms.end(), [](const Term& l, const Term& r) {
    return l.exponent < r.exponent;
  });
  for (const Term& t : terms) {
    if (!std::isfinite(t.coeff) || !std::isfinite(t.exponent)) {
      throw InvalidArgument("generalized polynomial term is not finite");
    }
    if (!terms_.empty() &&
        std::abs(t.exponent - terms_.back().exponent) <= kExponentMergeTol) {
      terms_.back().coeff += t.coeff;
    } else {
      terms_.push_back(t);
    }
  }
  std::erase_if(terms_, [](const Term& t) { return t.coeff == 0.0; });
  for (const Term& t : terms_) {
    if (t.exponent <= -1.0) {
      std::ostringstream os;
      os << "term with exponent " << t.exponent
         << " is not integrable at the anchor endpoint";
      throw SingularityError(os.str());
    }
  }
}

double GeneralizedPolynomial::evaluate_shifted(double s) const {
  double acc = 0.0;
  for (const Term& t : terms_) {
    if (t.exponent == 0.0) {
      acc += t.coeff;
    } else if (s == 0.0) {
      if (t.exponent < 0.0) {
        throw SingularityError("generalized polynomial evaluated at its "
                               "singular anchor endpoint");
      }
    } else {
      acc += t.coeff * std::pow(s, t.exponent);
    }
  }
  return acc;
}

double GeneralizedPolynomial::evaluate(double x) const {
  return evaluate_shifted(anchor_.shift(x));
}

// --- FractionalOperator -----------------------------------------------------

FractionalOperator::FractionalOperator(OperatorKind kind, Side side, double alpha)
    : kind_(kind), side_(side), alpha_(alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw InvalidArgument("fractional order must be positive and finite");
  }
  order_ = static_cast<int>(std::ceil(alpha));
}

std::string to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::RLIntegral: return "rl_integral";
    case OperatorKind::RLDerivative: return "rl_derivative";
    case OperatorKind::CaputoDerivative: return "caputo";
  }
  return "?";
}

std::string to_string(Side side) { return side == Side::Left ? "left" : "right"; }

namespace {

// Raw RL-derivative image, before any integrability check.
std::vector<Term> rl_derivative_terms(double alpha, const Polynomial& p) {
  std::vector<Term> out;
  const auto c = p.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] == 0.0) continue;
    const double di = static_cast<double>(i);
    const double rg = reciprocal_gamma(di - alpha + 1.0);
    if (rg == 0.0) continue;
    out.push_back({c[i] * gamma(di + 1.0) * rg, di - alpha});
  }
  return out;
}

}  // namespace

GeneralizedPolynomial apply_fractional(const FractionalOperator& op,
                                       const Polynomial& p) {
  if (op.side() != p.anchor().side()) {
    throw InvalidArgument(to_string(op.side()) + " operator applied to a " +
                          to_string(p.anchor().side()) + "-anchored polynomial");
  }
  const double alpha = op.alpha();
  const auto c = p.coeffs();
  std::vector<Term> terms;
  switch (op.kind()) {
    case OperatorKind::RLIntegral:
      for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i] == 0.0) continue;
        const double di = static_cast<double>(i);
        terms.push_back({c[i] * gamma(di + 1.0) * reciprocal_gamma(di + alpha + 1.0),
                         di + alpha});
      }
      break;
    case OperatorKind::RLDerivative:
      terms = rl_derivative_terms(alpha, p);
      break;
    case OperatorKind::CaputoDerivative: {
      std::vector<double> trimmed(c.begin(), c.end());
      for (std::size_t i = 0; i < trimmed.size() && static_cast<int>(i) < op.integer_order(); ++i) {
        trimmed[i] = 0.0;
      }
      terms = rl_derivative_terms(alpha, Polynomial(p.anchor(), std::move(trimmed)));
      break;
    }
  }
  return GeneralizedPolynomial(p.anchor(), std::move(terms));
}

GeneralizedPolynomial caputo_from_rl(double alpha, const Polynomial& p) {
  const FractionalOperator op(OperatorKind::CaputoDerivative, p.anchor().side(), alpha);
  std::vector<Term> terms = rl_derivative_terms(alpha, p);
  const double orient = p.anchor().orientation();
  for (int k = 0; k < op.integer_order(); ++k) {
    // k-th derivative in the anchored coordinate s at s = 0.
    const double dk = p.derivative(k).evaluate_shifted(0.0) * std::pow(orient, k);
    const double rg = reciprocal_gamma(static_cast<double>(k) - alpha + 1.0);
    if (dk == 0.0 || rg == 0.0) continue;
    const double coeff = dk * rg;
    const double exponent = static_cast<double>(k) - alpha;
    auto match = std::find_if(terms.begin(), terms.end(), [&](const Term& t) {
      return std::abs(t.exponent - exponent) <= GeneralizedPolynomial::kExponentMergeTol;
    });
    if (match == terms.end()) {
      terms.push_back({-coeff, exponent});
      continue;
    }
    const double diff = match->coeff - coeff;
    // Boundary terms cancel the low-order RL terms; flush the roundoff residue.
    match->coeff = std::abs(diff) <= 1e-13 * std::abs(coeff) ? 0.0 : diff;
  }
  return GeneralizedPolynomial(p.anchor(), std::move(terms));
}

namespace detail {

GeneralizedPolynomial integrate_terms(double alpha, const GeneralizedPolynomial& g) {
  if (!(alpha > 0.0)) throw InvalidArgument("fractional order must be positive");
  std::vector<Term> out;
  for (const Term& t : g.terms()) {
    out.push_back({t.coeff * gamma(t.exponent + 1.0) *
                       reciprocal_gamma(t.exponent + alpha + 1.0),
                   t.exponent + alpha});
  }
  return GeneralizedPolynomial(g.anchor(), std::move(out));
}

}  // namespace detail

}  // namespace fracritz
