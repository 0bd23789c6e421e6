#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <span>
#include <string>

#include "errors.hpp"
#include "qubit_algebra.hpp"

namespace lglab {

/// Dichotomic measurement outcome.
enum class Outcome : int { plus = 1, minus = -1 };

inline constexpr std::array<Outcome, 2> kOutcomes{Outcome::plus, Outcome::minus};

constexpr int sign(Outcome m) { return static_cast<int>(m); }
constexpr std::size_t slot(Outcome m) { return m == Outcome::plus ? 0 : 1; }
constexpr Outcome flip(Outcome m) { return m == Outcome::plus ? Outcome::minus : Outcome::plus; }

/// Amplitudes cos(theta)|0> + e^{i phi} sin(theta)|1>.
struct PureStateParams {
  double theta = 0.0;
  double phi = 0.0;
};

inline Mat2 make_state(const PureStateParams& s) {
  const Complex a{std::cos(s.theta), 0.0};
  const Complex b = std::polar(std::sin(s.theta), s.phi);
  return {detail::cmul(a, std::conj(a)), detail::cmul(a, std::conj(b)), detail::cmul(b, std::conj(a)),
          detail::cmul(b, std::conj(b))};
}

/// Bloch-vector density matrix (I + r.sigma)/2; used for mixed test states.
inline Mat2 make_bloch_state(double x, double y, double z) {
  return Complex{0.5, 0.0} * (Mat2::identity() + x * pauli::x + y * pauli::y + z * pauli::z);
}

using Axis3 = std::array<double, 3>;
inline constexpr Axis3 kAxisZ{0.0, 0.0, 1.0};

inline constexpr double kPovmTolerance = 1e-12;

/// Biased two-outcome POVM {(I +- (alpha I + eta n.sigma))/2} together with
/// the square roots used by the Lueders update.
///
/// Both effects are diagonal in the eigenbasis of n.sigma, so they and their
/// roots are assembled from the two spectral projectors.
class PovmPair {
 public:
  double alpha() const { return alpha_; }
  double eta() const { return eta_; }
  const Axis3& axis() const { return axis_; }

  const Mat2& effect(Outcome m) const { return effects_[slot(m)]; }
  const Mat2& root(Outcome m) const { return roots_[slot(m)]; }

  friend PovmPair make_povm(double alpha, double eta, Axis3 axis);
  friend PovmPair make_complementary_povm(double eta, Axis3 axis);

 private:
  PovmPair() = default;

  /// `up`/`down`: eigenvalues of the plus effect along +n and -n.
  static PovmPair from_spectrum(double alpha, double eta, const Axis3& axis, double up, double down);

  double alpha_ = 0.0;
  double eta_ = 1.0;
  Axis3 axis_ = kAxisZ;
  std::array<Mat2, 2> effects_{};
  std::array<Mat2, 2> roots_{};
};

namespace detail {
inline Axis3 unit_axis(Axis3 axis) {
  const double norm = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
  if (!std::isfinite(norm) || std::abs(norm - 1.0) > 1e-9) {
    throw InvalidPovm("make_povm: measurement axis must be a unit vector");
  }
  for (auto& c : axis) c /= norm;
  return axis;
}

inline double clamp_weight(double w) {
  if (w < -kPovmTolerance) throw InvalidPovm("make_povm: effect eigenvalue " + std::to_string(w) + " is negative");
  return std::max(w, 0.0);
}
}  // namespace detail

inline PovmPair PovmPair::from_spectrum(double alpha, double eta, const Axis3& axis, double up, double down) {
  const Mat2 n_sigma = axis[0] * pauli::x + axis[1] * pauli::y + axis[2] * pauli::z;
  const Mat2 p_up = Complex{0.5, 0.0} * (Mat2::identity() + n_sigma);
  const Mat2 p_down = Complex{0.5, 0.0} * (Mat2::identity() - n_sigma);
  auto combine = [&](double a, double b) { return Complex{a, 0.0} * p_up + Complex{b, 0.0} * p_down; };

  up = detail::clamp_weight(up);
  down = detail::clamp_weight(down);
  const double up_minus = detail::clamp_weight(1.0 - up);
  const double down_minus = detail::clamp_weight(1.0 - down);

  PovmPair out;
  out.alpha_ = alpha;
  out.eta_ = eta;
  out.axis_ = axis;
  out.effects_ = {combine(up, down), combine(up_minus, down_minus)};
  out.roots_ = {combine(std::sqrt(up), std::sqrt(down)), combine(std::sqrt(up_minus), std::sqrt(down_minus))};
  return out;
}

inline PovmPair make_povm(double alpha, double eta, Axis3 axis = kAxisZ) {
  if (!std::isfinite(alpha) || !std::isfinite(eta)) throw InvalidPovm("make_povm: non-finite alpha or eta");
  if (eta < 0.0 || eta > 1.0 + kPovmTolerance) throw InvalidPovm("make_povm: sharpness eta must lie in [0, 1]");
  if (std::abs(alpha) + eta > 1.0 + kPovmTolerance) {
    throw InvalidPovm("make_povm: |alpha| + eta must not exceed 1 (got " + std::to_string(std::abs(alpha) + eta) +
                      ")");
  }
  return PovmPair::from_spectrum(alpha, eta, detail::unit_axis(axis), 0.5 * (1.0 + alpha + eta),
                                 0.5 * (1.0 + alpha - eta));
}

/// The alpha = 1 - eta family. Its minus effect is exactly rank one, which
/// rounding 1 - eta to a double would otherwise spoil.
inline PovmPair make_complementary_povm(double eta, Axis3 axis = kAxisZ) {
  if (!std::isfinite(eta) || eta < 0.0 || eta > 1.0) throw InvalidPovm("make_povm: sharpness eta must lie in [0, 1]");
  return PovmPair::from_spectrum(1.0 - eta, eta, detail::unit_axis(axis), 1.0, 1.0 - eta);
}

/// exp(-i g sigma_x)
inline Mat2 unitary_of_angle(double g) {
  const double c = std::cos(g);
  const double s = std::sin(g);
  return {c, Complex{0.0, -s}, Complex{0.0, -s}, c};
}

/// Generalized amplitude damping: thermal weight p, damping gamma.
struct GadParams {
  double p = 0.0;
  double gamma = 0.0;
};

inline void validate(const GadParams& g) {
  if (!(g.p >= 0.0 && g.p <= 1.0)) throw InvalidConfig("GAD thermal parameter p must lie in [0, 1]");
  if (!(g.gamma >= 0.0 && g.gamma <= 1.0)) throw InvalidConfig("GAD damping gamma must lie in [0, 1]");
}

inline std::array<Mat2, 4> gad_kraus(const GadParams& g) {
  validate(g);
  const double sp = std::sqrt(g.p);
  const double sq = std::sqrt(1.0 - g.p);
  const double keep = std::sqrt(1.0 - g.gamma);
  const double jump = std::sqrt(g.gamma);
  return {Mat2{sp, 0.0, 0.0, sp * keep}, Mat2{0.0, sp * jump, 0.0, 0.0}, Mat2{sq * keep, 0.0, 0.0, sq},
          Mat2{0.0, 0.0, sq * jump, 0.0}};
}

/// Dynamics of one inter-measurement interval, stored as its Kraus set.
class Evolution {
 public:
  enum class Kind { identity, unitary, gad, kraus };

  static Evolution identity() { return Evolution{Kind::identity}; }

  static Evolution unitary(double g) {
    Evolution e{Kind::unitary};
    e.angle_ = g;
    e.ops_[0] = unitary_of_angle(g);
    e.count_ = 1;
    return e;
  }

  static Evolution gad(GadParams params) {
    Evolution e{Kind::gad};
    e.gad_ = params;
    e.ops_ = gad_kraus(params);
    e.count_ = 4;
    return e;
  }

  /// Arbitrary operator-sum map. Not required to be trace preserving, which
  /// is what makes it useful for exercising the AOT and CPTP checks.
  static Evolution kraus(std::span<const Mat2> ops) {
    if (ops.empty() || ops.size() > 4) throw InvalidConfig("Evolution::kraus takes 1 to 4 operators");
    Evolution e{Kind::kraus};
    for (std::size_t i = 0; i < ops.size(); ++i) e.ops_[i] = ops[i];
    e.count_ = ops.size();
    return e;
  }
  static Evolution kraus(std::initializer_list<Mat2> ops) { return kraus(std::span<const Mat2>(ops.begin(), ops.size())); }

  Kind kind() const { return kind_; }
  double angle() const { return angle_; }
  const GadParams& gad_params() const { return gad_; }
  std::span<const Mat2> operators() const { return {ops_.data(), count_}; }

 private:
  explicit Evolution(Kind k) : kind_(k) {}

  Kind kind_;
  double angle_ = 0.0;
  GadParams gad_{};
  std::array<Mat2, 4> ops_{};
  std::size_t count_ = 0;
};

/// Entry-wise action of the GAD channel; equal to the Kraus sum of gad_kraus.
inline Mat2 apply_gad(const Mat2& rho, const GadParams& g) {
  const double r00 = rho(0, 0).real();
  const double r11 = rho(1, 1).real();
  const double keep = std::sqrt(1.0 - g.gamma);
  const double to0 = g.gamma * g.p * r11;
  const double to1 = g.gamma * (1.0 - g.p) * r00;
  return {Complex{r00 - to1 + to0, rho(0, 0).imag()}, keep * rho(0, 1), keep * rho(1, 0),
          Complex{r11 - to0 + to1, rho(1, 1).imag()}};
}

inline Mat2 apply_evolution(const Mat2& rho, const Evolution& ev) {
  switch (ev.kind()) {
    case Evolution::Kind::identity:
      return rho;
    case Evolution::Kind::unitary:
      return conjugate(ev.operators()[0], rho);
    case Evolution::Kind::gad:
      return apply_gad(rho, ev.gad_params());
    case Evolution::Kind::kraus: {
      Mat2 out;
      for (const Mat2& k : ev.operators()) out += conjugate(k, rho);
      return out;
    }
  }
  return rho;
}

/// sum_i K_i^dagger K_i; the identity for a trace-preserving map.
inline Mat2 kraus_completeness(const Evolution& ev) {
  if (ev.kind() == Evolution::Kind::identity) return Mat2::identity();
  Mat2 sum;
  for (const Mat2& k : ev.operators()) sum += adjoint(k) * k;
  return sum;
}

}  // namespace lglab
