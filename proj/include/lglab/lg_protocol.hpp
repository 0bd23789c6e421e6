#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <span>
#include <string>

#include "errors.hpp"
#include "quantum_core.hpp"

namespace lglab {

/// Exact probability table over 1, 2 or 3 dichotomic outcomes.
///
/// Entries are indexed with the first measurement as the most significant
/// bit and `minus` as bit value 1, so index 0 is (+,...,+).
class OutcomeDist {
 public:
  static constexpr double kClampTolerance = 1e-12;

  OutcomeDist() = default;

  /// Values within 1e-12 outside [0, 1] are clamped; anything further out is
  /// kept as-is so that non-physical maps stay visible to the checks.
  OutcomeDist(int arity, std::array<double, 8> probs) : arity_(arity), p_(probs) {
    if (arity < 1 || arity > 3) throw BadIndex("OutcomeDist arity must be 1, 2 or 3");
    for (std::size_t i = size(); i < p_.size(); ++i) p_[i] = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
      double& x = p_[i];
      if (x < 0.0 && x >= -kClampTolerance) x = 0.0;
      if (x > 1.0 && x <= 1.0 + kClampTolerance) x = 1.0;
    }
  }

  int arity() const { return arity_; }
  std::size_t size() const { return std::size_t{1} << arity_; }

  double prob(std::size_t index) const { return p_[index]; }
  double& prob(std::size_t index) { return p_[index]; }

  static std::size_t index_of(std::span<const Outcome> ms) {
    std::size_t idx = 0;
    for (Outcome m : ms) idx = (idx << 1) | slot(m);
    return idx;
  }
  double at(Outcome m1) const { return p_[index_of(std::array{m1})]; }
  double at(Outcome m1, Outcome m2) const { return p_[index_of(std::array{m1, m2})]; }
  double at(Outcome m1, Outcome m2, Outcome m3) const { return p_[index_of(std::array{m1, m2, m3})]; }

  /// Outcome of measurement `position` (1-based) in table row `index`.
  Outcome outcome(std::size_t index, int position) const {
    const int bit = arity_ - position;
    return ((index >> bit) & 1U) ? Outcome::minus : Outcome::plus;
  }

  /// Product of the +-1 outcome values of row `index`.
  int sign_product(std::size_t index) const {
    int s = 1;
    for (int pos = 1; pos <= arity_; ++pos) s *= sign(outcome(index, pos));
    return s;
  }

  double total() const {
    double t = 0.0;
    for (std::size_t i = 0; i < size(); ++i) t += p_[i];
    return t;
  }

  bool is_normalized(double tol = 1e-10) const { return std::abs(total() - 1.0) <= tol; }

 private:
  int arity_ = 1;
  std::array<double, 8> p_{};
};

/// P(m) = tr(E(rho0) M^m) with E the evolution up to the measurement.
inline OutcomeDist one_time_dist(const Mat2& rho0, const PovmPair& povm, const Evolution& ev1) {
  const Mat2 rho = apply_evolution(rho0, ev1);
  std::array<double, 8> p{};
  for (Outcome m : kOutcomes) p[slot(m)] = trace_product_re(rho, povm.effect(m));
  return {1, p};
}

/// Two sequential measurements. `ev_pre` carries rho0 to the first
/// measurement, `ev_between` runs between the two. No normalization happens
/// between measurements, so vanishing first-outcome weights are harmless.
inline OutcomeDist two_time_dist(const Mat2& rho0, const PovmPair& povm, const Evolution& ev_pre,
                                 const Evolution& ev_between) {
  const Mat2 rho = apply_evolution(rho0, ev_pre);
  std::array<double, 8> p{};
  for (Outcome m1 : kOutcomes) {
    const Mat2 after = apply_evolution(conjugate(povm.root(m1), rho), ev_between);
    for (Outcome m2 : kOutcomes) p[OutcomeDist::index_of(std::array{m1, m2})] = trace_product_re(after, povm.effect(m2));
  }
  return {2, p};
}

inline OutcomeDist three_time_dist(const Mat2& rho0, const PovmPair& povm, const Evolution& ev12,
                                   const Evolution& ev23) {
  std::array<double, 8> p{};
  for (Outcome m1 : kOutcomes) {
    const Mat2 at_t2 = apply_evolution(conjugate(povm.root(m1), rho0), ev12);
    for (Outcome m2 : kOutcomes) {
      const Mat2 at_t3 = apply_evolution(conjugate(povm.root(m2), at_t2), ev23);
      for (Outcome m3 : kOutcomes) {
        p[OutcomeDist::index_of(std::array{m1, m2, m3})] = trace_product_re(at_t3, povm.effect(m3));
      }
    }
  }
  return {3, p};
}

/// Sum over the table of (product of outcomes) * P; <M> for arity 1.
inline double correlator(const OutcomeDist& d) {
  double c = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) c += d.sign_product(i) * d.prob(i);
  return c;
}

/// Sums out measurement `drop` (1-based position).
inline OutcomeDist marginalize(const OutcomeDist& d, int drop) {
  if (d.arity() < 2) throw BadIndex("marginalize: distribution must have arity >= 2");
  if (drop < 1 || drop > d.arity()) {
    throw BadIndex("marginalize: position " + std::to_string(drop) + " outside 1.." + std::to_string(d.arity()));
  }
  std::array<double, 8> out{};
  const int bit = d.arity() - drop;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const std::size_t high = i >> (bit + 1);
    const std::size_t low = i & ((std::size_t{1} << bit) - 1);
    out[(high << bit) | low] += d.prob(i);
  }
  return {d.arity() - 1, out};
}

}  // namespace lglab
