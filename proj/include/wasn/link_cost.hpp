#pragma once

#include "geometry.hpp"

#include <stdexcept>

namespace wasn {

/// Aggregate radio constants. Transmission costs beta * d^2 per bit
/// (free-space path loss), reception at a sensor costs rho per bit, and a
/// sensor generates kappa bits/s per unit of density mass it covers.
struct PhysicalParams {
  double beta = 1.0;
  double rho = 0.1;
  double kappa = 1.0;

  static constexpr double path_loss_exponent = 2.0;

  void check() const {
    if (!(beta > 0.0)) throw std::invalid_argument("PhysicalParams: beta must be > 0");
    if (!(rho >= 0.0)) throw std::invalid_argument("PhysicalParams: rho must be >= 0");
    if (!(kappa > 0.0)) throw std::invalid_argument("PhysicalParams: kappa must be > 0");
  }
};

/// Energy per bit of the link i -> j. FCs receive for free.
inline double link_cost(const NodeDeployment& P, std::size_t i, std::size_t j,
                        const PhysicalParams& params) {
  if (i == j) throw std::invalid_argument("link_cost: self link");
  if (!P.is_sensor(i)) throw std::invalid_argument("link_cost: transmitter must be a sensor");
  if (j >= P.size()) throw std::out_of_range("link_cost: receiver index out of range");
  const double tx = params.beta * (P[i] - P[j]).squaredNorm();
  return P.is_sensor(j) ? tx + params.rho : tx;
}

}  // namespace wasn
