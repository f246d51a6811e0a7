#pragma once

#include "relugeo/types.hpp"

#include <optional>

namespace relugeo {

/// Coordinatewise activation.
Vec activate(Activation kind, const Vec& x);
/// Coordinatewise activation derivative. For ReLU the subgradient at 0 is 0.
Vec activate_deriv(Activation kind, const Vec& x);

/// Evaluate the network on a single input sample.
Vec forward(const NetworkSpec& spec, const Weights& w, const Vec& s);

/// Stack forward passes over the sample rows: the weight map evaluated at w,
/// an n x q matrix whose row i is forward(spec, w, s_i).
Mat weight_map(const NetworkSpec& spec, const Weights& w, const SampleMatrix& S);

/// Euclidean parameter norm sqrt(sum_i |A_i|_F^2 + |b_i|^2).
double weight_norm(const Weights& w);

enum class JacobianMode { Analytic, FiniteDifference };

/// Thrown by the analytic ReLU Jacobian when a hidden pre-activation is
/// exactly zero; callers re-sample the weights.
class KinkTouchError : public std::runtime_error {
 public:
  KinkTouchError(Index layer, Index sample, Index neuron)
      : std::runtime_error("pre-activation exactly at ReLU kink (layer " +
                           std::to_string(layer) + ", sample " + std::to_string(sample) +
                           ", neuron " + std::to_string(neuron) + ")"),
        layer(layer), sample(sample), neuron(neuron) {}
  Index layer, sample, neuron;
};

/// Derivative of the vectorized weight map with respect to the flattened
/// weights; (n*q) x m, output rows ordered sample-major. Finite differences
/// use central steps h = 1e-6 * (1 + |entry|).
Mat jacobian(const NetworkSpec& spec, const Weights& w, const SampleMatrix& S,
             JacobianMode mode);

}  // namespace relugeo
