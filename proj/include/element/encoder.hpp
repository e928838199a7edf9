#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "element/state.hpp"

namespace element {

struct EncoderBlocks {
  double feature_scale = 1.0;
  bool append_observation = false;
  double observation_scale = 1.0;
};

/// Fixed map from raw observations to the entropy space. Two flavours:
/// a seeded random affine layer squashed through tanh, and an identity
/// pass-through (optionally rescaled) for environments whose native
/// coordinates already are the state space.
///
/// Observations may additionally be appended after the random features,
/// each block carrying its own scale factor.
class FixedEncoder {
 public:
  using Blocks = EncoderBlocks;

  /// Weights ~ U(-1/sqrt(in_dim), 1/sqrt(in_dim)) from a seeded generator, zero bias.
  static FixedEncoder random(std::uint64_t seed, std::size_t in_dim, std::size_t out_dim,
                             Blocks blocks = {});

  static FixedEncoder identity(std::size_t dim, double scale = 1.0);

  StatePoint encode(std::span<const double> observation) const;

  std::uint64_t seed() const { return seed_; }
  std::size_t in_dim() const { return in_dim_; }
  /// Length of encode()'s result.
  std::size_t out_dim() const;
  bool is_identity() const { return identity_; }

  /// Row-major out_dim x in_dim; empty in identity mode.
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& bias() const { return bias_; }

 private:
  FixedEncoder() = default;

  std::uint64_t seed_ = 0;
  std::size_t in_dim_ = 0;
  std::size_t feature_dim_ = 0;
  bool identity_ = false;
  Blocks blocks_;
  std::vector<double> weights_;
  std::vector<double> bias_;
};

}  // namespace element
