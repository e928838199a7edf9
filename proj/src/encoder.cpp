#include "element/encoder.hpp"

#include <cmath>
#include <random>
#include <string>

#include "element/error.hpp"

namespace element {

FixedEncoder FixedEncoder::random(std::uint64_t seed, std::size_t in_dim, std::size_t out_dim,
                                  Blocks blocks) {
  if (in_dim == 0 || out_dim == 0) {
    fail(ErrorKind::invalid_argument, "encoder dimensions must be positive (got in_dim=" +
                                          std::to_string(in_dim) + ", out_dim=" +
                                          std::to_string(out_dim) + ")");
  }
  FixedEncoder enc;
  enc.seed_ = seed;
  enc.in_dim_ = in_dim;
  enc.feature_dim_ = out_dim;
  enc.blocks_ = blocks;
  enc.weights_.resize(in_dim * out_dim);
  enc.bias_.assign(out_dim, 0.0);

  const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-bound, bound);
  for (double& w : enc.weights_) w = uniform(rng);
  return enc;
}

FixedEncoder FixedEncoder::identity(std::size_t dim, double scale) {
  if (dim == 0) fail(ErrorKind::invalid_argument, "identity encoder needs a positive dimension");
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    fail(ErrorKind::invalid_argument, "identity encoder scale must be positive and finite");
  }
  FixedEncoder enc;
  enc.in_dim_ = dim;
  enc.feature_dim_ = dim;
  enc.identity_ = true;
  enc.blocks_.feature_scale = scale;
  return enc;
}

std::size_t FixedEncoder::out_dim() const {
  return feature_dim_ + (blocks_.append_observation && !identity_ ? in_dim_ : 0);
}

StatePoint FixedEncoder::encode(std::span<const double> observation) const {
  if (observation.size() != in_dim_) {
    fail(ErrorKind::invalid_argument, "observation has length " + std::to_string(observation.size()) +
                                          ", encoder expects " + std::to_string(in_dim_));
  }
  StatePoint out;
  out.reserve(out_dim());
  if (identity_) {
    for (double x : observation) out.push_back(x * blocks_.feature_scale);
    return out;
  }
  for (std::size_t r = 0; r < feature_dim_; ++r) {
    double acc = bias_[r];
    const double* row = weights_.data() + r * in_dim_;
    for (std::size_t c = 0; c < in_dim_; ++c) acc += row[c] * observation[c];
    out.push_back(std::tanh(acc) * blocks_.feature_scale);
  }
  if (blocks_.append_observation) {
    for (double x : observation) out.push_back(x * blocks_.observation_scale);
  }
  return out;
}

}  // namespace element
