#include "cpafdm/transforms.hpp"

#include <cmath>
#include <utility>

#include "cpafdm/fft.hpp"

namespace cpafdm {

cd unit_phasor(double cycles) {
  const double frac = cycles - std::floor(cycles);
  return std::polar(1.0, -kTwoPi * frac);
}

double frac_product(double a, double b) {
  const double hi = a * b;
  const double lo = std::fma(a, b, -hi);
  return (hi - std::floor(hi)) + lo;
}

ChirpSequence::ChirpSequence(std::size_t n, double rate) : rate_(rate) {
  if (n == 0) throw InvalidSize("chirp_sequence: n must be >= 1");
  values_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    values_[k] = unit_phasor(frac_product(rate, static_cast<double>(k * k)));
  }
}

ChirpSequence chirp_sequence(std::size_t n, double c) { return {n, c}; }

TransformConfig::TransformConfig(std::size_t n, double c1, double c2)
    : TransformConfig(n, c1, c2, Permutation::identity(n),
                      Permutation::identity(n)) {}

TransformConfig::TransformConfig(std::size_t n, double c1, double c2,
                                 Permutation perm1, Permutation perm2)
    : n(n), c1(c1), c2(c2), perm1(std::move(perm1)), perm2(std::move(perm2)) {
  if (n == 0) throw InvalidSize("TransformConfig: n must be >= 1");
  if (this->perm1.size() != n || this->perm2.size() != n) {
    throw DimensionMismatch("TransformConfig: permutation sizes must equal n");
  }
}

CpDaft::CpDaft(TransformConfig cfg, TransformMode mode)
    : cfg_(std::move(cfg)), mode_(mode) {
  const ChirpSequence l1(cfg_.n, cfg_.c1);
  const ChirpSequence l2(cfg_.n, cfg_.c2);
  d1_ = cfg_.perm1.apply(l1.values());
  d2_ = cfg_.perm2.apply(l2.values());
  if (mode_ == TransformMode::matrix) dense_ = matrix();
}

CVec CpDaft::forward(std::span<const cd> v) const {
  require_size(v.size(), cfg_.n, "cpdaft_forward");
  if (mode_ == TransformMode::matrix) {
    Eigen::Map<const Eigen::VectorXcd> in(v.data(), v.size());
    Eigen::VectorXcd out = dense_ * in;
    return {out.data(), out.data() + out.size()};
  }
  CVec out(v.size());
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = d1_[n] * v[n];
  fft::forward_unitary(out);
  for (std::size_t m = 0; m < out.size(); ++m) out[m] *= d2_[m];
  return out;
}

CVec CpDaft::inverse(std::span<const cd> v) const {
  require_size(v.size(), cfg_.n, "cpdaft_inverse");
  if (mode_ == TransformMode::matrix) {
    Eigen::Map<const Eigen::VectorXcd> in(v.data(), v.size());
    Eigen::VectorXcd out = dense_.adjoint() * in;
    return {out.data(), out.data() + out.size()};
  }
  CVec out(v.size());
  for (std::size_t m = 0; m < out.size(); ++m) out[m] = std::conj(d2_[m]) * v[m];
  fft::inverse_unitary(out);
  for (std::size_t n = 0; n < out.size(); ++n) out[n] *= std::conj(d1_[n]);
  return out;
}

Eigen::MatrixXcd dft_matrix(std::size_t n) {
  Eigen::MatrixXcd f(n, n);
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t m = 0; m < n; ++m) {
      f(k, m) = s * unit_phasor(static_cast<double>((k * m) % n) /
                                static_cast<double>(n));
    }
  }
  return f;
}

Eigen::MatrixXcd CpDaft::matrix() const {
  const std::size_t n = cfg_.n;
  Eigen::MatrixXcd a = dft_matrix(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) a(r, c) *= d2_[r] * d1_[c];
  }
  return a;
}

cd CpDaft::kernel(std::size_t n, std::size_t m) const {
  if (n >= cfg_.n || m >= cfg_.n) throw OutOfRange("kernel_sample: index out of range");
  const auto p1 = static_cast<double>(cfg_.perm1[n] * cfg_.perm1[n]);
  const auto p2 = static_cast<double>(cfg_.perm2[m] * cfg_.perm2[m]);
  const double cycles = frac_product(cfg_.c1, p1) + frac_product(cfg_.c2, p2) +
                        static_cast<double>((n * m) % cfg_.n) /
                            static_cast<double>(cfg_.n);
  // unit_phasor carries a negative sign; the kernel is the conjugate.
  return std::conj(unit_phasor(cycles)) / std::sqrt(static_cast<double>(cfg_.n));
}

CVec cpdaft_forward(const TransformConfig& cfg, std::span<const cd> v) {
  return CpDaft(cfg).forward(v);
}

CVec cpdaft_inverse(const TransformConfig& cfg, std::span<const cd> v) {
  return CpDaft(cfg).inverse(v);
}

cd kernel_sample(const TransformConfig& cfg, std::size_t n, std::size_t m) {
  return CpDaft(cfg).kernel(n, m);
}

}  // namespace cpafdm
