#include "clusterfdr/stats.hpp"

#include <cmath>
#include <string>

#include "clusterfdr/error.hpp"

namespace clusterfdr {

namespace {

void check_signs(const SubjectStack& stack, std::span<const std::int8_t> signs) {
  if (signs.size() != stack.n()) {
    throw Error(ErrorKind::InvalidArgument, "sign vector length " + std::to_string(signs.size()) +
                                                " does not match N=" + std::to_string(stack.n()));
  }
  for (auto s : signs) {
    if (s != 1 && s != -1) throw Error(ErrorKind::InvalidArgument, "signs must be +1 or -1");
  }
}

}  // namespace

TMapWorkspace::TMapWorkspace(const SubjectStack& stack) : stack_(stack) {
  const Mask& mask = stack.mask();
  in_mask_.reserve(mask.count());
  for (std::size_t v = 0; v < mask.dims().size(); ++v) {
    if (mask.inside(v)) in_mask_.push_back(v);
  }
  mean_.resize(in_mask_.size());
  m2_.resize(in_mask_.size());
}

std::size_t TMapWorkspace::compute(std::span<const std::int8_t> signs, std::span<double> out) {
  check_signs(stack_, signs);
  if (out.size() != stack_.dims().size()) {
    throw Error(ErrorKind::DimMismatch, "output buffer does not match stack dims");
  }
  const std::size_t m = in_mask_.size();
  std::fill(mean_.begin(), mean_.end(), 0.0);
  std::fill(m2_.begin(), m2_.end(), 0.0);

  // Welford, subject-outer so each pass streams one subject volume.
  const auto& subjects = stack_.subjects();
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    const auto data = subjects[i].data();
    const double sign = signs[i];
    const double count = static_cast<double>(i + 1);
    for (std::size_t k = 0; k < m; ++k) {
      const double y = sign * data[in_mask_[k]];
      const double delta = y - mean_[k];
      mean_[k] += delta / count;
      m2_[k] += delta * (y - mean_[k]);
    }
  }

  const double n = static_cast<double>(subjects.size());
  const double sqrt_n = std::sqrt(n);
  std::fill(out.begin(), out.end(), 0.0);
  std::size_t zero_variance = 0;
  for (std::size_t k = 0; k < m; ++k) {
    const double var = m2_[k] / (n - 1.0);
    if (!(var > 0.0)) {
      ++zero_variance;
      continue;
    }
    out[in_mask_[k]] = mean_[k] / (std::sqrt(var) / sqrt_n);
  }
  return zero_variance;
}

TMap one_sample_tmap(const SubjectStack& stack, std::span<const std::int8_t> signs) {
  TMapWorkspace ws(stack);
  std::vector<double> t(stack.dims().size());
  const std::size_t zero_variance = ws.compute(signs, t);
  const auto& voxel_size = stack.subjects().front().voxel_size();
  return TMap{Volume(stack.dims(), std::move(t), voxel_size), static_cast<int>(stack.n() - 1),
              zero_variance};
}

TMap one_sample_tmap(const SubjectStack& stack) {
  const std::vector<std::int8_t> ones(stack.n(), 1);
  return one_sample_tmap(stack, ones);
}

}  // namespace clusterfdr
