#include "lsv/ensembles.hpp"

#include <cmath>
#include <numbers>

namespace lsv {

std::string_view Ensemble::name() const noexcept {
  switch (kind) {
    case EnsembleKind::gaussian: return "gaussian";
    case EnsembleKind::rademacher: return "rademacher";
    case EnsembleKind::uniform: return "uniform";
    case EnsembleKind::student_t5: return "student_t5";
  }
  return "unknown";
}

double Ensemble::fourth_moment() const noexcept {
  switch (kind) {
    case EnsembleKind::gaussian: return 3.0;
    case EnsembleKind::rademacher: return 1.0;
    case EnsembleKind::uniform: return 9.0 / 5.0;
    case EnsembleKind::student_t5: return 9.0;
  }
  return 0.0;
}

std::optional<Ensemble> Ensemble::parse(std::string_view name) {
  for (auto kind : {EnsembleKind::gaussian, EnsembleKind::rademacher, EnsembleKind::uniform,
                    EnsembleKind::student_t5}) {
    Ensemble e{kind};
    if (e.name() == name) return e;
  }
  return std::nullopt;
}

EntryStream::EntryStream(SeedSpec seed, std::uint32_t dim, std::uint32_t entry, bool vector_shape) noexcept
    : key_{static_cast<std::uint32_t>(seed.master_seed), static_cast<std::uint32_t>(seed.master_seed >> 32)},
      base_{(vector_shape ? 0x80000000u : 0u) | ((dim & 0x7FFFFFu) << 8), entry,
            static_cast<std::uint32_t>(seed.stream_index), static_cast<std::uint32_t>(seed.stream_index >> 32)} {}

double EntryStream::next_open01() noexcept {
  if (used_ >= 4) {
    PhiloxCounter ctr = base_;
    ctr[0] |= (block_++ & 0xFFu);
    buffer_ = philox4x32_10(ctr, key_);
    used_ = 0;
  }
  const std::uint64_t word = (std::uint64_t{buffer_[used_]} << 32) | buffer_[used_ + 1];
  used_ += 2;
  return (static_cast<double>(word >> 11) + 0.5) * 0x1.0p-53;
}

namespace {

double standard_normal(EntryStream& s) {
  const double u1 = s.next_open01();
  const double u2 = s.next_open01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

double sample_entry(Ensemble ensemble, EntryStream& stream) {
  switch (ensemble.kind) {
    case EnsembleKind::gaussian:
      return standard_normal(stream);
    case EnsembleKind::rademacher:
      return stream.next_open01() < 0.5 ? -1.0 : 1.0;
    case EnsembleKind::uniform:
      return (2.0 * stream.next_open01() - 1.0) * std::numbers::sqrt3;
    case EnsembleKind::student_t5: {
      const double z = standard_normal(stream);
      const double chi2_4 = -2.0 * std::log(stream.next_open01() * stream.next_open01());
      const double g = standard_normal(stream);
      const double v = chi2_4 + g * g;
      // t_5 = z / sqrt(v / 5); scaling by sqrt(3/5) gives unit variance.
      return z * std::sqrt(3.0 / v);
    }
  }
  return 0.0;
}

Matrix sample_matrix(Ensemble ensemble, std::size_t n, SeedSpec seed) {
  if (n < 2) throw InvalidDimension("sample_matrix: n must be at least 2");
  if (n > 0xFFFF) throw InvalidDimension("sample_matrix: n too large for the entry counter");
  std::vector<double> data(n * n);
  for (std::size_t e = 0; e < n * n; ++e) {
    EntryStream s(seed, static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(e));
    data[e] = sample_entry(ensemble, s);
  }
  return Matrix(n, n, std::move(data));
}

Vector sample_vector(Ensemble ensemble, std::size_t dim, SeedSpec seed) {
  if (dim == 0 || dim > 0x7FFFFF) throw InvalidDimension("sample_vector: bad dimension");
  Vector v(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    EntryStream s(seed, static_cast<std::uint32_t>(dim), static_cast<std::uint32_t>(i), true);
    v[i] = sample_entry(ensemble, s);
  }
  return v;
}

}  // namespace lsv
