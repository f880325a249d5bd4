#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "lsv/linalg.hpp"
#include "lsv/philox.hpp"

namespace lsv {

enum class EnsembleKind { gaussian, rademacher, uniform, student_t5 };

/// An i.i.d. entry law with mean 0 and variance 1.
struct Ensemble {
  EnsembleKind kind = EnsembleKind::gaussian;

  std::string_view name() const noexcept;
  bool subgaussian() const noexcept { return kind != EnsembleKind::student_t5; }
  /// E[xi^4]. For student_t5 at unit variance this is (3/5)^2 * 25 = 9.
  double fourth_moment() const noexcept;

  static std::optional<Ensemble> parse(std::string_view name);
  friend bool operator==(const Ensemble&, const Ensemble&) = default;
};

struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;
};

/// Sequence of uniforms for a single matrix or vector entry.
///
/// The Philox key is the master seed. The 128-bit counter is
///   word 0: (shape << 31) | (dim << 8) | block
///           shape is 0 for matrices and 1 for vectors, block counts
///           4-word draws within the entry
///   word 1: entry index             (i * dim + j for matrices, i for vectors)
///   word 2: low 32 bits of stream index
///   word 3: high 32 bits of stream index
/// so a draw depends only on (seed, stream, dim, entry). Uniforms take the top
/// 53 bits of a 64-bit word formed from two consecutive output words.
class EntryStream {
 public:
  EntryStream(SeedSpec seed, std::uint32_t dim, std::uint32_t entry, bool vector_shape = false) noexcept;

  /// Uniform on the open interval (0, 1).
  double next_open01() noexcept;

 private:
  PhiloxKey key_;
  PhiloxCounter base_;
  PhiloxCounter buffer_{};
  std::uint32_t block_ = 0;
  int used_ = 4;
};

/// One draw from the ensemble:
///   gaussian     Box-Muller cosine branch on two uniforms
///   rademacher   sign of the first uniform against 1/2
///   uniform      (2u - 1) * sqrt(3)
///   student_t5   Z * sqrt(3 / V), V = -2 ln(u1 u2) + Z'^2 ~ chi^2_5
double sample_entry(Ensemble ensemble, EntryStream& stream);

/// n x n matrix; entry (i, j) depends only on (ensemble, n, seed, i, j).
/// Throws InvalidDimension for n < 2.
Matrix sample_matrix(Ensemble ensemble, std::size_t n, SeedSpec seed);

/// Vector of `dim` i.i.d. entries keyed like a 1 x dim matrix row.
Vector sample_vector(Ensemble ensemble, std::size_t dim, SeedSpec seed);

}  // namespace lsv
