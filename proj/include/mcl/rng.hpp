#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace mcl {

/// Philox4x32-10 block function (Salmon et al., SC'11). Output is fixed by
/// the algorithm and identical on every platform.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// A 64-bit key naming an independent random stream family.
///
/// Keys form a tree: `derive` hashes (parent, a, b) through one Philox block,
/// so children of distinct paths are statistically independent and the tree
/// does not depend on the order in which children are requested.
class RngKey {
 public:
  constexpr RngKey() = default;
  constexpr explicit RngKey(std::uint64_t value) : value_(value) {}

  [[nodiscard]] RngKey derive(std::uint64_t a, std::uint64_t b = 0) const;
  [[nodiscard]] constexpr std::uint64_t value() const { return value_; }

  friend constexpr bool operator==(RngKey, RngKey) = default;

 private:
  std::uint64_t value_ = 0;
};

std::string to_hex(RngKey key);
RngKey key_from_hex(const std::string& text);

/// Counter-based stream: draw i of stream `id` under `key` is
/// philox(counter = (i_lo, i_hi, id_lo, id_hi), key). Each block yields two
/// 64-bit words.
class RngStream {
 public:
  RngStream(RngKey key, std::uint64_t stream_id) : key_(key), stream_id_(stream_id) {}

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer on [0, n); n > 0.
  std::uint64_t below(std::uint64_t n);

  [[nodiscard]] RngKey key() const { return key_; }
  [[nodiscard]] std::uint64_t stream_id() const { return stream_id_; }

 private:
  RngKey key_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 2;
};

}  // namespace mcl
