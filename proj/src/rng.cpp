#include "mcl/rng.hpp"

#include <charconv>
#include <cstdio>

#include "mcl/error.hpp"

namespace mcl {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

constexpr std::uint32_t lo32(std::uint64_t x) { return static_cast<std::uint32_t>(x); }
constexpr std::uint32_t hi32(std::uint64_t x) { return static_cast<std::uint32_t>(x >> 32); }

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
    ctr = {hi32(p1) ^ ctr[1] ^ key[0], lo32(p1), hi32(p0) ^ ctr[3] ^ key[1], lo32(p0)};
  }
  return ctr;
}

RngKey RngKey::derive(std::uint64_t a, std::uint64_t b) const {
  // Tweaked key: derivation blocks never coincide with stream draws under the
  // same key.
  const auto out = philox4x32({lo32(a), hi32(a), lo32(b), hi32(b)},
                              {lo32(value_) ^ 0x5bd1e995u, hi32(value_)});
  return RngKey{(std::uint64_t{out[1]} << 32) | out[0]};
}

std::string to_hex(RngKey key) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(key.value()));
  return buf;
}

RngKey key_from_hex(const std::string& text) {
  std::uint64_t v = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v, 16);
  if (ec != std::errc{} || ptr != last || text.empty()) {
    throw ValidationError("invalid rng key '" + text + "'");
  }
  return RngKey{v};
}

std::uint64_t RngStream::next_u64() {
  if (used_ == 2) {
    buffer_ = philox4x32({lo32(block_), hi32(block_), lo32(stream_id_), hi32(stream_id_)},
                         {lo32(key_.value()), hi32(key_.value())});
    ++block_;
    used_ = 0;
  }
  const int i = 2 * used_++;
  return (std::uint64_t{buffer_[i + 1]} << 32) | buffer_[i];
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::below(std::uint64_t n) {
  // Reject the top partial bucket so the result is unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

}  // namespace mcl
