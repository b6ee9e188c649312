#include "psos/rng.hpp"

namespace psos {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void philox_round(Philox4x32::Ctr& c, const Philox4x32::Key& k) {
  std::uint64_t prod0 = std::uint64_t(kMul0) * c[0];
  std::uint64_t prod1 = std::uint64_t(kMul1) * c[2];
  std::uint32_t hi0 = std::uint32_t(prod0 >> 32), lo0 = std::uint32_t(prod0);
  std::uint32_t hi1 = std::uint32_t(prod1 >> 32), lo1 = std::uint32_t(prod1);
  c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

Philox4x32::Ctr Philox4x32::block(Ctr ctr, Key key) {
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    philox_round(ctr, key);
  }
  return ctr;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t stream_path(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x243F6A8885A308D3ull;  // arbitrary nonzero start
  for (std::uint64_t p : parts) h = mix64(h ^ mix64(p));
  return h;
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
    : master_seed_(master_seed), stream_id_(stream_id) {
  std::uint64_t k = mix64(master_seed ^ mix64(stream_id));
  key_ = {std::uint32_t(k), std::uint32_t(k >> 32)};
  ctr_ = {0, 0, std::uint32_t(stream_id), std::uint32_t(stream_id >> 32)};
}

void RngStream::refill() {
  buf_ = Philox4x32::block(ctr_, key_);
  pos_ = 0;
  // 64-bit increment on the low counter half; the high half holds the stream id.
  if (++ctr_[0] == 0) ++ctr_[1];
}

std::uint32_t RngStream::next_u32() {
  if (pos_ >= 4) refill();
  return buf_[pos_++];
}

std::uint64_t RngStream::next_u64() {
  std::uint64_t lo = next_u32();
  std::uint64_t hi = next_u32();
  return (hi << 32) | lo;
}

double RngStream::next_unit() {
  return double(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::next_below(std::uint64_t bound) {
  // Rejection from the top of the 64-bit range; expected < 2 draws.
  std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % bound;
  for (;;) {
    std::uint64_t v = next_u64();
    if (v < limit) return v % bound;
  }
}

std::uint64_t RngStream::words_consumed() const {
  std::uint64_t blocks = (std::uint64_t(ctr_[1]) << 32) | ctr_[0];
  if (blocks == 0) return 0;
  return (blocks - 1) * 4 + std::uint64_t(pos_);
}

RngStream substream(std::uint64_t master_seed, std::initializer_list<std::uint64_t> path) {
  return RngStream(master_seed, stream_path(path));
}

}  // namespace psos
