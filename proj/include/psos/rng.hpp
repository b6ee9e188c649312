#pragma once

// Counter-based RNG (Philox4x32-10) with derived substreams.
//
// Every random draw in the library goes through RngStream so that a run is a pure
// function of (master seed, stream path). Streams never share state: a stream is
// identified by a 64-bit id hashed from a path like ("chain", L, seed, replica),
// and the generator is a keyed permutation of a 128-bit counter, so replicas and
// workers can be created independently without coordination.

#include <array>
#include <cstdint>
#include <initializer_list>

namespace psos {

// One 10-round Philox4x32 block. Reference constants from the original
// "Parallel random numbers: as easy as 1, 2, 3" generator; known-answer
// vectors are pinned in the unit tests.
struct Philox4x32 {
  using Key = std::array<std::uint32_t, 2>;
  using Ctr = std::array<std::uint32_t, 4>;

  static Ctr block(Ctr ctr, Key key);
};

// 64-bit mix used for seeding and stream-id derivation (splitmix64 finalizer).
std::uint64_t mix64(std::uint64_t x);

// Hash a path of 64-bit components into a stream id. Order-sensitive.
std::uint64_t stream_path(std::initializer_list<std::uint64_t> parts);

class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  // Uniform double in [0,1) with 53 random bits.
  double next_unit();

  // Uniform integer in [0, bound) by rejection; exact for any bound >= 1.
  std::uint64_t next_below(std::uint64_t bound);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  // Number of 32-bit words consumed so far (for manifests / debugging).
  std::uint64_t words_consumed() const;

 private:
  void refill();

  std::uint64_t master_seed_ = 0;
  std::uint64_t stream_id_ = 0;
  Philox4x32::Key key_{};
  Philox4x32::Ctr ctr_{};
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;  // buf_ exhausted
};

// Convenience: stream for a named purpose, e.g. substream(seed, {TAG_CHAIN, L, k}).
RngStream substream(std::uint64_t master_seed, std::initializer_list<std::uint64_t> path);

}  // namespace psos
