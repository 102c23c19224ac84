#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "skewprod/map_family.hpp"

namespace skewprod {

/// Philox4x32-10 block: 128-bit counter and 64-bit key to 128 random bits.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Counter-based generator keyed by (seed, stream).
///
/// draw(i) is a pure function of (seed, stream, i): any index can be
/// regenerated without replaying the stream, and partitions of a Monte Carlo
/// run across workers never change the numbers drawn. Each Philox block
/// yields the 64-bit draws at offsets 2k and 2k + 1.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  std::uint64_t bits(std::uint64_t offset) const;
  /// Uniform double in [0,1) with 53 random bits.
  double uniform(std::uint64_t offset) const { return static_cast<double>(bits(offset) >> 11) * 0x1.0p-53; }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

struct Provenance {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::uint64_t offset = 0;
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// Finite window of a symbol sequence together with the provenance it was
/// sampled from.
struct SymbolWord {
  std::vector<Symbol> symbols;
  Provenance provenance;

  std::size_t size() const { return symbols.size(); }
  Symbol operator[](std::size_t i) const { return symbols[i]; }
  std::span<const Symbol> view() const { return symbols; }
};

inline Symbol symbol_from_uniform(double u, double p1) { return u < p1 ? Symbol::one : Symbol::two; }

/// i.i.d. symbols with P(one) = p1 at offsets prov.offset .. prov.offset + length - 1.
SymbolWord sample_word(double p1, std::size_t length, Provenance prov);
inline SymbolWord sample_word(double p1, std::size_t length, std::uint64_t seed, std::uint64_t stream) {
  return sample_word(p1, length, Provenance{seed, stream, 0});
}

/// Drops the first k symbols; the provenance offset advances by k.
SymbolWord shift(const SymbolWord& word, std::size_t k);

/// Builds a word from literal symbols (no random provenance).
SymbolWord word_of(std::initializer_list<int> symbols);
SymbolWord word_of(std::span<const Symbol> symbols);

/// Unbounded symbol source for long runs; generates in blocks so memory
/// stays constant.
class SymbolStream {
 public:
  SymbolStream(double p1, std::uint64_t seed, std::uint64_t stream, std::uint64_t offset = 0);

  Symbol next() {
    if (pos_ == buffer_.size()) refill();
    return buffer_[pos_++];
  }
  std::uint64_t offset() const { return base_ + pos_; }

 private:
  void refill();

  double p1_;
  CounterRng rng_;
  std::uint64_t base_;
  std::array<Symbol, 1024> buffer_{};
  std::size_t pos_;
};

/// Sequential reader over a finite word.
class WordCursor {
 public:
  explicit WordCursor(std::span<const Symbol> word) : word_(word) {}
  Symbol next() { return word_[pos_++]; }
  std::size_t remaining() const { return word_.size() - pos_; }

 private:
  std::span<const Symbol> word_;
  std::size_t pos_ = 0;
};

/// Set of sequences with prescribed symbols at a few positions.
class CylinderSpec {
 public:
  CylinderSpec() = default;
  /// Throws std::invalid_argument on repeated positions.
  explicit CylinderSpec(std::vector<std::pair<std::size_t, Symbol>> constraints);
  /// Cylinder fixing positions 0 .. prefix.size() - 1.
  static CylinderSpec prefix(std::span<const Symbol> prefix);

  std::span<const std::pair<std::size_t, Symbol>> constraints() const { return constraints_; }
  bool contains(std::span<const Symbol> word) const;
  /// Overwrites the constrained positions of word.
  void impose(std::span<Symbol> word) const;

 private:
  std::vector<std::pair<std::size_t, Symbol>> constraints_;
};

double cylinder_probability(const CylinderSpec& spec, double p1, double p2);

}  // namespace skewprod
