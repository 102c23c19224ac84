#include "skewprod/symbols.hpp"

#include <algorithm>
#include <stdexcept>

namespace skewprod {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53;
constexpr std::uint32_t kMul1 = 0xCD9E8D57;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

std::uint64_t CounterRng::bits(std::uint64_t offset) const {
  const std::uint64_t block = offset >> 1;
  const auto out = philox4x32(
      {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
       static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
      {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
  const std::size_t h = (offset & 1u) * 2;
  return (static_cast<std::uint64_t>(out[h]) << 32) | out[h + 1];
}

SymbolWord sample_word(double p1, std::size_t length, Provenance prov) {
  SymbolWord w;
  w.provenance = prov;
  w.symbols.resize(length);
  SymbolStream stream(p1, prov.seed, prov.stream, prov.offset);
  for (auto& s : w.symbols) s = stream.next();
  return w;
}

SymbolWord shift(const SymbolWord& word, std::size_t k) {
  if (k > word.size()) {
    throw std::out_of_range("shift: k exceeds word length");
  }
  SymbolWord out;
  out.symbols.assign(word.symbols.begin() + static_cast<std::ptrdiff_t>(k), word.symbols.end());
  out.provenance = word.provenance;
  out.provenance.offset += k;
  return out;
}

SymbolWord word_of(std::initializer_list<int> symbols) {
  SymbolWord w;
  for (int s : symbols) {
    if (s != 1 && s != 2) throw std::invalid_argument("word_of: symbols must be 1 or 2");
    w.symbols.push_back(static_cast<Symbol>(s));
  }
  return w;
}

SymbolWord word_of(std::span<const Symbol> symbols) {
  SymbolWord w;
  w.symbols.assign(symbols.begin(), symbols.end());
  return w;
}

SymbolStream::SymbolStream(double p1, std::uint64_t seed, std::uint64_t stream, std::uint64_t offset)
    : p1_(p1), rng_(seed, stream), base_(offset), pos_(0) {
  // first refill must start at `offset`
  base_ = offset - buffer_.size();
  pos_ = buffer_.size();
}

void SymbolStream::refill() {
  base_ += buffer_.size();
  // Blocks are aligned to even offsets; unpack both halves of each block.
  std::uint64_t i = base_;
  std::size_t j = 0;
  if (i & 1u) {
    buffer_[j++] = symbol_from_uniform(rng_.uniform(i++), p1_);
  }
  for (; j + 1 < buffer_.size(); j += 2, i += 2) {
    const std::uint64_t block = i >> 1;
    const auto out = philox4x32(
        {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
         static_cast<std::uint32_t>(rng_.stream()), static_cast<std::uint32_t>(rng_.stream() >> 32)},
        {static_cast<std::uint32_t>(rng_.seed()), static_cast<std::uint32_t>(rng_.seed() >> 32)});
    const std::uint64_t b0 = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
    const std::uint64_t b1 = (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
    buffer_[j] = symbol_from_uniform(static_cast<double>(b0 >> 11) * 0x1.0p-53, p1_);
    buffer_[j + 1] = symbol_from_uniform(static_cast<double>(b1 >> 11) * 0x1.0p-53, p1_);
  }
  for (; j < buffer_.size(); ++j, ++i) {
    buffer_[j] = symbol_from_uniform(rng_.uniform(i), p1_);
  }
  pos_ = 0;
}

CylinderSpec::CylinderSpec(std::vector<std::pair<std::size_t, Symbol>> constraints)
    : constraints_(std::move(constraints)) {
  std::vector<std::size_t> pos;
  for (const auto& c : constraints_) pos.push_back(c.first);
  std::sort(pos.begin(), pos.end());
  if (std::adjacent_find(pos.begin(), pos.end()) != pos.end()) {
    throw std::invalid_argument("cylinder: positions must be distinct");
  }
}

CylinderSpec CylinderSpec::prefix(std::span<const Symbol> prefix) {
  std::vector<std::pair<std::size_t, Symbol>> c;
  for (std::size_t i = 0; i < prefix.size(); ++i) c.emplace_back(i, prefix[i]);
  return CylinderSpec(std::move(c));
}

bool CylinderSpec::contains(std::span<const Symbol> word) const {
  return std::all_of(constraints_.begin(), constraints_.end(),
                     [&](const auto& c) { return c.first < word.size() && word[c.first] == c.second; });
}

void CylinderSpec::impose(std::span<Symbol> word) const {
  for (const auto& [pos, sym] : constraints_) {
    if (pos >= word.size()) throw std::out_of_range("cylinder: position beyond word");
    word[pos] = sym;
  }
}

double cylinder_probability(const CylinderSpec& spec, double p1, double p2) {
  double p = 1.0;
  for (const auto& c : spec.constraints()) p *= c.second == Symbol::one ? p1 : p2;
  return p;
}

}  // namespace skewprod
