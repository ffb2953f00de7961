#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "maasim/error.hpp"

namespace maasim {

// Binary action selection: bit i set means catalog action i is played once.
class Genome {
 public:
  Genome() = default;
  explicit Genome(std::size_t length) : bits_(length, 0) {}

  static Genome from_string(std::string_view bits) {
    Genome g(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (bits[i] != '0' && bits[i] != '1') throw FormatError("genome must be a string of 0/1 characters");
      g.bits_[i] = bits[i] == '1' ? 1 : 0;
    }
    return g;
  }

  // Bit i of `mask` becomes gene i.
  static Genome from_mask(std::uint64_t mask, std::size_t length) {
    Genome g(length);
    for (std::size_t i = 0; i < length; ++i) g.bits_[i] = static_cast<std::uint8_t>((mask >> i) & 1u);
    return g;
  }

  std::size_t size() const noexcept { return bits_.size(); }
  bool operator[](std::size_t i) const noexcept { return bits_[i] != 0; }
  void set(std::size_t i, bool on) noexcept { bits_[i] = on ? 1 : 0; }
  void flip(std::size_t i) noexcept { bits_[i] ^= 1u; }

  std::size_t popcount() const noexcept {
    std::size_t n = 0;
    for (auto b : bits_) n += b;
    return n;
  }
  bool none() const noexcept { return popcount() == 0; }

  std::string to_string() const {
    std::string s(bits_.size(), '0');
    for (std::size_t i = 0; i < bits_.size(); ++i)
      if (bits_[i]) s[i] = '1';
    return s;
  }

  friend bool operator==(const Genome&, const Genome&) = default;
  friend auto operator<=>(const Genome&, const Genome&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

}  // namespace maasim
