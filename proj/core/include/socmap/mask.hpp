#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace socmap {

/// Binary covariate selector over a fixed candidate list.
class FeatureMask {
 public:
  FeatureMask() = default;
  explicit FeatureMask(std::vector<std::uint8_t> bits);

  static FeatureMask all(std::size_t p);
  static FeatureMask from_indices(std::size_t p, std::span<const std::size_t> indices);
  static FeatureMask from_names(std::span<const std::string> candidates,
                                std::span<const std::string> selected);

  std::size_t size() const noexcept { return bits_.size(); }
  bool test(std::size_t i) const { return bits_[i] != 0; }
  void set(std::size_t i, bool on) { bits_[i] = on ? 1 : 0; }
  void flip(std::size_t i) { bits_[i] ^= 1; }

  std::size_t selected_count() const;
  bool valid() const { return selected_count() >= 1; }
  std::vector<std::size_t> indices() const;
  std::vector<std::string> names(std::span<const std::string> candidates) const;
  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }
  std::string to_string() const;  // e.g. "0110"

  bool operator==(const FeatureMask&) const = default;
  auto operator<=>(const FeatureMask&) const = default;

 private:
  std::vector<std::uint8_t> bits_;
};

}  // namespace socmap
