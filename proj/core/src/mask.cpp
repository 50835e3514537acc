#include "socmap/mask.hpp"

#include <algorithm>

#include "socmap/error.hpp"

namespace socmap {

FeatureMask::FeatureMask(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto& b : bits_) b = b ? 1 : 0;
}

FeatureMask FeatureMask::all(std::size_t p) { return FeatureMask(std::vector<std::uint8_t>(p, 1)); }

FeatureMask FeatureMask::from_indices(std::size_t p, std::span<const std::size_t> indices) {
  std::vector<std::uint8_t> bits(p, 0);
  for (auto i : indices) {
    if (i >= p) fail(Errc::shape, "mask index " + std::to_string(i) + " out of range");
    bits[i] = 1;
  }
  return FeatureMask(std::move(bits));
}

FeatureMask FeatureMask::from_names(std::span<const std::string> candidates,
                                    std::span<const std::string> selected) {
  std::vector<std::uint8_t> bits(candidates.size(), 0);
  for (const auto& name : selected) {
    auto it = std::find(candidates.begin(), candidates.end(), name);
    if (it == candidates.end()) fail(Errc::schema, "unknown feature \"" + name + "\" in mask");
    bits[static_cast<std::size_t>(it - candidates.begin())] = 1;
  }
  return FeatureMask(std::move(bits));
}

std::size_t FeatureMask::selected_count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::vector<std::size_t> FeatureMask::indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) out.push_back(i);
  }
  return out;
}

std::vector<std::string> FeatureMask::names(std::span<const std::string> candidates) const {
  if (candidates.size() != bits_.size()) fail(Errc::shape, "mask length differs from candidate list");
  std::vector<std::string> out;
  for (auto i : indices()) out.push_back(candidates[i]);
  return out;
}

std::string FeatureMask::to_string() const {
  std::string s;
  for (auto b : bits_) s.push_back(b ? '1' : '0');
  return s;
}

}  // namespace socmap
