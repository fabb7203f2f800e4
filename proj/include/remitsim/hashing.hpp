#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace remitsim {

/// Incremental 64-bit FNV-1a.
class Fnv1a {
  public:
    void update(std::string_view bytes);
    std::uint64_t digest() const { return state_; }

  private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

/// Lower-case hex SHA-256 of a byte string / file.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path &path);

/// SplitMix64 mixer; derives independent stream seeds from (seed, index) pairs.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

} // namespace remitsim
