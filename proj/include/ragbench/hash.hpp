#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace ragbench {

using Digest = std::array<std::uint8_t, 32>;

/// Incremental SHA-256. Fields fed through add_field() are length-prefixed so
/// ("ab","c") and ("a","bc") hash differently.
class Sha256 {
public:
    Sha256();
    ~Sha256();
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    Sha256& add(std::string_view bytes);
    Sha256& add(std::span<const std::uint8_t> bytes);
    Sha256& add_field(std::string_view bytes);
    Digest finish();

private:
    void* ctx_;
};

Digest sha256(std::string_view bytes);
std::string to_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view bytes);

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

/// 64-bit FNV-1a; stable across platforms.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace ragbench
