#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace semcom {

/// Growable bit string with byte-packed storage (MSB-first within a byte).
/// Used for representation encodings and channel payloads.
class Bits {
public:
    Bits() = default;

    static Bits from_bytes(const std::vector<std::uint8_t>& bytes);
    static Bits from_string(const std::string& zeros_and_ones);
    /// Parses the hex form produced by to_hex(); n_bits fixes the exact length.
    static Bits from_hex(const std::string& hex, std::size_t n_bits);

    std::size_t size() const noexcept { return size_; }
    bool empty() const noexcept { return size_ == 0; }

    bool get(std::size_t i) const;
    void set(std::size_t i, bool v);
    void push_back(bool v);
    void append(const Bits& other);
    void append_byte(std::uint8_t b);

    /// Bytes backing the string; trailing bits of the last byte are zero.
    const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }

    std::string to_string() const;
    std::string to_hex() const;

    bool operator==(const Bits& other) const noexcept;
    bool operator!=(const Bits& other) const noexcept { return !(*this == other); }

private:
    std::vector<std::uint8_t> bytes_;
    std::size_t size_ = 0;
};

/// Number of differing bits; compares up to the shorter length and counts the
/// length difference as all-different.
std::size_t hamming_distance(const Bits& a, const Bits& b);

}  // namespace semcom
