#include "semcom/bits.hpp"

#include <bit>

#include "semcom/errors.hpp"

namespace semcom {

Bits Bits::from_bytes(const std::vector<std::uint8_t>& bytes) {
    Bits b;
    b.bytes_ = bytes;
    b.size_ = bytes.size() * 8;
    return b;
}

Bits Bits::from_string(const std::string& zeros_and_ones) {
    Bits b;
    for (char c : zeros_and_ones) {
        if (c == '0') {
            b.push_back(false);
        } else if (c == '1') {
            b.push_back(true);
        } else {
            fail("malformed-bits", "bit string may only contain 0 and 1");
        }
    }
    return b;
}

static int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

Bits Bits::from_hex(const std::string& hex, std::size_t n_bits) {
    if (hex.size() % 2 != 0) fail("malformed-bits", "hex string must have even length");
    std::vector<std::uint8_t> bytes;
    bytes.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        int hi = hex_digit(hex[i]);
        int lo = hex_digit(hex[i + 1]);
        if (hi < 0 || lo < 0) fail("malformed-bits", "invalid hex digit");
        bytes.push_back(static_cast<std::uint8_t>(hi * 16 + lo));
    }
    if (n_bits > bytes.size() * 8 || (n_bits + 7) / 8 != bytes.size())
        fail("malformed-bits", "hex length inconsistent with declared bit count");
    Bits b;
    b.bytes_ = std::move(bytes);
    b.size_ = n_bits;
    // Clear any slack so equality stays well defined.
    if (n_bits % 8 != 0 && !b.bytes_.empty())
        b.bytes_.back() &= static_cast<std::uint8_t>(0xFF << (8 - n_bits % 8));
    return b;
}

bool Bits::get(std::size_t i) const {
    if (i >= size_) fail("malformed-bits", "bit index out of range");
    return (bytes_[i / 8] >> (7 - i % 8)) & 1;
}

void Bits::set(std::size_t i, bool v) {
    if (i >= size_) fail("malformed-bits", "bit index out of range");
    std::uint8_t mask = static_cast<std::uint8_t>(1u << (7 - i % 8));
    if (v) {
        bytes_[i / 8] |= mask;
    } else {
        bytes_[i / 8] &= static_cast<std::uint8_t>(~mask);
    }
}

void Bits::push_back(bool v) {
    if (size_ % 8 == 0) bytes_.push_back(0);
    ++size_;
    set(size_ - 1, v);
}

void Bits::append(const Bits& other) {
    if (size_ % 8 == 0) {
        bytes_.insert(bytes_.end(), other.bytes_.begin(), other.bytes_.end());
        size_ += other.size_;
        return;
    }
    for (std::size_t i = 0; i < other.size(); ++i) push_back(other.get(i));
}

void Bits::append_byte(std::uint8_t b) {
    if (size_ % 8 == 0) {
        bytes_.push_back(b);
        size_ += 8;
        return;
    }
    for (int i = 7; i >= 0; --i) push_back((b >> i) & 1);
}

std::string Bits::to_string() const {
    std::string s;
    s.reserve(size_);
    for (std::size_t i = 0; i < size_; ++i) s.push_back(get(i) ? '1' : '0');
    return s;
}

std::string Bits::to_hex() const {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(bytes_.size() * 2);
    for (std::uint8_t b : bytes_) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0xF]);
    }
    return s;
}

bool Bits::operator==(const Bits& other) const noexcept {
    return size_ == other.size_ && bytes_ == other.bytes_;
}

std::size_t hamming_distance(const Bits& a, const Bits& b) {
    const Bits& lo = a.size() <= b.size() ? a : b;
    const Bits& hi = a.size() <= b.size() ? b : a;
    std::size_t d = hi.size() - lo.size();
    for (std::size_t i = 0; i < lo.bytes().size(); ++i) {
        std::uint8_t x = lo.bytes()[i] ^ hi.bytes()[i];
        // Mask slack bits of the shorter string's final byte.
        if (i + 1 == lo.bytes().size() && lo.size() % 8 != 0)
            x &= static_cast<std::uint8_t>(0xFF << (8 - lo.size() % 8));
        d += std::popcount(x);
    }
    return d;
}

}  // namespace semcom
