#pragma once

// Fixed-length bit vectors. Bit positions are 1-indexed and position 1 is the
// least significant bit; every routine in this library that slices, pads or
// serializes bits relies on that convention.

#include <cstdint>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace nmext {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class BitString {
public:
    BitString() = default;

    explicit BitString(std::size_t len) : len_(len), words_(word_count(len), 0) {}

    static BitString zeros(std::size_t len) { return BitString(len); }

    static BitString from_u64(std::uint64_t value, std::size_t len) {
        if (len < 64 && (value >> len) != 0)
            throw Error("from_u64: value does not fit in " + std::to_string(len) + " bits");
        BitString b(len);
        if (len > 0) b.words_[0] = value;
        return b;
    }

    std::size_t size() const { return len_; }

    bool bit(std::size_t pos) const {
        check_pos(pos);
        return (words_[(pos - 1) >> 6] >> ((pos - 1) & 63)) & 1u;
    }

    void set_bit(std::size_t pos, bool v) {
        check_pos(pos);
        std::uint64_t mask = std::uint64_t{1} << ((pos - 1) & 63);
        if (v)
            words_[(pos - 1) >> 6] |= mask;
        else
            words_[(pos - 1) >> 6] &= ~mask;
    }

    // Inclusive 1-indexed range [a, b].
    BitString slice(std::size_t a, std::size_t b) const {
        if (a < 1 || b < a || b > len_)
            throw Error("slice: bad range [" + std::to_string(a) + "," + std::to_string(b) +
                        "] for length " + std::to_string(len_));
        BitString out(b - a + 1);
        for (std::size_t i = a; i <= b; ++i)
            if (bit(i)) out.set_bit(i - a + 1, true);
        return out;
    }

    BitString concat(const BitString& hi) const {
        BitString out(len_ + hi.len_);
        for (std::size_t i = 1; i <= len_; ++i)
            if (bit(i)) out.set_bit(i, true);
        for (std::size_t i = 1; i <= hi.len_; ++i)
            if (hi.bit(i)) out.set_bit(len_ + i, true);
        return out;
    }

    BitString operator^(const BitString& o) const {
        if (o.len_ != len_) throw Error("xor: length mismatch");
        BitString out(len_);
        for (std::size_t w = 0; w < words_.size(); ++w)
            out.words_[w] = words_[w] ^ o.words_[w];
        return out;
    }

    bool operator==(const BitString& o) const {
        return len_ == o.len_ && words_ == o.words_;
    }
    bool operator!=(const BitString& o) const { return !(*this == o); }

    bool is_zero() const {
        for (auto w : words_)
            if (w) return false;
        return true;
    }

    std::uint64_t to_u64() const {
        if (len_ > 64) throw Error("to_u64: length " + std::to_string(len_) + " exceeds 64");
        return words_.empty() ? 0 : words_[0];
    }

    const std::vector<std::uint64_t>& words() const { return words_; }

    // "len:hex" with lowercase hex of the value, most significant nibble first,
    // padded to ceil(len/4) digits. Zero-length serializes as "0:".
    std::string to_hex() const {
        std::string hex;
        std::size_t nibbles = (len_ + 3) / 4;
        hex.reserve(nibbles);
        for (std::size_t i = nibbles; i-- > 0;) {
            unsigned nib = 0;
            for (unsigned j = 0; j < 4; ++j) {
                std::size_t pos = i * 4 + j + 1;
                if (pos <= len_ && bit(pos)) nib |= 1u << j;
            }
            hex.push_back("0123456789abcdef"[nib]);
        }
        return std::to_string(len_) + ":" + hex;
    }

    static BitString from_hex(const std::string& s) {
        auto colon = s.find(':');
        if (colon == std::string::npos) throw Error("from_hex: missing ':' in \"" + s + "\"");
        std::size_t len = 0;
        try {
            std::size_t used = 0;
            len = std::stoull(s.substr(0, colon), &used);
            if (used != colon) throw Error("bad length");
        } catch (const std::exception&) {
            throw Error("from_hex: bad length prefix in \"" + s + "\"");
        }
        std::string hex = s.substr(colon + 1);
        std::size_t nibbles = (len + 3) / 4;
        if (hex.size() != nibbles)
            throw Error("from_hex: expected " + std::to_string(nibbles) + " hex digits, got " +
                        std::to_string(hex.size()));
        BitString out(len);
        for (std::size_t i = 0; i < nibbles; ++i) {
            char c = hex[nibbles - 1 - i];
            unsigned nib;
            if (c >= '0' && c <= '9') nib = unsigned(c - '0');
            else if (c >= 'a' && c <= 'f') nib = unsigned(c - 'a') + 10;
            else throw Error(std::string("from_hex: bad hex digit '") + c + "'");
            for (unsigned j = 0; j < 4; ++j) {
                std::size_t pos = i * 4 + j + 1;
                if (nib & (1u << j)) {
                    if (pos > len) throw Error("from_hex: set bit beyond declared length");
                    out.set_bit(pos, true);
                }
            }
        }
        return out;
    }

private:
    static std::size_t word_count(std::size_t len) { return (len + 63) / 64; }

    void check_pos(std::size_t pos) const {
        if (pos < 1 || pos > len_)
            throw Error("bit position " + std::to_string(pos) + " out of range [1," +
                        std::to_string(len_) + "]");
    }

    std::size_t len_ = 0;
    std::vector<std::uint64_t> words_;
};

}  // namespace nmext
