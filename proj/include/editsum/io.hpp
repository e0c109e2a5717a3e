#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace editsum::io {

static_assert(std::endian::native == std::endian::little,
              "binary formats are written in host order and assume little-endian");

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);
/// Raw 32-byte digest.
std::string sha256_raw(std::string_view bytes);

std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary file and renames, so readers never see a
/// partial file.
void write_file(const std::filesystem::path& path, std::string_view bytes);

// Appends fixed-width little-endian values to a byte buffer.
class Writer {
  public:
    template <class T>
        requires std::is_arithmetic_v<T>
    void put(T v) {
        char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        buf_.append(b, sizeof(T));
    }
    void bytes(std::string_view s) { buf_.append(s); }
    // u32 length prefix
    void str(std::string_view s) {
        put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
        bytes(s);
    }
    template <class T>
    void array(const T* data, std::size_t n) {
        buf_.append(reinterpret_cast<const char*>(data), n * sizeof(T));
    }
    [[nodiscard]] const std::string& data() const { return buf_; }
    std::string take() { return std::move(buf_); }

  private:
    std::string buf_;
};

// Reads what Writer wrote; throws CorruptFile on truncation.
class Reader {
  public:
    Reader(std::string_view data, std::string what) : data_(data), what_(std::move(what)) {}

    template <class T>
        requires std::is_arithmetic_v<T>
    T get() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, data_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    std::string_view bytes(std::size_t n) {
        need(n);
        auto s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::string str() { return std::string(bytes(get<std::uint32_t>())); }
    template <class T>
    void array(T* out, std::size_t n) {
        need(n * sizeof(T));
        std::memcpy(out, data_.data() + pos_, n * sizeof(T));
        pos_ += n * sizeof(T);
    }
    [[nodiscard]] std::size_t remaining() const { return data_.size() - pos_; }
    [[nodiscard]] bool done() const { return pos_ == data_.size(); }

  private:
    void need(std::size_t n) const;

    std::string_view data_;
    std::size_t pos_ = 0;
    std::string what_;
};

} // namespace editsum::io
