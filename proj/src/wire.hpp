#pragma once

// Internal little-endian wire helpers shared by the container readers/writers.
// Byte order is explicit so files are portable across hosts.

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include "marc/errors.hpp"

namespace marc::wire {

inline void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

inline void put_f64(std::ostream& os, double v) {
  put_u64(os, std::bit_cast<std::uint64_t>(v));
}

inline std::uint32_t get_u32(std::istream& is, const char* what) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) {
    throw TruncatedFileError(std::string("file ends inside ") + what);
  }
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

inline std::uint64_t get_u64(std::istream& is, const char* what) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) {
    throw TruncatedFileError(std::string("file ends inside ") + what);
  }
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

inline double get_f64(std::istream& is, const char* what) {
  return std::bit_cast<double>(get_u64(is, what));
}

inline void check_magic(std::istream& is, const char (&magic)[9], const char* format) {
  char buf[8];
  if (!is.read(buf, 8)) {
    throw TruncatedFileError(std::string("file too short for a ") + format + " header");
  }
  for (int i = 0; i < 8; ++i) {
    if (buf[i] != magic[i]) {
      throw BadMagicError(std::string("not a ") + format + " file");
    }
  }
}

inline void expect_eof(std::istream& is, const char* format) {
  if (is.peek() != std::char_traits<char>::eof()) {
    throw FormatError(std::string("trailing bytes after ") + format + " payload");
  }
}

// Open for reading or throw IoError.
inline std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string() + " for reading");
  return is;
}

// Writers go through a temp file in the same directory plus an atomic rename,
// so readers never observe a half-written file.
class AtomicWriter {
 public:
  explicit AtomicWriter(const std::filesystem::path& path)
      : final_(path), tmp_(path.string() + ".tmp") {
    os_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!os_) throw IoError("cannot open " + tmp_.string() + " for writing");
  }

  ~AtomicWriter() {
    if (!committed_) {
      os_.close();
      std::error_code ec;
      std::filesystem::remove(tmp_, ec);
    }
  }

  std::ostream& stream() { return os_; }

  void commit() {
    os_.flush();
    if (!os_) throw IoError("write to " + tmp_.string() + " failed");
    os_.close();
    std::error_code ec;
    std::filesystem::rename(tmp_, final_, ec);
    if (ec) throw IoError("cannot rename " + tmp_.string() + " to " + final_.string() +
                          ": " + ec.message());
    committed_ = true;
  }

 private:
  std::filesystem::path final_;
  std::filesystem::path tmp_;
  std::ofstream os_;
  bool committed_ = false;
};

}  // namespace marc::wire
