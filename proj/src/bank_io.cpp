#include "marc/bank_io.hpp"

#include <string>

#include "marc/errors.hpp"
#include "wire.hpp"

namespace marc {

namespace {
constexpr char kMagic[9] = "MARCBANK";
constexpr std::uint32_t kVersion = 1;
}  // namespace

void bank_save(const MemoryBank& bank, const std::filesystem::path& path) {
  wire::AtomicWriter writer(path);
  std::ostream& os = writer.stream();
  os.write(kMagic, 8);
  wire::put_u32(os, kVersion);
  wire::put_u32(os, static_cast<std::uint32_t>(bank.dim()));
  wire::put_u32(os, static_cast<std::uint32_t>(bank.size()));
  for (const MemoryFragment& f : bank.fragments()) {
    wire::put_u64(os, f.fragment_id);
    wire::put_u64(os, f.video_id);
    wire::put_u64(os, f.start_frame);
    wire::put_u64(os, f.end_frame);
    wire::put_f64(os, f.start_time);
    wire::put_f64(os, f.end_time);
    for (double x : f.embedding) wire::put_f64(os, x);
  }
  writer.commit();
}

MemoryBank bank_load(const std::filesystem::path& path) {
  std::ifstream is = wire::open_in(path);
  wire::check_magic(is, kMagic, "MARCBANK");
  const std::uint32_t version = wire::get_u32(is, "MARCBANK version");
  if (version != kVersion) {
    throw VersionMismatchError("MARCBANK version " + std::to_string(version) +
                               " not supported (expected " + std::to_string(kVersion) + ")");
  }
  const std::uint32_t dim = wire::get_u32(is, "MARCBANK dimension");
  const std::uint32_t count = wire::get_u32(is, "MARCBANK fragment count");
  if (dim < 1) throw FormatError("MARCBANK dimension must be >= 1");

  MemoryBank bank(dim);
  for (std::uint32_t i = 0; i < count; ++i) {
    MemoryFragment f;
    f.fragment_id = wire::get_u64(is, "fragment record");
    f.video_id = wire::get_u64(is, "fragment record");
    f.start_frame = wire::get_u64(is, "fragment record");
    f.end_frame = wire::get_u64(is, "fragment record");
    f.start_time = wire::get_f64(is, "fragment record");
    f.end_time = wire::get_f64(is, "fragment record");
    if (f.start_frame > f.end_frame) {
      throw FormatError("fragment " + std::to_string(f.fragment_id) +
                        " has an inverted frame span");
    }
    f.embedding.resize(dim);
    for (std::uint32_t j = 0; j < dim; ++j) {
      f.embedding[j] = wire::get_f64(is, "fragment embedding");
    }
    try {
      bank.add(std::move(f));
    } catch (const Error& e) {
      throw FormatError("MARCBANK record " + std::to_string(i) + ": " + e.what());
    }
  }
  wire::expect_eof(is, "MARCBANK");
  return bank;
}

}  // namespace marc
