#include "marc/dataset_io.hpp"

#include <string>

#include <json.hpp>

#include "marc/errors.hpp"
#include "wire.hpp"

namespace marc {

namespace {
constexpr char kMagic[9] = "MARCDATA";
constexpr std::uint32_t kVersion = 1;
}  // namespace

std::filesystem::path manifest_path_for(const std::filesystem::path& data_path) {
  return {data_path.string() + ".manifest.json"};
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  {
    wire::AtomicWriter writer(path);
    std::ostream& os = writer.stream();
    os.write(kMagic, 8);
    wire::put_u32(os, kVersion);
    wire::put_u32(os, static_cast<std::uint32_t>(ds.samples.size()));
    wire::put_u32(os, static_cast<std::uint32_t>(ds.num_classes));
    wire::put_u32(os, static_cast<std::uint32_t>(ds.dim));
    wire::put_u32(os, static_cast<std::uint32_t>(ds.patches));
    for (const QASample& s : ds.samples) {
      const auto& v = s.video;
      wire::put_u32(os, static_cast<std::uint32_t>(v.frames.size()));
      wire::put_u32(os, static_cast<std::uint32_t>(v.grid_meta.h_patches));
      wire::put_u32(os, static_cast<std::uint32_t>(v.grid_meta.w_patches));
      for (double ts : v.timestamps) wire::put_f64(os, ts);
      for (const TokenGrid& f : v.frames) {
        for (double x : f.data) wire::put_f64(os, x);
      }
      for (double x : s.query) wire::put_f64(os, x);
      wire::put_u32(os, static_cast<std::uint32_t>(s.answer));
      wire::put_u32(os, static_cast<std::uint32_t>(s.target_event));
      wire::put_u32(os, static_cast<std::uint32_t>(s.event_classes.size()));
      for (std::size_t c : s.event_classes) wire::put_u32(os, static_cast<std::uint32_t>(c));
      wire::put_u32(os, static_cast<std::uint32_t>(s.planted_boundaries.size()));
      for (std::size_t b : s.planted_boundaries) {
        wire::put_u32(os, static_cast<std::uint32_t>(b));
      }
    }
    writer.commit();
  }

  nlohmann::json manifest;
  manifest["file"] = path.filename().string();
  manifest["version"] = kVersion;
  manifest["num_classes"] = ds.num_classes;
  manifest["dim"] = ds.dim;
  manifest["patches"] = ds.patches;
  nlohmann::json entries = nlohmann::json::array();
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const QASample& s = ds.samples[i];
    nlohmann::json e;
    e["index"] = i;
    e["frames"] = s.video.frames.size();
    e["answer"] = s.answer;
    e["target_event"] = s.target_event;
    e["event_classes"] = s.event_classes;
    e["planted_boundaries"] = s.planted_boundaries;
    entries.push_back(std::move(e));
  }
  manifest["samples"] = std::move(entries);

  wire::AtomicWriter writer(manifest_path_for(path));
  writer.stream() << manifest.dump(2) << '\n';
  writer.commit();
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream is = wire::open_in(path);
  wire::check_magic(is, kMagic, "MARCDATA");
  const std::uint32_t version = wire::get_u32(is, "MARCDATA version");
  if (version != kVersion) {
    throw VersionMismatchError("MARCDATA version " + std::to_string(version) +
                               " not supported (expected " + std::to_string(kVersion) + ")");
  }
  Dataset ds;
  const std::uint32_t n = wire::get_u32(is, "MARCDATA sample count");
  ds.num_classes = wire::get_u32(is, "MARCDATA class count");
  ds.dim = wire::get_u32(is, "MARCDATA dimension");
  ds.patches = wire::get_u32(is, "MARCDATA patch count");
  if (ds.num_classes < 1 || ds.dim < 1 || ds.patches < 1) {
    throw FormatError("MARCDATA header has zero num_classes, dim, or patches");
  }

  ds.samples.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    QASample& s = ds.samples[i];
    const std::uint32_t frames = wire::get_u32(is, "sample frame count");
    const std::uint32_t h = wire::get_u32(is, "sample grid meta");
    const std::uint32_t w = wire::get_u32(is, "sample grid meta");
    if (frames < 1) throw FormatError("sample " + std::to_string(i) + " has no frames");
    if (static_cast<std::size_t>(h) * w != ds.patches) {
      throw FormatError("sample " + std::to_string(i) + " grid meta disagrees with patches");
    }
    s.video.grid_meta = {frames, h, w};
    s.video.timestamps.resize(frames);
    for (auto& ts : s.video.timestamps) ts = wire::get_f64(is, "timestamp");
    s.video.frames.reserve(frames);
    for (std::uint32_t t = 0; t < frames; ++t) {
      TokenGrid g(ds.patches, ds.dim);
      for (auto& x : g.data) x = wire::get_f64(is, "token payload");
      s.video.frames.push_back(std::move(g));
    }
    s.query.resize(ds.dim);
    for (auto& x : s.query) x = wire::get_f64(is, "query");
    s.answer = wire::get_u32(is, "answer");
    s.target_event = wire::get_u32(is, "target event");
    if (s.answer >= ds.num_classes) {
      throw FormatError("sample " + std::to_string(i) + " answer class out of range");
    }
    const std::uint32_t events = wire::get_u32(is, "event count");
    s.event_classes.resize(events);
    for (auto& c : s.event_classes) c = wire::get_u32(is, "event class");
    const std::uint32_t bounds = wire::get_u32(is, "boundary count");
    s.planted_boundaries.resize(bounds);
    for (auto& b : s.planted_boundaries) b = wire::get_u32(is, "boundary");
  }
  wire::expect_eof(is, "MARCDATA");
  return ds;
}

}  // namespace marc
