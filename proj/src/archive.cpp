#include "uncseg/archive.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "uncseg/errors.hpp"

namespace fs = std::filesystem;

namespace uncseg {

namespace {

constexpr const char* kManifest = "manifest.txt";

size_t dtype_size(const std::string& dtype) {
  if (dtype == "f32") return 4;
  if (dtype == "u8") return 1;
  throw SchemaError("archive: unknown dtype '" + dtype + "'");
}

Shape parse_shape(const std::string& s) {
  Shape shape;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const int v = std::stoi(tok);
    if (v <= 0) throw SchemaError("archive: nonpositive shape dim in " + s);
    shape.push_back(v);
  }
  if (shape.empty()) throw SchemaError("archive: empty shape '" + s + "'");
  return shape;
}

std::string shape_to_string(const Shape& shape) {
  std::string s;
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s;
}

}  // namespace

TensorArchive TensorArchive::create(const std::string& dir, bool force) {
  const fs::path p(dir);
  if (fs::exists(p / kManifest)) {
    if (!force)
      throw IoError("archive already exists at " + dir +
                    " (use --force to overwrite)");
    fs::remove_all(p);
  }
  fs::create_directories(p);
  TensorArchive a;
  a.dir_ = dir;
  a.rewrite_manifest();
  return a;
}

TensorArchive TensorArchive::open(const std::string& dir) {
  const fs::path manifest = fs::path(dir) / kManifest;
  std::ifstream in(manifest);
  if (!in) throw IoError("cannot open archive manifest " + manifest.string());
  TensorArchive a;
  a.dir_ = dir;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    Entry e;
    std::string shape_s;
    if (!(ss >> e.name >> e.dtype >> shape_s >> e.path))
      throw SchemaError("archive: malformed manifest line '" + line + "'");
    e.shape = parse_shape(shape_s);
    std::string kv;
    while (ss >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw SchemaError("archive: malformed attribute '" + kv + "'");
      e.attrs[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    const auto expected = size_t(e.numel()) * dtype_size(e.dtype);
    const fs::path bin = fs::path(dir) / e.path;
    std::error_code ec;
    const auto actual = fs::file_size(bin, ec);
    if (ec) throw IoError("archive: missing data file " + bin.string());
    if (actual != expected)
      throw SchemaError("archive: entry '" + e.name + "' expects " +
                        std::to_string(expected) + " bytes, file has " +
                        std::to_string(actual));
    if (!a.index_.emplace(e.name, a.entries_.size()).second)
      throw SchemaError("archive: duplicate entry name '" + e.name + "'");
    a.entries_.push_back(std::move(e));
  }
  return a;
}

void TensorArchive::append_entry(Entry e, const void* bytes, size_t nbytes) {
  if (e.name.find_first_of(" \t") != std::string::npos)
    throw SchemaError("archive: name may not contain whitespace");
  if (index_.count(e.name))
    throw SchemaError("archive: duplicate entry name '" + e.name + "'");
  e.path = e.name + ".bin";
  const fs::path bin = fs::path(dir_) / e.path;
  std::ofstream out(bin, std::ios::binary);
  if (!out) throw IoError("archive: cannot write " + bin.string());
  out.write(static_cast<const char*>(bytes), std::streamsize(nbytes));
  out.close();
  index_.emplace(e.name, entries_.size());
  entries_.push_back(std::move(e));
  rewrite_manifest();
}

void TensorArchive::rewrite_manifest() const {
  const fs::path manifest = fs::path(dir_) / kManifest;
  std::ofstream out(manifest);
  if (!out) throw IoError("archive: cannot write " + manifest.string());
  for (const auto& e : entries_) {
    out << e.name << ' ' << e.dtype << ' ' << shape_to_string(e.shape) << ' '
        << e.path;
    for (const auto& [k, v] : e.attrs) out << ' ' << k << '=' << v;
    out << '\n';
  }
}

void TensorArchive::add_f32(const std::string& name, const Shape& shape,
                            const std::vector<float>& data,
                            const std::map<std::string, std::string>& attrs) {
  if (shape_numel(shape) != int64_t(data.size()))
    throw DimensionError("archive: shape/data mismatch for '" + name + "'");
  Entry e;
  e.name = name;
  e.dtype = "f32";
  e.shape = shape;
  e.attrs = attrs;
  append_entry(std::move(e), data.data(), data.size() * 4);
}

void TensorArchive::add_u8(const std::string& name, const Shape& shape,
                           const std::vector<uint8_t>& data,
                           const std::map<std::string, std::string>& attrs) {
  if (shape_numel(shape) != int64_t(data.size()))
    throw DimensionError("archive: shape/data mismatch for '" + name + "'");
  Entry e;
  e.name = name;
  e.dtype = "u8";
  e.shape = shape;
  e.attrs = attrs;
  append_entry(std::move(e), data.data(), data.size());
}

const TensorArchive::Entry& TensorArchive::entry(
    const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end())
    throw IoError("archive: no entry named '" + name + "'");
  return entries_[it->second];
}

bool TensorArchive::contains(const std::string& name) const {
  return index_.count(name) != 0;
}

std::vector<float> TensorArchive::read_f32(const std::string& name) const {
  const Entry& e = entry(name);
  if (e.dtype != "f32")
    throw SchemaError("archive: entry '" + name + "' is not f32");
  std::vector<float> data(size_t(e.numel()));
  std::ifstream in(fs::path(dir_) / e.path, std::ios::binary);
  if (!in.read(reinterpret_cast<char*>(data.data()),
               std::streamsize(data.size() * 4)))
    throw IoError("archive: short read on '" + name + "'");
  return data;
}

std::vector<uint8_t> TensorArchive::read_u8(const std::string& name) const {
  const Entry& e = entry(name);
  if (e.dtype != "u8")
    throw SchemaError("archive: entry '" + name + "' is not u8");
  std::vector<uint8_t> data(size_t(e.numel()));
  std::ifstream in(fs::path(dir_) / e.path, std::ios::binary);
  if (!in.read(reinterpret_cast<char*>(data.data()),
               std::streamsize(data.size())))
    throw IoError("archive: short read on '" + name + "'");
  return data;
}

}  // namespace uncseg
