#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "uncseg/tensor.hpp"

namespace uncseg {

// Directory-based tensor store: a plain-text manifest plus raw little-endian
// binary files. Manifest line format (whitespace separated):
//   name dtype shape relpath [key=value ...]
// dtype is f32 or u8, shape is comma-separated ints. Names are unique and
// may not contain whitespace.
class TensorArchive {
 public:
  struct Entry {
    std::string name;
    std::string dtype;  // "f32" | "u8"
    Shape shape;
    std::string path;  // relative to the archive directory
    std::map<std::string, std::string> attrs;
    int64_t numel() const { return shape_numel(shape); }
  };

  // Creates (or wipes, with force) an archive directory for writing.
  // Refuses an existing archive without force.
  static TensorArchive create(const std::string& dir, bool force);

  // Opens an existing archive, validating every entry's byte length.
  static TensorArchive open(const std::string& dir);

  void add_f32(const std::string& name, const Shape& shape,
               const std::vector<float>& data,
               const std::map<std::string, std::string>& attrs = {});
  void add_u8(const std::string& name, const Shape& shape,
              const std::vector<uint8_t>& data,
              const std::map<std::string, std::string>& attrs = {});

  std::vector<float> read_f32(const std::string& name) const;
  std::vector<uint8_t> read_u8(const std::string& name) const;

  const Entry& entry(const std::string& name) const;
  bool contains(const std::string& name) const;
  const std::vector<Entry>& entries() const { return entries_; }
  const std::string& dir() const { return dir_; }

 private:
  void append_entry(Entry e, const void* bytes, size_t nbytes);
  void rewrite_manifest() const;

  std::string dir_;
  std::vector<Entry> entries_;
  std::map<std::string, size_t> index_;
};

}  // namespace uncseg
