#include "uncseg/dataset.hpp"

#include "uncseg/archive.hpp"
#include "uncseg/errors.hpp"

namespace uncseg {

void save_dataset(const std::string& dir, const Dataset& cases,
                  const std::string& split, bool force) {
  TensorArchive a = TensorArchive::create(dir, force);
  for (size_t i = 0; i < cases.size(); ++i) {
    const SegCase& c = cases[i];
    std::map<std::string, std::string> attrs{
        {"subject_id", std::to_string(c.subject_id)},
        {"slice_index", std::to_string(c.slice_index)},
        {"spacing_mm", std::to_string(c.spacing_mm)},
        {"split", split}};
    a.add_f32("image_" + std::to_string(i), {c.h, c.w}, c.image, attrs);
    a.add_u8("mask_" + std::to_string(i), {c.h, c.w}, c.mask.labels);
  }
}

Dataset load_dataset(const std::string& dir) {
  TensorArchive a = TensorArchive::open(dir);
  Dataset cases;
  for (size_t i = 0;; ++i) {
    const std::string img_name = "image_" + std::to_string(i);
    if (!a.contains(img_name)) break;
    const auto& e = a.entry(img_name);
    if (e.shape.size() != 2)
      throw SchemaError("dataset: image entry must be 2-D");
    SegCase c;
    c.h = e.shape[0];
    c.w = e.shape[1];
    c.image = a.read_f32(img_name);
    c.mask.h = c.h;
    c.mask.w = c.w;
    c.mask.labels = a.read_u8("mask_" + std::to_string(i));
    c.subject_id = std::stoi(e.attrs.at("subject_id"));
    c.slice_index = std::stoi(e.attrs.at("slice_index"));
    c.spacing_mm = std::stof(e.attrs.at("spacing_mm"));
    cases.push_back(std::move(c));
  }
  if (cases.empty()) throw IoError("dataset: no cases found in " + dir);
  return cases;
}

}  // namespace uncseg
