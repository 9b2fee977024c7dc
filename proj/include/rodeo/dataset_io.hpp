#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rodeo/geometry.hpp"
#include "rodeo/sample.hpp"

namespace rodeo {

inline constexpr const char* kSchemaVersion = "1.0";

/// Validation or parse failure; the message carries source, record and field.
class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DatasetFormat { CanonicalJson, CocoCornerJson, Csv };

inline DatasetFormat parse_format(std::string_view name) {
  if (name == "canonical-json" || name == "json") return DatasetFormat::CanonicalJson;
  if (name == "coco-corner-json" || name == "coco") return DatasetFormat::CocoCornerJson;
  if (name == "csv") return DatasetFormat::Csv;
  throw std::invalid_argument("unknown dataset format '" + std::string(name) +
                              "' (expected canonical-json, coco-corner-json or csv)");
}

/// Boxes of one image as stored in a single (target or prediction) file.
struct ImageBoxes {
  std::string image_id;
  std::optional<ImageSize> image_size;
  std::vector<LabeledBox> boxes;
  friend bool operator==(const ImageBoxes&, const ImageBoxes&) = default;
};

struct DatasetFile {
  std::string schema_version = kSchemaVersion;
  std::vector<std::string> classes;
  std::vector<ImageBoxes> images;
  friend bool operator==(const DatasetFile&, const DatasetFile&) = default;
};

namespace detail {

inline std::string join(const std::vector<std::string>& v, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += v[i];
  }
  return out;
}

class Vocabulary {
 public:
  explicit Vocabulary(std::vector<std::string> names) : names_(std::move(names)) {
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (!index_.emplace(names_[i], ClassId(i)).second) {
        throw DatasetError("duplicate class name '" + names_[i] + "' in vocabulary");
      }
    }
  }
  std::optional<ClassId> find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, ClassId> index_;
};

inline ClassId resolve_class(const Vocabulary& vocab, const std::string& name, const std::string& where) {
  if (auto id = vocab.find(name)) return *id;
  throw DatasetError(where + ": unknown class '" + name + "' (vocabulary: " + join(vocab.names(), ", ") + ")");
}

inline LabeledBox make_box(double x, double y, double w, double h, ClassId cls,
                           std::optional<double> conf, const std::string& where) {
  if (!std::isfinite(x) || !std::isfinite(y)) throw DatasetError(where + ".x/y: coordinates must be finite");
  if (!(w > 0.0) || !std::isfinite(w)) throw DatasetError(where + ".w: width must be positive and finite");
  if (!(h > 0.0) || !std::isfinite(h)) throw DatasetError(where + ".h: height must be positive and finite");
  if (conf && !(*conf >= 0.0 && *conf <= 1.0)) throw DatasetError(where + ".confidence: must lie in [0, 1]");
  return LabeledBox(Box(x, y, w, h), cls, conf);
}

inline void check_unique_ids(const DatasetFile& f, const std::string& source) {
  std::set<std::string> seen;
  for (std::size_t i = 0; i < f.images.size(); ++i) {
    if (!seen.insert(f.images[i].image_id).second) {
      throw DatasetError(source + ": images[" + std::to_string(i) + "].image_id: duplicate id '" +
                         f.images[i].image_id + "'");
    }
  }
}

using json = nlohmann::json;

inline double json_number(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw DatasetError(where + "." + key + ": missing field");
  const auto& v = obj.at(key);
  if (!v.is_number()) throw DatasetError(where + "." + key + ": expected a number");
  return v.get<double>();
}

inline std::string json_id(const json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw DatasetError(where + ": expected a string or integer id");
}

inline DatasetFile parse_canonical(const json& doc, const std::string& source) {
  if (!doc.is_object()) throw DatasetError(source + ": expected a JSON object at top level");
  DatasetFile f;
  if (!doc.contains("schema_version") || !doc["schema_version"].is_string())
    throw DatasetError(source + ": schema_version: missing or not a string");
  f.schema_version = doc["schema_version"].get<std::string>();
  if (!doc.contains("classes") || !doc["classes"].is_array())
    throw DatasetError(source + ": classes: missing or not an array");
  for (std::size_t i = 0; i < doc["classes"].size(); ++i) {
    const auto& c = doc["classes"][i];
    if (!c.is_string()) throw DatasetError(source + ": classes[" + std::to_string(i) + "]: expected a string");
    f.classes.push_back(c.get<std::string>());
  }
  const Vocabulary vocab(f.classes);
  if (!doc.contains("images") || !doc["images"].is_array())
    throw DatasetError(source + ": images: missing or not an array");
  const auto& images = doc["images"];
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string where = source + ": images[" + std::to_string(i) + "]";
    const auto& img = images[i];
    if (!img.is_object()) throw DatasetError(where + ": expected an object");
    ImageBoxes ib;
    if (!img.contains("image_id")) throw DatasetError(where + ".image_id: missing field");
    ib.image_id = json_id(img["image_id"], where + ".image_id");
    if (img.contains("image_size") && !img["image_size"].is_null()) {
      const auto& sz = img["image_size"];
      if (!sz.is_array() || sz.size() != 2 || !sz[0].is_number() || !sz[1].is_number())
        throw DatasetError(where + ".image_size: expected [width, height]");
      ImageSize s{sz[0].get<double>(), sz[1].get<double>()};
      if (!(s.width > 0.0) || !(s.height > 0.0))
        throw DatasetError(where + ".image_size: width and height must be positive");
      ib.image_size = s;
    }
    if (img.contains("boxes")) {
      const auto& boxes = img["boxes"];
      if (!boxes.is_array()) throw DatasetError(where + ".boxes: expected an array");
      for (std::size_t j = 0; j < boxes.size(); ++j) {
        const std::string bw = where + ".boxes[" + std::to_string(j) + "]";
        const auto& b = boxes[j];
        if (!b.is_object()) throw DatasetError(bw + ": expected an object");
        if (!b.contains("class") || !b["class"].is_string()) throw DatasetError(bw + ".class: missing or not a string");
        const ClassId cls = resolve_class(vocab, b["class"].get<std::string>(), bw + ".class");
        std::optional<double> conf;
        if (b.contains("confidence") && !b["confidence"].is_null()) conf = json_number(b, "confidence", bw);
        ib.boxes.push_back(make_box(json_number(b, "x", bw), json_number(b, "y", bw), json_number(b, "w", bw),
                                    json_number(b, "h", bw), cls, conf, bw));
      }
    }
    f.images.push_back(std::move(ib));
  }
  check_unique_ids(f, source);
  return f;
}

inline DatasetFile parse_coco(const json& doc, const std::string& source) {
  if (!doc.is_object()) throw DatasetError(source + ": expected a JSON object at top level");
  DatasetFile f;
  if (!doc.contains("categories") || !doc["categories"].is_array())
    throw DatasetError(source + ": categories: missing or not an array");
  std::map<std::string, std::string> category_name;  // id -> name
  for (std::size_t i = 0; i < doc["categories"].size(); ++i) {
    const std::string where = source + ": categories[" + std::to_string(i) + "]";
    const auto& c = doc["categories"][i];
    if (!c.is_object() || !c.contains("id") || !c.contains("name") || !c["name"].is_string())
      throw DatasetError(where + ": expected {id, name}");
    const auto id = json_id(c["id"], where + ".id");
    category_name[id] = c["name"].get<std::string>();
    f.classes.push_back(c["name"].get<std::string>());
  }
  const Vocabulary vocab(f.classes);

  std::map<std::string, std::size_t> image_index;
  auto image_slot = [&](const std::string& id) -> ImageBoxes& {
    auto it = image_index.find(id);
    if (it == image_index.end()) {
      it = image_index.emplace(id, f.images.size()).first;
      f.images.push_back(ImageBoxes{id, std::nullopt, {}});
    }
    return f.images[it->second];
  };
  if (doc.contains("images")) {
    if (!doc["images"].is_array()) throw DatasetError(source + ": images: expected an array");
    for (std::size_t i = 0; i < doc["images"].size(); ++i) {
      const std::string where = source + ": images[" + std::to_string(i) + "]";
      const auto& img = doc["images"][i];
      if (!img.is_object() || !img.contains("id")) throw DatasetError(where + ".id: missing field");
      const auto id = json_id(img["id"], where + ".id");
      if (image_index.count(id)) throw DatasetError(where + ".id: duplicate id '" + id + "'");
      auto& slot = image_slot(id);
      if (img.contains("width") || img.contains("height")) {
        ImageSize s{json_number(img, "width", where), json_number(img, "height", where)};
        if (!(s.width > 0.0) || !(s.height > 0.0)) throw DatasetError(where + ": width and height must be positive");
        slot.image_size = s;
      }
    }
  }
  if (!doc.contains("annotations") || !doc["annotations"].is_array())
    throw DatasetError(source + ": annotations: missing or not an array");
  for (std::size_t i = 0; i < doc["annotations"].size(); ++i) {
    const std::string where = source + ": annotations[" + std::to_string(i) + "]";
    const auto& a = doc["annotations"][i];
    if (!a.is_object() || !a.contains("image_id")) throw DatasetError(where + ".image_id: missing field");
    const auto img_id = json_id(a["image_id"], where + ".image_id");
    if (!a.contains("category_id")) throw DatasetError(where + ".category_id: missing field");
    const auto cat = json_id(a["category_id"], where + ".category_id");
    auto it = category_name.find(cat);
    if (it == category_name.end())
      throw DatasetError(where + ".category_id: unknown category '" + cat + "' (vocabulary: " +
                         join(f.classes, ", ") + ")");
    const ClassId cls = resolve_class(vocab, it->second, where + ".category_id");
    if (!a.contains("bbox") || !a["bbox"].is_array() || a["bbox"].size() != 4)
      throw DatasetError(where + ".bbox: expected [x_min, y_min, w, h]");
    for (std::size_t k = 0; k < 4; ++k)
      if (!a["bbox"][k].is_number()) throw DatasetError(where + ".bbox[" + std::to_string(k) + "]: expected a number");
    const double x_min = a["bbox"][0].get<double>(), y_min = a["bbox"][1].get<double>();
    const double w = a["bbox"][2].get<double>(), h = a["bbox"][3].get<double>();
    std::optional<double> conf;
    if (a.contains("score") && !a["score"].is_null()) conf = json_number(a, "score", where);
    image_slot(img_id).boxes.push_back(make_box(x_min + w / 2.0, y_min + h / 2.0, w, h, cls, conf, where + ".bbox"));
  }
  return f;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

inline double parse_decimal(const std::string& text, const std::string& where) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (text.empty() || ec != std::errc() || ptr != last) {
    throw DatasetError(where + ": '" + text + "' is not a decimal number");
  }
  return v;
}

inline DatasetFile parse_csv(std::istream& in, const std::string& source) {
  DatasetFile f;
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::vector<std::string>> declared_classes;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    if (line[0] == '#') {
      const std::string tag = "# classes:";
      if (line.rfind(tag, 0) == 0) declared_classes = split_csv_line(line.substr(tag.size()));
      continue;
    }
    header = split_csv_line(line);
    break;
  }
  if (header.empty()) throw DatasetError(source + ": missing CSV header");
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* required : {"image_id", "class", "x", "y", "w", "h"})
    if (!col.count(required)) throw DatasetError(source + ": header lacks column '" + required + "'");

  struct Row {
    std::size_t line;
    std::vector<std::string> fields;
  };
  std::vector<Row> rows;
  std::set<std::string> seen_classes;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw DatasetError(source + ": line " + std::to_string(line_no) + ": expected " +
                         std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
    }
    if (!fields[col["class"]].empty()) seen_classes.insert(fields[col["class"]]);
    rows.push_back({line_no, std::move(fields)});
  }
  f.classes = declared_classes ? *declared_classes : std::vector<std::string>(seen_classes.begin(), seen_classes.end());
  const Vocabulary vocab(f.classes);

  std::map<std::string, std::size_t> image_index;
  for (const auto& r : rows) {
    const std::string where = source + ": line " + std::to_string(r.line);
    auto field = [&](const char* name) -> const std::string& { return r.fields[col.at(name)]; };
    const auto& id = field("image_id");
    if (id.empty()) throw DatasetError(where + ": field 'image_id' is empty");
    auto it = image_index.find(id);
    if (it == image_index.end()) {
      it = image_index.emplace(id, f.images.size()).first;
      f.images.push_back(ImageBoxes{id, std::nullopt, {}});
    }
    auto& img = f.images[it->second];
    if (col.count("image_width") && col.count("image_height") && !field("image_width").empty()) {
      ImageSize s{parse_decimal(field("image_width"), where + ": field 'image_width'"),
                  parse_decimal(field("image_height"), where + ": field 'image_height'")};
      if (!(s.width > 0.0) || !(s.height > 0.0)) throw DatasetError(where + ": image size must be positive");
      img.image_size = s;
    }
    if (field("class").empty()) continue;  // image without boxes
    const ClassId cls = resolve_class(vocab, field("class"), where + ": field 'class'");
    auto num = [&](const char* name) { return parse_decimal(field(name), where + ": field '" + name + "'"); };
    std::optional<double> conf;
    if (col.count("confidence") && !field("confidence").empty()) conf = num("confidence");
    const double x = num("x"), y = num("y"), w = num("w"), h = num("h");
    if (!(w > 0.0)) throw DatasetError(where + ": field 'w': width must be positive");
    if (!(h > 0.0)) throw DatasetError(where + ": field 'h': height must be positive");
    img.boxes.push_back(make_box(x, y, w, h, cls, conf, where));
  }
  return f;
}

}  // namespace detail

inline DatasetFile parse_dataset(std::istream& in, DatasetFormat format, const std::string& source = "<input>") {
  if (format == DatasetFormat::Csv) return detail::parse_csv(in, source);
  detail::json doc;
  try {
    doc = detail::json::parse(in);
  } catch (const detail::json::parse_error& e) {
    throw DatasetError(source + ": invalid JSON: " + e.what());
  }
  return format == DatasetFormat::CanonicalJson ? detail::parse_canonical(doc, source)
                                                : detail::parse_coco(doc, source);
}

inline DatasetFile parse_dataset(const std::string& text, DatasetFormat format, const std::string& source = "<input>") {
  std::istringstream in(text);
  return parse_dataset(in, format, source);
}

inline DatasetFile load_dataset(const std::string& path, DatasetFormat format) {
  std::ifstream in(path);
  if (!in) throw DatasetError(path + ": cannot open file");
  return parse_dataset(in, format, path);
}

inline nlohmann::json to_json(const DatasetFile& f) {
  nlohmann::json doc;
  doc["schema_version"] = f.schema_version;
  doc["classes"] = f.classes;
  doc["images"] = nlohmann::json::array();
  for (const auto& img : f.images) {
    nlohmann::json j;
    j["image_id"] = img.image_id;
    if (img.image_size) j["image_size"] = {img.image_size->width, img.image_size->height};
    j["boxes"] = nlohmann::json::array();
    for (const auto& b : img.boxes) {
      nlohmann::json jb;
      jb["class"] = f.classes.at(std::size_t(b.class_id));
      jb["x"] = b.box.x();
      jb["y"] = b.box.y();
      jb["w"] = b.box.w();
      jb["h"] = b.box.h();
      if (b.confidence) jb["confidence"] = *b.confidence;
      j["boxes"].push_back(std::move(jb));
    }
    doc["images"].push_back(std::move(j));
  }
  return doc;
}

/// Writes the canonical JSON form.
inline void save_dataset(const std::string& path, const DatasetFile& f) {
  std::ofstream out(path);
  if (!out) throw DatasetError(path + ": cannot open for writing");
  out << to_json(f).dump(2) << '\n';
}

/// Joins target and prediction files on image id. Images without
/// predictions get an empty list; predictions for unknown images are an
/// error.
inline Dataset pair_datasets(const DatasetFile& targets, const DatasetFile& predictions) {
  if (targets.classes != predictions.classes) {
    throw DatasetError("class vocabularies differ: targets [" + detail::join(targets.classes, ", ") +
                       "] vs predictions [" + detail::join(predictions.classes, ", ") + "]");
  }
  std::map<std::string, const ImageBoxes*> preds;
  for (const auto& p : predictions.images) preds[p.image_id] = &p;
  Dataset out;
  out.reserve(targets.images.size());
  for (const auto& t : targets.images) {
    ImageSample s;
    s.image_id = t.image_id;
    s.image_size = t.image_size;
    s.targets = t.boxes;
    if (auto it = preds.find(t.image_id); it != preds.end()) {
      s.predictions = it->second->boxes;
      if (!s.image_size) s.image_size = it->second->image_size;
      preds.erase(it);
    }
    out.push_back(std::move(s));
  }
  if (!preds.empty()) {
    throw DatasetError("predictions reference image '" + preds.begin()->first + "' which has no targets entry");
  }
  return out;
}

/// Splits paired samples back into a targets file and a predictions file.
inline std::pair<DatasetFile, DatasetFile> split_dataset(const Dataset& dataset,
                                                         const std::vector<std::string>& classes) {
  DatasetFile t, p;
  t.classes = p.classes = classes;
  for (const auto& s : dataset) {
    t.images.push_back({s.image_id, s.image_size, s.targets});
    p.images.push_back({s.image_id, s.image_size, s.predictions});
  }
  return {t, p};
}

}  // namespace rodeo
