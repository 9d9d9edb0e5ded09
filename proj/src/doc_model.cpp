#include "realcred/doc_model.hpp"

#include <algorithm>
#include <numeric>

#include <nlohmann/json.hpp>

#include "realcred/error.hpp"
#include "realcred/extraction.hpp"

namespace realcred {

using nlohmann::json;

std::string_view to_string(DocumentKind kind) noexcept {
  switch (kind) {
    case DocumentKind::CitizenCard: return "CitizenCard";
    case DocumentKind::EnergyCertificate: return "EnergyCertificate";
    case DocumentKind::PropertyRecord: return "PropertyRecord";
  }
  return "CitizenCard";
}

std::string_view to_cli_name(DocumentKind kind) noexcept {
  switch (kind) {
    case DocumentKind::CitizenCard: return "citizen-card";
    case DocumentKind::EnergyCertificate: return "energy-certificate";
    case DocumentKind::PropertyRecord: return "property-record";
  }
  return "citizen-card";
}

std::optional<DocumentKind> parse_kind(std::string_view s) noexcept {
  for (auto k : kAllKinds) {
    if (s == to_string(k) || s == to_cli_name(k)) return k;
  }
  return std::nullopt;
}

namespace {

using VK = ValueKind;

const std::vector<FieldSchema> kCitizenCard = {
    {"LAST_NAME", VK::PersonName, true, false},     {"FIRST_NAME", VK::PersonName, true, false},
    {"SEX", VK::Sex, true, false},                  {"NATIONALITY", VK::FreeText, true, false},
    {"DATE_OF_BIRTH", VK::Date, true, false},       {"DOC_NUMBER", VK::RegistryNumber, true, false},
    {"EXPIRY_DATE", VK::Date, true, false},         {"NIF", VK::NifNumber, true, false},
};

const std::vector<FieldSchema> kEnergyCertificate = {
    {"CERT_NUMBER", VK::RegistryNumber, true, false}, {"ISSUE_DATE", VK::Date, true, false},
    {"EXPIRY_DATE", VK::Date, true, false},           {"ENERGY_CLASS", VK::EnergyClass, true, false},
    {"HOLDER_NAME", VK::PersonName, true, false},     {"HOLDER_NIF", VK::NifNumber, true, false},
    {"ADDRESS", VK::Address, true, false},            {"MUNICIPALITY", VK::Address, true, false},
    {"PARISH", VK::Address, true, false},             {"LATITUDE", VK::GeoCoordinate, true, false},
    {"LONGITUDE", VK::GeoCoordinate, true, false},    {"BUILDING_TYPE", VK::FreeText, true, false},
};

const std::vector<FieldSchema> kPropertyRecord = {
    {"REGISTRY_NUMBER", VK::RegistryNumber, true, false}, {"REGISTRATION_DATE", VK::Date, true, false},
    {"MUNICIPALITY", VK::Address, true, false},           {"PARISH", VK::Address, true, false},
    {"ADDRESS", VK::Address, true, false},                {"ARTICLE_NUMBER", VK::RegistryNumber, true, false},
    {"AREA_M2", VK::FreeText, true, false},               {"LATITUDE", VK::GeoCoordinate, true, false},
    {"LONGITUDE", VK::GeoCoordinate, true, false},        {"OWNER_NAME", VK::PersonName, true, true},
    {"OWNER_NIF", VK::NifNumber, true, true},
};

std::vector<Violation> check_counts(DocumentKind kind, const std::map<std::string, std::size_t>& counts) {
  std::vector<Violation> out;
  for (const auto& [label, n] : counts) {
    const auto* f = find_field(kind, label);
    if (!f) {
      out.push_back({Violation::Code::UnknownLabel, label});
    } else if (!f->repeatable && n > 1) {
      out.push_back({Violation::Code::NotRepeatable, label});
    }
  }
  for (const auto& f : schema_for(kind)) {
    auto it = counts.find(f.label);
    if (f.required && (it == counts.end() || it->second == 0)) {
      out.push_back({Violation::Code::MissingRequired, f.label});
    }
  }
  return out;
}

BoundingBox box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw Error(Errc::ParseError, "box must be a 4-element integer array");
  for (const auto& v : j) {
    if (!v.is_number_integer()) throw Error(Errc::ParseError, "box coordinates must be integers");
  }
  return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
}

const json& require(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(Errc::ParseError, std::string("missing key '") + key + "'");
  return *it;
}

DocumentKind kind_from_json(const json& j) {
  const auto& v = require(j, "kind");
  if (!v.is_string()) throw Error(Errc::ParseError, "kind must be a string");
  auto k = parse_kind(v.get<std::string>());
  if (!k) throw Error(Errc::ParseError, "unknown document kind '" + v.get<std::string>() + "'");
  return *k;
}

}  // namespace

std::vector<std::string> GroundTruthDocument::values_of(std::string_view label) const {
  std::vector<std::string> out;
  for (const auto& f : fields) {
    if (f.label == label) out.push_back(f.value);
  }
  return out;
}

std::optional<std::string> ExtractionResult::first(std::string_view label) const {
  auto it = fields.find(std::string(label));
  if (it == fields.end() || it->second.empty()) return std::nullopt;
  return it->second.front().value;
}

std::vector<std::string> ExtractionResult::values_of(std::string_view label) const {
  std::vector<std::string> out;
  if (auto it = fields.find(std::string(label)); it != fields.end()) {
    for (const auto& v : it->second) out.push_back(v.value);
  }
  return out;
}

const std::vector<FieldSchema>& schema_for(DocumentKind kind) {
  switch (kind) {
    case DocumentKind::CitizenCard: return kCitizenCard;
    case DocumentKind::EnergyCertificate: return kEnergyCertificate;
    case DocumentKind::PropertyRecord: return kPropertyRecord;
  }
  return kCitizenCard;
}

const FieldSchema* find_field(DocumentKind kind, std::string_view label) {
  for (const auto& f : schema_for(kind)) {
    if (f.label == label) return &f;
  }
  return nullptr;
}

std::optional<std::size_t> schema_index(DocumentKind kind, std::string_view label) {
  const auto& s = schema_for(kind);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i].label == label) return i;
  }
  return std::nullopt;
}

std::string_view to_string(Violation::Code code) noexcept {
  switch (code) {
    case Violation::Code::MissingRequired: return "MISSING_REQUIRED";
    case Violation::Code::NotRepeatable: return "NOT_REPEATABLE";
    case Violation::Code::UnknownLabel: return "UNKNOWN_LABEL";
    case Violation::Code::InvalidBox: return "INVALID_BOX";
    case Violation::Code::OverlappingBoxes: return "OVERLAPPING_BOXES";
    case Violation::Code::EmptyValue: return "EMPTY_VALUE";
    case Violation::Code::BadConfidence: return "BAD_CONFIDENCE";
  }
  return "UNKNOWN";
}

std::vector<Violation> validate_document(const GroundTruthDocument& doc) {
  std::map<std::string, std::size_t> counts;
  for (const auto& f : doc.fields) ++counts[f.label];
  auto out = check_counts(doc.kind, counts);
  for (std::size_t i = 0; i < doc.fields.size(); ++i) {
    const auto& f = doc.fields[i];
    if (f.value.empty()) out.push_back({Violation::Code::EmptyValue, f.label});
    if (!f.box.valid()) {
      out.push_back({Violation::Code::InvalidBox, f.label});
      continue;
    }
    for (std::size_t j = i + 1; j < doc.fields.size(); ++j) {
      if (doc.fields[j].box.valid() && compute_iou(f.box, doc.fields[j].box) > 0.0) {
        out.push_back({Violation::Code::OverlappingBoxes, f.label});
      }
    }
  }
  return out;
}

std::vector<Violation> validate_document(const ExtractionResult& result) {
  std::map<std::string, std::size_t> counts;
  std::vector<Violation> bad_conf;
  for (const auto& [label, values] : result.fields) {
    counts[label] = values.size();
    for (const auto& v : values) {
      if (!(v.confidence >= 0.0 && v.confidence <= 1.0)) bad_conf.push_back({Violation::Code::BadConfidence, label});
    }
  }
  auto out = check_counts(result.kind, counts);
  out.insert(out.end(), bad_conf.begin(), bad_conf.end());
  return out;
}

std::vector<std::size_t> reading_order_permutation(std::span<const Token> tokens, int row_tolerance) {
  if (row_tolerance < 0) throw Error(Errc::InvalidArgument, "row_tolerance must be >= 0");
  const std::size_t n = tokens.size();
  std::vector<std::size_t> by_center(n);
  std::iota(by_center.begin(), by_center.end(), 0);
  std::stable_sort(by_center.begin(), by_center.end(), [&](std::size_t a, std::size_t b) {
    return tokens[a].box.center_y() < tokens[b].box.center_y();
  });

  // On a line, the transitive closure of "within tolerance" is exactly the
  // chain of consecutive gaps that stay within tolerance.
  struct Row {
    std::vector<std::size_t> members;
    double mean = 0.0;
    std::size_t first_index = 0;
  };
  std::vector<Row> rows;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t idx = by_center[k];
    if (k == 0 || tokens[idx].box.center_y() - tokens[by_center[k - 1]].box.center_y() > row_tolerance) {
      rows.emplace_back();
    }
    rows.back().members.push_back(idx);
  }
  for (auto& row : rows) {
    double sum = 0.0;
    for (auto idx : row.members) sum += tokens[idx].box.center_y();
    row.mean = sum / static_cast<double>(row.members.size());
    row.first_index = *std::min_element(row.members.begin(), row.members.end());
    std::sort(row.members.begin(), row.members.end(), [&](std::size_t a, std::size_t b) {
      if (tokens[a].box.x0 != tokens[b].box.x0) return tokens[a].box.x0 < tokens[b].box.x0;
      return a < b;
    });
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.mean != b.mean) return a.mean < b.mean;
    return a.first_index < b.first_index;
  });

  std::vector<std::size_t> out;
  out.reserve(n);
  for (const auto& row : rows) out.insert(out.end(), row.members.begin(), row.members.end());
  return out;
}

std::vector<Token> reading_order_sort(std::span<const Token> tokens, int row_tolerance) {
  std::vector<Token> out;
  out.reserve(tokens.size());
  for (auto idx : reading_order_permutation(tokens, row_tolerance)) out.push_back(tokens[idx]);
  return out;
}

double compute_iou(const BoundingBox& a, const BoundingBox& b) noexcept {
  const long long ix = std::max(0, std::min(a.x1, b.x1) - std::max(a.x0, b.x0));
  const long long iy = std::max(0, std::min(a.y1, b.y1) - std::max(a.y0, b.y0));
  const long long inter = ix * iy;
  const long long uni = a.area() + b.area() - inter;
  if (uni <= 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

json to_json(const AnnotationFile& file) {
  json entities = json::array();
  for (const auto& e : file.entities) {
    json je = {{"label", e.label}, {"text", e.text}, {"box", {e.box.x0, e.box.y0, e.box.x1, e.box.y1}}};
    if (e.confidence) je["confidence"] = *e.confidence;
    entities.push_back(std::move(je));
  }
  return {{"kind", to_string(file.kind)}, {"doc_id", file.doc_id}, {"entities", std::move(entities)}};
}

AnnotationFile annotation_from_json(const json& j) {
  if (!j.is_object()) throw Error(Errc::ParseError, "annotation must be a JSON object");
  AnnotationFile file;
  file.kind = kind_from_json(j);
  const auto& id = require(j, "doc_id");
  if (!id.is_string()) throw Error(Errc::ParseError, "doc_id must be a string");
  file.doc_id = id.get<std::string>();
  const auto& ents = require(j, "entities");
  if (!ents.is_array()) throw Error(Errc::ParseError, "entities must be an array");
  for (const auto& je : ents) {
    AnnotatedEntity e;
    const auto& label = require(je, "label");
    const auto& textv = require(je, "text");
    if (!label.is_string() || !textv.is_string()) throw Error(Errc::ParseError, "label/text must be strings");
    e.label = label.get<std::string>();
    e.text = textv.get<std::string>();
    e.box = box_from_json(require(je, "box"));
    if (auto c = je.find("confidence"); c != je.end()) {
      if (!c->is_number()) throw Error(Errc::ParseError, "confidence must be a number");
      e.confidence = c->get<double>();
    }
    if (e.label != kOutsideLabel && !find_field(file.kind, e.label)) {
      throw Error(Errc::ParseError, "label '" + e.label + "' not in schema of " + std::string(to_string(file.kind)));
    }
    file.entities.push_back(std::move(e));
  }
  return file;
}

AnnotationFile to_annotation(const GroundTruthDocument& doc) {
  AnnotationFile file{doc.kind, doc.doc_id, {}};
  for (const auto& f : doc.fields) file.entities.push_back({f.label, f.value, f.box, std::nullopt});
  return file;
}

GroundTruthDocument gold_from_annotation(const AnnotationFile& file, std::uint64_t seed) {
  GroundTruthDocument doc{file.kind, file.doc_id, {}, seed};
  for (const auto& e : file.entities) doc.fields.push_back({e.label, e.text, e.box});
  return doc;
}

json to_json(const ExtractionResult& result) {
  json fields = json::object();
  for (const auto& [label, values] : result.fields) {
    json arr = json::array();
    for (const auto& v : values) arr.push_back({{"value", v.value}, {"confidence", v.confidence}});
    fields[label] = std::move(arr);
  }
  return {{"kind", to_string(result.kind)}, {"doc_id", result.doc_id}, {"fields", std::move(fields)}};
}

ExtractionResult extraction_from_json(const json& j) {
  ExtractionResult r;
  r.kind = kind_from_json(j);
  r.doc_id = require(j, "doc_id").get<std::string>();
  for (const auto& [label, arr] : require(j, "fields").items()) {
    auto& values = r.fields[label];
    for (const auto& v : arr) values.push_back({v.at("value").get<std::string>(), v.at("confidence").get<double>()});
  }
  return r;
}

}  // namespace realcred
