#include "realcred/synthgen.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "realcred/error.hpp"
#include "realcred/reconcile.hpp"
#include "realcred/rng.hpp"
#include "realcred/text.hpp"
#include "wordlists.hpp"

namespace realcred {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Noise profiles

NoiseProfile NoiseProfile::identity() { return NoiseProfile{}; }

std::map<std::string, std::vector<std::string>> NoiseProfile::default_confusions() {
  return {
      {"O", {"0"}}, {"0", {"O"}},      {"l", {"1", "I"}}, {"I", {"l", "1"}}, {"1", {"l", "I"}},
      {"rn", {"m"}}, {"m", {"rn"}},    {"S", {"5"}},      {"5", {"S"}},      {"B", {"8"}},
      {"8", {"B"}}, {"e", {"c"}},      {"c", {"e"}},      {"i", {"l"}},      {"u", {"v"}},
      {"n", {"r"}}, {"a", {"o"}},      {"o", {"a"}},      {"ç", {"c"}},      {"6", {"b"}},
  };
}

NoiseProfile NoiseProfile::paper_like() {
  NoiseProfile p;
  p.char_sub_rate = 0.01;
  p.confusion_table = default_confusions();
  p.token_drop_rate = 0.015;
  p.token_split_rate = 0.02;
  p.case_flip_rate = 0.02;
  p.diacritic_strip_rate = 0.30;
  p.box_jitter_px = 7;
  p.confidence_floor = 0.6;
  return p;
}

void NoiseProfile::validate() const {
  auto rate = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(Errc::InvalidArgument, std::string(name) + " must be in [0,1]");
  };
  rate(char_sub_rate, "char_sub_rate");
  rate(token_drop_rate, "token_drop_rate");
  rate(token_split_rate, "token_split_rate");
  rate(case_flip_rate, "case_flip_rate");
  rate(diacritic_strip_rate, "diacritic_strip_rate");
  rate(confidence_floor, "confidence_floor");
  if (box_jitter_px < 0) throw Error(Errc::InvalidArgument, "box_jitter_px must be >= 0");
  for (const auto& [from, to] : confusion_table) {
    const auto n = text::length(from);
    if (n < 1 || n > 2) throw Error(Errc::InvalidArgument, "confusion key '" + from + "' must be 1 or 2 characters");
    if (to.empty()) throw Error(Errc::InvalidArgument, "confusion key '" + from + "' has no replacements");
    for (const auto& r : to) {
      if (r.empty()) throw Error(Errc::InvalidArgument, "empty replacement for '" + from + "'");
    }
  }
}

json to_json(const NoiseProfile& p) {
  return {{"char_sub_rate", p.char_sub_rate},
          {"confusion_table", p.confusion_table},
          {"token_drop_rate", p.token_drop_rate},
          {"token_split_rate", p.token_split_rate},
          {"case_flip_rate", p.case_flip_rate},
          {"diacritic_strip_rate", p.diacritic_strip_rate},
          {"box_jitter_px", p.box_jitter_px},
          {"confidence_floor", p.confidence_floor}};
}

NoiseProfile profile_from_json(const json& j) {
  try {
    NoiseProfile p;
    p.char_sub_rate = j.at("char_sub_rate").get<double>();
    p.confusion_table = j.at("confusion_table").get<std::map<std::string, std::vector<std::string>>>();
    p.token_drop_rate = j.at("token_drop_rate").get<double>();
    p.token_split_rate = j.at("token_split_rate").get<double>();
    p.case_flip_rate = j.at("case_flip_rate").get<double>();
    p.diacritic_strip_rate = j.at("diacritic_strip_rate").get<double>();
    p.box_jitter_px = j.at("box_jitter_px").get<int>();
    p.confidence_floor = j.at("confidence_floor").get<double>();
    p.validate();
    return p;
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("noise profile: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Ground truth generation

namespace {

struct Person {
  std::string given;  // one or two given names
  std::string surnames;
  std::string sex;
  std::string nif;
  std::string full_name() const { return given + " " + surnames; }
};

std::string digits(Rng& rng, int n) {
  std::string s;
  for (int i = 0; i < n; ++i) s.push_back(static_cast<char>('0' + rng.uniform_int(0, 9)));
  return s;
}

std::string make_nif(Rng& rng) {
  std::string prefix = std::to_string(rng.uniform_int(1, 3)) + digits(rng, 7);
  return prefix + static_cast<char>('0' + nif_check_digit(prefix));
}

std::string two(int v) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02d", v);
  return buf;
}

struct Date {
  int y, m, d;
};

Date random_date(Rng& rng, int y0, int y1) {
  return {static_cast<int>(rng.uniform_int(y0, y1)), static_cast<int>(rng.uniform_int(1, 12)),
          static_cast<int>(rng.uniform_int(1, 28))};
}

std::string spaced(Date dt) { return two(dt.d) + " " + two(dt.m) + " " + std::to_string(dt.y); }
std::string slashed(Date dt) { return two(dt.d) + "/" + two(dt.m) + "/" + std::to_string(dt.y); }

Person make_person(Rng& rng) {
  const auto& given = detail::wordlist("given_names");
  const auto& surnames = detail::wordlist("surnames");
  Person p;
  const auto& first = rng.pick(given);  // "M|João"
  p.sex = first.substr(0, 1);
  p.given = first.substr(2);
  if (rng.bernoulli(0.5)) {
    // second given name of the same sex
    for (int tries = 0; tries < 8; ++tries) {
      const auto& g = rng.pick(given);
      if (g.substr(0, 1) == p.sex && g.substr(2) != p.given) {
        p.given += " " + g.substr(2);
        break;
      }
    }
  }
  p.surnames = rng.pick(surnames);
  if (rng.bernoulli(0.7)) p.surnames += " " + rng.pick(surnames);
  p.nif = make_nif(rng);
  return p;
}

struct Property {
  std::string address;
  std::string municipality;
  std::string parish;
  std::string latitude;
  std::string longitude;
};

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

Property make_property(Rng& rng) {
  const auto& muni = rng.pick(detail::wordlist("municipalities"));
  Property p;
  const auto bar = muni.find('|');
  p.municipality = muni.substr(0, bar);
  p.parish = muni.substr(bar + 1);
  p.address = rng.pick(detail::wordlist("streets")) + " " + std::to_string(rng.uniform_int(1, 250)) + ", " +
              std::to_string(rng.uniform_int(1000, 9999)) + "-" + digits(rng, 3) + " " + p.municipality;
  // continental Portugal bounding box
  p.latitude = fixed6(rng.uniform(36.8, 42.2));
  p.longitude = fixed6(rng.uniform(-9.6, -6.2));
  return p;
}

char random_upper(Rng& rng) { return static_cast<char>('A' + rng.uniform_int(0, 25)); }

std::string doc_id_for(DocumentKind kind, std::uint64_t seed) {
  static constexpr const char* kPrefix[] = {"CC", "EC", "PR"};
  char buf[40];
  std::snprintf(buf, sizeof buf, "%s-%016llx", kPrefix[static_cast<int>(kind)], static_cast<unsigned long long>(seed));
  return buf;
}

// Template slots on the 1000x700 page.
struct Slot {
  const char* label;
  BoundingBox box;
};

const std::vector<Slot> kCitizenCardLayout = {
    {"LAST_NAME", {300, 100, 940, 130}},   {"FIRST_NAME", {300, 160, 940, 190}},
    {"SEX", {300, 220, 360, 250}},         {"NATIONALITY", {400, 220, 500, 250}},
    {"DATE_OF_BIRTH", {540, 220, 760, 250}}, {"DOC_NUMBER", {300, 280, 560, 310}},
    {"EXPIRY_DATE", {600, 280, 820, 310}}, {"NIF", {300, 340, 520, 370}},
};

const std::vector<Slot> kEnergyCertificateLayout = {
    {"CERT_NUMBER", {60, 50, 300, 72}},    {"ISSUE_DATE", {340, 50, 500, 72}},
    {"EXPIRY_DATE", {540, 50, 700, 72}},   {"ENERGY_CLASS", {760, 50, 840, 72}},
    {"HOLDER_NAME", {60, 100, 620, 122}},  {"HOLDER_NIF", {660, 100, 860, 122}},
    {"ADDRESS", {60, 150, 940, 172}},      {"MUNICIPALITY", {60, 200, 400, 222}},
    {"PARISH", {440, 200, 900, 222}},      {"LATITUDE", {60, 250, 260, 272}},
    {"LONGITUDE", {300, 250, 500, 272}},   {"BUILDING_TYPE", {540, 250, 900, 272}},
};

const std::vector<Slot> kPropertyRecordLayout = {
    {"REGISTRY_NUMBER", {60, 40, 300, 60}}, {"REGISTRATION_DATE", {340, 40, 500, 60}},
    {"MUNICIPALITY", {540, 40, 760, 60}},   {"PARISH", {780, 40, 980, 60}},
    {"ADDRESS", {60, 80, 940, 100}},        {"ARTICLE_NUMBER", {60, 120, 220, 140}},
    {"AREA_M2", {260, 120, 420, 140}},      {"LATITUDE", {460, 120, 660, 140}},
    {"LONGITUDE", {700, 120, 900, 140}},
};

BoundingBox slot_box(const std::vector<Slot>& layout, std::string_view label) {
  for (const auto& s : layout) {
    if (label == s.label) return s.box;
  }
  throw Error(Errc::InvalidArgument, "no template slot for " + std::string(label));
}

BoundingBox owner_box(int row, bool nif) {
  const int y0 = 180 + 34 * row;
  return nif ? BoundingBox{640, y0, 840, y0 + 20} : BoundingBox{60, y0, 600, y0 + 20};
}

}  // namespace

const GroundTruthDocument& DocumentCase::get(DocumentKind kind) const {
  switch (kind) {
    case DocumentKind::CitizenCard: return citizen_card;
    case DocumentKind::EnergyCertificate: return energy_certificate;
    case DocumentKind::PropertyRecord: return property_record;
  }
  return citizen_card;
}

DocumentCase generate_case(std::uint64_t seed) {
  Rng rng(seed);
  const Person holder = make_person(rng);
  const Property property = make_property(rng);

  DocumentCase out;
  auto put = [](GroundTruthDocument& doc, const std::vector<Slot>& layout, const char* label, std::string value) {
    doc.fields.push_back({label, std::move(value), slot_box(layout, label)});
  };

  {
    auto& cc = out.citizen_card;
    cc = {DocumentKind::CitizenCard, doc_id_for(DocumentKind::CitizenCard, seed), {}, seed};
    const auto& L = kCitizenCardLayout;
    put(cc, L, "LAST_NAME", holder.surnames);
    put(cc, L, "FIRST_NAME", holder.given);
    put(cc, L, "SEX", holder.sex);
    put(cc, L, "NATIONALITY", "PRT");
    put(cc, L, "DATE_OF_BIRTH", spaced(random_date(rng, 1940, 2004)));
    put(cc, L, "DOC_NUMBER", digits(rng, 8) + " " + digits(rng, 1) + " " + random_upper(rng) + random_upper(rng) +
                                 digits(rng, 1));
    put(cc, L, "EXPIRY_DATE", spaced(random_date(rng, 2027, 2035)));
    put(cc, L, "NIF", holder.nif);
  }
  {
    auto& ec = out.energy_certificate;
    ec = {DocumentKind::EnergyCertificate, doc_id_for(DocumentKind::EnergyCertificate, seed), {}, seed};
    const auto& L = kEnergyCertificateLayout;
    static const std::vector<std::string> kClasses = {"A+", "A", "B", "B-", "C", "D", "E", "F"};
    const Date issued = random_date(rng, 2015, 2025);
    put(ec, L, "CERT_NUMBER", "SCE" + digits(rng, 9));
    put(ec, L, "ISSUE_DATE", slashed(issued));
    put(ec, L, "EXPIRY_DATE", slashed({issued.y + 10, issued.m, issued.d}));
    put(ec, L, "ENERGY_CLASS", rng.pick(kClasses));
    put(ec, L, "HOLDER_NAME", holder.full_name());
    put(ec, L, "HOLDER_NIF", holder.nif);
    put(ec, L, "ADDRESS", property.address);
    put(ec, L, "MUNICIPALITY", property.municipality);
    put(ec, L, "PARISH", property.parish);
    put(ec, L, "LATITUDE", property.latitude);
    put(ec, L, "LONGITUDE", property.longitude);
    put(ec, L, "BUILDING_TYPE", rng.pick(detail::wordlist("building_types")));
  }
  {
    auto& pr = out.property_record;
    pr = {DocumentKind::PropertyRecord, doc_id_for(DocumentKind::PropertyRecord, seed), {}, seed};
    const auto& L = kPropertyRecordLayout;
    const Date registered = random_date(rng, 1990, 2025);
    put(pr, L, "REGISTRY_NUMBER",
        std::to_string(rng.uniform_int(100, 9999)) + "/" + std::to_string(registered.y) + two(registered.m) +
            two(registered.d));
    put(pr, L, "REGISTRATION_DATE", slashed(registered));
    put(pr, L, "MUNICIPALITY", property.municipality);
    put(pr, L, "PARISH", property.parish);
    put(pr, L, "ADDRESS", property.address);
    put(pr, L, "ARTICLE_NUMBER", "U-" + std::to_string(rng.uniform_int(100, 9999)));
    put(pr, L, "AREA_M2", std::to_string(rng.uniform_int(35, 400)) + "," + digits(rng, 2) + " m2");
    put(pr, L, "LATITUDE", property.latitude);
    put(pr, L, "LONGITUDE", property.longitude);
    std::vector<Person> owners = {holder};
    const auto co_owners = rng.uniform_int(0, 2);
    for (int i = 0; i < co_owners; ++i) owners.push_back(make_person(rng));
    for (std::size_t i = 0; i < owners.size(); ++i) {
      pr.fields.push_back({"OWNER_NAME", owners[i].full_name(), owner_box(static_cast<int>(i), false)});
      pr.fields.push_back({"OWNER_NIF", owners[i].nif, owner_box(static_cast<int>(i), true)});
    }
  }
  return out;
}

GroundTruthDocument generate_ground_truth(DocumentKind kind, std::uint64_t seed) {
  return generate_case(seed).get(kind);
}

// ---------------------------------------------------------------------------
// Noise channel

namespace {

BoundingBox jitter(const BoundingBox& b, int px, Rng& rng) {
  if (px == 0) return b;
  auto d = [&] { return static_cast<int>(rng.uniform_int(-px, px)); };
  BoundingBox out{b.x0 + d(), b.y0 + d(), b.x1 + d(), b.y1 + d()};
  out.x0 = std::clamp(out.x0, 0, kPageWidth - 1);
  out.y0 = std::clamp(out.y0, 0, kPageHeight - 1);
  out.x1 = std::clamp(out.x1, out.x0 + 1, kPageWidth);
  out.y1 = std::clamp(out.y1, out.y0 + 1, kPageHeight);
  return out;
}

std::u32string substitute(const std::u32string& tok, const NoiseProfile& p, Rng& rng,
                          const std::map<std::u32string, std::vector<std::u32string>>& table) {
  if (p.char_sub_rate <= 0.0 || table.empty()) return tok;
  std::u32string out;
  std::size_t i = 0;
  while (i < tok.size()) {
    if (i + 1 < tok.size()) {
      if (auto it = table.find(tok.substr(i, 2)); it != table.end() && rng.bernoulli(p.char_sub_rate)) {
        out += rng.pick(it->second);
        i += 2;
        continue;
      }
    }
    if (auto it = table.find(tok.substr(i, 1)); it != table.end() && rng.bernoulli(p.char_sub_rate)) {
      out += rng.pick(it->second);
    } else {
      out.push_back(tok[i]);
    }
    ++i;
  }
  return out;
}

void flip_case(std::u32string& tok, Rng& rng) {
  std::vector<std::size_t> letters;
  for (std::size_t i = 0; i < tok.size(); ++i) {
    if (text::is_letter(tok[i])) letters.push_back(i);
  }
  if (letters.empty()) return;
  auto& c = tok[rng.pick(letters)];
  const char32_t lower = text::to_lower(c);
  c = lower != c ? lower : text::to_upper(c);
}

}  // namespace

std::vector<Token> apply_noise(const GroundTruthDocument& doc, const NoiseProfile& profile, std::uint64_t seed) {
  profile.validate();
  Rng rng(seed ^ splitmix64(doc.seed) ^ splitmix64(fnv1a64(doc.doc_id)));
  std::map<std::u32string, std::vector<std::u32string>> table;
  for (const auto& [from, to] : profile.confusion_table) {
    auto& dst = table[text::decode_utf8(from)];
    for (const auto& t : to) dst.push_back(text::decode_utf8(t));
  }

  std::vector<Token> out;
  for (const auto& field : doc.fields) {
    // One detection box per field line; every word of the line shares it.
    const BoundingBox box = jitter(field.box, profile.box_jitter_px, rng);
    for (const auto& word : text::split_whitespace(text::decode_utf8(field.value))) {
      if (rng.bernoulli(profile.token_drop_rate)) continue;
      std::vector<std::u32string> pieces = {word};
      if (word.size() >= 2 && rng.bernoulli(profile.token_split_rate)) {
        const auto cut = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(word.size()) - 1));
        pieces = {word.substr(0, cut), word.substr(cut)};
      }
      for (auto& piece : pieces) {
        piece = substitute(piece, profile, rng, table);
        if (rng.bernoulli(profile.case_flip_rate)) flip_case(piece, rng);
        if (rng.bernoulli(profile.diacritic_strip_rate)) piece = text::strip_diacritics(piece);
        const double conf = profile.confidence_floor >= 1.0 ? 1.0 : rng.uniform(profile.confidence_floor, 1.0);
        out.push_back({text::encode_utf8(piece), box, conf});
      }
    }
  }
  return out;
}

LabeledTokenStream align_labels(const GroundTruthDocument& gold, std::span<const Token> tokens, double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw Error(Errc::InvalidArgument, "iou_threshold must be in (0, 1]");
  }
  std::vector<std::size_t> order(gold.fields.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return schema_index(gold.kind, gold.fields[a].label).value_or(SIZE_MAX) <
           schema_index(gold.kind, gold.fields[b].label).value_or(SIZE_MAX);
  });

  LabeledTokenStream stream{gold.doc_id, gold.kind, {}};
  stream.tokens.reserve(tokens.size());
  for (const auto& tok : tokens) {
    double best = -1.0;
    const GroundTruthField* best_field = nullptr;
    for (auto idx : order) {
      const double iou = compute_iou(tok.box, gold.fields[idx].box);
      if (iou > best) {
        best = iou;
        best_field = &gold.fields[idx];
      }
    }
    std::string label(kOutsideLabel);
    if (best_field && best >= iou_threshold) label = best_field->label;
    stream.tokens.push_back({tok, std::move(label)});
  }
  return stream;
}

AnnotationFile to_annotation(const LabeledTokenStream& stream) {
  AnnotationFile f{stream.kind, stream.doc_id, {}};
  for (const auto& t : stream.tokens) f.entities.push_back({t.label, t.token.text, t.token.box, t.token.confidence});
  return f;
}

LabeledTokenStream stream_from_annotation(const AnnotationFile& file) {
  LabeledTokenStream s{file.doc_id, file.kind, {}};
  for (const auto& e : file.entities) s.tokens.push_back({{e.text, e.box, e.confidence.value_or(1.0)}, e.label});
  return s;
}

// ---------------------------------------------------------------------------
// Dataset I/O

namespace {

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoFailure, "cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw Error(Errc::IoFailure, "write failed: " + path.string());
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, path.string() + ": " + e.what());
  }
}

}  // namespace

DatasetManifest write_dataset(std::span<const DatasetEntry> entries, const NoiseProfile& profile,
                              const std::filesystem::path& dir) {
  std::set<std::string> ids;
  for (const auto& e : entries) {
    if (!ids.insert(e.gold.doc_id).second) throw Error(Errc::DuplicateDocId, e.gold.doc_id);
    if (e.stream.doc_id != e.gold.doc_id) {
      throw Error(Errc::InvalidArgument, "token stream " + e.stream.doc_id + " does not belong to " + e.gold.doc_id);
    }
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoFailure, "cannot create " + dir.string() + ": " + ec.message());

  DatasetManifest manifest{{}, profile};
  json docs = json::array();
  for (const auto& e : entries) {
    ManifestEntry m{e.gold.doc_id, e.gold.kind, e.gold.seed, e.gold.doc_id + ".json", e.gold.doc_id + ".tokens.json"};
    write_json(dir / m.annotation_file, to_json(to_annotation(e.gold)));
    write_json(dir / m.tokens_file, to_json(to_annotation(e.stream)));
    docs.push_back({{"doc_id", m.doc_id},
                    {"kind", to_string(m.kind)},
                    {"seed", m.seed},
                    {"annotation", m.annotation_file},
                    {"tokens", m.tokens_file}});
    manifest.documents.push_back(std::move(m));
  }
  write_json(dir / "manifest.json", {{"count", entries.size()}, {"documents", std::move(docs)}, {"profile", to_json(profile)}});
  return manifest;
}

Dataset read_dataset(const std::filesystem::path& dir) {
  const json mj = read_json(dir / "manifest.json");
  Dataset ds;
  try {
    ds.manifest.profile = profile_from_json(mj.at("profile"));
    for (const auto& d : mj.at("documents")) {
      auto kind = parse_kind(d.at("kind").get<std::string>());
      if (!kind) throw Error(Errc::ParseError, "manifest: unknown kind");
      ds.manifest.documents.push_back({d.at("doc_id").get<std::string>(), *kind, d.at("seed").get<std::uint64_t>(),
                                       d.at("annotation").get<std::string>(), d.at("tokens").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, "manifest: " + std::string(e.what()));
  }
  for (const auto& m : ds.manifest.documents) {
    DatasetEntry e{gold_from_annotation(annotation_from_json(read_json(dir / m.annotation_file)), m.seed),
                   stream_from_annotation(annotation_from_json(read_json(dir / m.tokens_file)))};
    ds.entries.push_back(std::move(e));
  }
  return ds;
}

}  // namespace realcred
