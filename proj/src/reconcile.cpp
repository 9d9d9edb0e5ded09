#include <array>
#include <charconv>
#include <cstdio>
#include <optional>

#include <nlohmann/json.hpp>

#include "realcred/error.hpp"
#include "realcred/reconcile.hpp"

namespace realcred {

using nlohmann::json;

std::string_view to_string(Rule r) noexcept {
  switch (r) {
    case Rule::NifMismatch: return "NIF_MISMATCH";
    case Rule::NifInvalid: return "NIF_INVALID";
    case Rule::NameMismatch: return "NAME_MISMATCH";
    case Rule::CoordinateMismatch: return "COORDINATE_MISMATCH";
    case Rule::MissingReference: return "MISSING_REFERENCE";
  }
  return "MISSING_REFERENCE";
}

std::string_view to_string(Severity s) noexcept { return s == Severity::Error ? "Error" : "Warning"; }

namespace {

Rule rule_from_string(std::string_view s) {
  for (auto r : {Rule::NifMismatch, Rule::NifInvalid, Rule::NameMismatch, Rule::CoordinateMismatch,
                 Rule::MissingReference}) {
    if (to_string(r) == s) return r;
  }
  throw Error(Errc::ParseError, "unknown rule '" + std::string(s) + "'");
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string fmt_km(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

using Involved = std::vector<std::pair<std::string, std::string>>;

// The holder's identity as asserted by one document.
struct IdentityClaim {
  const ExtractionResult* doc = nullptr;
  std::vector<std::string> nifs;   // candidate NIFs (several for co-owners)
  std::vector<std::string> names;  // candidate names, aligned with owners when repeated
  std::string nif_label;
  std::vector<std::string> name_labels;
};

class Reconciler {
 public:
  Reconciler(std::span<const ExtractionResult> docs, const ReconcileOptions& opts) : opts_(opts) {
    if (docs.empty()) throw Error(Errc::EmptyInput, "no documents to reconcile");
    for (const auto& d : docs) {
      auto& slot = by_kind_[static_cast<std::size_t>(d.kind)];
      if (slot) throw Error(Errc::DuplicateKind, "two documents of kind " + std::string(to_string(d.kind)));
      slot = &d;
    }
  }

  ReconciliationReport run() {
    check_nif_validity();
    const auto claims = identity_claims();
    check_nif_consistency(claims);
    check_names(claims);
    check_coordinates();

    ReconciliationReport report;
    report.process_id = opts_.process_id;
    for (auto* bucket : {&r1_, &r2_, &r3_, &r4_, &r5_}) {
      report.discrepancies.insert(report.discrepancies.end(), bucket->begin(), bucket->end());
    }
    report.consistent = std::none_of(report.discrepancies.begin(), report.discrepancies.end(),
                                     [](const Discrepancy& d) { return d.severity == Severity::Error; });
    return report;
  }

 private:
  const ExtractionResult* doc(DocumentKind k) const { return by_kind_[static_cast<std::size_t>(k)]; }

  void missing(const ExtractionResult& d, const std::string& label, const std::string& detail) {
    r5_.push_back({Rule::MissingReference, Severity::Warning, detail, {{d.doc_id, label}}});
  }

  // R1
  void check_nif_validity() {
    for (const auto* d : by_kind_) {
      if (!d) continue;
      for (const auto& field : schema_for(d->kind)) {
        if (field.value_kind != ValueKind::NifNumber) continue;
        for (const auto& v : d->values_of(field.label)) {
          const auto status = validate_nif(v);
          if (status != NifStatus::Valid) {
            r1_.push_back({Rule::NifInvalid, Severity::Error,
                           "NIF '" + v + "' is " + std::string(to_string(status)), {{d->doc_id, field.label}}});
          }
        }
      }
    }
  }

  std::vector<IdentityClaim> identity_claims() {
    std::vector<IdentityClaim> claims;
    if (const auto* cc = doc(DocumentKind::CitizenCard)) {
      IdentityClaim c{cc, cc->values_of("NIF"), {}, "NIF", {"FIRST_NAME", "LAST_NAME"}};
      auto first = cc->first("FIRST_NAME");
      auto last = cc->first("LAST_NAME");
      if (first && last) c.names.push_back(*first + " " + *last);
      claims.push_back(std::move(c));
    }
    if (const auto* ec = doc(DocumentKind::EnergyCertificate)) {
      claims.push_back({ec, ec->values_of("HOLDER_NIF"), ec->values_of("HOLDER_NAME"), "HOLDER_NIF", {"HOLDER_NAME"}});
    }
    if (const auto* pr = doc(DocumentKind::PropertyRecord)) {
      claims.push_back({pr, pr->values_of("OWNER_NIF"), pr->values_of("OWNER_NAME"), "OWNER_NIF", {"OWNER_NAME"}});
    }
    if (claims.size() == 1) {
      missing(*claims[0].doc, claims[0].nif_label, "no other document to cross-check the holder identity against");
    }
    return claims;
  }

  // R2: the anchor is the first identity-bearing document; PropertyRecord
  // owners only need to contain the anchor NIF.
  void check_nif_consistency(const std::vector<IdentityClaim>& claims) {
    if (claims.size() < 2) return;
    const auto& anchor = claims.front();
    if (anchor.nifs.empty()) {
      missing(*anchor.doc, anchor.nif_label, "holder NIF absent; NIF consistency not checked");
      return;
    }
    const std::string& ref = anchor.nifs.front();
    for (std::size_t i = 1; i < claims.size(); ++i) {
      const auto& other = claims[i];
      if (other.nifs.empty()) {
        missing(*other.doc, other.nif_label, "NIF absent; NIF consistency not checked");
        continue;
      }
      const bool found = std::any_of(other.nifs.begin(), other.nifs.end(), [&](const std::string& n) {
        return field_match(ref, n, MatchMode::Exact, ValueKind::NifNumber).matched;
      });
      if (!found) {
        r2_.push_back({Rule::NifMismatch, Severity::Error,
                       "holder NIF '" + ref + "' not found in " + std::string(to_string(other.doc->kind)),
                       {{anchor.doc->doc_id, anchor.nif_label}, {other.doc->doc_id, other.nif_label}}});
      }
    }
  }

  // R3
  void check_names(const std::vector<IdentityClaim>& claims) {
    if (claims.size() < 2) return;
    const auto& anchor = claims.front();
    if (anchor.names.empty()) {
      missing(*anchor.doc, anchor.name_labels.front(), "holder name absent; name matching not checked");
      return;
    }
    const std::string& ref = anchor.names.front();
    for (std::size_t i = 1; i < claims.size(); ++i) {
      const auto& other = claims[i];
      if (other.names.empty()) {
        missing(*other.doc, other.name_labels.front(), "name absent; name matching not checked");
        continue;
      }
      const bool found = std::any_of(other.names.begin(), other.names.end(), [&](const std::string& n) {
        return field_match(ref, n, MatchMode::SuperTolerant, ValueKind::PersonName).matched;
      });
      if (!found) {
        Involved inv;
        for (const auto& l : anchor.name_labels) inv.emplace_back(anchor.doc->doc_id, l);
        for (const auto& l : other.name_labels) inv.emplace_back(other.doc->doc_id, l);
        r3_.push_back({Rule::NameMismatch, Severity::Error,
                       "holder name '" + ref + "' not matched in " + std::string(to_string(other.doc->kind)),
                       std::move(inv)});
      }
    }
  }

  std::optional<GeoPoint> coordinates(const ExtractionResult& d, bool& unparseable) {
    auto lat = d.first("LATITUDE");
    auto lon = d.first("LONGITUDE");
    if (!lat || !lon) return std::nullopt;
    auto plat = parse_double(*lat);
    auto plon = parse_double(*lon);
    if (!plat || !plon || *plat < -90 || *plat > 90 || *plon < -180 || *plon > 180) {
      unparseable = true;
      return std::nullopt;
    }
    return GeoPoint{*plat, *plon};
  }

  // R4
  void check_coordinates() {
    const auto* ec = doc(DocumentKind::EnergyCertificate);
    const auto* pr = doc(DocumentKind::PropertyRecord);
    if (!ec && !pr) return;
    if (!ec || !pr) {
      const auto* present = ec ? ec : pr;
      missing(*present, "LATITUDE",
              std::string("no ") + (ec ? "PropertyRecord" : "EnergyCertificate") + " to cross-check coordinates");
      return;
    }
    bool bad_ec = false, bad_pr = false;
    auto pe = coordinates(*ec, bad_ec);
    auto pp = coordinates(*pr, bad_pr);
    const Involved inv = {{ec->doc_id, "LATITUDE"}, {ec->doc_id, "LONGITUDE"},
                          {pr->doc_id, "LATITUDE"}, {pr->doc_id, "LONGITUDE"}};
    if (bad_ec || bad_pr) {
      r4_.push_back({Rule::CoordinateMismatch, Severity::Error, "coordinates unparseable or out of range", inv});
      return;
    }
    if (!pe || !pp) {
      missing(pe ? *pr : *ec, "LATITUDE", "coordinates absent; location cross-check not performed");
      return;
    }
    const double km = haversine_km(*pe, *pp);
    if (km > opts_.coordinate_tolerance_km) {
      r4_.push_back({Rule::CoordinateMismatch, Severity::Error,
                     "distance " + fmt_km(km) + " km exceeds tolerance " + fmt_km(opts_.coordinate_tolerance_km) + " km",
                     inv});
    }
  }

  ReconcileOptions opts_;
  std::array<const ExtractionResult*, 3> by_kind_{};
  std::vector<Discrepancy> r1_, r2_, r3_, r4_, r5_;
};

}  // namespace

ReconciliationReport reconcile_documents(std::span<const ExtractionResult> docs, const ReconcileOptions& options) {
  return Reconciler(docs, options).run();
}

json to_json(const ReconciliationReport& report) {
  json list = json::array();
  for (const auto& d : report.discrepancies) {
    json inv = json::array();
    for (const auto& [doc, label] : d.involved) inv.push_back({doc, label});
    list.push_back({{"rule", to_string(d.rule)},
                    {"severity", to_string(d.severity)},
                    {"detail", d.detail},
                    {"involved", std::move(inv)}});
  }
  return {{"process_id", report.process_id}, {"consistent", report.consistent}, {"discrepancies", std::move(list)}};
}

ReconciliationReport report_from_json(const json& j) {
  ReconciliationReport r;
  r.process_id = j.at("process_id").get<std::string>();
  r.consistent = j.at("consistent").get<bool>();
  for (const auto& d : j.at("discrepancies")) {
    Discrepancy out{rule_from_string(d.at("rule").get<std::string>()),
                    d.at("severity").get<std::string>() == "Error" ? Severity::Error : Severity::Warning,
                    d.at("detail").get<std::string>(),
                    {}};
    for (const auto& pair : d.at("involved")) out.involved.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<std::string>());
    r.discrepancies.push_back(std::move(out));
  }
  return r;
}

}  // namespace realcred
