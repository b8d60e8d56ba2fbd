// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <map>
#include <sstream>

#include "cli_internal.hpp"
#include "mdlab/errors.hpp"
#include "mdlab/kappa_search.hpp"

namespace mdlab::cli {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

struct KappaPoint {
  double value = 0.0;
  std::string kind;
  bool flagged = false;
};

}  // namespace

CommandOutput report(const std::vector<std::string>& manifests, const std::string& format) {
  std::map<std::string, std::map<std::size_t, KappaPoint>> kappa;  // system -> n -> best
  std::vector<std::pair<std::string, Json>> goodlambda;
  std::map<std::string, std::size_t> other;
  std::vector<std::pair<std::string, std::string>> errors;

  for (const auto& path : manifests) {
    try {
      const Json m = read_json_file(path);
      if (!m.contains("results") || !m.at("results").is_array()) throw ValidationError("no results array");
      for (const auto& r : m.at("results")) {
        const std::string type = r.at("type").get<std::string>();
        if (type == "kappa") {
          const std::string sys = r.value("system", std::string("unknown")) +
                                  (r.value("transfer", false) ? " (transferred)" : "");
          auto& p = kappa[sys][r.at("n").get<std::size_t>()];
          const double v = r.at("value").get<double>();
          if (v > p.value) p = KappaPoint{v, r.value("kind", std::string()), r.value("flagged", false)};
        } else if (type == "goodlambda" || type == "cww-fit") {
          goodlambda.emplace_back(path, r.contains("c_fit") ? r.at("c_fit") : Json(nullptr));
        } else {
          ++other[type];
        }
      }
    } catch (const std::exception& e) {
      errors.emplace_back(path, e.what());
    }
  }

  std::map<std::string, std::string> verdict;
  for (const auto& [sys, pts] : kappa) {
    if (pts.size() < 3) continue;
    std::vector<std::pair<double, double>> xy;
    for (const auto& [n, p] : pts) xy.emplace_back(static_cast<double>(n), p.value);
    try {
      verdict[sys] = growth_fit(xy).best;
    } catch (const std::exception&) {
    }
  }

  std::ostringstream out;
  if (format == "csv") {
    out << "section,key,n,value,kind,verdict\n";
    for (const auto& [sys, pts] : kappa)
      for (const auto& [n, p] : pts)
        out << "kappa," << sys << ',' << n << ',' << fmt(p.value) << ',' << p.kind << ','
            << (verdict.count(sys) ? verdict[sys] : "") << '\n';
    for (const auto& [path, c] : goodlambda)
      out << "goodlambda," << path << ",," << (c.is_number() ? fmt(c.get<double>()) : "") << ",,\n";
    for (const auto& [type, count] : other) out << "count," << type << ",," << count << ",,\n";
    for (const auto& [path, why] : errors) out << "error," << path << ",,,," << '"' << why << '"' << '\n';
  } else {
    out << "# mdlab run summary\n\n";
    out << "Manifests read: " << manifests.size() - errors.size() << " of " << manifests.size() << "\n";
    if (!kappa.empty()) {
      out << "\n## Kappa estimates\n";
      for (const auto& [sys, pts] : kappa) {
        out << "\n### " << sys << "\n\n| n | kappa | kind | flagged |\n|---|---|---|---|\n";
        for (const auto& [n, p] : pts)
          out << "| " << n << " | " << fmt(p.value) << " | " << p.kind << " | " << (p.flagged ? "yes" : "no") << " |\n";
        out << "\nGrowth fit: " << (verdict.count(sys) ? verdict[sys] + " model best" : "needs at least 3 sizes")
            << "\n";
      }
    }
    if (!goodlambda.empty()) {
      out << "\n## Good-lambda fits\n\n| manifest | c_fit |\n|---|---|\n";
      for (const auto& [path, c] : goodlambda)
        out << "| " << path << " | " << (c.is_number() ? fmt(c.get<double>()) : "undefined") << " |\n";
    }
    if (!other.empty()) {
      out << "\n## Other results\n\n| type | count |\n|---|---|\n";
      for (const auto& [type, count] : other) out << "| " << type << " | " << count << " |\n";
    }
    if (!errors.empty()) {
      out << "\n## Unreadable manifests\n\n";
      for (const auto& [path, why] : errors) out << "- " << path << ": " << why << "\n";
    }
  }
  CommandOutput o;
  o.artifacts.push_back(Artifact{format == "csv" ? "summary.csv" : "summary.md", out.str()});
  Json e{{"type", "report"}, {"provenance", "certified-float"}, {"manifests", manifests.size()},
         {"unreadable", errors.size()}};
  o.results.push_back(e);
  return o;
}

}  // namespace mdlab::cli
