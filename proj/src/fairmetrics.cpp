/*
 * Copyright 2026 The fairpareto Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "fairpareto/fairmetrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fairpareto {
namespace {

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  for (auto& f : fields) {
    while (!f.empty() && (f.back() == '\r' || f.back() == ' ')) f.pop_back();
    while (!f.empty() && f.front() == ' ') f.erase(f.begin());
  }
  return fields;
}

double parse_double(const std::string& text, std::size_t line_no, const std::string& column) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
    throw DataError(
        fmt::format("line {}: column '{}' is not a finite number: '{}'", line_no, column, text));
  }
  return v;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

const GroupStats& group_or_throw(const IdentificationReport& report, const std::string& group) {
  auto it = report.per_group.find(group);
  if (it == report.per_group.end() || it->second.n == 0) {
    throw DataError(fmt::format("group '{}' has no evaluable probes", group));
  }
  return it->second;
}

MaybeReal ratio_form(double numerator, double denominator) {
  if (denominator == 0.0) return std::nullopt;
  return std::abs(1.0 - numerator / denominator);
}

}  // namespace

EmbeddingSet::EmbeddingSet(std::vector<EmbeddingRecord> records) : records_(std::move(records)) {
  if (records_.empty()) throw DataError("embedding set is empty");
  dimension_ = records_.front().vector.size();
  if (dimension_ == 0) throw DataError("embedding dimension must be positive");
  std::set<std::string> ids;
  for (const auto& r : records_) {
    if (r.vector.size() != dimension_) {
      throw DataError(fmt::format("image '{}' has dimension {}, expected {}", r.image_id,
                                  r.vector.size(), dimension_));
    }
    if (!ids.insert(r.image_id).second) {
      throw DataError(fmt::format("duplicate image_id '{}'", r.image_id));
    }
  }
}

std::vector<std::string> EmbeddingSet::groups() const {
  std::vector<std::string> out;
  for (const auto& r : records_) {
    if (std::find(out.begin(), out.end(), r.group) == out.end()) out.push_back(r.group);
  }
  return out;
}

EmbeddingSet read_embeddings_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("embedding file is empty (no header)");
  if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
  const auto header = split_csv_line(line);
  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  auto require = [&](const std::string& name) {
    if (auto c = column(name)) return *c;
    throw DataError(fmt::format("missing column '{}'", name));
  };
  const std::size_t id_col = require("image_id");
  const std::size_t identity_col = require("identity");
  const std::size_t group_col = require("group");
  std::vector<std::size_t> dims;
  for (std::size_t k = 0;; ++k) {
    auto c = column(fmt::format("e{}", k));
    if (!c) break;
    dims.push_back(*c);
  }
  if (dims.empty()) throw DataError("missing column 'e0'");

  std::vector<EmbeddingRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw DataError(fmt::format("line {}: expected {} fields, found {}", line_no, header.size(),
                                  fields.size()));
    }
    EmbeddingRecord r{fields[id_col], fields[identity_col], fields[group_col], {}};
    r.vector.reserve(dims.size());
    for (std::size_t k = 0; k < dims.size(); ++k) {
      r.vector.push_back(parse_double(fields[dims[k]], line_no, header[dims[k]]));
    }
    records.push_back(std::move(r));
  }
  return EmbeddingSet(std::move(records));
}

EmbeddingSet read_embeddings_jsonl(std::istream& in) {
  std::vector<EmbeddingRecord> records;
  std::string line;
  std::size_t line_no = 0;
  auto text_field = [](const nlohmann::json& j, const char* name, std::size_t line_no) {
    if (!j.contains(name)) throw DataError(fmt::format("line {}: missing field '{}'", line_no, name));
    const auto& v = j.at(name);
    return v.is_string() ? v.get<std::string>() : v.dump();
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(fmt::format("line {}: {}", line_no, e.what()));
    }
    EmbeddingRecord r{text_field(j, "image_id", line_no), text_field(j, "identity", line_no),
                      text_field(j, "group", line_no), {}};
    for (std::size_t k = 0;; ++k) {
      const auto key = fmt::format("e{}", k);
      if (!j.contains(key)) break;
      if (!j.at(key).is_number()) {
        throw DataError(fmt::format("line {}: field '{}' is not a number", line_no, key));
      }
      r.vector.push_back(j.at(key).get<double>());
    }
    if (r.vector.empty()) throw DataError(fmt::format("line {}: missing field 'e0'", line_no));
    records.push_back(std::move(r));
  }
  return EmbeddingSet(std::move(records));
}

EmbeddingSet load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open embedding file '{}'", path.string()));
  const auto ext = path.extension().string();
  if (ext == ".jsonl" || ext == ".json") return read_embeddings_jsonl(in);
  return read_embeddings_csv(in);
}

void write_embeddings_csv(std::ostream& out, const EmbeddingSet& set) {
  out << "image_id,identity,group";
  for (std::size_t k = 0; k < set.dimension(); ++k) out << ",e" << k;
  out << '\n';
  for (const auto& r : set.records()) {
    out << r.image_id << ',' << r.identity << ',' << r.group;
    for (double v : r.vector) out << ',' << fmt::format("{}", v);
    out << '\n';
  }
}

double IdentificationReport::overall_error() const {
  std::size_t n = 0;
  std::size_t errors = 0;
  for (const auto& img : per_image) {
    if (img.excluded) continue;
    ++n;
    errors += static_cast<std::size_t>(img.error);
  }
  return n == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(n);
}

IdentificationReport compute_ranks(const EmbeddingSet& set) {
  const auto records = set.records();
  const std::size_t n = records.size();
  IdentificationReport report;
  report.per_image.reserve(n);

  std::vector<double> dist(n);
  for (std::size_t p = 0; p < n; ++p) {
    const auto& probe = records[p];
    double mate = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < n; ++q) {
      if (q == p) continue;
      dist[q] = squared_distance(probe.vector, records[q].vector);
      if (records[q].identity == probe.identity) mate = std::min(mate, dist[q]);
    }
    ImageResult result{probe.image_id, probe.group, 0, 0, false};
    if (std::isinf(mate)) {
      result.excluded = true;
      ++report.excluded;
    } else {
      for (std::size_t q = 0; q < n; ++q) {
        if (q != p && records[q].identity != probe.identity && dist[q] < mate) ++result.rank;
      }
      result.error = result.rank > 0 ? 1 : 0;
    }
    report.per_image.push_back(std::move(result));
  }

  std::map<std::string, std::pair<double, std::size_t>> sums;  // rank sum, errors
  for (const auto& img : report.per_image) {
    if (img.excluded) continue;
    auto& stats = report.per_group[img.group];
    if (stats.n == 0) report.group_order.push_back(img.group);
    ++stats.n;
    sums[img.group].first += static_cast<double>(img.rank);
    sums[img.group].second += static_cast<std::size_t>(img.error);
  }
  for (auto& [group, stats] : report.per_group) {
    const double count = static_cast<double>(stats.n);
    stats.mean_rank = sums[group].first / count;
    stats.error_rate = static_cast<double>(sums[group].second) / count;
    stats.accuracy = 1.0 - stats.error_rate;
  }
  return report;
}

std::string_view to_string(FairnessMetric m) {
  switch (m) {
    case FairnessMetric::disparity: return "disparity";
    case FairnessMetric::rank_disparity: return "rank_disparity";
    case FairnessMetric::ratio: return "ratio";
    case FairnessMetric::rank_ratio: return "rank_ratio";
    case FairnessMetric::error_ratio: return "error_ratio";
  }
  return "unknown";
}

FairnessMetric parse_fairness_metric(std::string_view name) {
  for (auto m : kAllFairnessMetrics) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError(fmt::format("unknown fairness metric '{}'", name));
}

FairnessValue fairness_metric(const IdentificationReport& report, FairnessMetric metric,
                              const std::string& group_a, const std::string& group_b) {
  const GroupStats& a = group_or_throw(report, group_a);
  const GroupStats& b = group_or_throw(report, group_b);
  FairnessValue out{metric, std::nullopt, group_a, group_b, false};
  switch (metric) {
    case FairnessMetric::disparity: out.value = std::abs(a.accuracy - b.accuracy); break;
    case FairnessMetric::rank_disparity: out.value = std::abs(a.mean_rank - b.mean_rank); break;
    case FairnessMetric::ratio: out.value = ratio_form(a.accuracy, b.accuracy); break;
    case FairnessMetric::rank_ratio: out.value = ratio_form(a.mean_rank, b.mean_rank); break;
    case FairnessMetric::error_ratio: out.value = ratio_form(a.error_rate, b.error_rate); break;
  }
  return out;
}

FairnessValue multi_group_metric(const IdentificationReport& report, FairnessMetric metric,
                                 std::span<const std::string> groups) {
  if (groups.size() < 2) {
    throw DataError(fmt::format("{} needs at least two groups, got {}", to_string(metric),
                                groups.size()));
  }
  FairnessValue best{metric, std::nullopt, "", "", true};
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (std::size_t j = i + 1; j < groups.size(); ++j) {
      const auto v = fairness_metric(report, metric, groups[i], groups[j]);
      if (v.value && (!best.value || *v.value > *best.value)) {
        best.value = v.value;
        best.group_a = groups[i];
        best.group_b = groups[j];
      }
    }
  }
  return best;
}

MaybeReal pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw DataError(fmt::format("pearson: length mismatch {} vs {}", xs.size(), ys.size()));
  }
  if (xs.size() < 2) throw DataError("pearson: need at least two points");
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
  };
  if (constant(xs) || constant(ys)) return std::nullopt;
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace fairpareto
