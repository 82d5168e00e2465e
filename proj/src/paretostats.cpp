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

#include "fairpareto/paretostats.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <regex>
#include <set>

namespace fairpareto {
namespace {

void require_same_names(const ObjectiveVector& a, const ObjectiveVector& b) {
  const bool same = a.size() == b.size() &&
                    std::equal(a.begin(), a.end(), b.begin(),
                               [](const auto& x, const auto& y) { return x.first == y.first; });
  if (!same) throw DataError("objective vectors have different objective names");
}

std::vector<std::vector<double>> as_rows(std::span<const ObjectiveVector> points) {
  std::vector<std::vector<double>> rows;
  rows.reserve(points.size());
  for (const auto& p : points) {
    require_same_names(points.front(), p);
    std::vector<double> row;
    row.reserve(p.size());
    for (const auto& [name, v] : p) row.push_back(v);
    rows.push_back(std::move(row));
  }
  return rows;
}

bool row_dominates(const std::vector<double>& a, const std::vector<double>& b) {
  bool strictly = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strictly = true;
  }
  return strictly;
}

double mean_of(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double standard_error(std::span<const double> xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double n = static_cast<double>(xs.size());
  return std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
}

std::string format_real(double v) { return fmt::format("{}", v); }

double parse_real(const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw DataError(fmt::format("not a number: '{}'", s));
  }
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
  return out;
}

}  // namespace

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
  require_same_names(a, b);
  bool strictly = false;
  for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
    if (ia->second > ib->second) return false;
    if (ia->second < ib->second) strictly = true;
  }
  return strictly;
}

std::vector<std::size_t> pareto_front_indices(std::span<const ObjectiveVector> points) {
  if (points.empty()) return {};
  const auto rows = as_rows(points);
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // A dominating point always sorts lexicographically before what it
  // dominates, so each point only needs checking against the current front.
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rows[a] < rows[b]; });
  std::vector<std::size_t> front;
  for (std::size_t idx : order) {
    const bool dominated = std::any_of(front.begin(), front.end(), [&](std::size_t f) {
      return row_dominates(rows[f], rows[idx]);
    });
    if (!dominated) front.push_back(idx);
  }
  std::sort(front.begin(), front.end());
  return front;
}

ParetoFront pareto_front(std::span<const AggregatedPoint> points) {
  std::vector<ObjectiveVector> means;
  means.reserve(points.size());
  for (const auto& p : points) means.push_back(p.mean);
  ParetoFront front;
  for (std::size_t i : pareto_front_indices(means)) front.members.push_back(points[i]);
  return front;
}

std::vector<AggregatedPoint> as_points(std::span<const ObjectiveVector> vectors,
                                       std::span<const std::string> keys) {
  std::vector<AggregatedPoint> out;
  out.reserve(vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    AggregatedPoint p;
    p.config_key = i < keys.size() ? keys[i] : fmt::format("p{}", i);
    p.mean = vectors[i];
    for (const auto& [name, v] : vectors[i]) p.standard_error[name] = 0.0;
    p.n_seeds = 1;
    out.push_back(std::move(p));
  }
  return out;
}

AggregationResult aggregate_seeds(std::span<const TrialRecord> trials, int fidelity,
                                  std::span<const std::string> objectives) {
  AggregationResult result;
  std::map<std::string, std::vector<ObjectiveVector>> groups;
  std::set<std::string> all_configs;
  for (const auto& t : trials) {
    const auto key = config_key(t.config);
    all_configs.insert(key);
    if (t.status != TrialStatus::reported || t.fidelity != fidelity) continue;
    auto values = t.defined(objectives);
    if (!values) {
      ++result.skipped_undefined;
      continue;
    }
    groups[key].push_back(std::move(*values));
  }
  result.skipped_configs = all_configs.size() - groups.size();
  if (result.skipped_configs > 0) {
    log().warn("{} configuration(s) have no usable trial at fidelity {}", result.skipped_configs,
               fidelity);
  }
  if (result.skipped_undefined > 0) {
    log().warn("{} trial(s) skipped for undefined objectives", result.skipped_undefined);
  }
  for (auto& [key, vectors] : groups) {
    AggregatedPoint p;
    p.config_key = key;
    p.n_seeds = vectors.size();
    for (const auto& name : objectives) {
      std::vector<double> xs;
      xs.reserve(vectors.size());
      for (const auto& v : vectors) xs.push_back(v.at(name));
      const double m = mean_of(xs);
      p.mean[name] = m;
      p.standard_error[name] = standard_error(xs, m);
    }
    result.points.push_back(std::move(p));
  }
  return result;
}

double hypervolume2d(std::span<const ObjectiveVector> front, const ObjectiveVector& ref) {
  if (ref.size() != 2) throw DataError("hypervolume2d needs exactly two objectives");
  std::vector<std::pair<double, double>> pts;
  pts.reserve(front.size());
  for (const auto& p : front) {
    if (!dominates(p, ref)) throw DataError("front member does not dominate the reference point");
    pts.emplace_back(p.begin()->second, std::next(p.begin())->second);
  }
  std::sort(pts.begin(), pts.end());
  const double ref1 = ref.begin()->second;
  double level = std::next(ref.begin())->second;
  double area = 0.0;
  for (const auto& [f1, f2] : pts) {
    if (f2 < level) {
      area += (ref1 - f1) * (level - f2);
      level = f2;
    }
  }
  return area;
}

RecordFilter RecordFilter::parse(std::string_view text) {
  static const std::regex term_re(R"(^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(<=|>=|<|>)\s*(\S+)\s*$)");
  RecordFilter filter;
  std::string s(text);
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find("&&", start);
    const std::string part = s.substr(start, pos - start);
    std::smatch m;
    if (!std::regex_match(part, m, term_re)) {
      throw ConfigError(fmt::format("malformed filter term '{}'", part));
    }
    double value = 0.0;
    try {
      value = parse_real(m[3].str());
    } catch (const DataError&) {
      throw ConfigError(fmt::format("filter threshold is not a number: '{}'", m[3].str()));
    }
    filter.terms_.push_back({m[1].str(), m[2].str(), value});
    if (pos == std::string::npos) break;
    start = pos + 2;
  }
  return filter;
}

bool RecordFilter::accepts(const ObjectiveValues& values) const {
  for (const auto& t : terms_) {
    auto it = values.find(t.objective);
    if (it == values.end() || !it->second) return false;
    const double v = *it->second;
    const bool ok = t.op == "<"    ? v < t.value
                    : t.op == "<=" ? v <= t.value
                    : t.op == ">"  ? v > t.value
                                   : v >= t.value;
    if (!ok) return false;
  }
  return true;
}

bool RecordFilter::accepts(const ObjectiveVector& values) const {
  ObjectiveValues maybe;
  for (const auto& [k, v] : values) maybe[k] = v;
  return accepts(maybe);
}

void write_front_csv(std::ostream& out, std::span<const AggregatedPoint> points,
                     std::span<const std::string> objectives,
                     std::span<const std::size_t> front_indices) {
  out << "config_key";
  for (const auto& o : objectives) out << ',' << o << "_mean," << o << "_stderr";
  out << ",n_seeds,on_front\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    out << p.config_key;
    for (const auto& o : objectives) {
      out << ',' << format_real(p.mean.at(o)) << ',' << format_real(p.standard_error.at(o));
    }
    const bool on = std::find(front_indices.begin(), front_indices.end(), i) != front_indices.end();
    out << ',' << p.n_seeds << ',' << (on ? "true" : "false") << '\n';
  }
}

std::vector<FrontCsvRow> read_front_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("front CSV is empty");
  const auto header = split(line, ',');
  if (header.size() < 3 || header.front() != "config_key" || header[header.size() - 2] != "n_seeds" ||
      header.back() != "on_front" || (header.size() - 3) % 2 != 0) {
    throw DataError("front CSV header must be config_key,<o>_mean,<o>_stderr,...,n_seeds,on_front");
  }
  std::vector<std::string> objectives;
  for (std::size_t c = 1; c + 2 < header.size(); c += 2) {
    const auto& mean_col = header[c];
    if (!mean_col.ends_with("_mean")) throw DataError(fmt::format("bad column '{}'", mean_col));
    objectives.push_back(mean_col.substr(0, mean_col.size() - 5));
  }
  std::vector<FrontCsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != header.size()) throw DataError(fmt::format("bad front CSV row '{}'", line));
    FrontCsvRow row;
    row.point.config_key = f[0];
    for (std::size_t k = 0; k < objectives.size(); ++k) {
      row.point.mean[objectives[k]] = parse_real(f[1 + 2 * k]);
      row.point.standard_error[objectives[k]] = parse_real(f[2 + 2 * k]);
    }
    row.point.n_seeds = static_cast<std::size_t>(parse_real(f[f.size() - 2]));
    row.on_front = f.back() == "true";
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace fairpareto
