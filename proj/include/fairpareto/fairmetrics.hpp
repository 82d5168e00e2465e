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

#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairpareto/common.hpp"

namespace fairpareto {

struct EmbeddingRecord {
  std::string image_id;
  std::string identity;
  std::string group;
  std::vector<double> vector;
};

/// Labeled embeddings. Construction checks that every vector has the same
/// dimension and that image ids are unique.
class EmbeddingSet {
 public:
  explicit EmbeddingSet(std::vector<EmbeddingRecord> records);

  std::span<const EmbeddingRecord> records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  std::size_t dimension() const { return dimension_; }

  /// Groups in order of first appearance.
  std::vector<std::string> groups() const;

 private:
  std::vector<EmbeddingRecord> records_;
  std::size_t dimension_ = 0;
};

/// CSV with header `image_id,identity,group,e0,...,e{d-1}`.
EmbeddingSet read_embeddings_csv(std::istream& in);
/// One JSON object per line with the same field names as the CSV header.
EmbeddingSet read_embeddings_jsonl(std::istream& in);
/// Dispatches on extension: `.jsonl`/`.json` are JSON Lines, anything else CSV.
EmbeddingSet load_embeddings(const std::filesystem::path& path);
void write_embeddings_csv(std::ostream& out, const EmbeddingSet& set);

struct ImageResult {
  std::string image_id;
  std::string group;
  std::size_t rank = 0;
  int error = 0;
  bool excluded = false;  // no same-identity mate in the set
};

struct GroupStats {
  double mean_rank = 0.0;
  double accuracy = 0.0;
  double error_rate = 0.0;
  std::size_t n = 0;
};

struct IdentificationReport {
  std::vector<ImageResult> per_image;  // same order as the input set
  std::map<std::string, GroupStats> per_group;
  std::vector<std::string> group_order;  // first appearance among included probes
  std::size_t excluded = 0;

  /// Error rate over all non-excluded probes.
  double overall_error() const;
};

/// Rank of a probe = number of different-identity images strictly closer (l2)
/// than its nearest same-identity image. Error = rank > 0. Probes without a
/// mate are excluded from group statistics.
IdentificationReport compute_ranks(const EmbeddingSet& set);

enum class FairnessMetric { disparity, rank_disparity, ratio, rank_ratio, error_ratio };

inline constexpr FairnessMetric kAllFairnessMetrics[] = {
    FairnessMetric::rank_disparity, FairnessMetric::disparity, FairnessMetric::ratio,
    FairnessMetric::rank_ratio, FairnessMetric::error_ratio};

std::string_view to_string(FairnessMetric m);
/// Throws ConfigError for unknown names.
FairnessMetric parse_fairness_metric(std::string_view name);

struct FairnessValue {
  FairnessMetric metric{};
  MaybeReal value;  // nullopt: undefined (zero denominator)
  std::string group_a;
  std::string group_b;
  bool max_pairwise = false;
};

/// Two-group metric; group_a is the numerator of the ratio forms.
///   disparity       |Acc(a) - Acc(b)|
///   rank_disparity  |Rank(a) - Rank(b)|
///   ratio           |1 - Acc(a)/Acc(b)|
///   rank_ratio      |1 - Rank(a)/Rank(b)|
///   error_ratio     |1 - Err(a)/Err(b)|
/// Throws DataError naming a group that has no included probes.
FairnessValue fairness_metric(const IdentificationReport& report, FairnessMetric metric,
                              const std::string& group_a, const std::string& group_b);

/// Maximum over pairs (groups[i], groups[j]), i < j, of the pairwise metric;
/// undefined pairs are skipped. Throws DataError for fewer than two groups.
FairnessValue multi_group_metric(const IdentificationReport& report, FairnessMetric metric,
                                 std::span<const std::string> groups);

/// Pearson product-moment correlation; undefined when either side has zero
/// variance. Throws DataError on length mismatch or fewer than two points.
MaybeReal pearson(std::span<const double> xs, std::span<const double> ys);

}  // namespace fairpareto
