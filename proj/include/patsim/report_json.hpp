// Copyright 2026-present the patsim project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <optional>

#include <json.hpp>

#include "patsim/augmentation.hpp"
#include "patsim/corpus.hpp"
#include "patsim/evaluation.hpp"
#include "patsim/knn_classifier.hpp"
#include "patsim/similarity.hpp"

namespace patsim {

// JSON views of engine results. Field names are part of the file contract.

nlohmann::json to_json(const NeighborList &list,
                       std::optional<double> runtime_seconds = {});
/// Neighbor entries carry their labels, looked up in `store`.
nlohmann::json to_json(const PredictionResult &result, const CorpusStore &store);
nlohmann::json to_json(const MetricsReport &report);
nlohmann::json to_json(const SamplingReport &report);
nlohmann::json to_json(const IngestReport &report);
nlohmann::json to_json(const FilterReport &report);
nlohmann::json to_json(const LabelDistribution &dist, bool include_counts);

}  // namespace patsim
