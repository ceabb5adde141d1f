// Copyright 2026 The longctx Authors
// SPDX-License-Identifier: Apache-2.0
//
// JSON and CSV renderings of module results, shared by the C API and tests.
// Field names here are the documented output contract (see schemas/).

#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "longctx/memplan.hpp"
#include "longctx/niah.hpp"
#include "longctx/recipe.hpp"
#include "longctx/ringsim.hpp"
#include "longctx/rope.hpp"

namespace longctx::serialize {

using nlohmann::json;

/// Two-space indented dump with a trailing newline.
std::string dump(const json& j);

json census_json(std::uint64_t limit);

json theta_plan_json(const rope::ThetaPlan& plan);
json rotation_report_json(const rope::DimRotationReport& report);
std::string rotation_report_csv(const rope::DimRotationReport& report);

struct RingRunInfo {
  std::size_t seq_len = 0;
  std::size_t head_dim = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> segment_lengths;
  ringsim::RingMesh mesh;
};

json ring_run_json(const RingRunInfo& info, const ringsim::RingResult& ring,
                   const ringsim::Matrix& oracle);
std::string matrix_csv(const ringsim::Matrix& m);

json chunk_plan_json(const memplan::ChunkPlan& plan);
json memory_report_json(const memplan::MemoryReport& report);
json scenario_json(const memplan::ScenarioComparison& cmp);

json niah_document_json(const niah::NiahDocument& doc, const niah::NiahCase& spec);
json niah_score_json(std::string_view expected, const niah::ScoreResult& r);
json niah_grid_json(const niah::GridResult& grid);

json recipe_summary_json(const recipe::RecipeManifest& m);
json recipe_validation_json(const std::vector<recipe::Violation>& violations);

}  // namespace longctx::serialize
