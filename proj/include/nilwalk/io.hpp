#pragma once

#include "nilwalk/filtration.hpp"
#include "nilwalk/walk.hpp"

#include <nlohmann/json_fwd.hpp>
#include <string>

namespace nilwalk {

// CSV: '.' decimal, '\n' line endings, mandatory header row.
void write_batch_csv(const std::string& path, const SampleBatch& batch);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Mat& rows);

// Companion metadata for a batch (config hash, seed, N).
void write_batch_metadata(const std::string& path, const SampleBatch& batch,
                          const nlohmann::json& config);

// FNV-1a over the canonical (sorted-key) JSON dump.
std::string config_hash(const nlohmann::json& config);

nlohmann::json filtration_to_json(const Filtration& f);
nlohmann::json decomposition_to_json(const WeightDecomposition& dec);

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

}  // namespace nilwalk
