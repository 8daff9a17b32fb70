#pragma once

#include <cstdint>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "tkgx/encoder.hpp"
#include "tkgx/training.hpp"

namespace tkgx {

nlohmann::json to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j, ModelConfig base = {});

/// Flat document with TrainConfig and SamplerConfig field names. Unknown keys are
/// rejected so typos do not silently fall back to defaults.
nlohmann::json to_json(const TrainConfig& cfg);
nlohmann::json to_json(const SamplerConfig& cfg);
void apply_config(const nlohmann::json& flat, TrainConfig& train, SamplerConfig& sampler);

/// 16-digit lowercase hex.
std::string hash_hex(std::uint64_t v);

/// Model checkpoint: config, every tensor with its shape, and the vocabulary hash of the
/// dataset it was trained on.
void save_checkpoint(const std::filesystem::path& path, const Model& model, std::uint64_t vocab_hash);
/// Throws DataError if the stored vocabulary hash differs from `expected_vocab_hash`.
Model load_checkpoint(const std::filesystem::path& path, std::uint64_t expected_vocab_hash);

}  // namespace tkgx
