#pragma once

#include <string>

#include "mmapq/model.hpp"

namespace mmapq {

// Parses a model document (JSON, schema documented in the README). Throws
// ModelError with a single violation: SyntaxError on malformed JSON,
// SchemaError on missing/extra/mistyped fields, BadDistribution on family
// constraint violations detectable at parse time (e.g. non-integer Erlang
// shape). State indices are 1-based in the document, 0-based in memory.
ModelConfig load_model(const std::string& text);
ModelConfig load_model_file(const std::string& path);

// Canonical serialization: batches sorted by label, kernel entries by
// (from, to); load(save(cfg)) reproduces cfg exactly.
std::string save_model(const ModelConfig& cfg);
void save_model_file(const ModelConfig& cfg, const std::string& path);

}  // namespace mmapq
