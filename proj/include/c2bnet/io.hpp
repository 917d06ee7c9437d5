#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "c2bnet/model.hpp"
#include "c2bnet/pde.hpp"

namespace c2bnet::io {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Binary container, shared by datasets and checkpoints:
//   4-byte magic ("C2BD" dataset, "C2BM" model)
//   4-byte little-endian version
//   8-byte little-endian header length
//   UTF-8 JSON header (grids, dims, seeds, architecture, normalizer, and the
//   declared payload block list)
//   raw little-endian 64-bit blocks in declared order
// Round trips are bit-exact. Loads fail with specific IoError messages on a
// bad magic, unsupported version, truncated payload, or shape inconsistency;
// no partial object escapes.

void save_dataset(const pde::Dataset& ds, const std::string& path);
pde::Dataset load_dataset(const std::string& path);

void save_checkpoint(const model::C2BNet& net, const std::string& path);
model::C2BNet load_checkpoint(const std::string& path);

nlohmann::json grid_to_json(const grids::Grid& g);
grids::Grid grid_from_json(const nlohmann::json& j);

} // namespace c2bnet::io
