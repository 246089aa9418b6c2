// io.hpp - state and report files (JSON, complex numbers as [re, im])
#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "pseudomix/oracles.hpp"
#include "pseudomix/pipeline.hpp"

namespace pseudomix::io {

using Json = nlohmann::json;

/// Raw contents of a state file; the matrix is not yet checked for
/// Hermiticity or positivity.
struct StateFile {
  BipartiteDims dims;
  CMatrix<double> matrix;
};

StateFile state_from_json(const Json& j);
Json state_to_json(const StateFile& s);

StateFile read_state_file(const std::filesystem::path& path);
void write_state_file(const std::filesystem::path& path, const StateFile& s);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

/// FNV-1a over the dims and the IEEE-754 bit patterns of the entries.
std::string content_hash(BipartiteDims dims, const CMatrix<double>& m);

Json config_to_json(const PipelineConfig& cfg);
PipelineConfig config_from_json(const Json& j);

/// Everything a decompose run produces, bound to the input by its hash.
Json make_report(const Decomposition<double>& d, const Pseudomixture<double>* p,
                 const PipelineConfig& cfg);

/// Rebuilds the pseudomixture stored in a report.
Pseudomixture<double> pseudomixture_from_report(const Json& report);

}  // namespace pseudomix::io
