#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "phasetrap/detect.hpp"
#include "phasetrap/features.hpp"
#include "phasetrap/scaling.hpp"
#include "phasetrap/vqopt.hpp"

// Artifact (de)serialization. Everything is plain JSON or CSV with embedded
// schema-version fields; doubles are written losslessly so round trips are
// bit-exact.

namespace phasetrap {

using json = nlohmann::json;

std::string fnv1a_hex(std::string_view bytes);
std::string hash_of(const json& j);

// --- JSON codecs -------------------------------------------------------------

json to_json(const Grid& grid);
Grid grid_from_json(const json& j);

json to_json(const NoiseSpec& spec);
NoiseSpec noise_from_json(const json& j);

json to_json(const HamiltonianSpec& spec);
HamiltonianSpec hamiltonian_from_json(const json& j);

json to_json(const AnsatzSpec& spec);
AnsatzSpec ansatz_from_json(const json& j);

json to_json(const GlobalParams& params);
GlobalParams params_from_json(const json& j);

json to_json(const OptResult& result);
OptResult opt_result_from_json(const json& j);

json to_json(const TableProvenance& provenance);
TableProvenance provenance_from_json(const json& j);

json to_json(const FeatureTable& table, const HamiltonianSpec& model);
FeatureTable feature_table_from_json(const json& j, HamiltonianSpec* model = nullptr);

json to_json(const LossLandscape& landscape);
LossLandscape landscape_from_json(const json& j);

json to_json(const Valley& valley);
json to_json(const SymmetrizedObservable& op);
json to_json(const MinedParameter& parameter);

json to_json(const ExtrapolationFit& fit);
ExtrapolationFit fit_from_json(const json& j);

json to_json(const SetTransformerModel& model);
SetTransformerModel st_model_from_json(const json& j);

// --- CSV contracts -----------------------------------------------------------

// Header: g,<observable names>; entries printed with %.17g.
void write_feature_csv(const FeatureTable& table,
                       const std::filesystem::path& path);
// Reads values back into an existing table layout (names must match).
Eigen::MatrixXd read_feature_csv(const std::filesystem::path& path,
                                 std::vector<std::string>* names = nullptr,
                                 std::vector<double>* gs = nullptr);

// Header: g_center,raw,normalized,smoothed.
void write_landscape_csv(const LossLandscape& landscape,
                         const std::filesystem::path& path);

// --- artifact wrapper ---------------------------------------------------------

// { schema_version, kind, config_hash, elapsed_seconds, payload }
void write_artifact(const std::filesystem::path& path, const std::string& kind,
                    const std::string& config_hash, double elapsed_seconds,
                    const json& payload);
json read_artifact(const std::filesystem::path& path, const std::string& kind);
// Returns true when the artifact exists and its config hash matches.
bool artifact_current(const std::filesystem::path& path,
                      const std::string& kind, const std::string& config_hash);

}  // namespace phasetrap
