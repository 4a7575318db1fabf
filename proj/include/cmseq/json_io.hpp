#pragma once

#include <string>
#include <variant>

#include <json.hpp>

#include "cmseq/simulate.hpp"

namespace cmseq {

using json = nlohmann::json;

/// Matrix exchange format: {"n_blocks": int, "block_dim": int,
/// "rows": [[real, ...], ...]} with rows listed top to bottom.
json block_matrix_to_json(const BlockMatrix& m);
BlockMatrix block_matrix_from_json(const json& j);

/// Plain matrix as an array of rows.
json matrix_to_json(const Mat& m);
Mat matrix_from_json(const json& rows, const std::string& where);

/// Model files: {"kind": "markov"|"cml"|"cmf"|"cml_0k2", "N": int,
/// "d": int, "k2": int (cml_0k2 only), "params": {name -> [blocks]},
/// "boundary": {...} (optional for cml/cmf)}. Each block is an array of
/// d rows of d reals. Parameter names per kind:
///   markov:   transition (k = 1..N), noise_cov (k = 0..N)
///   cml:      transition, coupling, noise_cov over k = 1..N-1;
///             boundary {endpoint_cov, cross_gain, other_end_cov}
///   cmf:      same arrays over k = 2..N; boundary as above with
///             cross_gain the combined first-step gain and other_end_cov
///             the k = 1 noise covariance
///   cml_0k2:  segment1_transition/_coupling/_noise_cov (k = 1..k2-1),
///             terminal_gain (i = 0..k2), terminal_noise_cov (one block),
///             segment2_transition/_coupling/_noise_cov (k = k2+1..N-1);
///             boundary {waypoint_cov, origin_gain, origin_cov}
json model_to_json(const MarkovModel& m);
json model_to_json(const CMcModel& m);
json model_to_json(const CML0k2Model& m);

using ModelVariant = std::variant<MarkovModel, CMcModel, CML0k2Model>;
ModelVariant model_from_json(const json& j);

MarkovModel markov_model_from_json(const json& j);
CMcModel cmc_model_from_json(const json& j);
CML0k2Model cml0k2_model_from_json(const json& j);

json boundary_to_json(const CMcBoundary& b);
CMcBoundary boundary_from_json(const json& j);

/// {"direction": "L"|"F", "underlying": <markov model>,
///  "gamma": [blocks], "endpoint_cov": block}
json representation_to_json(const Representation& r);
Representation representation_from_json(const json& j);

/// Reads a whole file and parses it; throws ParseError with the parser's
/// line/column diagnostic on malformed input.
json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const json& j);

/// CSV export: header "sample,k,x0,..,x{d-1}", one row per (sample, time).
void write_trajectory_csv(const TrajectoryBatch& b, const std::string& path);

} // namespace cmseq
