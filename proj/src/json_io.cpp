#include "cmseq/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace cmseq {

namespace {

json matrix_to_rows(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat matrix_from_rows(const json& rows, const std::string& where) {
    if (!rows.is_array() || rows.empty()) {
        throw ParseError("field '" + where + "': expected a non-empty array of rows");
    }
    const size_t n_rows = rows.size();
    size_t n_cols = 0;
    Mat out;
    for (size_t r = 0; r < n_rows; ++r) {
        const json& row = rows[r];
        if (!row.is_array()) throw ParseError("field '" + where + "': row " + std::to_string(r) + " is not an array");
        if (r == 0) {
            n_cols = row.size();
            if (n_cols == 0) throw ParseError("field '" + where + "': empty row");
            out.resize(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_cols));
        } else if (row.size() != n_cols) {
            throw ParseError("field '" + where + "': ragged rows");
        }
        for (size_t c = 0; c < n_cols; ++c) {
            if (!row[c].is_number()) {
                throw ParseError("field '" + where + "': entry (" + std::to_string(r) + "," + std::to_string(c) +
                                 ") is not a number");
            }
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c].get<double>();
        }
    }
    return out;
}

const json& require_field(const json& j, const std::string& name, const std::string& where) {
    const auto it = j.find(name);
    if (it == j.end()) throw ParseError("field '" + where + "': missing '" + name + "'");
    return *it;
}

int require_int(const json& j, const std::string& name, const std::string& where) {
    const json& field = require_field(j, name, where);
    if (!field.is_number_integer()) throw ParseError("field '" + where + "." + name + "': expected an integer");
    return field.get<int>();
}

Mat block_from(const json& j, const std::string& name, const std::string& where, int d) {
    Mat block = matrix_from_rows(require_field(j, name, where), where + "." + name);
    if (block.rows() != d || block.cols() != d) {
        throw ParseError("field '" + where + "." + name + "': expected a " + std::to_string(d) + "x" +
                         std::to_string(d) + " block");
    }
    return block;
}

std::vector<Mat> blocks_from(const json& params, const std::string& name, const std::string& where, int d,
                             int expected) {
    const json& arr = require_field(params, name, where);
    if (!arr.is_array()) throw ParseError("field '" + where + "." + name + "': expected an array of blocks");
    if (static_cast<int>(arr.size()) != expected) {
        throw ParseError("field '" + where + "." + name + "': expected " + std::to_string(expected) +
                         " blocks, found " + std::to_string(arr.size()));
    }
    std::vector<Mat> out;
    out.reserve(arr.size());
    for (size_t i = 0; i < arr.size(); ++i) {
        Mat block = matrix_from_rows(arr[i], where + "." + name + "[" + std::to_string(i) + "]");
        if (block.rows() != d || block.cols() != d) {
            throw ParseError("field '" + where + "." + name + "[" + std::to_string(i) + "]': expected a " +
                             std::to_string(d) + "x" + std::to_string(d) + " block");
        }
        out.push_back(std::move(block));
    }
    return out;
}

json blocks_to_json(const std::vector<Mat>& blocks) {
    json arr = json::array();
    for (const Mat& b : blocks) arr.push_back(matrix_to_rows(b));
    return arr;
}

} // namespace

json matrix_to_json(const Mat& m) { return matrix_to_rows(m); }

Mat matrix_from_json(const json& rows, const std::string& where) { return matrix_from_rows(rows, where); }

json block_matrix_to_json(const BlockMatrix& m) {
    json j;
    j["n_blocks"] = m.n_blocks();
    j["block_dim"] = m.block_dim();
    j["rows"] = matrix_to_rows(m.dense());
    return j;
}

BlockMatrix block_matrix_from_json(const json& j) {
    const int n_blocks = require_int(j, "n_blocks", "matrix");
    const int block_dim = require_int(j, "block_dim", "matrix");
    Mat dense = matrix_from_rows(require_field(j, "rows", "matrix"), "matrix.rows");
    if (dense.rows() != static_cast<Eigen::Index>(n_blocks) * block_dim || dense.rows() != dense.cols()) {
        throw ParseError("field 'matrix.rows': size does not match n_blocks * block_dim");
    }
    return BlockMatrix(std::move(dense), block_dim);
}

json model_to_json(const MarkovModel& m) {
    json j;
    j["kind"] = "markov";
    j["N"] = m.horizon;
    j["d"] = m.state_dim;
    j["params"] = {{"transition", blocks_to_json(m.transitions)}, {"noise_cov", blocks_to_json(m.noise_covs)}};
    return j;
}

json model_to_json(const CMcModel& m) {
    json j;
    j["kind"] = m.direction == Direction::L ? "cml" : "cmf";
    j["N"] = m.horizon;
    j["d"] = m.state_dim;
    j["params"] = {{"transition", blocks_to_json(m.transitions)},
                   {"coupling", blocks_to_json(m.couplings)},
                   {"noise_cov", blocks_to_json(m.noise_covs)}};
    if (m.boundary.has_value()) j["boundary"] = boundary_to_json(*m.boundary);
    return j;
}

json model_to_json(const CML0k2Model& m) {
    json j;
    j["kind"] = "cml_0k2";
    j["N"] = m.horizon;
    j["d"] = m.state_dim;
    j["k2"] = m.waypoint;
    j["params"] = {{"segment1_transition", blocks_to_json(m.seg1_transitions)},
                   {"segment1_coupling", blocks_to_json(m.seg1_couplings)},
                   {"segment1_noise_cov", blocks_to_json(m.seg1_noise_covs)},
                   {"terminal_gain", blocks_to_json(m.terminal_gains)},
                   {"terminal_noise_cov", blocks_to_json({m.terminal_cov})},
                   {"segment2_transition", blocks_to_json(m.seg2_transitions)},
                   {"segment2_coupling", blocks_to_json(m.seg2_couplings)},
                   {"segment2_noise_cov", blocks_to_json(m.seg2_noise_covs)}};
    j["boundary"] = {{"waypoint_cov", matrix_to_rows(m.waypoint_cov)},
                     {"origin_gain", matrix_to_rows(m.origin_gain)},
                     {"origin_cov", matrix_to_rows(m.origin_cov)}};
    return j;
}

json boundary_to_json(const CMcBoundary& b) {
    return {{"endpoint_cov", matrix_to_rows(b.endpoint_cov)},
            {"cross_gain", matrix_to_rows(b.cross_gain)},
            {"other_end_cov", matrix_to_rows(b.other_end_cov)}};
}

CMcBoundary boundary_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("field 'boundary': expected an object");
    CMcBoundary b;
    b.endpoint_cov = matrix_from_rows(require_field(j, "endpoint_cov", "boundary"), "boundary.endpoint_cov");
    b.cross_gain = matrix_from_rows(require_field(j, "cross_gain", "boundary"), "boundary.cross_gain");
    b.other_end_cov = matrix_from_rows(require_field(j, "other_end_cov", "boundary"), "boundary.other_end_cov");
    return b;
}

MarkovModel markov_model_from_json(const json& j) {
    const int horizon = require_int(j, "N", "model");
    const int d = require_int(j, "d", "model");
    const json& params = require_field(j, "params", "model");
    MarkovModel m;
    m.horizon = horizon;
    m.state_dim = d;
    m.transitions = blocks_from(params, "transition", "params", d, horizon);
    m.noise_covs = blocks_from(params, "noise_cov", "params", d, horizon + 1);
    return m;
}

CMcModel cmc_model_from_json(const json& j) {
    const std::string kind = require_field(j, "kind", "model").get<std::string>();
    const int horizon = require_int(j, "N", "model");
    const int d = require_int(j, "d", "model");
    const json& params = require_field(j, "params", "model");

    CMcModel m;
    m.direction = kind == "cml" ? Direction::L : Direction::F;
    m.horizon = horizon;
    m.state_dim = d;
    const int count = m.interior_count();
    m.transitions = blocks_from(params, "transition", "params", d, count);
    m.couplings = blocks_from(params, "coupling", "params", d, count);
    m.noise_covs = blocks_from(params, "noise_cov", "params", d, count);
    if (j.contains("boundary") && !j["boundary"].is_null()) {
        m.boundary = boundary_from_json(j["boundary"]);
    }
    return m;
}

CML0k2Model cml0k2_model_from_json(const json& j) {
    const int horizon = require_int(j, "N", "model");
    const int d = require_int(j, "d", "model");
    const int k2 = require_int(j, "k2", "model");
    const json& params = require_field(j, "params", "model");
    const json& boundary = require_field(j, "boundary", "model");

    CML0k2Model m;
    m.horizon = horizon;
    m.state_dim = d;
    m.waypoint = k2;
    m.seg1_transitions = blocks_from(params, "segment1_transition", "params", d, k2 - 1);
    m.seg1_couplings = blocks_from(params, "segment1_coupling", "params", d, k2 - 1);
    m.seg1_noise_covs = blocks_from(params, "segment1_noise_cov", "params", d, k2 - 1);
    m.terminal_gains = blocks_from(params, "terminal_gain", "params", d, k2 + 1);
    m.terminal_cov = blocks_from(params, "terminal_noise_cov", "params", d, 1).front();
    m.seg2_transitions = blocks_from(params, "segment2_transition", "params", d, horizon - k2 - 1);
    m.seg2_couplings = blocks_from(params, "segment2_coupling", "params", d, horizon - k2 - 1);
    m.seg2_noise_covs = blocks_from(params, "segment2_noise_cov", "params", d, horizon - k2 - 1);
    m.waypoint_cov = block_from(boundary, "waypoint_cov", "boundary", d);
    m.origin_gain = block_from(boundary, "origin_gain", "boundary", d);
    m.origin_cov = block_from(boundary, "origin_cov", "boundary", d);
    return m;
}

ModelVariant model_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("model file: expected a JSON object");
    const json& kind_field = require_field(j, "kind", "model");
    if (!kind_field.is_string()) throw ParseError("field 'model.kind': expected a string");
    const std::string kind = kind_field.get<std::string>();
    if (kind == "markov") return markov_model_from_json(j);
    if (kind == "cml" || kind == "cmf") return cmc_model_from_json(j);
    if (kind == "cml_0k2") return cml0k2_model_from_json(j);
    throw ParseError("field 'model.kind': unknown kind '" + kind + "'");
}

json representation_to_json(const Representation& r) {
    json j;
    j["direction"] = to_string(r.direction);
    j["underlying"] = model_to_json(r.underlying);
    j["gamma"] = blocks_to_json(r.gamma);
    j["endpoint_cov"] = matrix_to_rows(r.endpoint_cov);
    return j;
}

Representation representation_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("representation file: expected a JSON object");
    const std::string direction = require_field(j, "direction", "representation").get<std::string>();
    if (direction != "L" && direction != "F") {
        throw ParseError("field 'representation.direction': expected \"L\" or \"F\"");
    }
    Representation r;
    r.direction = direction == "L" ? Direction::L : Direction::F;
    r.underlying = markov_model_from_json(require_field(j, "underlying", "representation"));
    const int d = r.underlying.state_dim;
    const json& gamma = require_field(j, "gamma", "representation");
    if (!gamma.is_array() || static_cast<int>(gamma.size()) != r.underlying.horizon + 1) {
        throw ParseError("field 'representation.gamma': expected " + std::to_string(r.underlying.horizon + 1) +
                         " blocks");
    }
    for (size_t i = 0; i < gamma.size(); ++i) {
        Mat block = matrix_from_rows(gamma[i], "representation.gamma[" + std::to_string(i) + "]");
        if (block.rows() != d || block.cols() != d) {
            throw ParseError("field 'representation.gamma[" + std::to_string(i) + "]': wrong block size");
        }
        r.gamma.push_back(std::move(block));
    }
    r.endpoint_cov = block_from(j, "endpoint_cov", "representation", d);
    return r;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void save_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write file: " + path);
    out << j.dump(2) << '\n';
}

void write_trajectory_csv(const TrajectoryBatch& b, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write file: " + path);
    out << "sample,k";
    for (int c = 0; c < b.state_dim; ++c) out << ",x" << c;
    out << '\n';
    char buffer[40];
    for (long s = 0; s < b.n_samples; ++s) {
        for (int k = 0; k <= b.horizon; ++k) {
            out << s << ',' << k;
            for (int c = 0; c < b.state_dim; ++c) {
                std::snprintf(buffer, sizeof(buffer), "%.17g", b.data(s, k * b.state_dim + c));
                out << ',' << buffer;
            }
            out << '\n';
        }
    }
}

} // namespace cmseq
