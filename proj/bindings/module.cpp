#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cmseq/cli.hpp"
#include "cmseq/json_io.hpp"

#include <iostream>
#include <sstream>

namespace py = pybind11;
using namespace cmseq;

namespace {

py::object load_model_file(const std::string& path) {
    ModelVariant model = model_from_json(load_json_file(path));
    return std::visit([](auto& m) { return py::cast(std::move(m)); }, model);
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Gaussian conditionally-Markov sequence toolkit";

    auto error = py::register_exception<Error>(m, "Error");
    py::register_exception<DimensionMismatch>(m, "DimensionMismatch", error);
    py::register_exception<NotPositiveDefinite>(m, "NotPositiveDefinite", error);
    py::register_exception<IndexOutOfRange>(m, "IndexOutOfRange", error);
    py::register_exception<IndexOverlap>(m, "IndexOverlap", error);
    py::register_exception<NotReciprocal>(m, "NotReciprocal", error);
    py::register_exception<BoundaryNotMarkov>(m, "BoundaryNotMarkov", error);
    py::register_exception<IncompleteParameters>(m, "IncompleteParameters", error);
    py::register_exception<ParseError>(m, "ParseError", error);

    py::enum_<Direction>(m, "Direction").value("L", Direction::L).value("F", Direction::F);
    py::enum_<SequenceClass>(m, "SequenceClass")
        .value("GENERAL_CM", SequenceClass::GeneralCM)
        .value("RECIPROCAL", SequenceClass::Reciprocal)
        .value("MARKOV", SequenceClass::Markov);

    py::class_<BlockMatrix>(m, "BlockMatrix")
        .def(py::init<int, int>(), py::arg("n_blocks"), py::arg("block_dim"))
        .def(py::init<Mat, int>(), py::arg("dense"), py::arg("block_dim"))
        .def_property_readonly("n_blocks", &BlockMatrix::n_blocks)
        .def_property_readonly("block_dim", &BlockMatrix::block_dim)
        .def_property_readonly("dense", [](const BlockMatrix& b) { return b.dense(); })
        .def("block", [](const BlockMatrix& b, int i, int j) { return Mat(b.block(i, j)); })
        .def("set_block", &BlockMatrix::set_block)
        .def("max_abs", &BlockMatrix::max_abs)
        .def("is_symmetric", &BlockMatrix::is_symmetric, py::arg("tol") = kDefaultTol);

    py::class_<PdFactor>(m, "PdFactor")
        .def(py::init<const Mat&, double>(), py::arg("a"), py::arg("sym_tol") = kDefaultTol)
        .def("solve", &PdFactor::solve)
        .def("inverse", &PdFactor::inverse)
        .def("lower", &PdFactor::lower);

    py::class_<StructureReport>(m, "StructureReport")
        .def_readonly("is_tridiagonal", &StructureReport::is_tridiagonal)
        .def_readonly("is_cyclic_tridiagonal", &StructureReport::is_cyclic_tridiagonal)
        .def_readonly("is_cml_form", &StructureReport::is_cml_form)
        .def_readonly("is_cmf_form", &StructureReport::is_cmf_form)
        .def_readonly("max_offband_residual", &StructureReport::max_offband_residual)
        .def_readonly("tolerance_used", &StructureReport::tolerance_used);

    m.def("structure_classify", &structure_classify, py::arg("j"), py::arg("tol") = kDefaultTol);
    m.def(
        "schur_window_classify",
        [](const BlockMatrix& j, int k1, int k2, Direction c, double tol) {
            return schur_window_classify(j, k1, k2, c, tol);
        },
        py::arg("j"), py::arg("k1"), py::arg("k2"), py::arg("c"), py::arg("tol") = kDefaultTol);

    py::class_<MarkovModel>(m, "MarkovModel")
        .def(py::init(&MarkovModel::zeros), py::arg("horizon"), py::arg("state_dim"))
        .def_readwrite("horizon", &MarkovModel::horizon)
        .def_readwrite("state_dim", &MarkovModel::state_dim)
        .def_readwrite("transitions", &MarkovModel::transitions)
        .def_readwrite("noise_covs", &MarkovModel::noise_covs)
        .def("transition", [](const MarkovModel& m, int k) { return m.transition(k); })
        .def("noise", [](const MarkovModel& m, int k) { return m.noise(k); })
        .def("set_transition", [](MarkovModel& m, int k, const Mat& v) { m.transition(k) = v; })
        .def("set_noise", [](MarkovModel& m, int k, const Mat& v) { m.noise(k) = v; });

    py::class_<CMcBoundary>(m, "CMcBoundary")
        .def(py::init<>())
        .def(py::init([](Mat endpoint_cov, Mat cross_gain, Mat other_end_cov) {
                 return CMcBoundary{std::move(endpoint_cov), std::move(cross_gain), std::move(other_end_cov)};
             }),
             py::arg("endpoint_cov"), py::arg("cross_gain"), py::arg("other_end_cov"))
        .def_readwrite("endpoint_cov", &CMcBoundary::endpoint_cov)
        .def_readwrite("cross_gain", &CMcBoundary::cross_gain)
        .def_readwrite("other_end_cov", &CMcBoundary::other_end_cov);

    py::class_<CMcModel>(m, "CMcModel")
        .def(py::init(&CMcModel::zeros), py::arg("direction"), py::arg("horizon"), py::arg("state_dim"))
        .def_readwrite("direction", &CMcModel::direction)
        .def_readwrite("horizon", &CMcModel::horizon)
        .def_readwrite("state_dim", &CMcModel::state_dim)
        .def_readwrite("transitions", &CMcModel::transitions)
        .def_readwrite("couplings", &CMcModel::couplings)
        .def_readwrite("noise_covs", &CMcModel::noise_covs)
        .def_readwrite("boundary", &CMcModel::boundary)
        .def_property_readonly("interior_begin", &CMcModel::interior_begin)
        .def_property_readonly("interior_end", &CMcModel::interior_end)
        .def("transition", [](const CMcModel& m, int k) { return m.transition(k); })
        .def("coupling", [](const CMcModel& m, int k) { return m.coupling(k); })
        .def("noise", [](const CMcModel& m, int k) { return m.noise(k); })
        .def("set_transition", [](CMcModel& m, int k, const Mat& v) { m.transition(k) = v; })
        .def("set_coupling", [](CMcModel& m, int k, const Mat& v) { m.coupling(k) = v; })
        .def("set_noise", [](CMcModel& m, int k, const Mat& v) { m.noise(k) = v; });

    py::class_<CML0k2Model>(m, "CML0k2Model")
        .def(py::init(&CML0k2Model::zeros), py::arg("horizon"), py::arg("state_dim"), py::arg("waypoint"))
        .def_readwrite("horizon", &CML0k2Model::horizon)
        .def_readwrite("state_dim", &CML0k2Model::state_dim)
        .def_readwrite("waypoint", &CML0k2Model::waypoint)
        .def_readwrite("seg1_transitions", &CML0k2Model::seg1_transitions)
        .def_readwrite("seg1_couplings", &CML0k2Model::seg1_couplings)
        .def_readwrite("seg1_noise_covs", &CML0k2Model::seg1_noise_covs)
        .def_readwrite("waypoint_cov", &CML0k2Model::waypoint_cov)
        .def_readwrite("origin_gain", &CML0k2Model::origin_gain)
        .def_readwrite("origin_cov", &CML0k2Model::origin_cov)
        .def_readwrite("terminal_gains", &CML0k2Model::terminal_gains)
        .def_readwrite("terminal_cov", &CML0k2Model::terminal_cov)
        .def_readwrite("seg2_transitions", &CML0k2Model::seg2_transitions)
        .def_readwrite("seg2_couplings", &CML0k2Model::seg2_couplings)
        .def_readwrite("seg2_noise_covs", &CML0k2Model::seg2_noise_covs);

    py::class_<ValidationReport>(m, "ValidationReport")
        .def_readonly("valid", &ValidationReport::valid)
        .def_readonly("has_boundary", &ValidationReport::has_boundary)
        .def_readonly("issues", &ValidationReport::issues);

    m.def("validate", [](const MarkovModel& v) { return validate(v); });
    m.def("validate", [](const CMcModel& v) { return validate(v); });
    m.def("validate", [](const CML0k2Model& v) { return validate(v); });
    m.def("validate", [](const Representation& v) { return validate(v); });

    py::class_<ConditionResult>(m, "ConditionResult")
        .def_readonly("holds", &ConditionResult::holds)
        .def_readonly("residuals", &ConditionResult::residuals)
        .def_readonly("scale", &ConditionResult::scale)
        .def_readonly("tolerance_used", &ConditionResult::tolerance_used)
        .def("max_residual", &ConditionResult::max_residual);

    m.def("check_reciprocal_condition", &check_reciprocal_condition, py::arg("m"), py::arg("tol") = kDefaultTol);
    m.def("check_markov_condition", &check_markov_condition, py::arg("m"), py::arg("tol") = kDefaultTol);
    m.def("check_window_cmf_condition", &check_window_cmf_condition, py::arg("m"), py::arg("k1"),
          py::arg("tol") = kDefaultTol);
    m.def("check_intersection_conditions", &check_intersection_conditions, py::arg("m"),
          py::arg("tol") = kDefaultTol);

    py::class_<Representation>(m, "Representation")
        .def(py::init<>())
        .def_readwrite("direction", &Representation::direction)
        .def_readwrite("underlying", &Representation::underlying)
        .def_readwrite("gamma", &Representation::gamma)
        .def_readwrite("endpoint_cov", &Representation::endpoint_cov)
        .def_property_readonly("horizon", &Representation::horizon)
        .def("gamma_at", [](const Representation& r, int k) { return r.gamma_at(k); });

    py::class_<RepresentationClassification>(m, "RepresentationClassification")
        .def_readonly("sequence_class", &RepresentationClassification::sequence_class)
        .def_readonly("residuals", &RepresentationClassification::residuals)
        .def_readonly("markov_residual", &RepresentationClassification::markov_residual)
        .def_readonly("scale", &RepresentationClassification::scale)
        .def_readonly("tolerance_used", &RepresentationClassification::tolerance_used);

    m.def("induce_cml_from_markov", &induce_cml_from_markov);
    m.def("markov_matching_boundary", &markov_matching_boundary);
    m.def("recover_markov_from_reciprocal_cml", &recover_markov_from_reciprocal_cml, py::arg("m"),
          py::arg("tol") = kDefaultTol);
    m.def("decompose_to_representation", &decompose_to_representation);
    m.def("construct_from_representation", &construct_from_representation);
    m.def("classify_representation", &classify_representation, py::arg("r"), py::arg("tol") = kDefaultTol);
    m.def("underlying_markov_of_induced", &underlying_markov_of_induced);

    py::class_<WindowResult>(m, "WindowResult")
        .def_readonly("k1", &WindowResult::k1)
        .def_readonly("direction", &WindowResult::direction)
        .def_readonly("holds", &WindowResult::holds)
        .def_readonly("residual", &WindowResult::residual);

    py::class_<SequenceClassification>(m, "SequenceClassification")
        .def_readonly("is_markov", &SequenceClassification::is_markov)
        .def_readonly("is_reciprocal", &SequenceClassification::is_reciprocal)
        .def_readonly("is_cml", &SequenceClassification::is_cml)
        .def_readonly("is_cmf", &SequenceClassification::is_cmf)
        .def_readonly("window_results", &SequenceClassification::window_results)
        .def_readonly("residuals", &SequenceClassification::residuals)
        .def_readonly("windows_consistent", &SequenceClassification::windows_consistent)
        .def_readonly("tolerance_used", &SequenceClassification::tolerance_used);

    m.def("assemble_precision", [](const CMcModel& v) { return assemble_precision(v); });
    m.def("assemble_precision", [](const CML0k2Model& v) { return assemble_precision(v); });
    m.def("markov_joint_covariance", &markov_joint_covariance);
    m.def("classify_sequence", &classify_sequence, py::arg("cov"), py::arg("tol") = 1e-7);
    m.def("conditional_independence_oracle", &conditional_independence_oracle, py::arg("cov"), py::arg("inside"),
          py::arg("outside"), py::arg("given"), py::arg("tol") = kDefaultTol);
    m.def(
        "verify_covariance_split",
        [](const BlockMatrix& cov, const Representation& r, double tol) {
            double residual = 0.0;
            const bool ok = verify_covariance_split(cov, r, tol, &residual);
            return py::make_tuple(ok, residual);
        },
        py::arg("cov"), py::arg("r"), py::arg("tol") = kDefaultTol);

    py::class_<TrajectoryBatch>(m, "TrajectoryBatch")
        .def_readonly("horizon", &TrajectoryBatch::horizon)
        .def_readonly("state_dim", &TrajectoryBatch::state_dim)
        .def_readonly("n_samples", &TrajectoryBatch::n_samples)
        .def_readonly("seed", &TrajectoryBatch::seed)
        .def_readonly("model_digest", &TrajectoryBatch::model_digest)
        .def_readonly("data", &TrajectoryBatch::data);

    m.def("sample_trajectories", [](const MarkovModel& v, long n, std::uint64_t seed) {
        return sample_trajectories(v, n, seed);
    });
    m.def("sample_trajectories", [](const CMcModel& v, long n, std::uint64_t seed) {
        return sample_trajectories(v, n, seed);
    });
    m.def("sample_trajectories", [](const CML0k2Model& v, long n, std::uint64_t seed) {
        return sample_trajectories(v, n, seed);
    });
    m.def("empirical_covariance", &empirical_covariance);

    py::class_<EndpointJoint>(m, "EndpointJoint")
        .def(py::init([](Mat cov_x0, Mat cov_xN, Mat cross) {
                 return EndpointJoint{std::move(cov_x0), std::move(cov_xN), std::move(cross)};
             }),
             py::arg("cov_x0"), py::arg("cov_xN"), py::arg("cross"))
        .def_readwrite("cov_x0", &EndpointJoint::cov_x0)
        .def_readwrite("cov_xN", &EndpointJoint::cov_xN)
        .def_readwrite("cross", &EndpointJoint::cross);

    m.def("destination_directed_generate", &destination_directed_generate, py::arg("motion"), py::arg("endpoints"),
          py::arg("n"), py::arg("seed"));

    m.def("load_model", &load_model_file, py::arg("path"));
    m.def("save_model", [](const MarkovModel& v, const std::string& path) { save_json_file(path, model_to_json(v)); });
    m.def("save_model", [](const CMcModel& v, const std::string& path) { save_json_file(path, model_to_json(v)); });
    m.def("save_model",
          [](const CML0k2Model& v, const std::string& path) { save_json_file(path, model_to_json(v)); });
    m.def("load_matrix", [](const std::string& path) { return block_matrix_from_json(load_json_file(path)); });
    m.def("save_matrix",
          [](const BlockMatrix& v, const std::string& path) { save_json_file(path, block_matrix_to_json(v)); });
    m.def("load_representation",
          [](const std::string& path) { return representation_from_json(load_json_file(path)); });
    m.def("save_representation",
          [](const Representation& v, const std::string& path) { save_json_file(path, representation_to_json(v)); });
    m.def("write_trajectory_csv", &write_trajectory_csv, py::arg("batch"), py::arg("path"));

    m.def(
        "cli_run",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            const int status = run(args, out, err);
            return py::make_tuple(status, out.str(), err.str());
        },
        py::arg("args"), "Run a CLI command in-process; returns (status, stdout, stderr).");

#ifdef CMSEQ_VERSION
    m.attr("__version__") = CMSEQ_VERSION;
#else
    m.attr("__version__") = "dev";
#endif
}
