#include "cmseq/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <type_traits>

#include <CLI11.hpp>

#include "cmseq/json_io.hpp"

namespace cmseq {

namespace {

json validation_to_json(const ValidationReport& report) {
    return {{"valid", report.valid}, {"has_boundary", report.has_boundary}, {"issues", report.issues}};
}

json condition_to_json(const ConditionResult& result) {
    return {{"holds", result.holds},
            {"residuals", result.residuals},
            {"scale", result.scale},
            {"tolerance", result.tolerance_used}};
}

json classification_to_json(const SequenceClassification& c) {
    json windows = json::array();
    for (const WindowResult& w : c.window_results) {
        windows.push_back({{"k1", w.k1},
                           {"direction", to_string(w.direction)},
                           {"holds", w.holds},
                           {"residual", w.residual}});
    }
    return {{"is_markov", c.is_markov},
            {"is_reciprocal", c.is_reciprocal},
            {"is_cml", c.is_cml},
            {"is_cmf", c.is_cmf},
            {"windows", windows},
            {"residuals", c.residuals},
            {"consistent", c.windows_consistent},
            {"tolerance", c.tolerance_used}};
}

void emit(const json& report, const std::string& out_path, std::ostream& out) {
    if (out_path.empty()) {
        out << report.dump(2) << '\n';
    } else {
        save_json_file(out_path, report);
    }
}

MarkovModel load_markov(const std::string& path) {
    ModelVariant model = model_from_json(load_json_file(path));
    if (auto* m = std::get_if<MarkovModel>(&model)) return std::move(*m);
    throw ParseError(path + ": expected a model with kind \"markov\"");
}

CMcModel load_cmc(const std::string& path) {
    ModelVariant model = model_from_json(load_json_file(path));
    if (auto* m = std::get_if<CMcModel>(&model)) return std::move(*m);
    throw ParseError(path + ": expected a model with kind \"cml\" or \"cmf\"");
}

void require_valid_input(const ValidationReport& report, const std::string& path) {
    if (!report.valid) {
        std::string detail = report.issues.empty() ? std::string("invalid model") : report.issues.front();
        throw IncompleteParameters(path + ": " + detail);
    }
}

json check_cmc(const CMcModel& m, double tol, int k1, bool has_k1) {
    json report;
    report["kind"] = m.direction == Direction::L ? "cml" : "cmf";
    const ConditionResult reciprocal = check_reciprocal_condition(m, tol);
    report["reciprocal"] = reciprocal.holds;
    report["residuals"] = {{"reciprocal", reciprocal.residuals}};
    if (m.direction == Direction::F || m.boundary.has_value()) {
        const ConditionResult markov = check_markov_condition(m, tol);
        report["markov"] = markov.holds;
        report["residuals"]["markov"] = markov.residuals.back();
    } else {
        report["markov"] = nullptr;
    }
    if (has_k1) {
        if (m.direction != Direction::L) throw ParseError("--k1 window check applies to cml models only");
        const ConditionResult window = check_window_cmf_condition(m, k1, tol);
        report["window_cmf"] = {{"k1", k1}, {"holds", window.holds}, {"residuals", window.residuals}};
    }
    report["tolerance"] = tol;
    return report;
}

struct CliOptions {
    std::string in_path, out_path, motion_path, endpoints_path, model_out, csv_out;
    double tol = kDefaultTol;
    long samples = 10000;
    std::uint64_t seed = 0;
    int k1 = 0;
};

int dispatch(const std::string& command, const CliOptions& opt, bool has_k1, std::ostream& out) {
    if (command == "induce") {
        save_json_file(opt.out_path, model_to_json(induce_cml_from_markov(load_markov(opt.in_path))));
        return 0;
    }
    if (command == "boundary") {
        save_json_file(opt.out_path, boundary_to_json(markov_matching_boundary(load_markov(opt.in_path))));
        return 0;
    }
    if (command == "recover") {
        save_json_file(opt.out_path,
                       model_to_json(recover_markov_from_reciprocal_cml(load_cmc(opt.in_path), opt.tol)));
        return 0;
    }
    if (command == "decompose") {
        save_json_file(opt.out_path, representation_to_json(decompose_to_representation(load_cmc(opt.in_path))));
        return 0;
    }
    if (command == "construct") {
        const Representation r = representation_from_json(load_json_file(opt.in_path));
        save_json_file(opt.out_path, model_to_json(construct_from_representation(r)));
        return 0;
    }
    if (command == "check") {
        const json input = load_json_file(opt.in_path);
        json report;
        if (input.contains("direction") && input.contains("underlying")) {
            const Representation r = representation_from_json(input);
            const RepresentationClassification c = classify_representation(r, opt.tol);
            report = {{"kind", "representation"},
                      {"class", to_string(c.sequence_class)},
                      {"residuals", c.residuals},
                      {"markov_residual", c.markov_residual},
                      {"tolerance", c.tolerance_used}};
        } else {
            const ModelVariant model = model_from_json(input);
            if (const auto* markov = std::get_if<MarkovModel>(&model)) {
                report = validation_to_json(validate(*markov));
                report["kind"] = "markov";
            } else if (const auto* cmc = std::get_if<CMcModel>(&model)) {
                report = check_cmc(*cmc, opt.tol, opt.k1, has_k1);
            } else {
                const auto& intersection = std::get<CML0k2Model>(model);
                const ConditionResult result = check_intersection_conditions(intersection, opt.tol);
                report = {{"kind", "cml_0k2"}, {"intersection", result.holds}, {"residuals", result.residuals},
                          {"tolerance", result.tolerance_used}};
            }
        }
        emit(report, opt.out_path, out);
        return 0;
    }
    if (command == "assemble") {
        const ModelVariant model = model_from_json(load_json_file(opt.in_path));
        BlockMatrix precision = std::holds_alternative<CMcModel>(model)
                                    ? assemble_precision(std::get<CMcModel>(model))
                                    : assemble_precision(std::get<CML0k2Model>(model));
        save_json_file(opt.out_path, block_matrix_to_json(precision));
        return 0;
    }
    if (command == "classify") {
        const BlockMatrix cov = block_matrix_from_json(load_json_file(opt.in_path));
        emit(classification_to_json(classify_sequence(cov, opt.tol)), opt.out_path, out);
        return 0;
    }
    if (command == "sample") {
        const ModelVariant model = model_from_json(load_json_file(opt.in_path));
        const TrajectoryBatch batch = std::visit(
            [&](const auto& m) { return sample_trajectories(m, opt.samples, opt.seed); }, model);
        write_trajectory_csv(batch, opt.out_path);
        return 0;
    }
    if (command == "mc-verify") {
        const ModelVariant model = model_from_json(load_json_file(opt.in_path));
        BlockMatrix analytic = std::visit(
            [](const auto& m) -> BlockMatrix {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, MarkovModel>) {
                    return markov_joint_covariance(m);
                } else {
                    return BlockMatrix(factor_pd(assemble_precision(m)).inverse(), m.state_dim);
                }
            },
            model);
        const TrajectoryBatch batch = std::visit(
            [&](const auto& m) { return sample_trajectories(m, opt.samples, opt.seed); }, model);
        const BlockMatrix empirical = empirical_covariance(batch);

        double max_z = 0.0;
        const double n = static_cast<double>(batch.n_samples);
        const Mat& c = analytic.dense();
        for (Eigen::Index i = 0; i < c.rows(); ++i) {
            for (Eigen::Index j = 0; j < c.cols(); ++j) {
                const double se = std::sqrt((c(i, i) * c(j, j) + c(i, j) * c(i, j)) / n);
                max_z = std::max(max_z, std::abs(empirical.dense()(i, j) - c(i, j)) / se);
            }
        }
        emit({{"n_samples", batch.n_samples},
              {"seed", batch.seed},
              {"max_abs_z", max_z},
              {"pass", max_z <= 4.0}},
             opt.out_path, out);
        return 0;
    }
    if (command == "destgen") {
        const MarkovModel motion = load_markov(opt.motion_path);
        const json endpoints_json = load_json_file(opt.endpoints_path);
        if (!endpoints_json.is_object()) throw ParseError(opt.endpoints_path + ": expected a JSON object");
        EndpointJoint endpoints;
        if (!endpoints_json.contains("cov_x0") || !endpoints_json.contains("cov_xN") ||
            !endpoints_json.contains("cross")) {
            throw ParseError(opt.endpoints_path + ": missing 'cov_x0', 'cov_xN', or 'cross'");
        }
        endpoints.cov_x0 = matrix_from_json(endpoints_json["cov_x0"], "endpoints.cov_x0");
        endpoints.cov_xN = matrix_from_json(endpoints_json["cov_xN"], "endpoints.cov_xN");
        endpoints.cross = matrix_from_json(endpoints_json["cross"], "endpoints.cross");
        auto [model, batch] = destination_directed_generate(motion, endpoints, opt.samples, opt.seed);
        save_json_file(opt.model_out, model_to_json(model));
        write_trajectory_csv(batch, opt.csv_out);
        return 0;
    }
    throw ParseError("unknown command: " + command);
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Gaussian conditionally-Markov sequence toolkit", "cmseq"};
    app.require_subcommand(1);

    CliOptions opt;
    if (const char* env_tol = std::getenv("CMSEQ_TOL")) {
        try {
            opt.tol = std::stod(env_tol);
        } catch (const std::exception&) {
            err << "error: CMSEQ_TOL is not a number\n";
            return 1;
        }
    }

    auto add_common = [&](CLI::App* sub, bool needs_in, bool needs_out) {
        if (needs_in) sub->add_option("--in", opt.in_path, "input file")->required();
        if (needs_out) sub->add_option("--out", opt.out_path, "output file")->required();
        sub->add_option("--tol", opt.tol, "tolerance for residual checks");
    };

    add_common(app.add_subcommand("induce", "Markov model -> induced reciprocal cml interior"), true, true);
    add_common(app.add_subcommand("boundary", "Markov model -> boundary reproducing its joint law"), true, true);
    add_common(app.add_subcommand("recover", "reciprocal cml model + Markov boundary -> Markov model"), true, true);
    add_common(app.add_subcommand("decompose", "cml/cmf model -> Markov-plus-endpoint representation"), true, true);
    add_common(app.add_subcommand("construct", "representation -> cml/cmf model"), true, true);

    CLI::App* check = app.add_subcommand("check", "model or representation -> class membership report");
    check->add_option("--in", opt.in_path, "input file")->required();
    check->add_option("--out", opt.out_path, "report file (stdout when omitted)");
    check->add_option("--tol", opt.tol, "tolerance for residual checks");
    CLI::Option* k1_opt = check->add_option("--k1", opt.k1, "also test the [k1,N] window condition");

    add_common(app.add_subcommand("assemble", "model -> joint precision matrix"), true, true);

    CLI::App* classify = app.add_subcommand("classify", "covariance matrix -> structural classification");
    classify->add_option("--in", opt.in_path, "input matrix file")->required();
    classify->add_option("--out", opt.out_path, "report file (stdout when omitted)");
    classify->add_option("--tol", opt.tol, "tolerance for zero tests");

    CLI::App* sample = app.add_subcommand("sample", "model -> trajectory CSV");
    sample->add_option("--in", opt.in_path, "input model file")->required();
    sample->add_option("--out", opt.out_path, "output CSV file")->required();
    sample->add_option("--samples", opt.samples, "number of trajectories");
    sample->add_option("--seed", opt.seed, "RNG seed");

    CLI::App* mc = app.add_subcommand("mc-verify", "model -> Monte-Carlo vs analytic covariance report");
    mc->add_option("--in", opt.in_path, "input model file")->required();
    mc->add_option("--out", opt.out_path, "report file (stdout when omitted)");
    mc->add_option("--samples", opt.samples, "number of trajectories");
    mc->add_option("--seed", opt.seed, "RNG seed");

    CLI::App* destgen = app.add_subcommand("destgen", "motion model + endpoint joint -> model + trajectories");
    destgen->add_option("--motion", opt.motion_path, "Markov motion model file")->required();
    destgen->add_option("--endpoints", opt.endpoints_path, "endpoint joint file {cov_x0, cov_xN, cross}")->required();
    destgen->add_option("--out-model", opt.model_out, "output model file")->required();
    destgen->add_option("--out-csv", opt.csv_out, "output trajectory CSV")->required();
    destgen->add_option("--samples", opt.samples, "number of trajectories");
    destgen->add_option("--seed", opt.seed, "RNG seed");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return dispatch(command, opt, k1_opt->count() > 0, out);
    } catch (const NotPositiveDefinite& e) {
        err << "numerical failure: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const json::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace cmseq
