// netctrl: command-line front end.
//
//   netctrl check <file> [--method theorem|kalman|pbh|all] [--T file] [--tol-rank X] [--tol-eig X] [--tol-res X] [--out file]
//   netctrl oracle [gen flags] [--out file] [--dump-dir dir]
//   netctrl gen [gen flags] --out file
//
// Exit codes: 0 analysis completed, 2 input error, 3 numerical failure. For
// oracle, 0 additionally requires zero non-fragile disagreements.

#include "netctrl/io.hpp"
#include "netctrl/oracle.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDisagreement = 1;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

struct ToleranceFlags {
    double rank = 0.0;
    double eig = 0.0;
    double res = 0.0;
    CLI::Option* rank_opt = nullptr;
    CLI::Option* eig_opt = nullptr;
    CLI::Option* res_opt = nullptr;

    void attach(CLI::App* app) {
        rank_opt = app->add_option("--tol-rank", rank, "relative singular-value cutoff")->envname("NETCTRL_TOL_RANK");
        eig_opt = app->add_option("--tol-eig", eig, "relative eigenvalue clustering threshold")->envname("NETCTRL_TOL_EIG");
        res_opt = app->add_option("--tol-res", res, "relative residual bound")->envname("NETCTRL_TOL_RES");
    }

    netctrl::Tolerances apply(netctrl::Tolerances t) const {
        if (rank_opt->count() > 0) {
            t.rank_rel = rank;
        }
        if (eig_opt->count() > 0) {
            t.eig_cluster_rel = eig;
        }
        if (res_opt->count() > 0) {
            t.residual_rel = res;
        }
        t.require_valid();
        return t;
    }
};

void attach_gen_flags(CLI::App* app, netctrl::GenSpec& g) {
    app->add_option("--seed", g.seed, "batch seed")->capture_default_str();
    app->add_option("--max-nodes", g.max_nodes, "upper bound on N")->capture_default_str();
    app->add_option("--node-dim", g.node_dim, "node state dimension n")->capture_default_str();
    app->add_option("--input-dim", g.input_dim, "input dimension m")->capture_default_str();
    app->add_option("--entry-bound", g.entry_bound, "entries drawn from [-b, b]")->capture_default_str();
    app->add_flag("--homogeneous", g.homogeneous, "identical node matrices");
    app->add_flag("--plant-jordan", g.plant_jordan, "plant a Jordan block of length >= 2 in C");
    app->add_flag("--ensure-diagonalizable", g.ensure_diagonalizable, "resample C until diagonalizable");
    app->add_option("--control-density", g.control_density, "probability that d_i = 1")->capture_default_str();
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        throw netctrl::InvalidInput("cannot write " + out_path);
    }
    out << text;
}

int cmd_check(const std::string& file, const std::string& method, const std::string& t_file,
              const ToleranceFlags& flags, const std::string& out_path) {
    const std::string text = netctrl::read_file(file);
    const netctrl::ParsedSystem parsed = netctrl::parse_system_text(text);
    std::string digest_input = text;
    std::optional<netctrl::Matrix> t = parsed.t;
    if (!t_file.empty()) {
        const std::string t_text = netctrl::read_file(t_file);
        t = netctrl::parse_matrix_text(t_text, "--T");
        digest_input += '\0';
        digest_input += t_text;
    }
    const netctrl::Tolerances tol = flags.apply(parsed.tolerances.apply(netctrl::Tolerances{}));
    const auto result = netctrl::run_check(parsed.system, tol, method, t, netctrl::sha256_hex(digest_input));
    emit(netctrl::dump_json(netctrl::check_report_json(result)), out_path);
    return kExitOk;
}

int cmd_oracle(const netctrl::GenSpec& spec, int trials, const ToleranceFlags& flags, const std::string& out_path,
               const std::string& dump_dir) {
    if (trials < 0) {
        throw netctrl::InvalidInput("--trials must be non-negative");
    }
    spec.require_valid();
    const netctrl::Tolerances tol = flags.apply(netctrl::Tolerances{});
    const auto reports = netctrl::run_batch(spec, trials, tol);
    const auto summary = netctrl::summarize(reports);

    netctrl::Json doc;
    doc["tool"] = {{"name", "netctrl"}, {"version", netctrl::kToolVersion}};
    doc["gen_spec"] = netctrl::gen_spec_json(spec);
    doc["tolerances"] = netctrl::tolerances_json(tol);
    doc["summary"] = netctrl::batch_summary_json(summary);
    netctrl::Json instances = netctrl::Json::array();
    for (const auto& r : reports) {
        instances.push_back(netctrl::cross_report_json(r));
    }
    doc["instances"] = std::move(instances);
    emit(netctrl::dump_json(doc), out_path);

    if (!dump_dir.empty()) {
        std::filesystem::create_directories(dump_dir);
        for (const auto& r : reports) {
            if ((r.disagreement || !r.errors.empty()) && r.system) {
                const std::string comment = "oracle instance " + std::to_string(r.id) + ", instance seed " +
                                            std::to_string(r.seed) + ", batch seed " + std::to_string(spec.seed);
                emit(netctrl::render_system(*r.system, std::nullopt, tol, comment),
                     dump_dir + "/instance_" + std::to_string(r.id) + ".json");
            }
        }
    }
    std::cerr << "oracle: " << summary.trials << " trials, " << summary.disagreements << " disagreements, "
              << summary.fragile << " fragile (" << summary.fragile_rate() * 100.0 << "%), " << summary.theorem_fallbacks
              << " theorem fallbacks, " << summary.errors << " errors\n";
    return summary.disagreements == 0 ? kExitOk : kExitDisagreement;
}

int cmd_gen(const netctrl::GenSpec& spec, const std::string& out_path) {
    const auto sys = netctrl::generate(spec);
    emit(netctrl::render_system(sys, std::nullopt, std::nullopt, "generated with seed " + std::to_string(spec.seed)),
         out_path);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Controllability of networked LTI systems"};
    app.require_subcommand(1);
    app.set_version_flag("--version", netctrl::kToolVersion);

    auto* check = app.add_subcommand("check", "analyse one system file");
    std::string file;
    std::string method = "all";
    std::string t_file;
    std::string out_path;
    ToleranceFlags check_tol;
    check->add_option("file", file, "system document (JSON)")->required();
    check->add_option("--method", method, "theorem, kalman, pbh or all")
        ->check(CLI::IsMember({"theorem", "kalman", "pbh", "all"}))
        ->capture_default_str();
    check->add_option("--T", t_file, "file holding a transform T to verify and use");
    check->add_option("--out", out_path, "write the report here instead of standard output");
    check_tol.attach(check);

    auto* oracle = app.add_subcommand("oracle", "cross-validate the theorem against Kalman and PBH on random systems");
    netctrl::GenSpec oracle_spec;
    int trials = 100;
    std::string oracle_out;
    std::string dump_dir;
    ToleranceFlags oracle_tol;
    oracle->add_option("--trials", trials, "number of instances")->capture_default_str();
    attach_gen_flags(oracle, oracle_spec);
    oracle->add_option("--out", oracle_out, "write the batch report here instead of standard output");
    oracle->add_option("--dump-dir", dump_dir, "write disagreeing instances as system files");
    oracle_tol.attach(oracle);

    auto* gen = app.add_subcommand("gen", "emit one random system file");
    netctrl::GenSpec gen_spec;
    std::string gen_out;
    attach_gen_flags(gen, gen_spec);
    gen->add_option("--out", gen_out, "output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        if (check->parsed()) {
            return cmd_check(file, method, t_file, check_tol, out_path);
        }
        if (oracle->parsed()) {
            return cmd_oracle(oracle_spec, trials, oracle_tol, oracle_out, dump_dir);
        }
        return cmd_gen(gen_spec, gen_out);
    } catch (const netctrl::InvalidInput& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const netctrl::GenerationFailure& e) {
        std::cerr << "generation failed: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const netctrl::NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitNumerical;
    }
}
