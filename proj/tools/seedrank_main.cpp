#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "seedrank/commands.hpp"
#include "seedrank/corpus_io.hpp"
#include "seedrank/error.hpp"

using namespace seedrank;

namespace {

struct RunArgs {
    std::string config_path;
    std::map<std::string, std::string> values;
};

void add_run_options(CLI::App* sub, RunArgs& args) {
    sub->add_option("--config", args.config_path, "JSON config file")->check(CLI::ExistingFile);
    for (const auto& key : config_keys()) {
        sub->add_option("--" + key, args.values[key], "overrides '" + key + "' from the config");
    }
}

// config file < SEEDRANK_* environment < flags
RunConfig resolve(const RunArgs& args, CLI::App* sub) {
    RunConfig c = args.config_path.empty() ? RunConfig{} : load_config(args.config_path);
    apply_env_overrides(c);
    for (const auto& [key, value] : args.values) {
        if (sub->count("--" + key) > 0) set_config_value(c, key, value);
    }
    return c;
}

void report(const std::string& command, const CommandResult& r) {
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
    nlohmann::json out{{"command", command},
                       {"topics_processed", r.topics_processed},
                       {"files_written", r.written.size()}};
    std::cout << out.dump() << '\n';
}

void emit(const std::string& text, const std::string& path) {
    if (path.empty()) std::cout << text;
    else write_file_atomic(path, text);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Seed-driven ranking of candidate studies for screening prioritisation"};
    app.require_subcommand(1);

    RunArgs rank_args, multi_args, analyze_args;
    auto* rank_cmd = app.add_subcommand("rank", "leave-one-out single-seed ranking of every topic");
    add_run_options(rank_cmd, rank_args);
    auto* multi_cmd = app.add_subcommand("multi", "sliding-window multi-seed ranking with oracle comparison");
    add_run_options(multi_cmd, multi_args);
    auto* analyze_cmd = app.add_subcommand("analyze", "intra-topic similarity and term commonality");
    add_run_options(analyze_cmd, analyze_args);

    std::string run_path, qrels_path, eval_out;
    std::vector<std::size_t> cutoffs{10, 100, 1000};
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a TREC run file");
    eval_cmd->add_option("--run", run_path)->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--qrels", qrels_path)->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--cutoffs", cutoffs)->delimiter(',');
    eval_cmd->add_option("-o,--output", eval_out);

    std::string metrics_a, metrics_b, compare_out;
    CompareOptions copts;
    auto* compare_cmd = app.add_subcommand("compare", "paired t-test between two metric CSVs");
    compare_cmd->add_option("metrics_a", metrics_a)->required()->check(CLI::ExistingFile);
    compare_cmd->add_option("metrics_b", metrics_b)->required()->check(CLI::ExistingFile);
    compare_cmd->add_option("--name-a", copts.name_a);
    compare_cmd->add_option("--name-b", copts.name_b);
    compare_cmd->add_option("--comparisons", copts.comparisons, "Bonferroni factor")->check(CLI::PositiveNumber);
    compare_cmd->add_option("--significance", copts.significance)->check(CLI::Range(0.0, 1.0));
    compare_cmd->add_option("-o,--output", compare_out);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*rank_cmd) report("rank", cmd_rank(resolve(rank_args, rank_cmd)));
        else if (*multi_cmd) report("multi", cmd_multi(resolve(multi_args, multi_cmd)));
        else if (*analyze_cmd) report("analyze", cmd_analyze(resolve(analyze_args, analyze_cmd)));
        else if (*eval_cmd) emit(cmd_eval(run_path, qrels_path, cutoffs), eval_out);
        else if (*compare_cmd) emit(cmd_compare(metrics_a, metrics_b, copts), compare_out);
    } catch (const Error& e) {
        nlohmann::json err{{"error", std::string(to_string(e.kind()))}, {"message", e.what()}};
        std::cerr << err.dump() << '\n';
        return e.kind() == ErrorKind::Config ? 2 : 1;
    } catch (const std::exception& e) {
        nlohmann::json err{{"error", "internal"}, {"message", e.what()}};
        std::cerr << err.dump() << '\n';
        return 1;
    }
    return 0;
}
