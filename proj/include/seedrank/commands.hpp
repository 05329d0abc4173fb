#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "seedrank/evaluation.hpp"
#include "seedrank/scoring.hpp"
#include "seedrank/textproc.hpp"

namespace seedrank {

enum class Command { Rank, Multi, Eval, Analyze, Compare };

struct RunConfig {
    std::filesystem::path corpus;
    std::filesystem::path topics;
    std::filesystem::path qrels;
    std::filesystem::path lexicon;
    std::filesystem::path embeddings;
    std::filesystem::path stopwords;
    std::filesystem::path output_dir = "out";
    std::string annotator;  // optional URL, used when no lexicon file is given

    Method method = Method::Sdr;
    Representation representation = Representation::Bow;
    PipelineVariant variant = PipelineVariant::Ours;
    bool include_title = true;
    ScoringParams params;

    double fraction = 0.2;
    std::size_t repetitions = 10;
    std::size_t min_relevant = 2;
    std::size_t threads = 1;
};

// Keys accepted in config files, by flags and as SEEDRANK_<KEY> environment variables.
const std::vector<std::string>& config_keys();

// Sets one key from its string form. Throws Config naming the key on bad input.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);
// Reads a JSON object of key -> value. Unknown keys are rejected.
RunConfig load_config(const std::filesystem::path& path);
RunConfig config_from_json_text(const std::string& text);
// Applies SEEDRANK_<KEY> variables that are set in the environment.
void apply_env_overrides(RunConfig& config, const std::string& prefix = "SEEDRANK_");
// Checks that the files the command needs exist. Throws Config naming the field.
void validate_config(const RunConfig& config, Command command);

struct CommandResult {
    std::vector<std::filesystem::path> written;
    std::vector<std::string> warnings;
    std::size_t topics_processed = 0;
};

// Single-seed leave-one-out: runs/<METHOD>-<REPR>/<topic>/<seed>.run and metrics.csv.
CommandResult cmd_rank(const RunConfig& config);
// Sliding-window multi-seed runs plus oracle single-seed runs and comparison.csv.
CommandResult cmd_multi(const RunConfig& config);
// Per-topic intra-similarity and term commonality CSVs under analysis/.
CommandResult cmd_analyze(const RunConfig& config);

// Metric CSV (topic_id,seed_or_window,metric,value) of a TREC run against qrels.
std::string cmd_eval(const std::filesystem::path& run_path, const std::filesystem::path& qrels_path,
                     const std::vector<std::size_t>& cutoffs = {kDefaultCutoffs.begin(), kDefaultCutoffs.end()});

struct CompareOptions {
    std::string name_a = "a";
    std::string name_b = "b";
    std::size_t comparisons = 1;  // Bonferroni factor
    double significance = 0.05;
};

// Paired t-test over the per-topic means of two metric CSVs:
// method_a,method_b,metric,t,p,p_adjusted,significant
std::string cmd_compare(const std::filesystem::path& metrics_a, const std::filesystem::path& metrics_b,
                        const CompareOptions& options);
std::string compare_metric_csv(const std::string& csv_a, const std::string& csv_b, const CompareOptions& options);

}  // namespace seedrank
