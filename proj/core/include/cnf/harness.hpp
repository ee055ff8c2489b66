#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "cnf/augment.hpp"
#include "cnf/dataset.hpp"
#include "cnf/matrix.hpp"
#include "cnf/model.hpp"

namespace cnf {

// ---------------------------------------------------------------------------
// Dataset

struct CsvOptions {
  std::string smiles_column = "smiles";
  std::string target_column = "target";
  std::string id_column;  // empty: ids are the 0-based data row index
  Task task = Task::Regression;
  std::size_t max_len = kDefaultMaxLen;
};

struct DropCounts {
  std::size_t parse_failure = 0;
  std::size_t too_long = 0;
  std::size_t bad_target = 0;
  std::size_t total() const { return parse_failure + too_long + bad_target; }
};

struct Dataset {
  std::vector<DatasetRecord> records;
  DropCounts dropped;
  std::vector<std::string> drop_log;  // one line per dropped row
};

/// Splits one CSV line; double quotes group fields and "" is a literal quote.
std::vector<std::string> split_csv_line(const std::string& line);

/// Throws Error(MissingColumn), Error(EmptyDataset) after filtering,
/// Error(FormatError) on duplicate ids or ragged rows, Error(IoError).
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options);
Dataset parse_csv(std::istream& in, const CsvOptions& options);

// ---------------------------------------------------------------------------
// Folds

struct FoldAssignment {
  std::size_t k = 0;
  std::map<std::string, std::size_t> fold_of;
  std::vector<std::vector<std::size_t>> folds;  // record indices per fold, ascending

  /// Record indices outside fold f, ascending.
  std::vector<std::size_t> train_indices(std::size_t f) const;
};

/// Seeded shuffle, then contiguous partition into k folds whose sizes differ
/// by at most one. With `stratify`, records are grouped by target first and
/// dealt round-robin so each fold gets its share of every class.
/// Throws Error(InvalidConfig) for k < 2 and Error(TooFewRecords) for |records| < k.
FoldAssignment kfold_split(const std::vector<DatasetRecord>& records, std::size_t k, std::uint64_t seed,
                           bool stratify = false);

// ---------------------------------------------------------------------------
// Metrics

/// Throws Error(LengthMismatch) for different or zero lengths.
double metric_rmse(const std::vector<double>& preds, const std::vector<double>& targets);

/// Mann-Whitney AUC with half credit for ties. Labels are 0 or 1.
/// Throws Error(SingleClass) or Error(LengthMismatch).
double metric_auc(const std::vector<double>& scores, const std::vector<int>& labels);

/// Pairwise Euclidean distances. Throws Error(LengthMismatch).
Matrix distance_matrix(const std::vector<Fingerprint>& fingerprints);

struct Separation {
  double intra_mean = 0.0;
  double inter_mean = 0.0;
};

/// Means of the off-diagonal within-group and between-group entries.
/// Throws Error(DegenerateGrouping) unless there are at least two groups of at
/// least two members, and Error(LengthMismatch) on a size mismatch.
Separation cluster_separation(const Matrix& distances, const std::vector<std::string>& group_of);

/// Throws Error(LeakageDetected) if any group id is on both sides.
void assert_disjoint_groups(const std::vector<AugmentedRecord>& train, const std::vector<AugmentedRecord>& test);

// ---------------------------------------------------------------------------
// Experiments

struct ExperimentConfig {
  std::filesystem::path dataset;
  CsvOptions csv;
  ModelConfig model;
  AugPolicy aug;
  std::size_t k = 5;
  std::uint64_t seed = 1;
  bool stratify = true;  // classification only
  std::filesystem::path report;     // JSON lines; empty: not written
  std::filesystem::path model_dir;  // per-fold model files; empty: not written

  /// Throws Error(InvalidConfig).
  void validate() const;
  /// Canonical `key = value` text; parse(to_text()) reproduces the config.
  std::string to_text() const;
  /// 16 hex digits over to_text().
  std::string hash() const;
};

/// Reads `key = value` lines; '#' starts a comment. Unknown keys and bad
/// values throw Error(InvalidConfig).
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct FoldReport {
  std::size_t fold = 0;
  double metric = 0.0;
  std::size_t train_molecules = 0;
  std::size_t test_molecules = 0;
  std::size_t train_variants = 0;
  std::size_t test_variants = 0;
  std::size_t rejected_variants = 0;  // variants longer than max_len, both sides
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double seconds = 0.0;
};

struct MetricsReport {
  std::string metric;  // "rmse" or "auc"
  std::vector<FoldReport> folds;
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation over folds
  DropCounts dropped;
  std::string config_hash;
  std::string config_text;
  double seconds = 0.0;

  /// One JSON object per fold, then the summary. Wall-clock fields are
  /// omitted when `with_timing` is false.
  std::vector<nlohmann::json> to_json_lines(bool with_timing = true) const;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Split, augment each side, build the vocabulary on training variants, fit,
/// predict each test molecule as an ensemble and score every fold.
/// Errors raised inside a fold are rethrown with the fold index prefixed.
MetricsReport run_experiment(const ExperimentConfig& config, const ProgressFn& progress = {});
MetricsReport run_experiment(const ExperimentConfig& config, const Dataset& data, const ProgressFn& progress = {});

/// Trains one model on all of `records` under the training side of `aug`.
Model train_model(const std::vector<DatasetRecord>& records, const ModelConfig& config, const AugPolicy& aug,
                  std::size_t max_len, std::size_t* rejected = nullptr, TrainingLog* log = nullptr);

void write_json_lines(const std::vector<nlohmann::json>& lines, const std::filesystem::path& path);

}  // namespace cnf
