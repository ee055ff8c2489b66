#include "cnf/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include "cnf/error.hpp"
#include "cnf/featurize.hpp"
#include "cnf/model_io.hpp"
#include "cnf/random.hpp"
#include "cnf/smiles.hpp"

namespace cnf {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

bool parse_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* begin = t.data();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, t.data() + t.size(), out);
  return ec == std::errc() && ptr == t.data() + t.size() && std::isfinite(out);
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

// ---------------------------------------------------------------------------
// Dataset

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  if (quoted) throw Error(ErrorCode::FormatError, "unterminated quoted field");
  return fields;
}

Dataset parse_csv(std::istream& in, const CsvOptions& options) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::EmptyDataset, "file has no header row");
  const std::vector<std::string> header = split_csv_line(line);
  auto column = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (trim(header[i]) == name) return i;
    }
    throw Error(ErrorCode::MissingColumn, "no column named '" + name + "'");
  };
  const std::size_t smiles_col = column(options.smiles_column);
  const std::size_t target_col = column(options.target_column);
  const std::size_t id_col = options.id_column.empty() ? header.size() : column(options.id_column);

  Dataset data;
  std::unordered_set<std::string> ids;
  std::size_t row = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::size_t index = row++;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw Error(ErrorCode::FormatError, "line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                                              " fields, header has " + std::to_string(header.size()));
    DatasetRecord rec;
    rec.id = id_col < fields.size() ? trim(fields[id_col]) : std::to_string(index);
    rec.smiles = trim(fields[smiles_col]);
    auto drop = [&](std::size_t& counter, const std::string& why) {
      ++counter;
      data.drop_log.push_back("line " + std::to_string(line_no) + " (" + rec.id + "): " + why);
    };
    if (rec.smiles.size() > options.max_len) {
      drop(data.dropped.too_long, "SMILES longer than " + std::to_string(options.max_len));
      continue;
    }
    try {
      rec.graph = parse_smiles(rec.smiles);
    } catch (const Error& e) {
      drop(data.dropped.parse_failure, e.what());
      continue;
    }
    if (!parse_double(fields[target_col], rec.target) ||
        (options.task == Task::Classification && rec.target != 0.0 && rec.target != 1.0)) {
      drop(data.dropped.bad_target, "bad target '" + fields[target_col] + "'");
      continue;
    }
    if (!ids.insert(rec.id).second) throw Error(ErrorCode::FormatError, "duplicate id '" + rec.id + "'");
    data.records.push_back(std::move(rec));
  }
  if (data.records.empty())
    throw Error(ErrorCode::EmptyDataset, "no usable rows (" + std::to_string(data.dropped.total()) + " dropped)");
  return data;
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  return parse_csv(in, options);
}

// ---------------------------------------------------------------------------
// Folds

std::vector<std::size_t> FoldAssignment::train_indices(std::size_t f) const {
  std::vector<std::size_t> out;
  for (std::size_t g = 0; g < folds.size(); ++g) {
    if (g != f) out.insert(out.end(), folds[g].begin(), folds[g].end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

FoldAssignment kfold_split(const std::vector<DatasetRecord>& records, std::size_t k, std::uint64_t seed, bool stratify) {
  if (k < 2) throw Error(ErrorCode::InvalidConfig, "k must be at least 2");
  if (records.size() < k)
    throw Error(ErrorCode::TooFewRecords,
                std::to_string(records.size()) + " records cannot fill " + std::to_string(k) + " folds");
  Rng rng(mix64(seed));
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  shuffle(order, rng);

  FoldAssignment a;
  a.k = k;
  a.folds.resize(k);
  if (stratify) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return records[x].target < records[y].target; });
    for (std::size_t i = 0; i < order.size(); ++i) a.folds[i % k].push_back(order[i]);
  } else {
    const std::size_t base = records.size() / k;
    const std::size_t extra = records.size() % k;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
      const std::size_t size = base + (f < extra ? 1 : 0);
      a.folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                        order.begin() + static_cast<std::ptrdiff_t>(pos + size));
      pos += size;
    }
  }
  for (std::size_t f = 0; f < k; ++f) {
    std::sort(a.folds[f].begin(), a.folds[f].end());
    for (std::size_t i : a.folds[f]) a.fold_of[records[i].id] = f;
  }
  return a;
}

// ---------------------------------------------------------------------------
// Metrics

double metric_rmse(const std::vector<double>& preds, const std::vector<double>& targets) {
  if (preds.size() != targets.size() || preds.empty())
    throw Error(ErrorCode::LengthMismatch, std::to_string(preds.size()) + " predictions for " +
                                               std::to_string(targets.size()) + " targets");
  double ss = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) ss += (preds[i] - targets[i]) * (preds[i] - targets[i]);
  return std::sqrt(ss / static_cast<double>(preds.size()));
}

double metric_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size() || scores.empty())
    throw Error(ErrorCode::LengthMismatch, "scores and labels differ in length");
  // Rank-sum form: sort once, give tied blocks their shared count.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double positives = 0.0;
  double negatives = 0.0;
  double concordant = 0.0;  // counted in half-pairs to stay exact
  double negatives_below = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    double block_pos = 0.0;
    double block_neg = 0.0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      const int y = labels[order[j]];
      if (y != 0 && y != 1) throw Error(ErrorCode::InvalidConfig, "labels must be 0 or 1");
      (y == 1 ? block_pos : block_neg) += 1.0;
      ++j;
    }
    concordant += 2.0 * block_pos * negatives_below + block_pos * block_neg;
    negatives_below += block_neg;
    positives += block_pos;
    negatives += block_neg;
    i = j;
  }
  if (positives == 0.0 || negatives == 0.0) throw Error(ErrorCode::SingleClass, "AUC needs both classes");
  return concordant / (2.0 * positives * negatives);
}

Matrix distance_matrix(const std::vector<Fingerprint>& fps) {
  const std::size_t n = fps.size();
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (fps[i].vector.size() != fps.front().vector.size())
      throw Error(ErrorCode::LengthMismatch, "fingerprints differ in length");
    for (std::size_t j = 0; j < i; ++j) {
      double ss = 0.0;
      for (std::size_t e = 0; e < fps[i].vector.size(); ++e) {
        const double diff = fps[i].vector[e] - fps[j].vector[e];
        ss += diff * diff;
      }
      d(i, j) = d(j, i) = std::sqrt(ss);
    }
  }
  return d;
}

Separation cluster_separation(const Matrix& distances, const std::vector<std::string>& group_of) {
  const std::size_t n = group_of.size();
  if (distances.rows() != n || distances.cols() != n)
    throw Error(ErrorCode::LengthMismatch, "distance matrix does not match the group list");
  std::map<std::string, std::size_t> sizes;
  for (const std::string& g : group_of) ++sizes[g];
  if (sizes.size() < 2) throw Error(ErrorCode::DegenerateGrouping, "need at least two groups");
  for (const auto& [g, size] : sizes) {
    if (size < 2) throw Error(ErrorCode::DegenerateGrouping, "group '" + g + "' has a single member");
  }
  double intra = 0.0;
  double inter = 0.0;
  std::size_t n_intra = 0;
  std::size_t n_inter = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (group_of[i] == group_of[j]) {
        intra += distances(i, j);
        ++n_intra;
      } else {
        inter += distances(i, j);
        ++n_inter;
      }
    }
  }
  return {intra / static_cast<double>(n_intra), inter / static_cast<double>(n_inter)};
}

void assert_disjoint_groups(const std::vector<AugmentedRecord>& train, const std::vector<AugmentedRecord>& test) {
  std::unordered_set<std::string> train_ids;
  for (const AugmentedRecord& r : train) train_ids.insert(r.group_id);
  for (const AugmentedRecord& r : test) {
    if (train_ids.count(r.group_id))
      throw Error(ErrorCode::LeakageDetected, "molecule '" + r.group_id + "' is on both sides of the split");
  }
}

// ---------------------------------------------------------------------------
// Experiment config

void ExperimentConfig::validate() const {
  if (k < 2) throw Error(ErrorCode::InvalidConfig, "k must be at least 2");
  if (csv.max_len == 0) throw Error(ErrorCode::InvalidConfig, "max_len must be positive");
  if (csv.task != model.task) throw Error(ErrorCode::InvalidConfig, "dataset and model tasks differ");
  model.validate();
  aug.validate();
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream out;
  auto line = [&](const char* key, const std::string& value) { out << key << " = " << value << '\n'; };
  std::string widths;
  for (std::size_t i = 0; i < model.kernel_widths.size(); ++i)
    widths += (i ? "," : "") + std::to_string(model.kernel_widths[i]);
  line("dataset", dataset.string());
  line("smiles_column", csv.smiles_column);
  line("target_column", csv.target_column);
  line("id_column", csv.id_column);
  line("task", to_string(model.task));
  line("max_len", std::to_string(csv.max_len));
  line("k", std::to_string(k));
  line("seed", std::to_string(seed));
  line("stratify", stratify ? "true" : "false");
  line("n_train", std::to_string(aug.n_train));
  line("m_test", std::to_string(aug.m_test));
  line("dedup", aug.dedup ? "true" : "false");
  line("include_canonical", aug.include_canonical ? "true" : "false");
  line("arch", to_string(model.arch));
  line("depth", std::to_string(model.depth));
  line("kernel_width", widths);
  line("filters", std::to_string(model.filters));
  line("embed_dim", std::to_string(model.embed_dim));
  line("head_hidden", std::to_string(model.head_hidden));
  line("activation", to_string(model.activation));
  line("model_seed", std::to_string(model.seed));
  line("learning_rate", format_double(model.learning_rate));
  line("epochs", std::to_string(model.epochs));
  line("batch_size", std::to_string(model.batch_size));
  line("report", report.string());
  line("model_dir", model_dir.string());
  return out.str();
}

std::string ExperimentConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(to_text())));
  return buf;
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  std::set<std::string> seen;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    auto bad = [&](const std::string& why) {
      throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(line_no) + ": " + why);
    };
    if (eq == std::string::npos) bad("expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) bad("duplicate key '" + key + "'");

    auto as_size = [&]() -> std::size_t {
      std::size_t v = 0;
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc() || ptr != value.data() + value.size() || value.empty())
        bad("'" + key + "' needs a non-negative integer");
      return v;
    };
    auto as_u64 = [&]() -> std::uint64_t {
      std::uint64_t v = 0;
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc() || ptr != value.data() + value.size() || value.empty())
        bad("'" + key + "' needs a non-negative integer");
      return v;
    };
    auto as_bool = [&]() -> bool {
      if (value == "true" || value == "1" || value == "yes") return true;
      if (value == "false" || value == "0" || value == "no") return false;
      bad("'" + key + "' needs true or false");
      return false;
    };

    if (key == "dataset") c.dataset = value;
    else if (key == "smiles_column") c.csv.smiles_column = value;
    else if (key == "target_column") c.csv.target_column = value;
    else if (key == "id_column") c.csv.id_column = value;
    else if (key == "task") c.csv.task = c.model.task = parse_task(value);
    else if (key == "max_len") c.csv.max_len = as_size();
    else if (key == "k") c.k = as_size();
    else if (key == "seed") c.seed = as_u64();
    else if (key == "stratify") c.stratify = as_bool();
    else if (key == "n_train") c.aug.n_train = as_size();
    else if (key == "m_test") c.aug.m_test = as_size();
    else if (key == "dedup") c.aug.dedup = as_bool();
    else if (key == "include_canonical") c.aug.include_canonical = as_bool();
    else if (key == "arch") c.model.arch = parse_architecture(value);
    else if (key == "depth") c.model.depth = as_size();
    else if (key == "kernel_width") {
      c.model.kernel_widths.clear();
      std::istringstream parts(value);
      std::string part;
      while (std::getline(parts, part, ',')) {
        std::size_t w = 0;
        const std::string p = trim(part);
        auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), w);
        if (ec != std::errc() || ptr != p.data() + p.size() || p.empty()) bad("bad kernel width '" + p + "'");
        c.model.kernel_widths.push_back(w);
      }
    } else if (key == "filters") c.model.filters = as_size();
    else if (key == "embed_dim") c.model.embed_dim = as_size();
    else if (key == "head_hidden") c.model.head_hidden = as_size();
    else if (key == "activation") c.model.activation = parse_activation(value);
    else if (key == "model_seed") c.model.seed = as_u64();
    else if (key == "learning_rate") {
      if (!parse_double(value, c.model.learning_rate)) bad("bad learning_rate");
    } else if (key == "epochs") c.model.epochs = as_size();
    else if (key == "batch_size") c.model.batch_size = as_size();
    else if (key == "report") c.report = value;
    else if (key == "model_dir") c.model_dir = value;
    else bad("unknown key '" + key + "'");
  }
  c.aug.seed = c.seed;
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_experiment_config(text.str());
}

// ---------------------------------------------------------------------------
// Experiments

std::vector<json> MetricsReport::to_json_lines(bool with_timing) const {
  std::vector<json> lines;
  std::vector<double> values;
  for (const FoldReport& f : folds) {
    json j = {{"type", "fold"},
              {"fold", f.fold},
              {"metric", metric},
              {"value", f.metric},
              {"train_molecules", f.train_molecules},
              {"test_molecules", f.test_molecules},
              {"train_variants", f.train_variants},
              {"test_variants", f.test_variants},
              {"rejected_variants", f.rejected_variants},
              {"initial_loss", f.initial_loss},
              {"final_loss", f.final_loss},
              {"config_hash", config_hash}};
    if (with_timing) j["seconds"] = f.seconds;
    lines.push_back(std::move(j));
    values.push_back(f.metric);
  }
  json summary = {{"type", "summary"},
                  {"metric", metric},
                  {"k", folds.size()},
                  {"mean", mean},
                  {"sd", sd},
                  {"folds", values},
                  {"dropped",
                   {{"parse_failure", dropped.parse_failure},
                    {"too_long", dropped.too_long},
                    {"bad_target", dropped.bad_target}}},
                  {"config_hash", config_hash},
                  {"config", config_text}};
  if (with_timing) summary["seconds"] = seconds;
  lines.push_back(std::move(summary));
  return lines;
}

void write_json_lines(const std::vector<json>& lines, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  for (const json& j : lines) out << j.dump() << '\n';
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

namespace {

struct TrainedFold {
  Model model;
  TrainingLog log;
  std::size_t variants = 0;
  std::size_t rejected = 0;
};

TrainedFold train_on_variants(const std::vector<AugmentedRecord>& variants, const ModelConfig& config,
                              std::size_t max_len) {
  TrainedFold out;
  std::vector<const AugmentedRecord*> kept;
  for (const AugmentedRecord& r : variants) {
    if (r.smiles.size() > max_len)
      ++out.rejected;
    else
      kept.push_back(&r);
  }
  if (kept.empty()) throw Error(ErrorCode::EmptyDataset, "every training variant exceeds max_len");
  std::vector<std::string> corpus;
  corpus.reserve(kept.size());
  for (const AugmentedRecord* r : kept) corpus.push_back(r->smiles);
  out.model.config = config;
  out.model.max_len = max_len;
  out.model.vocab = Vocab::build(corpus);
  std::vector<Sample> samples;
  samples.reserve(kept.size());
  for (const AugmentedRecord* r : kept) samples.push_back({encode_onehot(r->smiles, out.model.vocab, max_len), r->target});
  FitResult fitted = fit(samples, config);
  out.model.params = std::move(fitted.params);
  out.log = std::move(fitted.log);
  out.variants = kept.size();
  return out;
}

}  // namespace

Model train_model(const std::vector<DatasetRecord>& records, const ModelConfig& config, const AugPolicy& aug,
                  std::size_t max_len, std::size_t* rejected, TrainingLog* log) {
  TrainedFold t = train_on_variants(augment_records(records, Role::Train, aug), config, max_len);
  if (rejected) *rejected = t.rejected;
  if (log) *log = std::move(t.log);
  return std::move(t.model);
}

MetricsReport run_experiment(const ExperimentConfig& config, const ProgressFn& progress) {
  return run_experiment(config, load_csv(config.dataset, config.csv), progress);
}

MetricsReport run_experiment(const ExperimentConfig& config, const Dataset& data, const ProgressFn& progress) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const bool classification = config.model.task == Task::Classification;
  AugPolicy aug = config.aug;
  aug.seed = config.seed;

  MetricsReport report;
  report.metric = classification ? "auc" : "rmse";
  report.dropped = data.dropped;
  report.config_hash = config.hash();
  report.config_text = config.to_text();

  const std::vector<DatasetRecord>& records = data.records;
  const FoldAssignment folds = kfold_split(records, config.k, config.seed, classification && config.stratify);
  if (!config.model_dir.empty()) std::filesystem::create_directories(config.model_dir);

  for (std::size_t f = 0; f < config.k; ++f) {
    const auto fold_start = std::chrono::steady_clock::now();
    try {
      std::vector<DatasetRecord> train_side;
      std::vector<DatasetRecord> test_side;
      for (std::size_t i : folds.train_indices(f)) train_side.push_back(records[i]);
      for (std::size_t i : folds.folds[f]) test_side.push_back(records[i]);

      const std::vector<AugmentedRecord> train_variants = augment_records(train_side, Role::Train, aug);
      const std::vector<AugmentedRecord> test_variants = augment_records(test_side, Role::Test, aug);
      assert_disjoint_groups(train_variants, test_variants);

      ModelConfig model_config = config.model;
      model_config.seed = config.model.seed + f;
      TrainedFold trained = train_on_variants(train_variants, model_config, config.csv.max_len);

      FoldReport fr;
      fr.fold = f;
      fr.train_molecules = train_side.size();
      fr.test_molecules = test_side.size();
      fr.train_variants = trained.variants;
      fr.rejected_variants = trained.rejected;
      fr.initial_loss = trained.log.initial_loss;
      fr.final_loss = trained.log.epoch_loss.empty() ? trained.log.initial_loss : trained.log.epoch_loss.back();

      // test_variants holds each molecule's m variants contiguously
      std::vector<double> scores;
      std::vector<double> targets;
      const std::size_t m = aug.m_test;
      for (std::size_t i = 0; i < test_side.size(); ++i) {
        std::vector<std::string> variants;
        for (std::size_t v = 0; v < m; ++v) variants.push_back(test_variants[i * m + v].smiles);
        const EnsemblePrediction p = predict_variants(trained.model, std::move(variants));
        fr.test_variants += p.outputs.size();
        fr.rejected_variants += p.rejected;
        scores.push_back(p.aggregate);
        targets.push_back(test_side[i].target);
      }
      if (classification) {
        std::vector<int> labels(targets.begin(), targets.end());
        fr.metric = metric_auc(scores, labels);
      } else {
        fr.metric = metric_rmse(scores, targets);
      }
      fr.seconds = seconds_since(fold_start);
      if (!config.model_dir.empty())
        save_model(trained.model, config.model_dir / ("fold" + std::to_string(f) + ".json"));
      if (progress) {
        progress("fold " + std::to_string(f) + ": " + report.metric + " " + format_double(fr.metric) + " (" +
                 std::to_string(fr.train_variants) + " training variants, " + format_double(fr.seconds) + " s)");
      }
      report.folds.push_back(fr);
    } catch (const Error& e) {
      throw Error(e.code(), "fold " + std::to_string(f) + ": " + e.detail());
    }
  }

  std::vector<double> values;
  for (const FoldReport& fr : report.folds) values.push_back(fr.metric);
  report.mean = aggregate_regression(values);
  report.sd = std::sqrt(sample_variance(values));
  report.seconds = seconds_since(start);
  if (!config.report.empty()) write_json_lines(report.to_json_lines(), config.report);
  return report;
}

}  // namespace cnf
