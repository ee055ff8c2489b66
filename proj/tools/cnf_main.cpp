// cnf: command-line front end for the library.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cnf/augment.hpp"
#include "cnf/canonical.hpp"
#include "cnf/enumerate.hpp"
#include "cnf/error.hpp"
#include "cnf/harness.hpp"
#include "cnf/model_io.hpp"
#include "cnf/random.hpp"
#include "cnf/smiles.hpp"

namespace {

using cnf::Error;
using cnf::ErrorCode;

struct InputLine {
  std::string id;
  std::string smiles;
};

// One SMILES per line, optionally followed by an id; blank and '#' lines skip.
std::vector<InputLine> read_smiles_lines(std::istream& in) {
  std::vector<InputLine> out;
  std::string line;
  std::size_t index = 0;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    InputLine item;
    if (!(fields >> item.smiles) || item.smiles[0] == '#') continue;
    if (!(fields >> item.id)) item.id = std::to_string(index);
    ++index;
    out.push_back(std::move(item));
  }
  return out;
}

std::vector<InputLine> read_input(const std::string& path) {
  if (path.empty() || path == "-") return read_smiles_lines(std::cin);
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  return read_smiles_lines(in);
}

void report_error(const std::string& where, const std::exception& e) {
  std::cerr << "error\t" << where << '\t' << e.what() << '\n';
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Per-line failures are reported and skipped; the exit code records them.
template <typename Fn>
int for_each_molecule(const std::vector<InputLine>& lines, Fn&& fn) {
  int failures = 0;
  for (const InputLine& item : lines) {
    try {
      fn(item, cnf::parse_smiles(item.smiles));
    } catch (const Error& e) {
      report_error(item.id, e);
      ++failures;
    }
  }
  return failures == 0 ? 0 : 1;
}

struct ModelFlags {
  std::string config;
  std::string arch;
  std::size_t depth = 0;
  std::size_t epochs = 0;

  void add(CLI::App* cmd) {
    cmd->add_option("--config", config, "experiment-style key = value file for model and data settings");
    cmd->add_option("--arch", arch, "flat, hierarchical or resnet");
    cmd->add_option("--depth", depth, "number of convolution blocks");
    cmd->add_option("--epochs", epochs, "training epochs");
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convolutional neural fingerprints over SMILES"};
  app.require_subcommand(1);

  std::string input;
  auto add_input = [&](CLI::App* cmd) { cmd->add_option("--input", input, "SMILES lines (default stdin)"); };

  auto* canon = app.add_subcommand("canonicalize", "print the canonical SMILES of each input line");
  add_input(canon);

  std::size_t n = 1;
  std::size_t m = 1;
  std::uint64_t seed = 0;
  bool dedup = false;
  bool include_canonical = false;
  auto* enumerate = app.add_subcommand("enumerate", "print n randomized SMILES per input line");
  add_input(enumerate);
  enumerate->add_option("--n", n, "variants per molecule")->required();
  enumerate->add_option("--seed", seed, "base seed")->required();
  enumerate->add_flag("--dedup", dedup, "reject repeated strings up to a retry cap");
  enumerate->add_flag("--include-canonical", include_canonical, "emit the canonical SMILES first");

  std::string data;
  std::string model_path;
  std::string smiles_column;
  std::string target_column;
  std::string id_column;
  std::string task;
  ModelFlags model_flags;
  auto add_data = [&](CLI::App* cmd, bool required) {
    auto* opt = cmd->add_option("--data", data, "CSV file with a header row");
    if (required) opt->required();
    cmd->add_option("--smiles-column", smiles_column);
    cmd->add_option("--target-column", target_column);
    cmd->add_option("--id-column", id_column);
    cmd->add_option("--task", task, "regression or classification");
  };

  auto* train = app.add_subcommand("train", "fit a model on a CSV dataset and save it");
  add_data(train, false);
  model_flags.add(train);
  train->add_option("--n", n, "training variants per molecule");
  train->add_option("--seed", seed, "augmentation seed");
  train->add_option("--out", model_path, "model file to write")->required();

  auto* predict = app.add_subcommand("predict", "ensemble predictions for SMILES lines");
  add_input(predict);
  predict->add_option("--model", model_path)->required();
  predict->add_option("--m", m, "test variants per molecule");
  predict->add_option("--seed", seed, "base seed");

  auto* evaluate = app.add_subcommand("evaluate", "score a saved model on a CSV dataset");
  add_data(evaluate, true);
  evaluate->add_option("--model", model_path)->required();
  evaluate->add_option("--m", m, "test variants per molecule");
  evaluate->add_option("--seed", seed, "base seed");

  auto* distmat = app.add_subcommand("distmat", "fingerprint distance matrix over enumerated variants");
  add_input(distmat);
  distmat->add_option("--model", model_path)->required();
  distmat->add_option("--n", n, "variants per molecule");
  distmat->add_option("--seed", seed, "base seed");

  std::string experiment_config;
  std::string report_path;
  auto* experiment = app.add_subcommand("experiment", "cross-validated run described by a config file");
  experiment->add_option("--config", experiment_config)->required();
  experiment->add_option("--report", report_path, "override the report path");

  CLI11_PARSE(app, argc, argv);

  // Applies data flags over a base config.
  auto data_config = [&](cnf::ExperimentConfig base) {
    if (!data.empty()) base.dataset = data;
    if (!smiles_column.empty()) base.csv.smiles_column = smiles_column;
    if (!target_column.empty()) base.csv.target_column = target_column;
    if (!id_column.empty()) base.csv.id_column = id_column;
    if (!task.empty()) base.csv.task = base.model.task = cnf::parse_task(task);
    return base;
  };

  try {
    if (*canon) {
      return for_each_molecule(read_input(input), [](const InputLine& item, const cnf::MolGraph& g) {
        std::cout << item.id << '\t' << cnf::canonical_smiles(g) << '\n';
      });
    }
    if (*enumerate) {
      cnf::EnumerationPolicy policy{n, dedup, include_canonical, 0};
      return for_each_molecule(read_input(input), [&](const InputLine& item, const cnf::MolGraph& g) {
        policy.seed = cnf::derive_seed(seed, item.id, cnf::Role::Train);
        const cnf::Enumeration e = cnf::enumerate_smiles(g, policy);
        for (const std::string& s : e.smiles) std::cout << item.id << '\t' << s << '\n';
        if (e.stats.duplicates_accepted > 0)
          std::cerr << item.id << ": " << e.stats.duplicates_accepted << " duplicate variants after retries\n";
      });
    }
    if (*train) {
      cnf::ExperimentConfig cfg;
      if (!model_flags.config.empty()) cfg = cnf::load_experiment_config(model_flags.config);
      cfg = data_config(cfg);
      if (cfg.dataset.empty()) throw Error(ErrorCode::InvalidConfig, "no dataset given (--data or config)");
      if (!model_flags.arch.empty()) cfg.model.arch = cnf::parse_architecture(model_flags.arch);
      if (model_flags.depth) cfg.model.depth = model_flags.depth;
      if (model_flags.epochs) cfg.model.epochs = model_flags.epochs;
      if (train->count("--n")) cfg.aug.n_train = n;
      cfg.aug.seed = train->count("--seed") ? seed : cfg.seed;
      cfg.validate();
      const cnf::Dataset ds = cnf::load_csv(cfg.dataset, cfg.csv);
      for (const std::string& line : ds.drop_log) std::cerr << "dropped\t" << line << '\n';
      std::size_t rejected = 0;
      cnf::TrainingLog log;
      const cnf::Model model = cnf::train_model(ds.records, cfg.model, cfg.aug, cfg.csv.max_len, &rejected, &log);
      cnf::save_model(model, model_path);
      nlohmann::json summary = {{"molecules", ds.records.size()},
                                {"dropped", ds.dropped.total()},
                                {"rejected_variants", rejected},
                                {"initial_loss", log.initial_loss},
                                {"final_loss", log.epoch_loss.empty() ? log.initial_loss : log.epoch_loss.back()},
                                {"steps", log.steps}};
      std::cout << summary.dump() << '\n';
      return 0;
    }
    if (*predict) {
      const cnf::Model model = cnf::load_model(model_path);
      return for_each_molecule(read_input(input), [&](const InputLine& item, const cnf::MolGraph& g) {
        const auto p = cnf::predict_molecule(model, g, m, cnf::derive_seed(seed, item.id, cnf::Role::Test));
        std::cout << item.id << '\t' << fmt_double(p.aggregate) << '\t' << fmt_double(p.variance) << '\n';
      });
    }
    if (*evaluate) {
      const cnf::Model model = cnf::load_model(model_path);
      cnf::ExperimentConfig cfg = data_config({});
      if (task.empty()) cfg.csv.task = model.config.task;
      cfg.csv.max_len = model.max_len;
      const cnf::Dataset ds = cnf::load_csv(cfg.dataset, cfg.csv);
      std::vector<double> scores;
      std::vector<double> targets;
      for (const cnf::DatasetRecord& r : ds.records) {
        const auto p = cnf::predict_molecule(model, r.graph, m, cnf::derive_seed(seed, r.id, cnf::Role::Test));
        scores.push_back(p.aggregate);
        targets.push_back(r.target);
      }
      nlohmann::json out = {{"molecules", ds.records.size()}, {"dropped", ds.dropped.total()}};
      if (model.config.task == cnf::Task::Classification) {
        out["auc"] = cnf::metric_auc(scores, std::vector<int>(targets.begin(), targets.end()));
      } else {
        out["rmse"] = cnf::metric_rmse(scores, targets);
      }
      std::cout << out.dump() << '\n';
      return 0;
    }
    if (*distmat) {
      const cnf::Model model = cnf::load_model(model_path);
      std::vector<std::string> labels;
      std::vector<std::string> groups;
      std::vector<cnf::Fingerprint> fps;
      const int status = for_each_molecule(read_input(input), [&](const InputLine& item, const cnf::MolGraph& g) {
        const auto variants =
            cnf::smiles_variants(g, n, cnf::derive_seed(seed, item.id, cnf::Role::Test));
        for (std::size_t v = 0; v < variants.size(); ++v) {
          if (variants[v].size() > model.max_len) continue;
          fps.push_back(cnf::fingerprint(cnf::encode_onehot(variants[v], model.vocab, model.max_len), model.params,
                                         model.config));
          labels.push_back(item.id + ":" + std::to_string(v));
          groups.push_back(item.id);
        }
      });
      const cnf::Matrix d = cnf::distance_matrix(fps);
      std::cout << "id";
      for (const std::string& l : labels) std::cout << '\t' << l;
      std::cout << '\n';
      for (std::size_t i = 0; i < d.rows(); ++i) {
        std::cout << labels[i];
        for (std::size_t j = 0; j < d.cols(); ++j) std::cout << '\t' << fmt_double(d(i, j));
        std::cout << '\n';
      }
      try {
        const cnf::Separation s = cnf::cluster_separation(d, groups);
        std::cout << "# intra_mean\t" << fmt_double(s.intra_mean) << "\tinter_mean\t" << fmt_double(s.inter_mean)
                  << '\n';
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateGrouping) throw;
      }
      return status;
    }
    if (*experiment) {
      cnf::ExperimentConfig cfg = cnf::load_experiment_config(experiment_config);
      if (!report_path.empty()) cfg.report = report_path;
      const cnf::MetricsReport report =
          cnf::run_experiment(cfg, [](const std::string& msg) { std::cerr << msg << '\n'; });
      for (const auto& line : report.to_json_lines()) std::cout << line.dump() << '\n';
      return 0;
    }
  } catch (const Error& e) {
    report_error("-", e);
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error\t-\tInternal: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
