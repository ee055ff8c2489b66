// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "cnf/augment.hpp"
#include "cnf/canonical.hpp"
#include "cnf/enumerate.hpp"
#include "cnf/error.hpp"
#include "cnf/featurize.hpp"
#include "cnf/harness.hpp"
#include "cnf/isomorphism.hpp"
#include "cnf/model.hpp"
#include "cnf/random.hpp"
#include "cnf/smiles.hpp"
#include "corpus.hpp"
#include "gradcheck.hpp"

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

// Atoms permuted, bond list shuffled and each bond's endpoints swapped at
// random, so both atom and adjacency order change.
cnf::MolGraph relabelled(const cnf::MolGraph& g, cnf::Rng& rng) {
  std::vector<std::size_t> perm(g.atom_count());
  std::iota(perm.begin(), perm.end(), 0);
  cnf::shuffle(perm, rng);
  std::vector<cnf::Atom> atoms(g.atom_count());
  for (std::size_t i = 0; i < g.atom_count(); ++i) atoms[perm[i]] = g.atom(i);
  std::vector<cnf::Bond> bonds;
  for (cnf::Bond b : g.bonds()) {
    b.a = perm[b.a];
    b.b = perm[b.b];
    if (cnf::uniform_index(rng, 2) == 1) {
      std::swap(b.a, b.b);
      if (b.direction)
        b.direction = *b.direction == cnf::BondDirection::Up ? cnf::BondDirection::Down : cnf::BondDirection::Up;
    }
    bonds.push_back(b);
  }
  cnf::shuffle(bonds, rng);
  return cnf::MolGraph(std::move(atoms), std::move(bonds));
}

Outcome enumeration_soundness() {
  const auto start = Clock::now();
  const auto& corpus = cnf::testing::test_corpus();
  std::size_t checked = 0, bad = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const cnf::MolGraph g = cnf::parse_smiles(corpus[i]);
    cnf::EnumerationPolicy policy;
    policy.count = 50;
    policy.seed = cnf::derive_seed(2024, std::to_string(i), cnf::Role::Train);
    for (const std::string& s : cnf::enumerate_smiles(g, policy).smiles) {
      ++checked;
      bool ok = false;
      try {
        ok = cnf::isomorphic(cnf::parse_smiles(s), g);
      } catch (const cnf::Error&) {
      }
      if (!ok) {
        ++bad;
        if (bad <= 3) std::printf("  not isomorphic: %s -> %s\n", corpus[i].c_str(), s.c_str());
      }
    }
  }
  const double secs = seconds_since(start);
  return {bad == 0 && checked == corpus.size() * 50 && corpus.size() == 200 && secs < 60.0,
          std::to_string(corpus.size()) + " molecules, " + std::to_string(checked - bad) + "/" +
              std::to_string(checked) + " isomorphic, " + fmt(secs) + " s"};
}

Outcome canonical_invariance() {
  cnf::Rng rng(99);
  std::size_t molecules = 0, mismatched = 0;
  for (const std::string& s : cnf::testing::test_corpus()) {
    const cnf::MolGraph g = cnf::parse_smiles(s);
    const std::string c = cnf::canonical_smiles(g);
    bool ok = true;
    for (int rep = 0; rep < 1000 && ok; ++rep) ok = cnf::canonical_smiles(relabelled(g, rng)) == c;
    ++molecules;
    if (!ok) {
      ++mismatched;
      std::printf("  relabelling changes canonical form of %s\n", s.c_str());
    }
  }
  std::set<std::string> spellings;
  for (const std::string& s : cnf::testing::ethylcyclopropane_strings())
    spellings.insert(cnf::canonical_smiles(cnf::parse_smiles(s)));
  return {mismatched == 0 && spellings.size() == 1,
          std::to_string(molecules - mismatched) + "/" + std::to_string(molecules) +
              " molecules stable over 1000 relabellings; the four ethylcyclopropane spellings give " + std::to_string(spellings.size()) +
              " form (" + *spellings.begin() + ")"};
}

Outcome gradient_check() {
  const auto start = Clock::now();
  const cnf::Vocab vocab = cnf::Vocab::from_characters("(CO");  // PAD, UNK and three characters
  const std::vector<std::string> inputs = {"CC(O", "C(OCC", "OCCCOC"};
  std::size_t checked = 0;
  double worst = 0.0;
  bool ok = vocab.size() == 5;
  for (auto arch : {cnf::Architecture::Flat, cnf::Architecture::Hierarchical, cnf::Architecture::ResNet}) {
    for (auto task : {cnf::Task::Regression, cnf::Task::Classification}) {
      cnf::ModelConfig c;
      c.arch = arch;
      c.task = task;
      c.depth = 2;
      c.kernel_widths = {3};
      c.filters = 3;
      c.embed_dim = 2;
      c.head_hidden = 4;
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        c.seed = 7 + i;
        cnf::Params p = cnf::init_params(c, vocab.size());
        p.target_shift = 0.3;
        p.target_scale = 1.7;
        const cnf::OneHot x = cnf::encode_onehot(inputs[i], vocab, 6);
        const double target = task == cnf::Task::Regression ? 0.8 : static_cast<double>(i % 2);
        const auto report = cnf::testing::check_gradients(x, target, p, c, 1e-5, 1e-4);
        checked += report.checked;
        worst = std::max(worst, report.worst_rel_error);
        for (const auto& f : report.failures) {
          ok = false;
          std::printf("  %s/%s %s: analytic %g numeric %g rel %g\n", cnf::to_string(arch).c_str(),
                      cnf::to_string(task).c_str(), f.where.c_str(), f.analytic, f.numeric, f.rel_error);
        }
      }
    }
  }
  const double secs = seconds_since(start);
  return {ok && secs < 60.0, std::to_string(checked) + " entries over 3 architectures, worst relative error " +
                                 fmt(worst) + ", " + fmt(secs) + " s"};
}

Outcome overfit() {
  const auto start = Clock::now();
  std::vector<std::string> smiles;
  std::set<std::string> seen;
  for (const std::string& s : cnf::testing::test_corpus()) {
    const std::string c = cnf::canonical_smiles(cnf::parse_smiles(s));
    if (seen.insert(c).second) smiles.push_back(c);
    if (smiles.size() == 32) break;
  }
  const cnf::Vocab vocab = cnf::Vocab::build(smiles);
  std::vector<cnf::Sample> samples;
  for (const std::string& s : smiles) samples.push_back({cnf::encode_onehot(s, vocab), static_cast<double>(s.size())});
  cnf::ModelConfig c;
  c.epochs = 300;
  c.batch_size = 8;
  const cnf::FitResult r = cnf::fit(samples, c);
  const double final_mse = cnf::mean_loss(samples, r.params, c);
  const double ratio = final_mse / r.log.initial_loss;
  const double secs = seconds_since(start);
  return {smiles.size() == 32 && ratio < 0.01 && secs < 120.0,
          "initial MSE " + fmt(r.log.initial_loss) + ", final " + fmt(final_mse) + " (" + fmt(100 * ratio) + "%), " +
              fmt(secs) + " s"};
}

Outcome augmentation_direction() {
  const auto start = Clock::now();
  cnf::ExperimentConfig base;
  base.csv.target_column = "expt";
  const cnf::Dataset data = cnf::load_csv(cnf::testing::data_path("freesolv.csv"), base.csv);
  auto run = [&](std::size_t n, std::size_t m) {
    cnf::ExperimentConfig config = base;
    config.aug.n_train = n;
    config.aug.m_test = m;
    const double mean = cnf::run_experiment(config, data).mean;
    std::printf("  SMILES %zu/%zu: 5-fold RMSE %s\n", n, m, fmt(mean).c_str());
    return mean;
  };
  const double plain = run(1, 1);
  const double augmented = run(10, 10);
  const double test_only = run(1, 10);
  const double secs = seconds_since(start);
  const double margin = (plain - augmented) / plain;
  return {data.records.size() == 642 && augmented <= 0.97 * plain && test_only > plain && secs < 1800.0,
          std::to_string(data.records.size()) + " molecules; RMSE 10/10 " + fmt(augmented) + " < 1/1 " + fmt(plain) +
              " by " + fmt(100 * margin) + "%; 1/10 " + fmt(test_only) + "; " + fmt(secs) + " s"};
}

// Fifty FreeSolv molecules spread over the file, shared by the ensemble and
// clustering checks.
std::vector<cnf::DatasetRecord> fifty_molecules() {
  cnf::CsvOptions opts;
  opts.target_column = "expt";
  const cnf::Dataset all = cnf::load_csv(cnf::testing::data_path("freesolv.csv"), opts);
  std::vector<cnf::DatasetRecord> out;
  for (std::size_t i = 0; out.size() < 50; i += all.records.size() / 50) out.push_back(all.records[i]);
  return out;
}

Outcome ensemble_exactness(const cnf::Model& model) {
  std::size_t checks = 0, bad = 0;
  auto expect = [&](bool ok, const std::string& what) {
    ++checks;
    if (!ok && ++bad <= 5) std::printf("  %s\n", what.c_str());
  };
  const auto& corpus = cnf::testing::test_corpus();
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const cnf::MolGraph g = cnf::parse_smiles(corpus[i]);
    const std::string canon = cnf::canonical_smiles(g);
    if (canon.size() > model.max_len) continue;
    const std::uint64_t seed = 1000 + i;
    const auto single = cnf::predict_molecule(model, g, 1, seed);
    const double direct = cnf::predict(cnf::encode_onehot(canon, model.vocab, model.max_len), model.params, model.config);
    expect(single.aggregate == direct && single.outputs.size() == 1 && single.variance == 0.0,
           "m=1 differs from canonical predict for " + corpus[i]);

    const auto ens = cnf::predict_molecule(model, g, 10, seed);
    double sum = 0.0;
    bool outputs_ok = ens.outputs.size() == ens.variants.size() && ens.outputs.size() + ens.rejected == 10;
    for (std::size_t v = 0; v < ens.outputs.size() && outputs_ok; ++v) {
      outputs_ok = ens.outputs[v] ==
                   cnf::predict(cnf::encode_onehot(ens.variants[v], model.vocab, model.max_len), model.params, model.config);
      sum += ens.outputs[v];
    }
    expect(outputs_ok, "per-variant outputs do not match for " + corpus[i]);
    const double mean = sum / static_cast<double>(ens.outputs.size());
    double ss = 0.0;
    for (double o : ens.outputs) ss += (o - mean) * (o - mean);
    expect(ens.aggregate == mean, "aggregate is not the mean for " + corpus[i]);
    expect(ens.variance == ss / static_cast<double>(ens.outputs.size() - 1), "variance mismatch for " + corpus[i]);
  }
  // Majority vote recomposition on hand-made probability sets.
  cnf::Rng rng(3);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> probs(1 + cnf::uniform_index(rng, 9));
    for (double& p : probs) p = cnf::uniform_unit(rng);
    std::size_t pos = 0;
    double sum = 0.0;
    for (double p : probs) {
      pos += p >= 0.5;
      sum += p;
    }
    const double score = sum / static_cast<double>(probs.size());
    const std::size_t neg = probs.size() - pos;
    const int label = pos != neg ? (pos > neg ? 1 : 0) : (score >= 0.5 ? 1 : 0);
    const auto vote = cnf::aggregate_classification(probs);
    expect(vote.score == score && vote.label == label, "classification vote mismatch");
  }
  return {bad == 0, std::to_string(checks - bad) + "/" + std::to_string(checks) + " exact checks"};
}

cnf::Separation separation(const cnf::Model& model, const std::vector<cnf::AugmentedRecord>& variants) {
  std::vector<cnf::Fingerprint> fps;
  std::vector<std::string> groups;
  for (const auto& v : variants) {
    if (v.smiles.size() > model.max_len) continue;
    fps.push_back(cnf::fingerprint(cnf::encode_onehot(v.smiles, model.vocab, model.max_len), model.params, model.config));
    groups.push_back(v.group_id);
  }
  return cnf::cluster_separation(cnf::distance_matrix(fps), groups);
}

Outcome distance_clustering(const std::vector<cnf::DatasetRecord>& records, const cnf::AugPolicy& aug,
                            const cnf::Model& model, double train_seconds) {
  const auto start = Clock::now();
  const auto variants = cnf::augment_records(records, cnf::Role::Train, aug);
  cnf::Model untrained = model;
  untrained.params = cnf::init_params(model.config, model.vocab.size());
  untrained.params.target_shift = model.params.target_shift;
  untrained.params.target_scale = model.params.target_scale;
  const cnf::Separation before = separation(untrained, variants);
  const cnf::Separation after = separation(model, variants);
  const double secs = train_seconds + seconds_since(start);
  return {after.intra_mean < after.inter_mean && secs < 300.0,
          "after training intra " + fmt(after.intra_mean) + " < inter " + fmt(after.inter_mean) +
              " (at initialisation " + fmt(before.intra_mean) + " vs " + fmt(before.inter_mean) + "), " +
              fmt(secs) + " s"};
}

Outcome protocol_integrity() {
  std::vector<std::string> smiles = cnf::testing::handwritten_molecules();
  cnf::Dataset data;
  for (std::size_t i = 0; i < smiles.size() && data.records.size() < 30; ++i) {
    if (smiles[i].find('.') != std::string::npos) continue;
    const cnf::MolGraph g = cnf::parse_smiles(smiles[i]);
    data.records.push_back({"m" + std::to_string(i), smiles[i], g, static_cast<double>(g.atom_count())});
  }
  cnf::ExperimentConfig config;
  config.k = 3;
  config.model.epochs = 2;
  config.model.filters = 8;
  config.model.embed_dim = 8;

  std::size_t folds_checked = 0;
  bool ok = true;
  for (auto [n, m] : {std::pair<std::size_t, std::size_t>{1, 1}, {4, 3}}) {
    config.aug.n_train = n;
    config.aug.m_test = m;
    const cnf::MetricsReport report = cnf::run_experiment(config, data);
    // Independent recount: the same split, augmented by hand.
    const cnf::FoldAssignment folds = cnf::kfold_split(data.records, config.k, config.seed);
    std::vector<int> times_tested(data.records.size(), 0);
    cnf::AugPolicy aug = config.aug;
    aug.seed = config.seed;
    for (std::size_t f = 0; f < config.k; ++f) {
      std::vector<cnf::DatasetRecord> train, test;
      for (std::size_t i : folds.train_indices(f)) train.push_back(data.records[i]);
      for (std::size_t i : folds.folds[f]) {
        test.push_back(data.records[i]);
        ++times_tested[i];
      }
      std::set<std::string> train_ids;
      for (const auto& v : cnf::augment_records(train, cnf::Role::Train, aug)) train_ids.insert(v.group_id);
      for (const auto& v : cnf::augment_records(test, cnf::Role::Test, aug)) ok = ok && !train_ids.count(v.group_id);
      ok = ok && report.folds.at(f).test_molecules == test.size() && report.folds.at(f).train_molecules == train.size();
      ++folds_checked;
    }
    ok = ok && std::all_of(times_tested.begin(), times_tested.end(), [](int t) { return t == 1; });
  }

  // A molecule listed twice lands on both sides of some fold; the run must refuse it.
  cnf::Dataset leaky = data;
  leaky.records.push_back(leaky.records.front());
  bool caught = false;
  try {
    cnf::run_experiment(config, leaky);
  } catch (const cnf::Error& e) {
    caught = e.code() == cnf::ErrorCode::LeakageDetected;
  }
  return {ok && caught, std::to_string(folds_checked) + " folds disjoint by recount; duplicated molecule " +
                            (caught ? "raised LeakageDetected" : "was NOT caught")};
}

Outcome metric_oracles() {
  cnf::Rng rng(2718);
  double worst_rmse = 0.0, worst_auc = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + cnf::uniform_index(rng, 60);
    std::vector<double> preds(n), targets(n), scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      preds[i] = cnf::uniform_unit(rng) * 10 - 5;
      targets[i] = cnf::uniform_unit(rng) * 10 - 5;
      // coarse scores so ties occur
      scores[i] = static_cast<double>(cnf::uniform_index(rng, 8)) / 8.0;
      labels[i] = static_cast<int>(cnf::uniform_index(rng, 2));
    }
    labels[0] = 0;
    labels[1] = 1;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += (preds[i] - targets[i]) * (preds[i] - targets[i]);
    worst_rmse = std::max(worst_rmse, std::abs(cnf::metric_rmse(preds, targets) - std::sqrt(ss / n)));
    double credit = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (labels[i] == 1 && labels[j] == 0) {
          pairs += 1.0;
          credit += scores[i] > scores[j] ? 1.0 : scores[i] == scores[j] ? 0.5 : 0.0;
        }
    worst_auc = std::max(worst_auc, std::abs(cnf::metric_auc(scores, labels) - credit / pairs));
  }
  const double concordance = cnf::metric_auc({0.1, 0.2, 0.3, 0.4}, {0, 1, 0, 1});
  return {worst_rmse <= 1e-12 && worst_auc <= 1e-12 && std::abs(concordance - 0.75) <= 1e-12,
          "100 instances, worst RMSE error " + fmt(worst_rmse) + ", worst AUC error " + fmt(worst_auc) +
              ", concordance case " + fmt(concordance)};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& body) {
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "enumeration soundness", enumeration_soundness);
  report(2, "canonical invariance", canonical_invariance);
  report(3, "gradient correctness", gradient_check);
  report(4, "overfit sanity", overfit);
  report(5, "augmentation direction", augmentation_direction);

  std::vector<cnf::DatasetRecord> fifty;
  cnf::AugPolicy aug;
  aug.n_train = 10;
  aug.seed = 17;
  cnf::Model trained;
  double train_seconds = 0.0;
  try {
    fifty = fifty_molecules();
    const auto start = Clock::now();
    trained = cnf::train_model(fifty, cnf::ModelConfig{}, aug, cnf::kDefaultMaxLen);
    train_seconds = seconds_since(start);
  } catch (const std::exception& e) {
    std::printf("  training the shared model failed: %s\n", e.what());
  }
  report(6, "ensemble exactness", [&] { return ensemble_exactness(trained); });
  report(7, "distance clustering", [&] { return distance_clustering(fifty, aug, trained, train_seconds); });
  report(8, "protocol integrity", protocol_integrity);
  report(9, "metric oracles", metric_oracles);

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
