#include "cnf/augment.hpp"

#include "cnf/canonical.hpp"
#include "cnf/enumerate.hpp"
#include "cnf/error.hpp"
#include "cnf/featurize.hpp"

namespace cnf {

void AugPolicy::validate() const {
  if (n_train == 0 || m_test == 0) throw Error(ErrorCode::InvalidConfig, "n_train and m_test must be at least 1");
}

std::vector<std::string> smiles_variants(const MolGraph& graph, std::size_t count, std::uint64_t seed, bool dedup,
                                         bool include_canonical) {
  if (count == 1) return {canonical_smiles(graph)};
  EnumerationPolicy policy{count, dedup, include_canonical, seed};
  return enumerate_smiles(graph, policy).smiles;
}

std::vector<AugmentedRecord> augment_records(const std::vector<DatasetRecord>& records, Role role,
                                             const AugPolicy& policy) {
  policy.validate();
  const std::size_t count = policy.count(role);
  std::vector<AugmentedRecord> out;
  out.reserve(records.size() * count);
  for (const DatasetRecord& r : records) {
    const std::uint64_t seed = derive_seed(policy.seed, r.id, role);
    for (std::string& s : smiles_variants(r.graph, count, seed, policy.dedup, policy.include_canonical))
      out.push_back({r.id, std::move(s), r.target});
  }
  return out;
}

double aggregate_regression(const std::vector<double>& outputs) {
  if (outputs.empty()) throw Error(ErrorCode::EmptyOutputs, "nothing to aggregate");
  double sum = 0.0;
  for (double v : outputs) sum += v;
  return sum / static_cast<double>(outputs.size());
}

ClassVote aggregate_classification(const std::vector<double>& outputs) {
  if (outputs.empty()) throw Error(ErrorCode::EmptyOutputs, "nothing to aggregate");
  std::size_t positive = 0;
  for (double p : outputs) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidConfig, "probability outside [0, 1]");
    if (p >= 0.5) ++positive;
  }
  ClassVote vote;
  vote.score = aggregate_regression(outputs);
  const std::size_t negative = outputs.size() - positive;
  if (positive != negative)
    vote.label = positive > negative ? 1 : 0;
  else
    vote.label = vote.score >= 0.5 ? 1 : 0;
  return vote;
}

double sample_variance(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  const double mean = aggregate_regression(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(values.size() - 1);
}

EnsemblePrediction predict_variants(const Model& model, std::vector<std::string> variants) {
  EnsemblePrediction result;
  const std::size_t total = variants.size();
  for (std::string& s : variants) {
    if (s.size() > model.max_len) {
      ++result.rejected;
      continue;
    }
    result.outputs.push_back(predict(encode_onehot(s, model.vocab, model.max_len), model.params, model.config));
    result.variants.push_back(std::move(s));
  }
  if (result.outputs.empty())
    throw Error(ErrorCode::AllVariantsRejected,
                "all " + std::to_string(total) + " variants exceed max_len " + std::to_string(model.max_len));
  if (model.config.task == Task::Classification) {
    const ClassVote vote = aggregate_classification(result.outputs);
    result.aggregate = vote.score;
    result.label = vote.label;
  } else {
    result.aggregate = aggregate_regression(result.outputs);
  }
  result.variance = sample_variance(result.outputs);
  return result;
}

EnsemblePrediction predict_molecule(const Model& model, const MolGraph& graph, std::size_t m_test, std::uint64_t seed) {
  if (m_test == 0) throw Error(ErrorCode::InvalidConfig, "m_test must be at least 1");
  return predict_variants(model, smiles_variants(graph, m_test, seed));
}

}  // namespace cnf
