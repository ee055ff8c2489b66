#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cnf/dataset.hpp"
#include "cnf/model_io.hpp"
#include "cnf/random.hpp"

namespace cnf {

/// SMILES n/m: n variants per training molecule, m per test molecule.
/// A count of 1 means the canonical SMILES.
struct AugPolicy {
  std::size_t n_train = 1;
  std::size_t m_test = 1;
  std::uint64_t seed = 0;
  bool dedup = false;
  bool include_canonical = false;

  /// Throws Error(InvalidConfig) when either count is zero.
  void validate() const;
  std::size_t count(Role role) const { return role == Role::Train ? n_train : m_test; }
};

struct AugmentedRecord {
  std::string group_id;
  std::string smiles;
  double target = 0.0;
};

/// Variants of one graph: the canonical SMILES when count is 1, otherwise
/// count enumerated strings drawn with `seed`.
std::vector<std::string> smiles_variants(const MolGraph& graph, std::size_t count, std::uint64_t seed, bool dedup = false,
                                         bool include_canonical = false);

/// Each record expands to policy.count(role) variants, in record order, with
/// a per-record seed derived from (policy.seed, id, role).
std::vector<AugmentedRecord> augment_records(const std::vector<DatasetRecord>& records, Role role,
                                             const AugPolicy& policy);

/// Mean in input order. Throws Error(EmptyOutputs).
double aggregate_regression(const std::vector<double>& outputs);

struct ClassVote {
  int label = 0;
  double score = 0.0;  // mean probability
};

/// Majority of outputs >= 0.5; a tie goes to (score >= 0.5).
/// Throws Error(EmptyOutputs), or Error(InvalidConfig) for outputs outside [0, 1].
ClassVote aggregate_classification(const std::vector<double>& outputs);

struct EnsemblePrediction {
  double aggregate = 0.0;  // regression mean, or the mean probability
  int label = 0;           // classification majority vote
  std::vector<std::string> variants;  // the accepted variants
  std::vector<double> outputs;        // one per accepted variant
  double variance = 0.0;              // sample variance of outputs; 0 for a single output
  std::size_t rejected = 0;           // variants longer than max_len
};

/// Predicts every variant that fits max_len and aggregates per task.
/// Throws Error(AllVariantsRejected) when none fits.
EnsemblePrediction predict_variants(const Model& model, std::vector<std::string> variants);

/// predict_variants over smiles_variants(graph, m_test, seed).
EnsemblePrediction predict_molecule(const Model& model, const MolGraph& graph, std::size_t m_test, std::uint64_t seed);

double sample_variance(const std::vector<double>& values);

}  // namespace cnf
