#pragma once

#include <string>

#include "cnf/mol_graph.hpp"

namespace cnf {

struct DatasetRecord {
  std::string id;
  std::string smiles;  // as read
  MolGraph graph;
  double target = 0.0;
};

}  // namespace cnf
