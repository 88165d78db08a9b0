#pragma once

#include <string>

#include "hdl/oracle.hpp"
#include "hdl/search.hpp"
#include "hdl/sem.hpp"

namespace hdl {

// Graph JSON: {"p": int, "edges": [[u, v, weight], ...]} with the edge
// list sorted by (u, v).
std::string graph_to_json(const WeightedDag& wdag);
WeightedDag graph_from_json(const std::string& text);

// SEM JSON: {"graph": ..., "errors": [{"var": .., "sampler": ..,
// "moments": [m1, m2, ...]}, ...]}. Moments are always written; on load,
// uniform and gaussian entries are checked against their family formulas.
std::string sem_to_json(const Sem& sem);
Sem sem_from_json(const std::string& text);

// Estimate JSON: {"ordering": [...], "parents": {"v": [...]},
// "diagnostics": {"g": [...], "root_stats": [...], ...}}.
std::string estimate_to_json(const GraphEstimate& estimate);

// Dataset CSV: header row of labels, one observation per line, '.' decimal
// point, values written with 17 significant digits so ingestion round-trips
// exactly. Parse failures name the offending row and column.
std::string dataset_to_csv(const Dataset& dataset);
Dataset dataset_from_csv(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace hdl
