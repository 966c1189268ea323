#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "multidirsbm/cem.hpp"
#include "multidirsbm/evaluation.hpp"
#include "multidirsbm/interpretation.hpp"
#include "multidirsbm/network.hpp"
#include "multidirsbm/selection.hpp"

namespace mdsbm::io {

inline constexpr int kSchemaVersion = 1;

/// Malformed input (bad columns, unparsable numbers, unreadable file).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- edge lists: header `layer,source,target,weight`

/// Node ids and layer names are indexed in lexicographic order. Duplicate
/// (layer, source, target) rows, self-loops and nonpositive weights raise
/// ValidationError naming the line; malformed rows raise ParseError.
RawMultiplex read_edge_list(std::istream& in);
RawMultiplex read_edge_list(const std::filesystem::path& path);
/// Writes every positive off-diagonal weight, layers then sources then targets.
void write_edge_list(std::ostream& out, const RawMultiplex& raw);
void write_edge_list(const std::filesystem::path& path, const RawMultiplex& raw);

// ---- compositional network documents (JSON with per-layer E and X blocks)

void write_network(const std::filesystem::path& path, const CompositionalMultiplex& net);
std::string network_to_string(const CompositionalMultiplex& net);
/// Validates invariants after reading; throws ValidationError on violation.
CompositionalMultiplex read_network(const std::filesystem::path& path);
CompositionalMultiplex network_from_string(const std::string& text);

// ---- fit results

struct FitDocument {
  FitResult result;
  std::vector<std::string> node_ids;
  std::vector<std::string> layer_names;
  double bic = 0.0;
  double icl = 0.0;
};

std::string fit_to_string(const FitResult& fit, const CompositionalMultiplex& net);
void write_fit(const std::filesystem::path& path, const FitResult& fit, const CompositionalMultiplex& net);
FitDocument fit_from_string(const std::string& text);
FitDocument read_fit(const std::filesystem::path& path);

// ---- parameters ({K, S, theta, P, A}); also accepted as scenario documents

std::string params_to_string(const ModelParams& params);
ModelParams params_from_string(const std::string& text);
ModelParams read_params(const std::filesystem::path& path);

// ---- labels CSV `node,cluster` with 1-based clusters

void write_labels(const std::filesystem::path& path, const std::vector<std::string>& node_ids, const Labels& labels);
/// Returns 0-based labels ordered like `node_ids`; every id must be present.
Labels read_labels(const std::filesystem::path& path, const std::vector<std::string>& node_ids);

// ---- selection report, matrices, chord tables

/// `criterion` ("bic" or "icl") decides the top-level chosen_K.
std::string selection_to_string(const SelectionReport& report, const CompositionalMultiplex& net,
                                std::string_view criterion = "bic");
/// `header` is the full first line, including the corner cell when row names are given.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m, const std::vector<std::string>& header = {},
                      const std::vector<std::string>& row_names = {});
void write_chord_csv(const std::filesystem::path& path, const std::vector<ChordRow>& rows);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Decimal text with 17 significant digits.
std::string format_double(double v);

}  // namespace mdsbm::io
