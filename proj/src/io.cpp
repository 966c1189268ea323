#include "multidirsbm/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace mdsbm::io {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) throw ParseError(fmt::format("failed writing '{}'", path.string()));
}

// ------------------------------------------------------------------ CSV

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

// Splits one CSV record; fields may be double-quoted with "" escapes.
std::vector<std::string> split_csv(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false, was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = was_quoted = true;
    } else if (c == ',') {
      fields.push_back(was_quoted ? cur : trim(cur));
      cur.clear();
      was_quoted = false;
    } else {
      cur += c;
    }
  }
  if (quoted) throw ParseError(fmt::format("line {}: unterminated quote", line_no));
  fields.push_back(was_quoted ? cur : trim(cur));
  return fields;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

double parse_double(const std::string& s, std::size_t line_no, const char* what) {
  if (s.empty()) throw ParseError(fmt::format("line {}: empty {}", line_no, what));
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE)
    throw ParseError(fmt::format("line {}: cannot parse {} '{}'", line_no, what, s));
  return v;
}

bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace

RawMultiplex read_edge_list(std::istream& in) {
  struct Row {
    std::string layer, source, target;
    double weight;
  };
  std::vector<Row> rows;
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (next_line(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv(line, line_no);
    if (!header) {
      for (auto& f : fields) std::transform(f.begin(), f.end(), f.begin(), ::tolower);
      if (fields != std::vector<std::string>{"layer", "source", "target", "weight"})
        throw ParseError(fmt::format("line {}: expected header 'layer,source,target,weight'", line_no));
      header = true;
      continue;
    }
    if (fields.size() != 4)
      throw ParseError(fmt::format("line {}: expected 4 fields, found {}", line_no, fields.size()));
    Row r{fields[0], fields[1], fields[2], parse_double(fields[3], line_no, "weight")};
    if (r.layer.empty() || r.source.empty() || r.target.empty())
      throw ParseError(fmt::format("line {}: empty layer or node id", line_no));
    if (r.source == r.target)
      throw ValidationError(fmt::format("line {}: self-loop on node '{}'", line_no, r.source));
    if (!(r.weight > 0.0) || !std::isfinite(r.weight))
      throw ValidationError(fmt::format("line {}: weight must be positive and finite, got {}", line_no, fields[3]));
    auto [it, inserted] = seen.try_emplace({r.layer, r.source, r.target}, line_no);
    if (!inserted)
      throw ValidationError(fmt::format("line {}: duplicate edge ({}, {}, {}) first seen on line {}", line_no,
                                        r.layer, r.source, r.target, it->second));
    rows.push_back(std::move(r));
  }
  if (!header) throw ParseError("empty edge list: missing header");

  std::set<std::string> nodes, layers;
  for (const Row& r : rows) {
    nodes.insert(r.source);
    nodes.insert(r.target);
    layers.insert(r.layer);
  }
  RawMultiplex raw;
  raw.node_ids.assign(nodes.begin(), nodes.end());
  raw.layer_names.assign(layers.begin(), layers.end());
  std::map<std::string, int> node_index, layer_index;
  for (std::size_t i = 0; i < raw.node_ids.size(); ++i) node_index[raw.node_ids[i]] = static_cast<int>(i);
  for (std::size_t s = 0; s < raw.layer_names.size(); ++s) layer_index[raw.layer_names[s]] = static_cast<int>(s);
  const auto n = static_cast<Eigen::Index>(raw.node_ids.size());
  raw.weights.assign(raw.layer_names.size(), Matrix::Zero(n, n));
  for (const Row& r : rows) raw.weights[layer_index[r.layer]](node_index[r.source], node_index[r.target]) = r.weight;
  return raw;
}

RawMultiplex read_edge_list(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open '{}'", path.string()));
  return read_edge_list(in);
}

void write_edge_list(std::ostream& out, const RawMultiplex& raw) {
  out << "layer,source,target,weight\n";
  for (int s = 0; s < raw.num_layers(); ++s) {
    const std::string layer = raw.layer_names.empty() ? fmt::format("layer{}", s + 1) : raw.layer_names[s];
    for (int i = 0; i < raw.num_nodes(); ++i)
      for (int j = 0; j < raw.num_nodes(); ++j) {
        const double w = raw.weights[s](i, j);
        if (i == j || w <= 0.0) continue;
        out << csv_field(layer) << ',' << csv_field(raw.node_ids[i]) << ',' << csv_field(raw.node_ids[j]) << ','
            << format_double(w) << '\n';
      }
  }
}

void write_edge_list(const fs::path& path, const RawMultiplex& raw) {
  std::ostringstream ss;
  write_edge_list(ss, raw);
  write_text(path, ss.str());
}

// ------------------------------------------------------------------ JSON helpers

namespace {

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json stack_json(const LayerStack& stack) {
  json out = json::array();
  for (const Matrix& m : stack) out.push_back(matrix_json(m));
  return out;
}

Matrix matrix_from(const json& j, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
    throw ParseError(fmt::format("{}: expected {} rows", what, rows));
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j.at(r);
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw ParseError(fmt::format("{}: row {} should have {} entries", what, r + 1, cols));
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(c).get<double>();
  }
  return m;
}

LayerStack stack_from(const json& j, std::size_t layers, Eigen::Index k, const char* what) {
  if (!j.is_array() || j.size() != layers) throw ParseError(fmt::format("{}: expected {} layers", what, layers));
  LayerStack out;
  for (std::size_t s = 0; s < layers; ++s) out.push_back(matrix_from(j.at(s), k, k, what));
  return out;
}

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::string dump(const json& j) { return j.dump(1) + "\n"; }

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("{}: {}", what, e.what()));
  }
}

const char* kind_name(ModelKind kind) { return kind == ModelKind::Full ? "full" : "binary-only"; }

ModelKind kind_from(const std::string& s) {
  if (s == "full") return ModelKind::Full;
  if (s == "binary-only") return ModelKind::BinaryOnly;
  throw ParseError(fmt::format("unknown model kind '{}'", s));
}

}  // namespace

// ------------------------------------------------------------------ networks

std::string network_to_string(const CompositionalMultiplex& net) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["kind"] = "compositional_multiplex";
  doc["n"] = net.num_nodes();
  doc["S"] = net.num_layers();
  doc["node_ids"] = net.node_ids;
  doc["layer_names"] = net.layer_names;
  json layers = json::array();
  for (int s = 0; s < net.num_layers(); ++s) {
    json layer;
    layer["name"] = net.layer_names[s];
    layer["E"] = matrix_json(net.edges[s].cast<double>());
    layer["X"] = matrix_json(net.shares[s]);
    layers.push_back(std::move(layer));
  }
  doc["layers"] = std::move(layers);
  return dump(doc);
}

void write_network(const fs::path& path, const CompositionalMultiplex& net) { write_text(path, network_to_string(net)); }

CompositionalMultiplex network_from_string(const std::string& text) {
  const json doc = parse_json(text, "network document");
  try {
    if (doc.at("schema_version").get<int>() != kSchemaVersion) throw ParseError("unsupported network schema_version");
    CompositionalMultiplex net;
    net.node_ids = doc.at("node_ids").get<std::vector<std::string>>();
    net.layer_names = doc.at("layer_names").get<std::vector<std::string>>();
    const auto n = static_cast<Eigen::Index>(net.node_ids.size());
    if (doc.at("n").get<Eigen::Index>() != n) throw ParseError("n differs from node_ids length");
    const json& layers = doc.at("layers");
    if (layers.size() != net.layer_names.size() || doc.at("S").get<std::size_t>() != layers.size())
      throw ParseError("layer count mismatch");
    for (const json& layer : layers) {
      const Matrix e = matrix_from(layer.at("E"), n, n, "E");
      if (!((e.array() == 0.0) || (e.array() == 1.0)).all()) throw ValidationError("E must be binary");
      net.edges.push_back(e.cast<std::uint8_t>());
      net.shares.push_back(matrix_from(layer.at("X"), n, n, "X"));
    }
    if (const auto v = validate(net); !v.empty()) throw ValidationError("invalid network: " + v.front().message);
    return net;
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("network document: {}", e.what()));
  }
}

CompositionalMultiplex read_network(const fs::path& path) { return network_from_string(read_text(path)); }

// ------------------------------------------------------------------ params

namespace {

json params_json(const ModelParams& p) {
  json doc;
  doc["K"] = p.num_clusters();
  doc["S"] = p.num_layers();
  doc["theta"] = vector_json(p.theta);
  doc["P"] = stack_json(p.P);
  doc["A"] = stack_json(p.A);
  return doc;
}

ModelParams params_from(const json& doc) {
  ModelParams p;
  p.theta = vector_from(doc.at("theta"));
  const auto k = p.theta.size();
  if (doc.contains("K") && doc.at("K").get<Eigen::Index>() != k) throw ParseError("theta length differs from K");
  const std::size_t layers = doc.contains("S") ? doc.at("S").get<std::size_t>() : doc.at("P").size();
  p.P = stack_from(doc.at("P"), layers, k, "P");
  p.A = stack_from(doc.at("A"), layers, k, "A");
  return p;
}

}  // namespace

std::string params_to_string(const ModelParams& params) {
  json doc = params_json(params);
  doc["schema_version"] = kSchemaVersion;
  return dump(doc);
}

ModelParams params_from_string(const std::string& text) {
  try {
    return params_from(parse_json(text, "parameter document"));
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("parameter document: {}", e.what()));
  }
}

ModelParams read_params(const fs::path& path) { return params_from_string(read_text(path)); }

// ------------------------------------------------------------------ fits

std::string fit_to_string(const FitResult& fit, const CompositionalMultiplex& net) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["model"] = kind_name(fit.kind);
  doc["n"] = net.num_nodes();
  doc["S"] = net.num_layers();
  doc["K"] = fit.params.num_clusters();
  doc["node_ids"] = net.node_ids;
  doc["layer_names"] = net.layer_names;
  doc["seed"] = fit.seed;
  doc["theta"] = vector_json(fit.params.theta);
  doc["P"] = stack_json(fit.params.P);
  doc["A"] = stack_json(fit.params.A);
  json labels = json::object();
  for (int i = 0; i < net.num_nodes(); ++i) labels[net.node_ids[i]] = fit.partition.labels[i] + 1;
  doc["labels"] = std::move(labels);
  if (fit.partition.responsibilities) doc["responsibilities"] = matrix_json(*fit.partition.responsibilities);
  doc["ll_trace"] = fit.ll_trace;
  doc["hybrid_ll"] = fit.hybrid_ll();
  doc["bic"] = bic(fit, net);
  doc["icl"] = icl(fit, net);
  doc["converged"] = fit.converged;
  doc["iterations"] = fit.iterations;
  doc["best_restart"] = fit.best_restart_index;
  return dump(doc);
}

void write_fit(const fs::path& path, const FitResult& fit, const CompositionalMultiplex& net) {
  write_text(path, fit_to_string(fit, net));
}

FitDocument fit_from_string(const std::string& text) {
  const json doc = parse_json(text, "fit document");
  try {
    if (doc.at("schema_version").get<int>() != kSchemaVersion) throw ParseError("unsupported fit schema_version");
    FitDocument out;
    out.node_ids = doc.at("node_ids").get<std::vector<std::string>>();
    out.layer_names = doc.at("layer_names").get<std::vector<std::string>>();
    const int k = doc.at("K").get<int>();
    const auto n = static_cast<Eigen::Index>(out.node_ids.size());
    FitResult& r = out.result;
    r.kind = kind_from(doc.value("model", std::string("full")));
    r.seed = doc.at("seed").get<std::uint64_t>();
    r.params = params_from(doc);
    if (r.params.num_clusters() != k) throw ParseError("theta length differs from K");
    Labels labels(n);
    const json& lab = doc.at("labels");
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = lab.at(out.node_ids[i]).get<int>();
      if (c < 1 || c > k) throw ParseError(fmt::format("label of '{}' out of range", out.node_ids[i]));
      labels[i] = c - 1;
    }
    std::optional<Matrix> zhat;
    if (doc.contains("responsibilities")) zhat = matrix_from(doc.at("responsibilities"), n, k, "responsibilities");
    r.partition = Partition(std::move(labels), k, std::move(zhat));
    r.ll_trace = doc.at("ll_trace").get<std::vector<double>>();
    if (r.ll_trace.empty()) throw ParseError("ll_trace is empty");
    r.converged = doc.at("converged").get<bool>();
    r.iterations = doc.at("iterations").get<int>();
    r.best_restart_index = doc.value("best_restart", 0);
    out.bic = doc.at("bic").get<double>();
    out.icl = doc.at("icl").get<double>();
    return out;
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("fit document: {}", e.what()));
  }
}

FitDocument read_fit(const fs::path& path) { return fit_from_string(read_text(path)); }

// ------------------------------------------------------------------ labels

void write_labels(const fs::path& path, const std::vector<std::string>& node_ids, const Labels& labels) {
  std::ostringstream ss;
  ss << "node,cluster\n";
  for (std::size_t i = 0; i < node_ids.size(); ++i) ss << csv_field(node_ids[i]) << ',' << labels[i] + 1 << '\n';
  write_text(path, ss.str());
}

Labels read_labels(const fs::path& path, const std::vector<std::string>& node_ids) {
  std::istringstream in(read_text(path));
  std::map<std::string, int> by_id;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (next_line(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line, line_no);
    if (!header) {
      header = true;
      if (fields.size() == 2 && fields[0] == "node") continue;
    }
    if (fields.size() != 2) throw ParseError(fmt::format("line {}: expected node,cluster", line_no));
    const double c = parse_double(fields[1], line_no, "cluster");
    if (c < 1 || c != std::floor(c)) throw ParseError(fmt::format("line {}: cluster must be a positive integer", line_no));
    by_id[fields[0]] = static_cast<int>(c) - 1;
  }
  Labels labels(static_cast<Eigen::Index>(node_ids.size()));
  for (std::size_t i = 0; i < node_ids.size(); ++i) {
    const auto it = by_id.find(node_ids[i]);
    if (it == by_id.end()) throw ParseError(fmt::format("labels file has no entry for node '{}'", node_ids[i]));
    labels[static_cast<Eigen::Index>(i)] = it->second;
  }
  return labels;
}

// ------------------------------------------------------------------ reports

std::string selection_to_string(const SelectionReport& report, const CompositionalMultiplex& net,
                                std::string_view criterion) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["model"] = kind_name(report.kind);
  doc["n"] = net.num_nodes();
  doc["S"] = net.num_layers();
  json rows = json::array();
  for (const SelectionRow& row : report.rows) {
    json r;
    r["K"] = row.K;
    r["ok"] = row.ok();
    if (row.ok()) {
      r["hybrid_ll"] = row.hybrid_ll;
      r["complete_hybrid_ll"] = row.complete_hybrid_ll;
      r["bic"] = row.bic;
      r["icl"] = row.icl;
      r["seed"] = row.fit->seed;
      r["converged"] = row.fit->converged;
      r["iterations"] = row.fit->iterations;
      r["best_restart"] = row.fit->best_restart_index;
      r["cluster_sizes"] = [&] {
        const Eigen::VectorXi sizes = cluster_sizes(row.fit->partition.labels, row.K);
        return std::vector<int>(sizes.data(), sizes.data() + sizes.size());
      }();
    } else {
      r["error"] = row.error;
    }
    rows.push_back(std::move(r));
  }
  doc["rows"] = std::move(rows);
  doc["chosen_K_bic"] = report.chosen_K_bic;
  doc["chosen_K_icl"] = report.chosen_K_icl;
  doc["criterion"] = criterion;
  doc["chosen_K"] = criterion == "icl" ? report.chosen_K_icl : report.chosen_K_bic;
  return dump(doc);
}

void write_matrix_csv(const fs::path& path, const Matrix& m, const std::vector<std::string>& header,
                      const std::vector<std::string>& row_names) {
  std::ostringstream ss;
  if (!header.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) ss << (c ? "," : "") << csv_field(header[c]);
    ss << '\n';
  }
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    bool first = true;
    if (!row_names.empty()) {
      ss << csv_field(row_names.at(static_cast<std::size_t>(r)));
      first = false;
    }
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      ss << (first ? "" : ",") << format_double(m(r, c));
      first = false;
    }
    ss << '\n';
  }
  write_text(path, ss.str());
}

void write_chord_csv(const fs::path& path, const std::vector<ChordRow>& rows) {
  std::ostringstream ss;
  ss << "layer,sender_cluster,receiver_cluster,share\n";
  for (const ChordRow& r : rows)
    ss << csv_field(r.layer) << ',' << r.sender << ',' << r.receiver << ',' << format_double(r.share) << '\n';
  write_text(path, ss.str());
}

}  // namespace mdsbm::io
