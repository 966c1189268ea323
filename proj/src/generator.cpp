#include "multidirsbm/generator.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/discrete_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "multidirsbm/rng.hpp"

namespace mdsbm {

namespace detail {
extern const std::string_view kPresetsJson;
}

using nlohmann::json;

void Scenario::validate() const {
  const int kc = num_clusters();
  if (n < 1 || kc < 1) throw std::invalid_argument("scenario needs n >= 1 and K >= 1");
  if (params.P.size() != params.A.size() || params.P.empty())
    throw std::invalid_argument("scenario needs matching, nonempty P and A stacks");
  if (std::abs(params.theta.sum() - 1.0) > 1e-12 || (params.theta.array() < 0.0).any())
    throw std::invalid_argument("theta must lie on the simplex");
  for (int s = 0; s < num_layers(); ++s) {
    const Matrix& P = params.P[s];
    const Matrix& A = params.A[s];
    if (P.rows() != kc || P.cols() != kc || A.rows() != kc || A.cols() != kc)
      throw std::invalid_argument(fmt::format("layer {} matrices must be {}x{}", s + 1, kc, kc));
    if ((P.array() < 0.0).any() || (P.array() > 1.0).any())
      throw std::invalid_argument("connectivity probabilities must lie in [0, 1]");
    if (!(A.array() > 0.0).all()) throw std::invalid_argument("concentrations must be positive");
  }
}

std::string synthetic_node_id(int index, int num_nodes) {
  const int width = static_cast<int>(std::to_string(std::max(num_nodes, 1)).size());
  return fmt::format("n{:0{}}", index + 1, width);
}

GeneratedNetwork generate(const Scenario& sc) {
  sc.validate();
  const int n = sc.n;
  const int layers = sc.num_layers();
  Rng rng(sc.seed);

  GeneratedNetwork out;
  out.labels.resize(n);
  const std::vector<double> weights(sc.params.theta.data(), sc.params.theta.data() + sc.params.theta.size());
  boost::random::discrete_distribution<int, double> categorical(weights.begin(), weights.end());
  for (int i = 0; i < n; ++i) out.labels[i] = categorical(rng);

  RawMultiplex& raw = out.raw;
  for (int i = 0; i < n; ++i) raw.node_ids.push_back(synthetic_node_id(i, n));
  for (int s = 0; s < layers; ++s) raw.layer_names.push_back(fmt::format("layer{}", s + 1));
  for (int s = 0; s < layers; ++s) {
    Matrix y = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const int k = out.labels[i], h = out.labels[j];
        boost::random::bernoulli_distribution<double> edge(sc.params.P[s](k, h));
        if (!edge(rng)) continue;
        boost::random::gamma_distribution<double> weight(sc.params.A[s](k, h), 1.0);
        y(i, j) = weight(rng);
      }
    }
    raw.weights.push_back(std::move(y));
  }
  out.network = to_compositional(raw, ZeroMode::absent());
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string_view presets_document() { return detail::kPresetsJson; }

namespace {

Matrix matrix_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j.at(0).size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j.at(r).size()) != cols) throw std::invalid_argument("ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
  }
  return m;
}

LayerStack stack_from_json(const json& j, std::size_t count) {
  if (j.size() < count) throw std::invalid_argument("too few layer matrices");
  LayerStack out;
  for (std::size_t s = 0; s < count; ++s) out.push_back(matrix_from_json(j.at(s)));
  return out;
}

std::vector<Scenario> load_presets() {
  const json doc = json::parse(detail::kPresetsJson);
  std::vector<Scenario> out;
  for (const json& row : doc.at("scenarios")) {
    Scenario sc;
    sc.name = row.at("name").get<std::string>();
    sc.n = row.at("n").get<int>();
    const int kc = row.at("K").get<int>();
    const auto layers = row.at("S").get<std::size_t>();
    sc.description = fmt::format("n={}, K={}, S={}, {} density, {}", sc.n, kc, layers,
                                 row.at("density").get<std::string>(),
                                 row.at("overlap").get<bool>() ? "overlap" : "no overlap");
    sc.params.theta = Vector::Constant(kc, 1.0 / kc);
    sc.params.P = stack_from_json(doc.at("connectivity").at(row.at("connectivity").get<std::string>()), layers);
    sc.params.A = stack_from_json(doc.at("concentration").at(fmt::format("K{}", kc)), layers);
    sc.validate();
    out.push_back(std::move(sc));
  }
  return out;
}

}  // namespace

const std::vector<Scenario>& presets() {
  static const std::vector<Scenario> all = load_presets();
  return all;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const Scenario& sc : presets()) names.push_back(sc.name);
  return names;
}

Scenario preset(std::string_view name) {
  for (const Scenario& sc : presets())
    if (sc.name == name) return sc;
  std::string known;
  for (const std::string& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw std::out_of_range(fmt::format("unknown scenario '{}'; available presets: {}", name, known));
}

Scenario scenario_from_json(std::string_view text) {
  const json doc = json::parse(text);
  Scenario sc;
  sc.name = doc.value("name", std::string("custom"));
  sc.n = doc.at("n").get<int>();
  const int kc = doc.at("K").get<int>();
  const std::size_t layers = doc.contains("S") ? doc.at("S").get<std::size_t>() : doc.at("P").size();
  if (doc.contains("theta")) {
    const auto t = doc.at("theta").get<std::vector<double>>();
    sc.params.theta = Eigen::Map<const Vector>(t.data(), static_cast<Eigen::Index>(t.size()));
  } else {
    sc.params.theta = Vector::Constant(kc, 1.0 / kc);
  }
  if (sc.params.theta.size() != kc) throw std::invalid_argument("theta length differs from K");
  sc.params.P = stack_from_json(doc.at("P"), layers);
  sc.params.A = stack_from_json(doc.at("A"), layers);
  if (doc.contains("seed")) sc.seed = doc.at("seed").get<std::uint64_t>();
  sc.description = doc.value("description", std::string());
  sc.validate();
  return sc;
}

}  // namespace mdsbm
