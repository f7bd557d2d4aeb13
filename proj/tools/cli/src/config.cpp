#include "rpkf/cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <utility>

#include <yaml-cpp/yaml.h>

namespace rpkf::cli {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

void check_keys(const YAML::Node& node, const std::string& path,
                std::initializer_list<std::string_view> allowed) {
  if (!node.IsMap()) fail(path.empty() ? "<document>" : path, "expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      fail(join(path, key), "unknown field");
    }
  }
}

const YAML::Node require(const YAML::Node& node, const std::string& key,
                         const std::string& path) {
  const YAML::Node child = node[key];
  if (!child) fail(join(path, key), "required field is missing");
  return child;
}

double as_double(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) fail(path, "expected a number");
  try {
    return node.as<double>();
  } catch (const YAML::Exception&) {
    fail(path, "expected a number, got '" + node.Scalar() + "'");
  }
}

std::uint64_t as_count(const YAML::Node& node, const std::string& path, std::uint64_t min) {
  if (!node.IsScalar()) fail(path, "expected a non-negative integer");
  std::uint64_t v = 0;
  try {
    const auto text = node.Scalar();
    if (!text.empty() && text.front() == '-') throw YAML::Exception(YAML::Mark(), "negative");
    v = node.as<std::uint64_t>();
  } catch (const YAML::Exception&) {
    fail(path, "expected a non-negative integer, got '" + node.Scalar() + "'");
  }
  if (v < min) fail(path, "must be at least " + std::to_string(min));
  return v;
}

double as_probability(const YAML::Node& node, const std::string& path) {
  const double p = as_double(node, path);
  if (!(p >= 0.0 && p <= 1.0)) {
    std::ostringstream os;
    os << "probability must lie in [0, 1], got " << p;
    fail(path, os.str());
  }
  return p;
}

Vector as_vector(const YAML::Node& node, const std::string& path) {
  if (!node.IsSequence() || node.size() == 0) fail(path, "expected a non-empty list of numbers");
  Vector v(static_cast<Eigen::Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) v(static_cast<Eigen::Index>(i)) = as_double(node[i], index(path, i));
  return v;
}

/// Nested row-major list, `{rotation: {period: T}}`, or a scalar s meaning
/// s·I when the matrix is square with known size.
Matrix as_matrix(const YAML::Node& node, const std::string& path,
                 std::optional<Eigen::Index> rows = std::nullopt,
                 std::optional<Eigen::Index> cols = std::nullopt) {
  Matrix m;
  if (node.IsScalar()) {
    if (!rows || !cols || *rows != *cols) {
      fail(path, "a scalar is only accepted for square matrices of known size");
    }
    m = as_double(node, path) * Matrix::Identity(*rows, *cols);
  } else if (node.IsMap()) {
    check_keys(node, path, {"rotation"});
    const std::string rpath = join(path, "rotation");
    const YAML::Node rot = require(node, "rotation", path);
    check_keys(rot, rpath, {"period"});
    const double period = as_double(require(rot, "period", rpath), join(rpath, "period"));
    if (period == 0.0) fail(join(rpath, "period"), "must be non-zero");
    m = rotation_matrix(period);
  } else if (node.IsSequence()) {
    if (node.size() == 0) fail(path, "matrix must have at least one row");
    const std::size_t n_rows = node.size();
    std::size_t n_cols = 0;
    for (std::size_t i = 0; i < n_rows; ++i) {
      const YAML::Node row = node[i];
      if (!row.IsSequence() || row.size() == 0) {
        fail(index(path, i), "expected a non-empty list (matrices are lists of rows)");
      }
      if (i == 0) n_cols = row.size();
      if (row.size() != n_cols) {
        fail(index(path, i), "row has " + std::to_string(row.size()) + " entries, expected " +
                                 std::to_string(n_cols));
      }
    }
    m.resize(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_cols));
    for (std::size_t i = 0; i < n_rows; ++i)
      for (std::size_t j = 0; j < n_cols; ++j)
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            as_double(node[i][j], index(index(path, i), j));
  } else {
    fail(path, "expected a matrix");
  }
  if ((rows && m.rows() != *rows) || (cols && m.cols() != *cols)) {
    std::ostringstream os;
    os << "expected a " << (rows ? std::to_string(*rows) : std::string("?")) << "x"
       << (cols ? std::to_string(*cols) : std::string("?")) << " matrix, got " << m.rows()
       << "x" << m.cols();
    fail(path, os.str());
  }
  return m;
}

Matrix as_covariance(const YAML::Node& node, const std::string& path, Eigen::Index n) {
  Matrix m = as_matrix(node, path, n, n);
  if (!linalg::is_psd(m)) fail(path, "must be symmetric positive semidefinite");
  return m;
}

MatrixDist as_dist(const YAML::Node& node, const std::string& path, Eigen::Index rows,
                   Eigen::Index cols) {
  if (!node.IsSequence() || node.size() == 0) {
    fail(path, "expected a non-empty list of {matrix, p} entries");
  }
  std::vector<MatrixDist::Sample> samples;
  for (std::size_t i = 0; i < node.size(); ++i) {
    const std::string ipath = index(path, i);
    check_keys(node[i], ipath, {"matrix", "p"});
    samples.push_back({as_matrix(require(node[i], "matrix", ipath), join(ipath, "matrix"), rows, cols),
                       as_probability(require(node[i], "p", ipath), join(ipath, "p"))});
  }
  try {
    return MatrixDist(std::move(samples));
  } catch (const InvalidInput& e) {
    fail(path, e.what());
  }
}

nlohmann::json to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Sequence: {
      auto arr = nlohmann::json::array();
      for (const auto& child : node) arr.push_back(to_json(child));
      return arr;
    }
    case YAML::NodeType::Map: {
      auto obj = nlohmann::json::object();
      for (const auto& kv : node) obj[kv.first.as<std::string>()] = to_json(kv.second);
      return obj;
    }
    case YAML::NodeType::Scalar: {
      if (node.Tag() == "!") return node.Scalar();  // quoted
      std::int64_t i = 0;
      if (YAML::convert<std::int64_t>::decode(node, i)) return i;
      double d = 0.0;
      if (YAML::convert<double>::decode(node, d)) return d;
      bool b = false;
      if (YAML::convert<bool>::decode(node, b)) return b;
      return node.Scalar();
    }
    default:
      return nullptr;
  }
}

struct Dims {
  Eigen::Index state = 0;
};

NahiConfig parse_nahi(const YAML::Node& node, const std::string& path, Dims dims) {
  check_keys(node, path,
             {"type", "transition", "h", "p", "process_noise", "measurement_noise"});
  const Eigen::Index r = dims.state;
  NahiConfig cfg;
  cfg.model.transition = as_matrix(require(node, "transition", path), join(path, "transition"), r, r);
  cfg.model.h = as_matrix(require(node, "h", path), join(path, "h"), std::nullopt, r);
  const Eigen::Index n = cfg.model.h.rows();

  const YAML::Node p = require(node, "p", path);
  if (p.IsSequence()) {
    if (p.size() == 0) fail(join(path, "p"), "expected at least one probability");
    for (std::size_t i = 0; i < p.size(); ++i)
      cfg.p.push_back(as_probability(p[i], index(join(path, "p"), i)));
  } else {
    cfg.p.push_back(as_probability(p, join(path, "p")));
  }
  cfg.model.p = [table = cfg.p](std::size_t k) {
    const std::size_t i = std::clamp<std::size_t>(k, 1, table.size()) - 1;
    return table[i];
  };
  cfg.model.process_noise =
      as_covariance(require(node, "process_noise", path), join(path, "process_noise"), r);
  cfg.model.measurement_noise = as_covariance(require(node, "measurement_noise", path),
                                              join(path, "measurement_noise"), n);
  return cfg;
}

PartitionedObsModel parse_partitioned(const YAML::Node& node, const std::string& path,
                                      Dims dims) {
  check_keys(node, path,
             {"type", "transition", "blocks", "process_noise", "measurement_noise"});
  const Eigen::Index r = dims.state;
  PartitionedObsModel m;
  m.transition = as_matrix(require(node, "transition", path), join(path, "transition"), r, r);
  const YAML::Node blocks = require(node, "blocks", path);
  const std::string bpath = join(path, "blocks");
  if (!blocks.IsSequence() || blocks.size() == 0) fail(bpath, "expected a non-empty list");
  if (blocks.size() > kMaxPartitionBlocks) {
    fail(bpath, "at most " + std::to_string(kMaxPartitionBlocks) + " blocks are supported");
  }
  Eigen::Index n = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const std::string ipath = index(bpath, i);
    check_keys(blocks[i], ipath, {"h", "p"});
    PartitionedObsModel::Block blk;
    blk.h = as_matrix(require(blocks[i], "h", ipath), join(ipath, "h"), std::nullopt, r);
    blk.p = as_probability(require(blocks[i], "p", ipath), join(ipath, "p"));
    n += blk.h.rows();
    m.blocks.push_back(std::move(blk));
  }
  m.process_noise =
      as_covariance(require(node, "process_noise", path), join(path, "process_noise"), r);
  m.measurement_noise = as_covariance(require(node, "measurement_noise", path),
                                      join(path, "measurement_noise"), n);
  return m;
}

MultiModelDynamics parse_multimodel(const YAML::Node& node, const std::string& path, Dims dims) {
  check_keys(node, path,
             {"type", "transitions", "h", "process_noise", "measurement_noise"});
  const Eigen::Index r = dims.state;
  MultiModelDynamics m{
      as_dist(require(node, "transitions", path), join(path, "transitions"), r, r),
      as_matrix(require(node, "h", path), join(path, "h"), std::nullopt, r),
      Matrix(),
      Matrix(),
  };
  m.process_noise =
      as_covariance(require(node, "process_noise", path), join(path, "process_noise"), r);
  m.measurement_noise = as_covariance(require(node, "measurement_noise", path),
                                      join(path, "measurement_noise"), m.h.rows());
  return m;
}

UncertainObsModel parse_general(const YAML::Node& node, const std::string& path, Dims dims) {
  check_keys(node, path,
             {"type", "transition", "transitions", "measurements", "process_noise",
              "measurement_noise"});
  const Eigen::Index r = dims.state;
  if (node["transition"] && node["transitions"]) {
    fail(join(path, "transitions"), "give either 'transition' or 'transitions', not both");
  }
  RandomMatrixSpec transition;
  if (node["transitions"]) {
    transition = moments_from_dist(
        as_dist(node["transitions"], join(path, "transitions"), r, r));
  } else {
    transition = RandomMatrixSpec::deterministic(
        as_matrix(require(node, "transition", path), join(path, "transition"), r, r));
  }

  const YAML::Node meas = require(node, "measurements", path);
  const std::string mpath = join(path, "measurements");
  if (!meas.IsSequence() || meas.size() == 0) {
    fail(mpath, "expected a non-empty list of {matrix, p, noise} entries");
  }
  std::vector<MatrixDist::Sample> samples;
  std::vector<Matrix> noises;
  std::optional<Eigen::Index> n;
  for (std::size_t i = 0; i < meas.size(); ++i) {
    const std::string ipath = index(mpath, i);
    check_keys(meas[i], ipath, {"matrix", "p", "noise"});
    Matrix h = as_matrix(require(meas[i], "matrix", ipath), join(ipath, "matrix"), n, r);
    n = h.rows();
    const double p = as_probability(require(meas[i], "p", ipath), join(ipath, "p"));
    if (meas[i]["noise"]) {
      if (i > 0 && noises.size() != i) fail(join(ipath, "noise"), "give a noise for every measurement model or none");
      noises.push_back(as_covariance(meas[i]["noise"], join(ipath, "noise"), *n));
    } else if (!noises.empty()) {
      fail(join(ipath, "noise"), "give a noise for every measurement model or none");
    }
    samples.push_back({std::move(h), p});
  }

  UncertainObsModel m{MatrixDist(std::vector<MatrixDist::Sample>{{Matrix::Zero(*n, r), 1.0}}),
                      std::move(noises), Matrix(), std::move(transition), Matrix()};
  try {
    m.measurement_dist = MatrixDist(std::move(samples));
  } catch (const InvalidInput& e) {
    fail(mpath, e.what());
  }
  if (node["measurement_noise"]) {
    if (!m.per_model_noise.empty()) {
      fail(join(path, "measurement_noise"), "not allowed together with per-model noises");
    }
    m.measurement_noise =
        as_covariance(node["measurement_noise"], join(path, "measurement_noise"), *n);
  } else if (m.per_model_noise.empty()) {
    fail(join(path, "measurement_noise"), "required field is missing");
  }
  m.process_noise =
      as_covariance(require(node, "process_noise", path), join(path, "process_noise"), r);
  return m;
}

ModelConfig parse_model(const YAML::Node& node, const std::string& path, Dims dims) {
  if (!node.IsMap()) fail(path, "expected a mapping");
  const YAML::Node type = require(node, "type", path);
  if (!type.IsScalar()) fail(join(path, "type"), "expected a string");
  const std::string t = type.Scalar();
  if (t == "nahi") return parse_nahi(node, path, dims);
  if (t == "partitioned") return parse_partitioned(node, path, dims);
  if (t == "multimodel") return parse_multimodel(node, path, dims);
  if (t == "general") return parse_general(node, path, dims);
  fail(join(path, "type"), "must be one of general, nahi, partitioned, multimodel; got '" + t + "'");
}

}  // namespace

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::kFilter: return "filter";
    case Mode::kSimulate: return "simulate";
    case Mode::kMonteCarlo: return "montecarlo";
    case Mode::kSweep: return "sweep";
  }
  return "unknown";
}

std::optional<Mode> parse_mode(std::string_view text) {
  for (Mode m : {Mode::kFilter, Mode::kSimulate, Mode::kMonteCarlo, Mode::kSweep}) {
    if (text == to_string(m)) return m;
  }
  return std::nullopt;
}

Eigen::Index ExperimentConfig::measurement_dim() const {
  return std::visit(
      [](const auto& m) -> Eigen::Index {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, UncertainObsModel>) {
          return m.measurement_dist.rows();
        } else if constexpr (std::is_same_v<T, NahiConfig>) {
          return m.model.h.rows();
        } else if constexpr (std::is_same_v<T, PartitionedObsModel>) {
          Eigen::Index n = 0;
          for (const auto& b : m.blocks) n += b.h.rows();
          return n;
        } else {
          return m.h.rows();
        }
      },
      model);
}

std::string_view ExperimentConfig::model_type() const {
  switch (model.index()) {
    case 0: return "nahi";
    case 1: return "general";
    case 2: return "partitioned";
    default: return "multimodel";
  }
}

ModelProvider ExperimentConfig::provider() const {
  return std::visit(
      [](const auto& m) -> ModelProvider {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, UncertainObsModel>) {
          return constant_provider(build_uncertain_obs(m, 1));
        } else if constexpr (std::is_same_v<T, NahiConfig>) {
          if (m.p.size() == 1) return constant_provider(build_nahi(m.model, 1));
          return make_provider(m.model, &build_nahi);
        } else if constexpr (std::is_same_v<T, PartitionedObsModel>) {
          return constant_provider(build_partitioned(m, 1));
        } else {
          return constant_provider(build_multimodel(m, 1));
        }
      },
      model);
}

std::function<ModelProvider(double)> ExperimentConfig::gamma_family() const {
  if (const auto* nahi = std::get_if<NahiConfig>(&model)) {
    NahiModel base = nahi->model;
    return [base](double gamma) {
      NahiModel m = base;
      m.p = constant_probability(gamma);
      return constant_provider(build_nahi(m, 1));
    };
  }
  if (const auto* part = std::get_if<PartitionedObsModel>(&model)) {
    PartitionedObsModel base = *part;
    return [base](double gamma) {
      PartitionedObsModel m = base;
      for (auto& b : m.blocks) b.p = gamma;
      return constant_provider(build_partitioned(m, 1));
    };
  }
  throw ConfigError("model.type: sweep needs an observation probability (nahi or partitioned), got " +
                    std::string(model_type()));
}

ExperimentConfig parse_config(const std::string& text) {
  YAML::Node doc;
  try {
    doc = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("<document>: ") + e.what());
  }
  check_keys(doc, "",
             {"mode", "horizon", "runs", "seed", "threads", "initial", "model", "filter", "sweep",
              "input", "output"});

  ExperimentConfig cfg;
  cfg.echo = to_json(doc);

  if (doc["mode"]) {
    const auto mode = parse_mode(doc["mode"].Scalar());
    if (!mode) fail("mode", "must be one of filter, simulate, montecarlo, sweep");
    cfg.mode = mode;
  }
  cfg.horizon = as_count(require(doc, "horizon", ""), "horizon", 1);
  if (doc["runs"]) cfg.runs = as_count(doc["runs"], "runs", 1);
  if (doc["seed"]) cfg.seed = as_count(doc["seed"], "seed", 0);
  if (doc["threads"]) cfg.threads = static_cast<unsigned>(as_count(doc["threads"], "threads", 1));

  const YAML::Node initial = require(doc, "initial", "");
  check_keys(initial, "initial", {"mean", "cov"});
  cfg.initial.mean = as_vector(require(initial, "mean", "initial"), "initial.mean");
  const Eigen::Index r = cfg.initial.mean.size();
  cfg.initial.cov = as_covariance(require(initial, "cov", "initial"), "initial.cov", r);

  cfg.model = parse_model(require(doc, "model", ""), "model", Dims{r});

  if (doc["filter"]) {
    check_keys(doc["filter"], "filter", {"covariance_update"});
    if (const YAML::Node cu = doc["filter"]["covariance_update"]) {
      const std::string v = cu.Scalar();
      if (v == "standard") {
        cfg.options.covariance_update = CovarianceUpdate::kStandard;
      } else if (v == "joseph") {
        cfg.options.covariance_update = CovarianceUpdate::kJoseph;
      } else {
        fail("filter.covariance_update", "must be 'standard' or 'joseph'");
      }
    }
  }

  if (doc["sweep"]) {
    check_keys(doc["sweep"], "sweep", {"gammas"});
    const Vector g = as_vector(require(doc["sweep"], "gammas", "sweep"), "sweep.gammas");
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      const std::string path = index("sweep.gammas", static_cast<std::size_t>(i));
      if (!(g(i) > 0.0 && g(i) <= 1.0)) fail(path, "gamma must lie in (0, 1]");
      if (i > 0 && g(i) < g(i - 1)) fail(path, "gammas must be sorted ascending");
      cfg.gammas.push_back(g(i));
    }
  }

  if (doc["input"]) {
    check_keys(doc["input"], "input", {"measurements"});
    if (doc["input"]["measurements"]) {
      cfg.measurements_path = doc["input"]["measurements"].as<std::string>();
    }
  }
  if (doc["output"]) {
    check_keys(doc["output"], "output", {"dir"});
    if (doc["output"]["dir"]) cfg.output_dir = doc["output"]["dir"].as<std::string>();
  }

  // Build once so structural inconsistencies surface at parse time.
  try {
    (void)cfg.provider()(1);
  } catch (const InvalidInput& e) {
    fail("model", e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace rpkf::cli
