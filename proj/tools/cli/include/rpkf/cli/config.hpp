#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rpkf/adapters.hpp"
#include "rpkf/filter_core.hpp"

namespace rpkf::cli {

enum class Mode { kFilter, kSimulate, kMonteCarlo, kSweep };

std::string_view to_string(Mode mode);
std::optional<Mode> parse_mode(std::string_view text);

/// Rejected configuration document. The message starts with the dotted path
/// of the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Nahi model plus the per-step probability table it was parsed from.
struct NahiConfig {
  NahiModel model;
  std::vector<double> p;  // p(k) = p[min(k, size) - 1]
};

using ModelConfig =
    std::variant<NahiConfig, UncertainObsModel, PartitionedObsModel, MultiModelDynamics>;

struct ExperimentConfig {
  std::optional<Mode> mode;
  ModelConfig model;
  InitialCondition initial;
  std::size_t horizon = 0;
  std::size_t runs = 1;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::vector<double> gammas;
  FilterOptions options;
  std::filesystem::path output_dir = ".";
  std::filesystem::path measurements_path;
  nlohmann::json echo;  // the document as parsed, for provenance

  [[nodiscard]] Eigen::Index state_dim() const { return initial.mean.size(); }
  [[nodiscard]] Eigen::Index measurement_dim() const;
  [[nodiscard]] std::string_view model_type() const;

  [[nodiscard]] ModelProvider provider() const;

  /// The same model with its observation probability replaced by γ
  /// (every block for partitioned models). Throws ConfigError for models
  /// without an observation probability.
  [[nodiscard]] std::function<ModelProvider(double)> gamma_family() const;
};

/// Parses and validates a YAML experiment document. Unknown keys are errors.
ExperimentConfig parse_config(const std::string& text);

ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace rpkf::cli
