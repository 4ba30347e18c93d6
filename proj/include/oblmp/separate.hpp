#pragma once

// File-level separation: signal, dictionary and background spanning set in,
// structured result out.

#include <filesystem>
#include <optional>

#include "json.hpp"
#include "oblmp/pursuit.hpp"

namespace oblmp {

struct SeparateInputs {
  Eigen::VectorXd signal;
  Eigen::MatrixXd atoms;       ///< one atom per column
  Eigen::MatrixXd background;  ///< spanning set of the background, may have no columns
  std::vector<std::string> atom_names;
};

struct SeparateOptions {
  PursuitConfig pursuit{};
  double bg_tol = kDefaultRedundancyTol;
  std::optional<Index> m_cap;
};

/// Throws ParseError for malformed files or a signal file with more than one column.
SeparateInputs load_separate_inputs(const std::filesystem::path& signal, const std::filesystem::path& dictionary,
                                    const std::filesystem::path& background);

/// Runs OBLMP and returns the result document. Indices in the document are
/// 1-based dictionary column numbers. Throws DimensionMismatch or EmptyDictionary.
nlohmann::ordered_json separate(const SeparateInputs& in, const SeparateOptions& opts);

}  // namespace oblmp
