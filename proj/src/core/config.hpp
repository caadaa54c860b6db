#pragma once

#include <optional>
#include <string>

#include "core/experiment.hpp"
#include "core/fit.hpp"
#include "core/simgen.hpp"

namespace kronmtl {

// Fit options as configured, before any files are read: fixed precision
// matrices are still paths and the variant has not yet forced gamma.
struct FitSettings {
  Variant variant = Variant::mvg_rank;
  Hyperparams hp;
  bool center = true;
  std::optional<std::string> fixed_row_precision_path;
  std::optional<std::string> fixed_col_precision_path;
  FitConfig fit;
};

// All three parsers accept the same JSON document, which may carry "sim",
// "fit" and "experiment" sections side by side; each parser reads its own
// section (defaults when absent) and type-checks it. Unknown keys at any
// level are configuration errors naming the key.
SimSpec parse_sim_config(const std::string& json_text);
FitSettings parse_fit_config(const std::string& json_text);
ExperimentConfig parse_experiment_config(const std::string& json_text);

// The same fit schema, but the text is the section object itself rather
// than a whole document (the in-memory API takes options this way).
FitSettings parse_fit_section(const std::string& json_text);

}  // namespace kronmtl
